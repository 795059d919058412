"""Probe-camera motion model: instantaneous roll/pitch/yaw plus axial travel.

Conventions: world z is up; camera looks along its local +x axis ("forward"),
local +y is left and +z is up. Quaternions are scalar-last (qx qy qz qw).
The camera does not collide with the scene.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .deposition import quat_to_matrix

DEFAULT_WIDTH = 1024
DEFAULT_HEIGHT = 1024
DEFAULT_VFOV_DEG = 75.0


class CameraError(ValueError):
    pass


def quat_multiply(a, b):
    """Hamilton product a*b, scalar-last arrays."""
    ax, ay, az, aw = a
    bx, by, bz, bw = b
    return np.array([
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
        aw * bw - ax * bx - ay * by - az * bz,
    ])


def quat_from_axis_angle(axis, angle):
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n == 0 or angle == 0:
        return np.array([0.0, 0.0, 0.0, 1.0])
    s = np.sin(angle / 2.0) / n
    return np.array([axis[0] * s, axis[1] * s, axis[2] * s,
                     np.cos(angle / 2.0)])


def slerp(qa, qb, u):
    """Spherical interpolation between unit quaternions (shortest arc)."""
    qa = np.asarray(qa, dtype=float)
    qb = np.asarray(qb, dtype=float)
    dot = float(qa @ qb)
    if dot < 0.0:
        qb = -qb
        dot = -dot
    if dot > 0.9995:
        q = qa + u * (qb - qa)
        return q / np.linalg.norm(q)
    theta = np.arccos(np.clip(dot, -1.0, 1.0))
    s = np.sin(theta)
    return (np.sin((1.0 - u) * theta) * qa + np.sin(u * theta) * qb) / s


@dataclass(frozen=True)
class CameraState:
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    orientation: np.ndarray = field(
        default_factory=lambda: np.array([0.0, 0.0, 0.0, 1.0]))
    axial_speed: float = 0.0
    width: int = DEFAULT_WIDTH
    height: int = DEFAULT_HEIGHT
    vfov_deg: float = DEFAULT_VFOV_DEG

    def __post_init__(self):
        object.__setattr__(self, "position",
                           np.asarray(self.position, dtype=float))
        q = np.asarray(self.orientation, dtype=float)
        n = np.linalg.norm(q)
        if not np.isfinite(n) or abs(n - 1.0) > 1e-6:
            raise CameraError("orientation must be a unit quaternion")
        object.__setattr__(self, "orientation", q / n)
        if not 10.0 < self.vfov_deg < 170.0:
            raise CameraError("vfov_deg out of range (10, 170)")

    @property
    def rotation(self):
        return quat_to_matrix(self.orientation)

    @property
    def forward(self):
        return self.rotation[:, 0]

    @property
    def left(self):
        return self.rotation[:, 1]

    @property
    def up(self):
        return self.rotation[:, 2]

    def yaw_pitch_roll(self):
        """Intrinsic z-y-x Euler angles (radians) of the orientation."""
        R = self.rotation
        yaw = np.arctan2(R[1, 0], R[0, 0])
        pitch = np.arcsin(np.clip(-R[2, 0], -1.0, 1.0))
        roll = np.arctan2(R[2, 1], R[2, 2])
        return yaw, pitch, roll


@dataclass(frozen=True)
class MotionCommand:
    droll: float = 0.0
    dpitch: float = 0.0
    dyaw: float = 0.0
    axial_speed: float = 0.0
    headlamp_intensity: float | None = None

    def __post_init__(self):
        vals = [self.droll, self.dpitch, self.dyaw, self.axial_speed]
        if self.headlamp_intensity is not None:
            vals.append(self.headlamp_intensity)
        if not np.all(np.isfinite(vals)):
            raise CameraError("non-finite motion command")


@dataclass(frozen=True)
class Trajectory:
    samples: list            # [(timestamp s, CameraState), ...]
    rate: float = 30.0

    def __post_init__(self):
        ts = [t for t, _ in self.samples]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise CameraError("timestamps must be strictly increasing")

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)


def apply_command(state: CameraState, cmd: MotionCommand,
                  dt: float) -> CameraState:
    """Rotate about current body axes (yaw -> pitch -> roll), then advance
    along the new optical axis by axial_speed * dt."""
    if dt <= 0:
        raise CameraError("dt must be > 0")
    q = state.orientation
    # body axes: yaw about local up (z), pitch about local left (y),
    # roll about local forward (x); intrinsic = right-multiplication
    q = quat_multiply(q, quat_from_axis_angle([0, 0, 1], cmd.dyaw))
    q = quat_multiply(q, quat_from_axis_angle([0, 1, 0], cmd.dpitch))
    q = quat_multiply(q, quat_from_axis_angle([1, 0, 0], cmd.droll))
    q = q / np.linalg.norm(q)
    fwd = quat_to_matrix(q)[:, 0]
    pos = state.position + fwd * cmd.axial_speed * dt
    return replace(state, position=pos, orientation=q,
                   axial_speed=cmd.axial_speed)


def look_at_quaternion(position, target, up=(0.0, 0.0, 1.0)):
    """Orientation whose forward (+x) points from position toward target."""
    f = np.asarray(target, dtype=float) - np.asarray(position, dtype=float)
    n = np.linalg.norm(f)
    if n < 1e-12:
        raise CameraError("look-at target coincides with position")
    f = f / n
    upv = np.asarray(up, dtype=float)
    l = np.cross(upv, f)
    ln = np.linalg.norm(l)
    if ln < 1e-9:      # looking straight up/down: pick an arbitrary left
        l = np.cross([0.0, 1.0, 0.0], f)
        ln = np.linalg.norm(l)
    l = l / ln
    u = np.cross(f, l)
    R = np.column_stack([f, l, u])
    return matrix_to_quat(R)


def matrix_to_quat(R):
    """Rotation matrix -> scalar-last unit quaternion (Shepperd's method)."""
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    if tr > 0:
        s = np.sqrt(tr + 1.0) * 2
        return np.array([(R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s,
                         (R[1, 0] - R[0, 1]) / s, 0.25 * s])
    if R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        s = np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2
        return np.array([0.25 * s, (R[0, 1] + R[1, 0]) / s,
                         (R[0, 2] + R[2, 0]) / s, (R[2, 1] - R[1, 2]) / s])
    if R[1, 1] > R[2, 2]:
        s = np.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2
        return np.array([(R[0, 1] + R[1, 0]) / s, 0.25 * s,
                         (R[1, 2] + R[2, 1]) / s, (R[0, 2] - R[2, 0]) / s])
    s = np.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2
    return np.array([(R[0, 2] + R[2, 0]) / s, (R[1, 2] + R[2, 1]) / s,
                     0.25 * s, (R[1, 0] - R[0, 1]) / s])


def run_script(pile, waypoints, rate=30.0, speed=1.0,
               camera: CameraState = None) -> Trajectory:
    """Sample a piecewise-linear constant-speed path through `waypoints`.

    Each waypoint is (position, look_at). Positions interpolate linearly at
    `speed`; orientations slerp between consecutive look-at orientations.
    The `pile` argument anchors the trajectory to a scene but is not used
    for collision (the camera is a free probe).
    """
    if len(waypoints) < 2:
        raise CameraError("need at least 2 waypoints")
    base = camera or CameraState()
    pts = [np.asarray(p, dtype=float) for p, _ in waypoints]
    quats = [look_at_quaternion(p, l) for p, l in waypoints]
    seg_len = [np.linalg.norm(b - a) for a, b in zip(pts, pts[1:])]
    if any(s < 1e-12 for s in seg_len):
        raise CameraError("coincident consecutive waypoints")
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    total_t = cum[-1] / speed
    n = int(np.floor(total_t * rate + 1e-9)) + 1
    samples = []
    for k in range(n):
        t = k / rate
        s = min(t * speed, cum[-1])
        seg = min(int(np.searchsorted(cum, s, side="right")) - 1,
                  len(seg_len) - 1)
        u = (s - cum[seg]) / seg_len[seg]
        pos = pts[seg] * (1 - u) + pts[seg + 1] * u
        q = slerp(quats[seg], quats[seg + 1], u)
        samples.append((t, replace(base, position=pos, orientation=q,
                                   axial_speed=speed)))
    return Trajectory(samples, rate=rate)


def parse_waypoints(text):
    """Parse waypoint script lines `px py pz lx ly lz` ('#' comments)."""
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) == 7:   # optional leading timestamp, ignored
            parts = parts[1:]
        if len(parts) != 6:
            raise CameraError("malformed waypoint line %d: %r" % (lineno, line))
        vals = [float(x) for x in parts]
        out.append((np.array(vals[:3]), np.array(vals[3:])))
    return out
