"""Software ray-cast renderer: registered RGB + depth with darkness,
headlamp falloff, fog, and dust plumes.

Radiometry (per hit point, all in linear units):
  radiance = albedo * [ambient + sum_lights lambert * A]
             + spec_strength * (n.h)^spec_exp * A
  A = intensity (directional) or intensity / d_light^2 (point/spot/headlamp),
  with a smoothstep cone falloff for spots.
Fog is Beer-Lambert over the Euclidean ray length with a value-noise
modulated extinction coefficient plus transient spherical dust plumes.
Output is linear 8-bit (no gamma); depth is planar (along the optical axis).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from . import bvh as _bvh
from .camera import CameraState
from .config import SimConfig

AMBIENT = 0.02
SPEC_STRENGTH = 0.2
SPEC_EXP = 32.0
FOG_COLOR = 0.5
GROUND_ALBEDO = (0.42, 0.40, 0.38)
PLUME_SAMPLES = 8
TEXTURE_SCALE = 0.35      # meters per noise feature on surfaces
TEXTURE_AMPLITUDE = 0.35  # +- relative albedo modulation
FOG_NOISE_SCALE = 2.0     # meters per fog noise feature

LIGHT_DIRECTIONAL = 0
LIGHT_POINT = 1
LIGHT_SPOT = 2
_LIGHT_CODES = {"directional": LIGHT_DIRECTIONAL, "point": LIGHT_POINT,
                "spot": LIGHT_SPOT}


@dataclass(frozen=True)
class GlobalLight:
    type: str = "directional"
    intensity: float = 1.0
    rotation: tuple = (0.0, 0.0, 0.0)   # degrees about world X, Y, Z
    position: tuple = (0.0, 0.0, 10.0)
    cone_deg: float = 30.0

    def direction(self):
        """Unit emission direction: rotation applied to straight-down."""
        rx, ry, rz = np.radians(self.rotation)
        cx, sx = np.cos(rx), np.sin(rx)
        cy, sy = np.cos(ry), np.sin(ry)
        cz, sz = np.cos(rz), np.sin(rz)
        Rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]])
        Ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]])
        Rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]])
        return (Rz @ Ry @ Rx) @ np.array([0.0, 0.0, -1.0])


@dataclass(frozen=True)
class LightingRig:
    global_light: GlobalLight = field(default_factory=GlobalLight)
    headlamp_on: bool = False
    headlamp_intensity: float = 1.0

    def __post_init__(self):
        if self.global_light.intensity < 0 or self.headlamp_intensity < 0:
            raise ValueError("light intensities must be >= 0")
        if self.global_light.type not in _LIGHT_CODES:
            raise ValueError("unknown light type %r" % self.global_light.type)


@dataclass(frozen=True)
class DustPlume:
    center: tuple
    radius: float
    sigma_boost: float
    start: float = 0.0
    duration: float = float("inf")

    def active(self, t):
        return self.start <= t < self.start + self.duration


@dataclass(frozen=True)
class FogField:
    sigma_base: float = 0.0       # 1/m
    noise_amplitude: float = 0.0  # 1/m, scales value noise in [0,1]
    noise_scale: float = FOG_NOISE_SCALE
    plumes: tuple = ()

    def __post_init__(self):
        if self.sigma_base < 0 or self.noise_amplitude < 0:
            raise ValueError("fog coefficients must be >= 0")


@dataclass
class Frame:
    rgb: np.ndarray               # (H,W,3) uint8
    depth: np.ndarray             # (H,W) float32, planar meters, 0 = miss
    pose: CameraState
    timestamp: float
    frame_index: int = 0
    radiance: np.ndarray = None   # (H,W,3) float64 debug buffer (optional)


def fog_from_config(cfg: SimConfig, plumes=()) -> FogField:
    return FogField(sigma_base=cfg.fogdensity,
                    noise_amplitude=cfg.fogintensity, plumes=tuple(plumes))


def rig_from_config(cfg: SimConfig, rng=None) -> LightingRig:
    """LightingRig from config; random light rotation unless setlightrot."""
    if cfg.setlightrot:
        rotation = (cfg.lightrotx, cfg.lightroty, cfg.lightrotz)
    else:
        if rng is None:
            rng = np.random.default_rng(cfg.seed)
        azimuth = rng.random() * 360.0
        elevation = 15.0 + rng.random() * 75.0
        # tilt (90 - elevation) away from zenith, then spin about Z
        rotation = (90.0 - elevation, 0.0, azimuth)
    light = GlobalLight(type=cfg.lighttype, intensity=cfg.lightintensity,
                        rotation=rotation,
                        position=(cfg.lightposx, cfg.lightposy, cfg.lightposz))
    return LightingRig(global_light=light, headlamp_on=cfg.headlamp_on,
                       headlamp_intensity=cfg.headlamp_intensity)


# alias matching the operation vocabulary used elsewhere
global_light_from_config = rig_from_config


class Scene:
    """Pile geometry prepared for rendering: BVH + per-triangle shading."""

    def __init__(self, pile):
        tris, owner = pile.triangle_soup()
        self.bvh = _bvh.build_bvh(tris)
        n = len(tris)
        albedo = np.empty((n, 3))
        tex = np.zeros(n, dtype=np.uint8)
        if n:
            classes = [pile.catalog[i.class_id] for i in pile.instances]
            inst_albedo = np.array([c.albedo for c in classes])
            inst_tex = np.array([1 if c.texture_id == "noise" else 0
                                 for c in classes], dtype=np.uint8)
            albedo[:] = inst_albedo[owner]
            tex[:] = inst_tex[owner]
        # shading arrays in BVH (permuted) order, so the kernel can index
        # directly by leaf slot via the inverse permutation
        perm = self.bvh.tri_index
        inv = np.empty(n, dtype=np.int32)
        inv[perm] = np.arange(n, dtype=np.int32)
        self.inv_perm = inv
        self.tri_albedo = np.ascontiguousarray(albedo[perm]) if n else albedo
        self.tri_tex = np.ascontiguousarray(tex[perm]) if n else tex
        self.ground_z = pile.ground_z


def ray_cast(scene: Scene, origin, direction):
    """Nearest hit of one ray against pile + ground.

    Returns None on a miss, else dict with distance, point, normal,
    albedo (pre-texture), instance triangle index (-1 for ground).
    """
    o = np.asarray(origin, dtype=float)
    d = np.asarray(direction, dtype=float)
    t, idx = _bvh.ray_nearest(o[0], o[1], o[2], d[0], d[1], d[2],
                              *scene.bvh.kernel_args())
    normal = None
    albedo = None
    if d[2] < 0.0:
        tg = (scene.ground_z - o[2]) / d[2]
        if 0 < tg < t:
            t, idx = tg, -1
    if not np.isfinite(t):
        return None
    if idx < 0:
        normal = np.array([0.0, 0.0, 1.0])
        albedo = np.array(GROUND_ALBEDO)
    else:
        k = int(scene.inv_perm[idx])
        nrm = np.cross(scene.bvh.tri_e1[k], scene.bvh.tri_e2[k])
        nrm = nrm / np.linalg.norm(nrm)
        if nrm @ d > 0:
            nrm = -nrm
        normal = nrm
        albedo = scene.tri_albedo[k].copy()
    return {"distance": float(t), "point": o + t * d, "normal": normal,
            "albedo": albedo, "triangle": int(idx)}


@njit(cache=True, inline="always")
def _hash3(ix, iy, iz):
    """Integer lattice hash -> [0,1)."""
    h = (ix * 374761393 + iy * 668265263 + iz * 2147483647) & 0xFFFFFFFF
    h ^= h >> 13
    h = (h * 1274126177) & 0xFFFFFFFF
    h ^= h >> 16
    return float(h) / 4294967296.0


@njit(cache=True, inline="always")
def _smooth(u):
    return u * u * (3.0 - 2.0 * u)


@njit(cache=True)
def value_noise(x, y, z):
    """Trilinear value noise in [0,1), C1-smoothed."""
    ix = np.int64(np.floor(x))
    iy = np.int64(np.floor(y))
    iz = np.int64(np.floor(z))
    fx = _smooth(x - ix)
    fy = _smooth(y - iy)
    fz = _smooth(z - iz)
    v = 0.0
    for dx in range(2):
        for dy in range(2):
            for dz in range(2):
                w = ((fx if dx else 1.0 - fx)
                     * (fy if dy else 1.0 - fy)
                     * (fz if dz else 1.0 - fz))
                v += w * _hash3(ix + dx, iy + dy, iz + dz)
    return v


@njit(cache=True)
def _render_kernel(width, height, tan_half, cam_pos, cam_R,
                   node_lo, node_hi, node_left, node_right,
                   node_start, node_count, tri_v0, tri_e1, tri_e2, tri_index,
                   inv_perm, perm_albedo, perm_tex, ground_z, ground_albedo,
                   light_type, light_intensity, light_dir, light_pos,
                   cos_outer, cos_inner,
                   headlamp_on, headlamp_intensity,
                   sigma_base, fog_amp, fog_scale, fog_time,
                   plume_center, plume_radius, plume_boost,
                   rgb, depth, radiance):
    fwd0, fwd1, fwd2 = cam_R[0, 0], cam_R[1, 0], cam_R[2, 0]
    # image right = -left, image up = up
    rx, ry, rz = -cam_R[0, 1], -cam_R[1, 1], -cam_R[2, 1]
    ux, uy, uz = cam_R[0, 2], cam_R[1, 2], cam_R[2, 2]
    ox, oy, oz = cam_pos[0], cam_pos[1], cam_pos[2]
    n_plumes = plume_radius.shape[0]
    aspect = width / height
    for i in range(height):
        v = (1.0 - 2.0 * (i + 0.5) / height) * tan_half
        for j in range(width):
            u = (2.0 * (j + 0.5) / width - 1.0) * tan_half * aspect
            dx = fwd0 + u * rx + v * ux
            dy = fwd1 + u * ry + v * uy
            dz = fwd2 + u * rz + v * uz
            dl = np.sqrt(dx * dx + dy * dy + dz * dz)
            dx /= dl
            dy /= dl
            dz /= dl

            t, idx = _bvh.ray_nearest(ox, oy, oz, dx, dy, dz,
                                      node_lo, node_hi, node_left, node_right,
                                      node_start, node_count,
                                      tri_v0, tri_e1, tri_e2, tri_index)
            hit_ground = False
            if dz < 0.0:
                tg = (ground_z - oz) / dz
                if 0.0 < tg < t:
                    t = tg
                    hit_ground = True
            if not np.isfinite(t):
                depth[i, j] = 0.0
                for c in range(3):
                    radiance[i, j, c] = FOG_COLOR if sigma_base + fog_amp > 0.0 else 0.0
                    q = int(radiance[i, j, c] * 255.0 + 0.5)
                    rgb[i, j, c] = min(max(q, 0), 255)
                continue

            hx = ox + t * dx
            hy = oy + t * dy
            hz = oz + t * dz
            if hit_ground:
                nx, ny, nz = 0.0, 0.0, 1.0
                a0, a1, a2 = ground_albedo[0], ground_albedo[1], ground_albedo[2]
                textured = 0
            else:
                k = inv_perm[idx]
                cxv = tri_e1[k]
                cyv = tri_e2[k]
                nx = cxv[1] * cyv[2] - cxv[2] * cyv[1]
                ny = cxv[2] * cyv[0] - cxv[0] * cyv[2]
                nz = cxv[0] * cyv[1] - cxv[1] * cyv[0]
                nl = np.sqrt(nx * nx + ny * ny + nz * nz)
                nx /= nl
                ny /= nl
                nz /= nl
                if nx * dx + ny * dy + nz * dz > 0.0:
                    nx, ny, nz = -nx, -ny, -nz
                a0, a1, a2 = perm_albedo[k, 0], perm_albedo[k, 1], perm_albedo[k, 2]
                textured = perm_tex[k]
            if textured:
                mod = 1.0 + TEXTURE_AMPLITUDE * (
                    2.0 * value_noise(hx / TEXTURE_SCALE, hy / TEXTURE_SCALE,
                                      hz / TEXTURE_SCALE) - 1.0)
                a0 *= mod
                a1 *= mod
                a2 *= mod

            # lighting
            diffuse = AMBIENT
            specular = 0.0
            vx, vy, vz = -dx, -dy, -dz
            # global light
            if light_intensity > 0.0:
                if light_type == LIGHT_DIRECTIONAL:
                    lx, ly, lz = -light_dir[0], -light_dir[1], -light_dir[2]
                    att = light_intensity
                else:
                    lx = light_pos[0] - hx
                    ly = light_pos[1] - hy
                    lz = light_pos[2] - hz
                    d2 = lx * lx + ly * ly + lz * lz
                    dist = np.sqrt(d2)
                    if dist > 1e-9:
                        lx /= dist
                        ly /= dist
                        lz /= dist
                    att = light_intensity / max(d2, 1e-9)
                    if light_type == LIGHT_SPOT:
                        cosang = -(lx * light_dir[0] + ly * light_dir[1]
                                   + lz * light_dir[2])
                        if cosang <= cos_outer:
                            att = 0.0
                        elif cosang < cos_inner:
                            w = (cosang - cos_outer) / (cos_inner - cos_outer)
                            att *= w * w * (3.0 - 2.0 * w)
                ndl = nx * lx + ny * ly + nz * lz
                if ndl > 0.0 and att > 0.0:
                    diffuse += ndl * att
                    hxl = lx + vx
                    hyl = ly + vy
                    hzl = lz + vz
                    hl = np.sqrt(hxl * hxl + hyl * hyl + hzl * hzl)
                    if hl > 1e-9:
                        ndh = (nx * hxl + ny * hyl + nz * hzl) / hl
                        if ndh > 0.0:
                            specular += SPEC_STRENGTH * ndh ** SPEC_EXP * att
            # headlamp: co-located point light, l = v
            if headlamp_on and headlamp_intensity > 0.0:
                att = headlamp_intensity / max(t * t, 1e-9)
                ndl = nx * vx + ny * vy + nz * vz
                if ndl > 0.0:
                    diffuse += ndl * att
                    # h == v for a co-located light
                    ndh = ndl
                    if ndh > 0.0:
                        specular += SPEC_STRENGTH * ndh ** SPEC_EXP * att

            r0 = a0 * diffuse + specular
            r1 = a1 * diffuse + specular
            r2 = a2 * diffuse + specular

            # fog: Beer-Lambert over Euclidean ray length
            sigma = sigma_base
            if fog_amp > 0.0:
                sigma += fog_amp * value_noise(hx / fog_scale + 0.31 * fog_time,
                                               hy / fog_scale + 0.17 * fog_time,
                                               hz / fog_scale + 0.11 * fog_time)
            tau = sigma * t
            if n_plumes > 0:
                step = t / PLUME_SAMPLES
                for s in range(PLUME_SAMPLES):
                    tm = (s + 0.5) * step
                    mx = ox + tm * dx
                    my = oy + tm * dy
                    mz = oz + tm * dz
                    for p in range(n_plumes):
                        ex = mx - plume_center[p, 0]
                        ey = my - plume_center[p, 1]
                        ez = mz - plume_center[p, 2]
                        if (ex * ex + ey * ey + ez * ez
                                < plume_radius[p] * plume_radius[p]):
                            tau += plume_boost[p] * step
            T = np.exp(-tau)
            r0 = T * r0 + (1.0 - T) * FOG_COLOR
            r1 = T * r1 + (1.0 - T) * FOG_COLOR
            r2 = T * r2 + (1.0 - T) * FOG_COLOR

            depth[i, j] = t * (dx * fwd0 + dy * fwd1 + dz * fwd2)
            radiance[i, j, 0] = r0
            radiance[i, j, 1] = r1
            radiance[i, j, 2] = r2
            q = int(min(max(r0, 0.0), 1.0) * 255.0 + 0.5)
            rgb[i, j, 0] = min(q, 255)
            q = int(min(max(r1, 0.0), 1.0) * 255.0 + 0.5)
            rgb[i, j, 1] = min(q, 255)
            q = int(min(max(r2, 0.0), 1.0) * 255.0 + 0.5)
            rgb[i, j, 2] = min(q, 255)


def render_frame(scene: Scene, camera: CameraState, rig: LightingRig,
                 fog: FogField, t: float = 0.0, frame_index: int = 0,
                 debug: bool = False) -> Frame:
    """Render one registered RGB + depth frame (deterministic in inputs)."""
    w, h = camera.width, camera.height
    rgb = np.zeros((h, w, 3), dtype=np.uint8)
    depth = np.zeros((h, w), dtype=np.float32)
    radiance = np.zeros((h, w, 3))
    gl = rig.global_light
    plumes = [p for p in fog.plumes if p.active(t)]
    pc = (np.array([p.center for p in plumes], dtype=np.float64)
          if plumes else np.zeros((0, 3)))
    pr = np.array([p.radius for p in plumes], dtype=np.float64)
    pb = np.array([p.sigma_boost for p in plumes], dtype=np.float64)
    cone = np.radians(gl.cone_deg)
    _render_kernel(
        w, h, np.tan(np.radians(camera.vfov_deg) / 2.0),
        camera.position, camera.rotation,
        *scene.bvh.kernel_args(),
        scene.inv_perm, scene.tri_albedo, scene.tri_tex, scene.ground_z,
        np.array(GROUND_ALBEDO),
        _LIGHT_CODES[gl.type], float(gl.intensity),
        np.asarray(gl.direction(), dtype=np.float64),
        np.asarray(gl.position, dtype=np.float64),
        np.cos(cone), np.cos(0.8 * cone),
        1 if rig.headlamp_on else 0, float(rig.headlamp_intensity),
        float(fog.sigma_base), float(fog.noise_amplitude),
        float(fog.noise_scale), float(t),
        pc, pr, pb, rgb, depth, radiance)
    return Frame(rgb=rgb, depth=depth, pose=camera, timestamp=t,
                 frame_index=frame_index,
                 radiance=radiance if debug else None)
