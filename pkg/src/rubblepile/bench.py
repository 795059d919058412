"""Score an external SfM reconstruction against dataset ground truth.

Ingests either a COLMAP text model (images.txt + points3D.txt) or a
TUM-style trajectory with a trailing model-id column, aligns each model
to the ground-truth trajectory with a closed-form similarity (Sim(3))
fit, and reports: registered images, track segments, % on-track frames,
and sparse point count.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field

import numpy as np

from .export import read_groundtruth

DEFAULT_ONTRACK_THRESHOLD = 0.10   # meters, after per-model alignment


class BenchError(ValueError):
    pass


class AlignmentError(BenchError):
    pass


@dataclass(frozen=True)
class EstimateRecord:
    name: str                 # image name, e.g. 000042.png
    model_id: int
    position: np.ndarray      # camera center, world/model frame
    orientation: np.ndarray   # scalar-last quaternion


@dataclass
class EstimatedTrajectory:
    records: list             # registered images only
    points_per_model: dict    # model_id -> sparse point count
    names: set = field(default_factory=set)

    @property
    def points(self):
        return sum(self.points_per_model.values())

    def model_histogram(self):
        hist = {}
        for r in self.records:
            hist[r.model_id] = hist.get(r.model_id, 0) + 1
        return hist


@dataclass
class BenchReport:
    sequence_length: int
    registered: int
    track_segments: int
    pct_on_track: float       # rounded to 1 decimal
    points: int
    on_track: list            # per-frame booleans
    alignments: dict          # model_id -> dict(scale, rotation, translation, rmse)

    def row(self):
        """Text row: registered-images segments pct points."""
        return "%d %d %.1f %d" % (self.registered, self.track_segments,
                                  self.pct_on_track, self.points)

    def keyvalues(self):
        return ("sequence_length=%d registered=%d track_segments=%d "
                "pct_on_track=%.1f points=%d"
                % (self.sequence_length, self.registered,
                   self.track_segments, self.pct_on_track, self.points))


def _quat_conj_rotate(q, v):
    """Rotate v by the conjugate of scalar-last quaternion q (R^T v)."""
    x, y, z, w = q
    R = np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)]])
    return R.T @ v


def _load_colmap(images_path, points_path, model_id=0):
    records = []
    names = set()
    with open(images_path) as fh:
        lines = [ln.strip() for ln in fh
                 if ln.strip() and not ln.lstrip().startswith("#")]
    # images.txt: image line, then its 2D-points line
    for lineno, line in enumerate(lines[::2], 1):
        parts = line.split()
        if len(parts) < 10:
            raise BenchError("%s: malformed image line %d"
                             % (images_path, lineno))
        qw, qx, qy, qz = (float(x) for x in parts[1:5])
        tx, ty, tz = (float(x) for x in parts[5:8])
        name = parts[9]
        if name in names:
            raise BenchError("%s: duplicate image name %r"
                             % (images_path, name))
        names.add(name)
        # world-to-camera convention: camera center = -R^T t
        q = np.array([qx, qy, qz, qw])
        center = -_quat_conj_rotate(q, np.array([tx, ty, tz]))
        records.append(EstimateRecord(name, model_id, center, q))
    n_points = 0
    if points_path and os.path.exists(points_path):
        with open(points_path) as fh:
            n_points = sum(1 for ln in fh
                           if ln.strip() and not ln.lstrip().startswith("#"))
    return records, names, n_points


def load_estimate(path) -> EstimatedTrajectory:
    """Load an SfM estimate from a COLMAP model directory or a text file.

    Text file rows: `name tx ty tz qx qy qz qw model_id` where name is an
    image name or a frame timestamp; optional `# points <model> <count>`
    comments carry sparse point counts.
    """
    if os.path.isdir(path):
        records, names, n_points = _load_colmap(
            os.path.join(path, "images.txt"),
            os.path.join(path, "points3D.txt"))
        return EstimatedTrajectory(records, {0: n_points}, names)
    records = []
    names = set()
    points = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = re.match(r"#\s*points\s+(\d+)\s+(\d+)", line)
                if m:
                    points[int(m.group(1))] = int(m.group(2))
                continue
            parts = line.split()
            if len(parts) != 9:
                raise BenchError("%s: line %d: expected 9 fields, got %d"
                                 % (path, lineno, len(parts)))
            name = parts[0]
            if name in names:
                raise BenchError("%s: line %d: duplicate image name %r"
                                 % (path, lineno, name))
            names.add(name)
            vals = [float(x) for x in parts[1:8]]
            records.append(EstimateRecord(
                name, int(parts[8]), np.array(vals[:3]), np.array(vals[3:])))
    for r in records:
        points.setdefault(r.model_id, 0)
    return EstimatedTrajectory(records, points, names)


def align_model(est, gt, with_scale=True):
    """Closed-form least-squares similarity fit est -> gt.

    Returns dict(scale, rotation (3,3), translation (3,), rmse).
    """
    est = np.asarray(est, dtype=float)
    gt = np.asarray(gt, dtype=float)
    if len(est) < 3:
        raise AlignmentError("need >= 3 correspondences, got %d" % len(est))
    mu_e = est.mean(axis=0)
    mu_g = gt.mean(axis=0)
    de = est - mu_e
    dg = gt - mu_g
    # collinear clouds leave a rotation axis unconstrained
    sv = np.linalg.svd(de, compute_uv=False)
    if sv[1] < 1e-9 * max(sv[0], 1e-300):
        raise AlignmentError("degenerate (collinear) configuration")
    cov = dg.T @ de / len(est)
    U, S, Vt = np.linalg.svd(cov)
    D = np.eye(3)
    if np.linalg.det(U) * np.linalg.det(Vt) < 0:
        D[2, 2] = -1.0
    R = U @ D @ Vt
    var_e = (de ** 2).sum() / len(est)
    scale = float(np.trace(np.diag(S) @ D) / var_e) if with_scale else 1.0
    t = mu_g - scale * R @ mu_e
    aligned = scale * est @ R.T + t
    rmse = float(np.sqrt(((aligned - gt) ** 2).sum(axis=1).mean()))
    return {"scale": scale, "rotation": R, "translation": t, "rmse": rmse,
            "aligned": aligned}


def count_segments(on_track, model_ids):
    """Maximal runs of consecutive on-track frames sharing one model."""
    segments = 0
    prev_on = False
    prev_model = None
    for on, model in zip(on_track, model_ids):
        if on and not (prev_on and model == prev_model):
            segments += 1
        prev_on = on
        prev_model = model if on else None
    return segments


def _frame_index(name, n_frames):
    """Image name or timestamp-like token -> frame index, or None."""
    m = re.match(r"^0*(\d+)\.(png|jpg|jpeg)$", name)
    if m:
        idx = int(m.group(1))
        return idx if 0 <= idx < n_frames else None
    try:
        idx = int(round(float(name)))
    except ValueError:
        return None
    return idx if 0 <= idx < n_frames else None


def compute_report(est: EstimatedTrajectory, gt,
                   delta: float = DEFAULT_ONTRACK_THRESHOLD) -> BenchReport:
    """Per-frame on-track scoring after independent per-model alignment.

    `gt` is the parsed groundtruth.txt (list of (timestamp, pos, quat))
    or a path to it.
    """
    if isinstance(gt, (str, os.PathLike)):
        gt = read_groundtruth(gt)
    n = len(gt)
    gt_pos = np.array([p for _, p, _ in gt]) if n else np.zeros((0, 3))
    on_track = [False] * n
    model_of = [None] * n
    by_model = {}
    for r in est.records:
        idx = _frame_index(r.name, n)
        if idx is None:
            raise BenchError("image %r has no ground-truth frame" % r.name)
        by_model.setdefault(r.model_id, []).append((idx, r.position))
    alignments = {}
    for model_id, pairs in sorted(by_model.items()):
        idxs = [i for i, _ in pairs]
        epos = np.array([p for _, p in pairs])
        try:
            fit = align_model(epos, gt_pos[idxs], with_scale=True)
        except AlignmentError:
            # model unusable: all its frames stay off-track
            alignments[model_id] = None
            continue
        err = np.linalg.norm(fit["aligned"] - gt_pos[idxs], axis=1)
        for i, e in zip(idxs, err):
            if e < delta:
                on_track[i] = True
                model_of[i] = model_id
        alignments[model_id] = {k: fit[k] for k in
                                ("scale", "rotation", "translation", "rmse")}
    pct = 100.0 * sum(on_track) / n if n else 0.0
    return BenchReport(
        sequence_length=n, registered=len(est.records),
        track_segments=count_segments(on_track, model_of),
        pct_on_track=round(pct, 1), points=est.points,
        on_track=on_track, alignments=alignments)
