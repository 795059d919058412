"""Pile construction: layer spawning, rigid-body settling, determinism."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import physics_kernels as pk
from .assets import Catalog
from .config import SimConfig, config_hash

DROP_CLEARANCE = 1.0   # m above current pile top
DROP_JITTER = 0.5      # m, uniform altitude jitter per body
SPAWN_TRIES = 100


class DepositionError(RuntimeError):
    pass


class SettleError(DepositionError):
    def __init__(self, msg, body_ids=(), kinetic_energy=0.0):
        super().__init__(msg)
        self.body_ids = list(body_ids)
        self.kinetic_energy = kinetic_energy


@dataclass
class PhysicsParams:
    gravity: float = 9.81
    timestep: float = 1.0 / 240.0
    solver_iterations: int = 40
    v_sleep: float = 0.01       # m/s
    w_sleep: float = 0.05       # rad/s
    sleep_frames: int = 60
    max_steps: int = 7200
    penetration_tolerance: float = 0.02
    contact_margin: float = 0.02
    baumgarte: float = 0.2
    slop: float = 0.005
    linear_damping: float = 0.999
    angular_damping: float = 0.997

    def __post_init__(self):
        assert self.timestep > 0
        assert self.max_steps > self.sleep_frames


@dataclass
class BodyInstance:
    class_id: str
    position: np.ndarray          # (3,) m
    orientation: np.ndarray       # (4,) unit quaternion, scalar-last xyzw
    linear_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    angular_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    asleep: bool = False


@dataclass
class Pile:
    instances: list
    seed: int
    config_hash: int
    settle_steps: int
    catalog: Catalog
    ground_z: float = 0.0
    _soup: tuple = field(default=None, repr=False)

    def triangle_soup(self):
        """World-space triangles of all instances: (tris (T,3,3), inst (T,))."""
        if self._soup is None:
            tris = []
            owner = []
            for idx, inst in enumerate(self.instances):
                cls = self.catalog[inst.class_id]
                R = quat_to_matrix(inst.orientation)
                verts = inst.position + cls.verts @ R.T
                tris.append(verts[cls.tris])
                owner.append(np.full(len(cls.tris), idx, dtype=np.int32))
            if tris:
                self._soup = (np.ascontiguousarray(np.vstack(tris)),
                              np.concatenate(owner))
            else:
                self._soup = (np.zeros((0, 3, 3)), np.zeros(0, dtype=np.int32))
        return self._soup


def quat_to_matrix(q):
    x, y, z, w = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def sample_orientation(rng):
    """Uniform random unit quaternion on SO(3), scalar-last.

    Subgroup-algorithm construction from three uniforms; consumes exactly
    three rng draws.
    """
    u1, u2, u3 = rng.random(3)
    a = np.sqrt(1.0 - u1)
    b = np.sqrt(u1)
    return np.array([a * np.sin(2 * np.pi * u2), a * np.cos(2 * np.pi * u2),
                     b * np.sin(2 * np.pi * u3), b * np.cos(2 * np.pi * u3)])


class _PackedCatalog:
    """Catalog geometry flattened into numba-friendly arrays."""

    def __init__(self, catalog):
        classes = catalog.classes
        self.inv_mass = np.array([1.0 / c.mass for c in classes])
        self.inv_inertia = np.ascontiguousarray(
            np.stack([c.inv_inertia for c in classes]))
        self.friction = np.array([c.friction for c in classes])
        self.restitution = np.array([c.restitution for c in classes])
        self.brad = np.array([c.bounding_radius for c in classes])
        self.half = np.ascontiguousarray(np.stack([c.half_extents for c in classes]))
        self.smp = np.ascontiguousarray(np.vstack([c.samples for c in classes]))
        self.smp_off = np.cumsum([0] + [len(c.samples) for c in classes]).astype(np.int64)
        self.pln = np.ascontiguousarray(np.vstack([c.planes for c in classes]))
        self.pln_off = np.cumsum([0] + [len(c.planes) for c in classes]).astype(np.int64)


_pack_cache = {}


def pack_catalog(catalog):
    key = id(catalog)
    packed = _pack_cache.get(key)
    if packed is None:
        packed = _PackedCatalog(catalog)
        _pack_cache[key] = packed
    return packed


def _instances_to_arrays(instances, catalog):
    n = len(instances)
    pos = np.zeros((n, 3))
    quat = np.zeros((n, 4))
    vel = np.zeros((n, 3))
    omg = np.zeros((n, 3))
    cls = np.zeros(n, dtype=np.int64)
    for i, inst in enumerate(instances):
        pos[i] = inst.position
        quat[i] = inst.orientation
        vel[i] = inst.linear_velocity
        omg[i] = inst.angular_velocity
        cls[i] = catalog.index[inst.class_id]
    return pos, quat, vel, omg, cls


def _world_aabbs(pos, quat, cls, packed):
    n = len(pos)
    rot = np.empty((n, 3, 3))
    lo = np.empty((n, 3))
    hi = np.empty((n, 3))
    if n:
        pk.compute_rot_mats(quat, rot, 0, n)
        pk.compute_aabbs(pos, rot, cls, packed.half, lo, hi, 0, n)
    return lo, hi


def _build_static_grid(lo, hi, nd, n_total, cell=1.0):
    """CSR xy-grid over static bodies [nd, n_total)."""
    ns = n_total - nd
    if ns == 0:
        return (np.zeros(2), cell, 0, 0, np.zeros(1, dtype=np.int64),
                np.zeros(0, dtype=np.int64))
    slo = lo[nd:]
    shi = hi[nd:]
    gmin = slo[:, :2].min(axis=0) - 1e-6
    gmax = shi[:, :2].max(axis=0) + 1e-6
    gnx = max(1, int(np.ceil((gmax[0] - gmin[0]) / cell)))
    gny = max(1, int(np.ceil((gmax[1] - gmin[1]) / cell)))
    entries = []
    for s in range(ns):
        cx0 = int((slo[s, 0] - gmin[0]) / cell)
        cx1 = int((shi[s, 0] - gmin[0]) / cell)
        cy0 = int((slo[s, 1] - gmin[1]) / cell)
        cy1 = int((shi[s, 1] - gmin[1]) / cell)
        for cy in range(cy0, min(cy1, gny - 1) + 1):
            for cx in range(cx0, min(cx1, gnx - 1) + 1):
                entries.append((cy * gnx + cx, nd + s))
    entries.sort()
    items = np.array([e[1] for e in entries], dtype=np.int64)
    start = np.zeros(gnx * gny + 1, dtype=np.int64)
    for cidx, _ in entries:
        start[cidx + 1] += 1
    np.cumsum(start, out=start)
    return np.asarray(gmin, dtype=np.float64), cell, gnx, gny, start, items


def pile_max_height(instances, catalog):
    """Max AABB top over settled instances (0 for an empty pile)."""
    if not instances:
        return 0.0
    packed = pack_catalog(catalog)
    pos, quat, _, _, cls = _instances_to_arrays(instances, catalog)
    _, hi = _world_aabbs(pos, quat, cls, packed)
    return float(hi[:, 2].max())


def _bodies_overlap(cls_a, pos_a, rot_a, cls_b, pos_b, rot_b):
    """Convex overlap test via sample points against face planes, both ways."""
    d = pos_b - pos_a
    if np.dot(d, d) > (cls_a.bounding_radius + cls_b.bounding_radius) ** 2:
        return False
    for ca, pa, Ra, cb, pb, Rb in ((cls_a, pos_a, rot_a, cls_b, pos_b, rot_b),
                                   (cls_b, pos_b, rot_b, cls_a, pos_a, rot_a)):
        local = (ca.samples @ Ra.T + pa - pb) @ Rb
        dist = local @ cb.planes[:, :3].T - cb.planes[:, 3]
        if np.any(dist.max(axis=1) < 0.0):
            return True
    return False


def spawn_layer(instances, cfg: SimConfig, catalog: Catalog, layer_index, rng):
    """Spawn cfg.numobjs bodies on a random plane above the current pile."""
    from .assets import sample_class

    base_z = pile_max_height(instances, catalog) + DROP_CLEARANCE
    if layer_index == 0:
        base_z += cfg.spawnposz
    sigma = np.array([
        cfg.position_sigma or cfg.spawnboundx / 2.0,
        cfg.position_sigma or cfg.spawnboundy / 2.0,
    ])
    new = []
    rots = []
    for _ in range(cfg.numobjs):
        cid = sample_class(catalog, rng)
        cls = catalog[cid]
        q = sample_orientation(rng)
        R = quat_to_matrix(q)
        placed = False
        for _try in range(SPAWN_TRIES):
            if cfg.position_distribution == "uniform":
                x = cfg.spawnposx + (2 * rng.random() - 1) * cfg.spawnboundx
                y = cfg.spawnposy + (2 * rng.random() - 1) * cfg.spawnboundy
            else:
                x = np.clip(cfg.spawnposx + rng.normal(0, sigma[0]),
                            cfg.spawnposx - cfg.spawnboundx,
                            cfg.spawnposx + cfg.spawnboundx)
                y = np.clip(cfg.spawnposy + rng.normal(0, sigma[1]),
                            cfg.spawnposy - cfg.spawnboundy,
                            cfg.spawnposy + cfg.spawnboundy)
            z = base_z + rng.random() * DROP_JITTER
            p = np.array([x, y, z])
            ok = True
            for other, Ro in zip(new, rots):
                if _bodies_overlap(cls, p, R, catalog[other.class_id],
                                   other.position, Ro):
                    ok = False
                    break
            if ok:
                new.append(BodyInstance(cid, p, q))
                rots.append(R)
                placed = True
                break
        if not placed:
            raise DepositionError(
                "spawn rejection budget exhausted on layer %d: footprint too "
                "small for numobjs=%d" % (layer_index, cfg.numobjs))
    return new


def settle(instances, catalog, params: PhysicsParams = None, statics=(),
           progress=None):
    """Advance rigid-body dynamics until every body sleeps.

    `statics` are collision-only bodies (previously settled layers).
    Returns (settled instance list, step count).
    """
    params = params or PhysicsParams()
    packed = pack_catalog(catalog)
    nd = len(instances)
    if nd == 0:
        return [], 0
    all_bodies = list(instances) + list(statics)
    pos, quat, vel, omg, cls = _instances_to_arrays(all_bodies, catalog)
    n_total = len(all_bodies)
    asleep = np.zeros(nd, dtype=np.uint8)
    sleep_count = np.zeros(nd, dtype=np.int64)
    rot = np.empty((n_total, 3, 3))
    lo = np.empty((n_total, 3))
    hi = np.empty((n_total, 3))
    if n_total > nd:
        pk.compute_rot_mats(quat, rot, nd, n_total)
        pk.compute_aabbs(pos, rot, cls, packed.half, lo, hi, nd, n_total)
    grid_lo, cell, gnx, gny, grid_start, grid_items = _build_static_grid(
        lo, hi, nd, n_total)

    max_c = max(nd * 48, 1024)
    c_i = np.zeros(max_c, dtype=np.int64)
    c_j = np.zeros(max_c, dtype=np.int64)
    c_p = np.zeros((max_c, 3))
    c_n = np.zeros((max_c, 3))
    c_d = np.zeros(max_c)
    c_s = np.zeros(max_c, dtype=np.int64)

    steps = 0
    chunk = 240
    while steps < params.max_steps:
        n = min(chunk, params.max_steps - steps)
        taken, done = pk.step_range(
            n, nd, n_total, params.timestep, params.gravity,
            pos, quat, vel, omg, asleep, sleep_count,
            cls, packed.inv_mass, packed.inv_inertia, packed.friction,
            packed.restitution, packed.brad, packed.half,
            packed.smp, packed.smp_off, packed.pln, packed.pln_off,
            rot, lo, hi,
            grid_lo, cell, gnx, gny, grid_start, grid_items,
            params.v_sleep, params.w_sleep, params.sleep_frames,
            params.contact_margin, params.baumgarte, params.slop,
            params.solver_iterations,
            params.linear_damping, params.angular_damping,
            c_i, c_j, c_p, c_n, c_d, c_s)
        steps += taken
        if progress is not None:
            progress(steps)
        if done:
            break
    else:
        done = bool(asleep.all())

    if not asleep.all():
        awake = [i for i in range(nd) if not asleep[i]]
        ke = 0.0
        for i in awake:
            c = catalog.classes[cls[i]]
            ke += 0.5 * c.mass * float(vel[i] @ vel[i])
            ke += 0.5 * float(omg[i] @ c.inertia @ omg[i])
        raise SettleError(
            "settle did not converge in %d steps; %d bodies awake, "
            "kinetic energy %.3g J" % (params.max_steps, len(awake), ke),
            body_ids=awake, kinetic_energy=ke)

    settled = []
    for i in range(nd):
        settled.append(BodyInstance(all_bodies[i].class_id, pos[i].copy(),
                                    quat[i].copy(), np.zeros(3), np.zeros(3),
                                    asleep=True))
    return settled, steps


def build_pile(cfg: SimConfig, catalog: Catalog = None,
               params: PhysicsParams = None, progress=None) -> Pile:
    """Deterministic pile build: per layer, spawn then settle.

    Previously settled layers act as static collision geometry while a new
    layer settles; a pure function of (seed, config, catalog) on a fixed
    build.
    """
    from .assets import default_catalog

    cfg.validate()
    catalog = catalog or default_catalog()
    if cfg.asset_weights:
        catalog = catalog.with_weights(cfg.asset_weights)
    params = params or PhysicsParams()
    rng = np.random.default_rng(cfg.seed)
    settled = []
    total_steps = 0
    for layer in range(cfg.numlayers):
        new = spawn_layer(settled, cfg, catalog, layer, rng)
        cb = (lambda s: progress(layer, s)) if progress is not None else None
        new, steps = settle(new, catalog, params, statics=settled, progress=cb)
        settled.extend(new)
        total_steps += steps
    return Pile(settled, cfg.seed, config_hash(cfg), total_steps, catalog)


def contact_report(pile: Pile, margin=0.025):
    """Post-check contact query over the whole settled pile.

    Returns dict with per-body support flags (ground or body contact within
    `margin`), max penetration depth, and min AABB-center z.
    """
    catalog = pile.catalog
    packed = pack_catalog(catalog)
    pos, quat, _, _, cls = _instances_to_arrays(pile.instances, catalog)
    n = len(pile.instances)
    if n == 0:
        return {"supported": np.zeros(0, bool), "max_penetration": 0.0,
                "min_center_z": 0.0}
    max_c = max(n * 48, 1024)
    c_i = np.zeros(max_c, dtype=np.int64)
    c_j = np.zeros(max_c, dtype=np.int64)
    c_p = np.zeros((max_c, 3))
    c_n = np.zeros((max_c, 3))
    c_d = np.zeros(max_c)
    c_s = np.zeros(max_c, dtype=np.int64)
    empty_grid = (np.zeros(2), 1.0, 0, 0, np.zeros(1, dtype=np.int64),
                  np.zeros(0, dtype=np.int64))
    n_c = pk.query_contacts(n, n, pos, quat, cls, packed.brad, packed.half,
                            packed.smp, packed.smp_off, packed.pln,
                            packed.pln_off, *empty_grid, margin,
                            c_i, c_j, c_p, c_n, c_d, c_s)
    supported = np.zeros(n, dtype=bool)
    max_pen = 0.0
    for k in range(n_c):
        if c_d[k] <= 0.01:
            supported[c_i[k]] = True
            if c_j[k] >= 0:
                supported[c_j[k]] = True
        if -c_d[k] > max_pen:
            max_pen = float(-c_d[k])
    return {
        "supported": supported,
        "max_penetration": max_pen,
        "min_center_z": float(pos[:, 2].min()),
    }
