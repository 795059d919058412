"""Bounding-volume hierarchy over a triangle soup, with numba ray kernels.

The tree is built host-side (median split on centroid along the widest
axis) and flattened into plain arrays so the traversal kernel is a simple
stack walk. Intersection is Moller-Trumbore; ties on distance resolve to
the lowest triangle index for determinism.
"""

import numpy as np
from numba import njit

LEAF_SIZE = 4
EPS = 1e-12


class BVH:
    """Flattened BVH. Use `build_bvh` to construct."""

    __slots__ = ("node_lo", "node_hi", "node_left", "node_right",
                 "node_start", "node_count", "tri_v0", "tri_e1", "tri_e2",
                 "tri_index", "n_tris")

    def __init__(self, node_lo, node_hi, node_left, node_right, node_start,
                 node_count, tri_v0, tri_e1, tri_e2, tri_index):
        self.node_lo = node_lo
        self.node_hi = node_hi
        self.node_left = node_left
        self.node_right = node_right
        self.node_start = node_start
        self.node_count = node_count
        self.tri_v0 = tri_v0
        self.tri_e1 = tri_e1
        self.tri_e2 = tri_e2
        self.tri_index = tri_index
        self.n_tris = len(tri_index)

    def kernel_args(self):
        return (self.node_lo, self.node_hi, self.node_left, self.node_right,
                self.node_start, self.node_count, self.tri_v0, self.tri_e1,
                self.tri_e2, self.tri_index)


def build_bvh(tris):
    """Build a BVH over (T,3,3) world-space triangles."""
    tris = np.asarray(tris, dtype=np.float64)
    n = len(tris)
    if n == 0:
        # single empty leaf
        return BVH(np.zeros((1, 3)), np.full((1, 3), -1.0),
                   np.full(1, -1, np.int32), np.full(1, -1, np.int32),
                   np.zeros(1, np.int32), np.zeros(1, np.int32),
                   np.zeros((0, 3)), np.zeros((0, 3)), np.zeros((0, 3)),
                   np.zeros(0, np.int32))
    lo = tris.min(axis=1)
    hi = tris.max(axis=1)
    cent = tris.mean(axis=1)
    order = np.arange(n)

    node_lo, node_hi = [], []
    node_left, node_right = [], []
    node_start, node_count = [], []

    # iterative build; stack holds (range_start, range_end, node_slot)
    def new_node():
        node_lo.append(None)
        node_hi.append(None)
        node_left.append(-1)
        node_right.append(-1)
        node_start.append(0)
        node_count.append(0)
        return len(node_lo) - 1

    root = new_node()
    stack = [(0, n, root)]
    while stack:
        s, e, slot = stack.pop()
        idx = order[s:e]
        node_lo[slot] = lo[idx].min(axis=0)
        node_hi[slot] = hi[idx].max(axis=0)
        if e - s <= LEAF_SIZE:
            node_start[slot] = s
            node_count[slot] = e - s
            continue
        c = cent[idx]
        axis = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
        mid = (e - s) // 2
        # argsort (stable) keeps splits deterministic under ties
        part = idx[np.argsort(c[:, axis], kind="stable")]
        order[s:e] = part
        l_slot = new_node()
        r_slot = new_node()
        node_left[slot] = l_slot
        node_right[slot] = r_slot
        stack.append((s + mid, e, r_slot))
        stack.append((s, s + mid, l_slot))

    t = tris[order]
    return BVH(np.ascontiguousarray(node_lo, dtype=np.float64),
               np.ascontiguousarray(node_hi, dtype=np.float64),
               np.array(node_left, np.int32), np.array(node_right, np.int32),
               np.array(node_start, np.int32), np.array(node_count, np.int32),
               np.ascontiguousarray(t[:, 0]),
               np.ascontiguousarray(t[:, 1] - t[:, 0]),
               np.ascontiguousarray(t[:, 2] - t[:, 0]),
               order.astype(np.int32))


@njit(cache=True, inline="always")
def _tri_hit(ox, oy, oz, dx, dy, dz, v0, e1, e2):
    """Moller-Trumbore; returns t >= 0 or -1 on miss."""
    px = dy * e2[2] - dz * e2[1]
    py = dz * e2[0] - dx * e2[2]
    pz = dx * e2[1] - dy * e2[0]
    det = e1[0] * px + e1[1] * py + e1[2] * pz
    if -EPS < det < EPS:
        return -1.0
    inv = 1.0 / det
    tx = ox - v0[0]
    ty = oy - v0[1]
    tz = oz - v0[2]
    u = (tx * px + ty * py + tz * pz) * inv
    if u < 0.0 or u > 1.0:
        return -1.0
    qx = ty * e1[2] - tz * e1[1]
    qy = tz * e1[0] - tx * e1[2]
    qz = tx * e1[1] - ty * e1[0]
    v = (dx * qx + dy * qy + dz * qz) * inv
    if v < 0.0 or u + v > 1.0:
        return -1.0
    t = (e2[0] * qx + e2[1] * qy + e2[2] * qz) * inv
    if t < EPS:
        return -1.0
    return t


@njit(cache=True, inline="always")
def _aabb_hit(ox, oy, oz, ix, iy, iz, lo, hi, tmax):
    t0 = (lo[0] - ox) * ix
    t1 = (hi[0] - ox) * ix
    if t0 > t1:
        t0, t1 = t1, t0
    tn = t0
    tf = t1
    t0 = (lo[1] - oy) * iy
    t1 = (hi[1] - oy) * iy
    if t0 > t1:
        t0, t1 = t1, t0
    if t0 > tn:
        tn = t0
    if t1 < tf:
        tf = t1
    t0 = (lo[2] - oz) * iz
    t1 = (hi[2] - oz) * iz
    if t0 > t1:
        t0, t1 = t1, t0
    if t0 > tn:
        tn = t0
    if t1 < tf:
        tf = t1
    return tf >= tn and tf >= 0.0 and tn <= tmax


@njit(cache=True)
def ray_nearest(ox, oy, oz, dx, dy, dz,
                node_lo, node_hi, node_left, node_right,
                node_start, node_count, tri_v0, tri_e1, tri_e2, tri_index):
    """Nearest triangle hit: returns (t, original triangle index) or (inf, -1)."""
    best_t = np.inf
    best_i = -1
    if tri_index.shape[0] == 0:
        return best_t, best_i
    ix = 1.0 / dx if dx != 0.0 else np.inf
    iy = 1.0 / dy if dy != 0.0 else np.inf
    iz = 1.0 / dz if dz != 0.0 else np.inf
    stack = np.empty(64, dtype=np.int32)
    sp = 0
    stack[sp] = 0
    sp += 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        if not _aabb_hit(ox, oy, oz, ix, iy, iz,
                         node_lo[node], node_hi[node], best_t):
            continue
        if node_left[node] < 0:
            s = node_start[node]
            for k in range(s, s + node_count[node]):
                t = _tri_hit(ox, oy, oz, dx, dy, dz,
                             tri_v0[k], tri_e1[k], tri_e2[k])
                if t >= 0.0 and (t < best_t
                                 or (t == best_t and tri_index[k] < best_i)):
                    best_t = t
                    best_i = tri_index[k]
        else:
            stack[sp] = node_left[node]
            sp += 1
            stack[sp] = node_right[node]
            sp += 1
    return best_t, best_i


@njit(cache=True)
def ray_nearest_brute(ox, oy, oz, dx, dy, dz, v0, e1, e2):
    """O(n) all-triangles oracle used by tests."""
    best_t = np.inf
    best_i = -1
    for k in range(v0.shape[0]):
        t = _tri_hit(ox, oy, oz, dx, dy, dz, v0[k], e1[k], e2[k])
        if t >= 0.0 and (t < best_t or (t == best_t and k < best_i)):
            best_t = t
            best_i = k
    return best_t, best_i
