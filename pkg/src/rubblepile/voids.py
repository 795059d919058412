"""Ground-truth void-space analysis of a settled pile.

The pile is voxelized on a regular grid (cell solid iff its center lies
inside any instance's convex shape). Exterior air is found by a
6-connected flood fill from the guaranteed-empty border; the remaining
empty components are void regions. A region is "vented" if it connects
to the exterior only through apertures narrower than a threshold
(detected by re-running the fill with dilated solids), else "enclosed".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import ndimage

from .deposition import pack_catalog, quat_to_matrix

APERTURE_THRESHOLD = 0.30   # meters; minimum "entry hole" size
DEFAULT_RESOLUTION = 0.05   # meters per cell
MAX_CELLS = 512 ** 3

# face adjacency only: diagonal voxel corners must not leak air
_CONN6 = ndimage.generate_binary_structure(3, 1)


class VoidsError(ValueError):
    pass


@dataclass(frozen=True)
class VoxelGrid:
    origin: np.ndarray        # world position of cell (0,0,0) corner
    resolution: float
    dims: tuple               # (nx, ny, nz)
    occupancy: np.ndarray     # (nx,ny,nz) bool, True = solid

    def cell_center(self, i, j, k):
        return self.origin + (np.array([i, j, k]) + 0.5) * self.resolution


@dataclass(frozen=True)
class VoidRegion:
    id: int
    voxel_count: int
    volume: float             # m^3
    aabb: tuple               # ((x0,y0,z0), (x1,y1,z1)) world meters
    seed_voxel: tuple
    openness: str             # "enclosed" | "vented"


@njit(cache=True)
def _voxelize_kernel(occ, origin, res, pos, rot, cls_of, pln, pln_off,
                     cls_brad):
    nx, ny, nz = occ.shape
    for b in range(pos.shape[0]):
        c = cls_of[b]
        r = cls_brad[c]
        # cell range overlapped by the bounding sphere
        i0 = max(int(np.floor((pos[b, 0] - r - origin[0]) / res)), 0)
        j0 = max(int(np.floor((pos[b, 1] - r - origin[1]) / res)), 0)
        k0 = max(int(np.floor((pos[b, 2] - r - origin[2]) / res)), 0)
        i1 = min(int(np.ceil((pos[b, 0] + r - origin[0]) / res)), nx)
        j1 = min(int(np.ceil((pos[b, 1] + r - origin[1]) / res)), ny)
        k1 = min(int(np.ceil((pos[b, 2] + r - origin[2]) / res)), nz)
        s = pln_off[c]
        e = pln_off[c + 1]
        for i in range(i0, i1):
            px = origin[0] + (i + 0.5) * res - pos[b, 0]
            for j in range(j0, j1):
                py = origin[1] + (j + 0.5) * res - pos[b, 1]
                for k in range(k0, k1):
                    if occ[i, j, k]:
                        continue
                    pz = origin[2] + (k + 0.5) * res - pos[b, 2]
                    # body frame = R^T * offset
                    lx = rot[b, 0, 0] * px + rot[b, 1, 0] * py + rot[b, 2, 0] * pz
                    ly = rot[b, 0, 1] * px + rot[b, 1, 1] * py + rot[b, 2, 1] * pz
                    lz = rot[b, 0, 2] * px + rot[b, 1, 2] * py + rot[b, 2, 2] * pz
                    inside = True
                    for f in range(s, e):
                        if (pln[f, 0] * lx + pln[f, 1] * ly + pln[f, 2] * lz
                                > pln[f, 3]):
                            inside = False
                            break
                    if inside:
                        occ[i, j, k] = True


def voxelize(pile, resolution: float = DEFAULT_RESOLUTION,
             max_cells: int = MAX_CELLS) -> VoxelGrid:
    """Voxelize a settled pile; cell solid iff its center is inside a body."""
    if resolution <= 0:
        raise VoidsError("resolution must be > 0")
    instances = pile.instances
    if not instances:
        return VoxelGrid(np.zeros(3), resolution, (3, 3, 3),
                         np.zeros((3, 3, 3), dtype=bool))
    packed = pack_catalog(pile.catalog)
    pos = np.array([i.position for i in instances])
    quat = np.array([i.orientation for i in instances])
    cls_of = np.array([pile.catalog.index[i.class_id] for i in instances],
                      dtype=np.int64)
    rad = packed.brad[cls_of]
    lo = (pos - rad[:, None]).min(axis=0)
    hi = (pos + rad[:, None]).max(axis=0)
    # pad by one guaranteed-empty border cell
    origin = lo - resolution
    dims = np.ceil((hi - origin) / resolution).astype(int) + 1
    if int(np.prod(dims)) > max_cells:
        raise VoidsError("voxel grid %s exceeds cell budget %d"
                         % (tuple(dims), max_cells))
    occ = np.zeros(tuple(dims), dtype=bool)
    rot = np.stack([quat_to_matrix(q) for q in quat])
    _voxelize_kernel(occ, origin.astype(np.float64), float(resolution),
                     pos.astype(np.float64), rot, cls_of,
                     packed.pln, packed.pln_off, packed.brad)
    # border ring stays empty by construction; enforce the invariant anyway
    occ[0, :, :] = occ[-1, :, :] = False
    occ[:, 0, :] = occ[:, -1, :] = False
    occ[:, :, 0] = occ[:, :, -1] = False
    return VoxelGrid(origin, float(resolution), tuple(int(d) for d in dims),
                     occ)


def _exterior(empty):
    """Empty cells 6-connected to the grid border."""
    labels, n = ndimage.label(empty, structure=_CONN6)
    if n == 0:
        return np.zeros(empty.shape, dtype=bool)
    border = np.unique(np.concatenate([
        labels[0, :, :].ravel(), labels[-1, :, :].ravel(),
        labels[:, 0, :].ravel(), labels[:, -1, :].ravel(),
        labels[:, :, 0].ravel(), labels[:, :, -1].ravel()]))
    border = border[border > 0]
    return np.isin(labels, border)


def find_voids(grid: VoxelGrid,
               aperture_threshold: float = APERTURE_THRESHOLD):
    """Void regions of a voxel grid, sorted by volume descending."""
    n_dilate = int(round(aperture_threshold / grid.resolution))
    # pad so dilated solids can never touch the border and pinch off the
    # exterior fill
    pad = n_dilate
    solid = np.pad(grid.occupancy, pad) if pad else grid.occupancy
    empty = ~solid
    ext_a = _exterior(empty)
    if n_dilate > 0:
        # exterior of the aperture-sealed grid: solids grown by the
        # aperture radius close sub-threshold openings
        dilated = ndimage.binary_dilation(solid, structure=_CONN6,
                                          iterations=n_dilate)
        ext = _exterior(~dilated)
        # grow the sealed exterior back through real air so cells the
        # dilation ate near open surfaces are still counted as exterior;
        # sealed apertures are re-entered by at most n_dilate cells
        for _ in range(n_dilate):
            ext = ndimage.binary_dilation(ext, structure=_CONN6) & empty
    else:
        ext = ext_a
    labels, n = ndimage.label(empty & ~ext, structure=_CONN6)
    regions = []
    for lab in range(1, n + 1):
        mask = labels == lab
        # vented: reachable from outside in the unsealed grid
        vented = bool((mask & ext_a).any())
        idx = np.argwhere(mask) - pad
        lo = grid.origin + idx.min(axis=0) * grid.resolution
        hi = grid.origin + (idx.max(axis=0) + 1) * grid.resolution
        regions.append(VoidRegion(
            id=0, voxel_count=int(mask.sum()),
            volume=float(mask.sum()) * grid.resolution ** 3,
            aabb=(tuple(lo), tuple(hi)),
            seed_voxel=tuple(int(x) for x in idx[0]),
            openness="vented" if vented else "enclosed"))
    regions.sort(key=lambda r: (-r.volume, r.seed_voxel))
    return [VoidRegion(i + 1, r.voxel_count, r.volume, r.aabb, r.seed_voxel,
                       r.openness) for i, r in enumerate(regions)]


def void_report(regions):
    """One line per region: `id volume_m3 enclosed|vented aabb`."""
    lines = []
    for r in regions:
        (x0, y0, z0), (x1, y1, z1) = r.aabb
        lines.append("%d %.6f %s %.3f %.3f %.3f %.3f %.3f %.3f"
                     % (r.id, r.volume, r.openness, x0, y0, z0, x1, y1, z1))
    return "\n".join(lines)
