"""Debris archetype catalog: convex shapes, mass properties, weighted sampling.

Every collision shape is a convex polyhedron. Cylinders are discretized to
12-sided prisms so that collision, rendering, voxelization, and STL export all
agree on one geometry.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull

CYLINDER_SIDES = 12
EDGE_SAMPLE_SPACING = 0.25  # m, contact point subdivision along hull edges
FACE_SAMPLE_SPACING = 0.50  # m, interior grid on large box faces


class AssetError(ValueError):
    """Malformed asset definition, duplicate id, or degenerate shape."""


def _mesh_mass_properties(verts, tris):
    """Volume, centroid, and unit-density inertia (about centroid) of a closed
    triangle mesh, via the divergence theorem (Mirtich-style polyhedron
    integrals over tetrahedra against the origin)."""
    v0 = verts[tris[:, 0]]
    v1 = verts[tris[:, 1]]
    v2 = verts[tris[:, 2]]
    det = np.einsum("ij,ij->i", v0, np.cross(v1, v2))
    volume = det.sum() / 6.0
    if volume <= 0:
        raise AssetError("degenerate shape: non-positive volume")
    centroid = (det[:, None] * (v0 + v1 + v2)).sum(axis=0) / (24.0 * volume)

    # inertia integrals of each origin tetrahedron, summed
    def sq_sum(a, b, c, i):
        return (a[:, i] ** 2 + b[:, i] ** 2 + c[:, i] ** 2
                + a[:, i] * b[:, i] + b[:, i] * c[:, i] + c[:, i] * a[:, i])

    intg_x2 = (det * sq_sum(v0, v1, v2, 0)).sum() / 60.0
    intg_y2 = (det * sq_sum(v0, v1, v2, 1)).sum() / 60.0
    intg_z2 = (det * sq_sum(v0, v1, v2, 2)).sum() / 60.0

    def prod_sum(a, b, c, i, j):
        return ((2 * a[:, i] + b[:, i] + c[:, i]) * a[:, j]
                + (a[:, i] + 2 * b[:, i] + c[:, i]) * b[:, j]
                + (a[:, i] + b[:, i] + 2 * c[:, i]) * c[:, j])

    intg_xy = (det * prod_sum(v0, v1, v2, 0, 1)).sum() / 120.0
    intg_yz = (det * prod_sum(v0, v1, v2, 1, 2)).sum() / 120.0
    intg_zx = (det * prod_sum(v0, v1, v2, 2, 0)).sum() / 120.0

    inertia = np.array([
        [intg_y2 + intg_z2, -intg_xy, -intg_zx],
        [-intg_xy, intg_x2 + intg_z2, -intg_yz],
        [-intg_zx, -intg_yz, intg_x2 + intg_y2],
    ])
    # shift to centroid (parallel axis, unit density)
    c = centroid
    inertia -= volume * (np.dot(c, c) * np.eye(3) - np.outer(c, c))
    return volume, centroid, inertia


def _box_vertices(w, h, d):
    sx, sy, sz = w / 2.0, h / 2.0, d / 2.0
    return np.array([[x, y, z] for x in (-sx, sx) for y in (-sy, sy)
                     for z in (-sz, sz)], dtype=np.float64)


def _cylinder_vertices(radius, height):
    ang = 2.0 * np.pi * np.arange(CYLINDER_SIDES) / CYLINDER_SIDES
    ring = np.stack([radius * np.cos(ang), radius * np.sin(ang)], axis=1)
    top = np.column_stack([ring, np.full(CYLINDER_SIDES, height / 2.0)])
    bot = np.column_stack([ring, np.full(CYLINDER_SIDES, -height / 2.0)])
    return np.vstack([top, bot])


def _edge_samples(verts, hull):
    """Hull vertices plus points subdividing long edges (contact samples)."""
    edges = set()
    for simplex in hull.simplices:
        for a, b in ((0, 1), (1, 2), (2, 0)):
            i, j = simplex[a], simplex[b]
            edges.add((min(i, j), max(i, j)))
    pts = [verts]
    for i, j in sorted(edges):
        a, b = verts[i], verts[j]
        length = np.linalg.norm(b - a)
        n = int(length / EDGE_SAMPLE_SPACING)
        if n >= 1:
            t = (np.arange(1, n + 1) / (n + 1))[:, None]
            pts.append(a + t * (b - a))
    return np.vstack(pts)


def _box_face_samples(w, h, d):
    """Interior grid points on large box faces; stabilizes face-on-face rest."""
    out = []
    dims = np.array([w, h, d])
    for axis in range(3):
        u, v = (axis + 1) % 3, (axis + 2) % 3
        nu = int(dims[u] / FACE_SAMPLE_SPACING)
        nv = int(dims[v] / FACE_SAMPLE_SPACING)
        if nu < 1 or nv < 1:
            continue
        us = (np.arange(1, nu + 1) / (nu + 1) - 0.5) * dims[u]
        vs = (np.arange(1, nv + 1) / (nv + 1) - 0.5) * dims[v]
        for s in (-0.5, 0.5):
            for uu in us:
                for vv in vs:
                    p = np.zeros(3)
                    p[axis] = s * dims[axis]
                    p[u] = uu
                    p[v] = vv
                    out.append(p)
    return np.array(out) if out else np.zeros((0, 3))


@dataclass
class AssetClass:
    id: str
    shape: str                 # box | cylinder | hull
    dims: tuple                # box: (w,h,d); cylinder: (radius, height)
    density: float
    friction: float = 0.6
    restitution: float = 0.05  # concrete debris barely bounces
    weight: float = 1.0
    albedo: tuple = (0.55, 0.55, 0.52)
    texture_id: str | None = None
    # derived geometry (body frame, centroid at origin)
    verts: np.ndarray = field(default=None, repr=False)
    tris: np.ndarray = field(default=None, repr=False)      # (T,3) vertex idx
    planes: np.ndarray = field(default=None, repr=False)    # (F,4): n.x <= d
    samples: np.ndarray = field(default=None, repr=False)   # contact points
    volume: float = 0.0
    mass: float = 0.0
    inertia: np.ndarray = field(default=None, repr=False)
    inv_inertia: np.ndarray = field(default=None, repr=False)
    bounding_radius: float = 0.0
    half_extents: np.ndarray = field(default=None, repr=False)  # body-frame AABB

    def finalize(self):
        if self.density <= 0:
            raise AssetError("%s: density must be > 0" % self.id)
        if self.friction < 0:
            raise AssetError("%s: friction must be >= 0" % self.id)
        if not 0 <= self.restitution <= 1:
            raise AssetError("%s: restitution must be in [0,1]" % self.id)
        if self.weight < 0:
            raise AssetError("%s: weight must be >= 0" % self.id)

        if self.shape == "box":
            w, h, d = self.dims
            if min(w, h, d) <= 0:
                raise AssetError("%s: box dims must be > 0" % self.id)
            raw = _box_vertices(w, h, d)
        elif self.shape == "cylinder":
            radius, height = self.dims
            if radius <= 0 or height <= 0:
                raise AssetError("%s: cylinder dims must be > 0" % self.id)
            raw = _cylinder_vertices(radius, height)
        elif self.shape == "hull":
            raw = np.asarray(self.dims, dtype=np.float64).reshape(-1, 3)
            if len(raw) < 4:
                raise AssetError("%s: hull needs >= 4 vertices" % self.id)
        else:
            raise AssetError("%s: unknown shape %r" % (self.id, self.shape))

        try:
            hull = ConvexHull(raw)
        except Exception as e:
            raise AssetError("%s: degenerate hull: %s" % (self.id, e)) from None

        verts = raw[hull.vertices]
        hull = ConvexHull(verts)  # reindex to the reduced vertex set
        tris = hull.simplices.copy()
        # orient all triangles outward (positive volume against interior point)
        inside = verts.mean(axis=0)
        v0, v1, v2 = verts[tris[:, 0]], verts[tris[:, 1]], verts[tris[:, 2]]
        flip = np.einsum("ij,ij->i", np.cross(v1 - v0, v2 - v0), v0 - inside) < 0
        tris[flip] = tris[flip][:, [0, 2, 1]]

        volume, centroid, unit_inertia = _mesh_mass_properties(verts, tris)
        verts = verts - centroid  # centroid at body origin
        hull = ConvexHull(verts)

        self.verts = verts
        self.tris = tris
        # deduplicate coplanar face planes
        eqs = np.unique(np.round(hull.equations, 9), axis=0)
        self.planes = np.column_stack([eqs[:, :3], -eqs[:, 3]])  # n.x <= d
        samples = _edge_samples(verts, hull)
        if self.shape == "box":
            face = _box_face_samples(*self.dims)
            if len(face):
                samples = np.vstack([samples, face])
        self.samples = np.ascontiguousarray(samples)
        self.volume = float(volume)
        self.mass = float(self.density * volume)
        self.inertia = self.density * unit_inertia
        self.inv_inertia = np.linalg.inv(self.inertia)
        self.bounding_radius = float(np.linalg.norm(verts, axis=1).max())
        self.half_extents = np.abs(verts).max(axis=0)
        return self


@dataclass
class Catalog:
    classes: list
    index: dict = field(default=None)
    cumulative: np.ndarray = field(default=None)

    def __post_init__(self):
        ids = [c.id for c in self.classes]
        if len(set(ids)) != len(ids):
            raise AssetError("duplicate asset class id")
        self.index = {c.id: i for i, c in enumerate(self.classes)}
        weights = np.array([c.weight for c in self.classes], dtype=np.float64)
        total = weights.sum()
        if total <= 0:
            raise AssetError("all asset weights are zero")
        self.cumulative = np.cumsum(weights / total)

    def with_weights(self, asset_weights: dict) -> "Catalog":
        """New catalog with per-id selection weights overridden."""
        unknown = set(asset_weights) - set(self.index)
        if unknown:
            raise AssetError("unknown asset ids in weights: %s" % sorted(unknown))
        classes = []
        for c in self.classes:
            if c.id in asset_weights:
                c = AssetClass(c.id, c.shape, c.dims, c.density, c.friction,
                               c.restitution, asset_weights[c.id], c.albedo,
                               c.texture_id).finalize()
            classes.append(c)
        return Catalog(classes)

    def __len__(self):
        return len(self.classes)

    def __getitem__(self, key):
        if isinstance(key, str):
            return self.classes[self.index[key]]
        return self.classes[key]


def _parse_asset_file(path):
    kv = {}
    hull_verts = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise AssetError("%s:%d: malformed line %r" % (path, lineno, line))
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key == "hull_vertex":
                hull_verts.append([float(x) for x in val.split()])
            else:
                kv[key] = val
    name = kv.pop("id", os.path.splitext(os.path.basename(path))[0])
    shape = kv.pop("shape", None)
    if shape is None:
        raise AssetError("%s: missing shape" % path)
    try:
        if shape == "hull":
            dims = tuple(map(tuple, hull_verts))
        else:
            dims = tuple(float(x) for x in kv.pop("dims", "").split())
        cls = AssetClass(
            id=name,
            shape=shape,
            dims=dims,
            density=float(kv.pop("density")),
            friction=float(kv.pop("friction", 0.6)),
            restitution=float(kv.pop("restitution", 0.05)),
            weight=float(kv.pop("weight", 1.0)),
            albedo=tuple(float(x) for x in kv.pop("albedo", "0.55 0.55 0.52").split()),
            texture_id=kv.pop("texture", None),
        )
    except (KeyError, ValueError) as e:
        raise AssetError("%s: %s" % (path, e)) from None
    if kv:
        raise AssetError("%s: unknown keys %s" % (path, sorted(kv)))
    return cls.finalize()


def load_catalog(path: str) -> Catalog:
    """Load all asset definition files (*.txt) from a directory."""
    files = sorted(f for f in os.listdir(path) if f.endswith(".txt"))
    if not files:
        raise AssetError("no asset classes in %s" % path)
    return Catalog([_parse_asset_file(os.path.join(path, f)) for f in files])


def default_catalog() -> Catalog:
    """Bundled debris set: slabs, cinder blocks, bricks, culverts, rebar."""
    return load_catalog(os.path.join(os.path.dirname(__file__), "data", "catalog"))


def sample_class(catalog: Catalog, rng) -> str:
    """Draw one asset class id with probability weight/total.

    Consumes exactly one rng draw regardless of outcome.
    """
    u = rng.random()
    idx = int(np.searchsorted(catalog.cumulative, u, side="right"))
    idx = min(idx, len(catalog.classes) - 1)
    return catalog.classes[idx].id
