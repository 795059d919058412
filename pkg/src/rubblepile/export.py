"""Dataset persistence: binary STL mesh export and per-frame RGB/depth/pose
datasets consumable by external SfM/SLAM tooling.

Layout of a dataset directory:
  rgb/%06d.png        8-bit RGB
  depth/%06d.png      16-bit grayscale, millimeters, 0 = no hit
  groundtruth.txt     `timestamp tx ty tz qx qy qz qw` per frame (9 decimals)
  manifest.txt        config snapshot, hash, seed, frame count, rate
  pile.stl            settled pile geometry, meters
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np
from PIL import Image

DEPTH_SATURATE_MM = 65535   # 16-bit ceiling == 65.535 m


class ExportError(RuntimeError):
    pass


@dataclass
class DatasetManifest:
    root: str
    config_text: str          # serialized config snapshot
    config_hash: str
    seed: int
    frame_count: int
    rate: float
    naming = "rgb/%06d.png depth/%06d.png"
    stl_path = "pile.stl"

    def text(self):
        lines = ["hash %s" % self.config_hash,
                 "seed %d" % self.seed,
                 "frames %d" % self.frame_count,
                 "rate %.6f" % self.rate,
                 "naming %s" % self.naming,
                 "stl %s" % self.stl_path,
                 "config-begin"]
        lines += self.config_text.splitlines()
        lines.append("config-end")
        return "\n".join(lines) + "\n"


def export_stl(pile, path):
    """Write the pile's triangle soup as a binary STL (units: meters).

    The 80-byte header carries the pile's config hash so exported meshes
    are traceable to the run that produced them.
    """
    tris, _ = pile.triangle_soup()
    tris = np.asarray(tris, dtype=np.float32)
    n = len(tris)
    e1 = tris[:, 1] - tris[:, 0]
    e2 = tris[:, 2] - tris[:, 0]
    normals = np.cross(e1, e2)
    lens = np.linalg.norm(normals, axis=1, keepdims=True)
    np.divide(normals, lens, out=normals, where=lens > 0)
    header = ("hash %s" % pile.config_hash).encode()[:80].ljust(80, b"\0")
    # vectorized record assembly: normal, 3 vertices, attribute count
    rec = np.zeros(n, dtype=[("n", "<f4", 3), ("v", "<f4", (3, 3)),
                             ("attr", "<u2")])
    rec["n"] = normals
    rec["v"] = tris
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(struct.pack("<I", n))
            fh.write(rec.tobytes())
    except OSError as exc:
        raise ExportError("STL write failed: %s" % exc) from exc
    return path


def read_stl(path):
    """Read back a binary STL -> (header bytes, (T,3,3) float32 vertices)."""
    with open(path, "rb") as fh:
        header = fh.read(80)
        (n,) = struct.unpack("<I", fh.read(4))
        rec = np.frombuffer(fh.read(n * 50),
                            dtype=[("n", "<f4", 3), ("v", "<f4", (3, 3)),
                                   ("attr", "<u2")])
    if len(rec) != n:
        raise ExportError("truncated STL: %d of %d records" % (len(rec), n))
    return header, rec["v"].copy()


def depth_to_png16(depth):
    """Planar depth in meters -> 16-bit millimeter image (0 = no hit)."""
    mm = np.round(np.asarray(depth, dtype=np.float64) * 1000.0)
    return np.clip(mm, 0, DEPTH_SATURATE_MM).astype(np.uint16)


def pose_row(timestamp, state):
    p = state.position
    q = state.orientation
    return ("%.9f %.9f %.9f %.9f %.9f %.9f %.9f %.9f"
            % (timestamp, p[0], p[1], p[2], q[0], q[1], q[2], q[3]))


def write_dataset(frames, manifest: DatasetManifest, pile=None):
    """Write a frame stream (in index order) as a dataset directory."""
    root = manifest.root
    os.makedirs(os.path.join(root, "rgb"), exist_ok=True)
    os.makedirs(os.path.join(root, "depth"), exist_ok=True)
    rows = []
    expected = 0
    for frame in frames:
        if frame.frame_index != expected:
            raise ExportError("frame index gap: got %d, expected %d"
                              % (frame.frame_index, expected))
        expected += 1
        name = "%06d.png" % frame.frame_index
        Image.fromarray(frame.rgb, mode="RGB").save(
            os.path.join(root, "rgb", name))
        Image.fromarray(depth_to_png16(frame.depth)).save(
            os.path.join(root, "depth", name))
        rows.append(pose_row(frame.timestamp, frame.pose))
    if expected != manifest.frame_count:
        raise ExportError("wrote %d frames, manifest says %d"
                          % (expected, manifest.frame_count))
    with open(os.path.join(root, "groundtruth.txt"), "w") as fh:
        fh.write("\n".join(rows) + ("\n" if rows else ""))
    with open(os.path.join(root, "manifest.txt"), "w") as fh:
        fh.write(manifest.text())
    if pile is not None:
        export_stl(pile, os.path.join(root, manifest.stl_path))
    return root


def read_depth_png(path):
    """16-bit depth PNG -> meters (0 stays 0 = no hit)."""
    img = np.asarray(Image.open(path), dtype=np.uint16)
    return img.astype(np.float64) / 1000.0


def read_groundtruth(path):
    """groundtruth.txt -> list of (timestamp, position (3,), quat (4,))."""
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 8:
                raise ExportError("groundtruth line %d: expected 8 fields"
                                  % lineno)
            vals = [float(x) for x in parts]
            out.append((vals[0], np.array(vals[1:4]), np.array(vals[4:8])))
    return out
