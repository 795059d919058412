import glob
import os

import numpy as np
import pytest

from rubblepile.assets import AssetClass, Catalog
from rubblepile.camera import run_script
from rubblepile.config import SimConfig, serialize
from rubblepile.deposition import BodyInstance, Pile
from rubblepile.export import (DatasetManifest, ExportError, depth_to_png16,
                               export_stl, read_depth_png, read_groundtruth,
                               read_stl, write_dataset)
from rubblepile.render import FogField, Frame, LightingRig, Scene, render_frame


def _boxes_pile(n):
    cube = AssetClass(id="cube", shape="box", dims=(1.0, 1.0, 1.0),
                      density=1000.0, friction=0.5, restitution=0.0,
                      weight=1.0, albedo=(0.5, 0.5, 0.5)).finalize()
    instances = [BodyInstance("cube", np.array([2.0 * i, 0.0, 0.5]),
                              np.array([0.0, 0.0, 0.0, 1.0]))
                 for i in range(n)]
    return Pile(instances, 0, 12345, 0, Catalog([cube]))


def test_stl_single_box(tmp_path):
    pile = _boxes_pile(1)
    path = tmp_path / "box.stl"
    export_stl(pile, path)
    header, tris = read_stl(path)
    assert len(tris) == 12
    v = tris.reshape(-1, 3)
    assert np.allclose(v.min(axis=0), [-0.5, -0.5, 0.0], atol=1e-6)
    assert np.allclose(v.max(axis=0), [0.5, 0.5, 1.0], atol=1e-6)
    assert b"12345" in header


def test_stl_triangle_count_scales(tmp_path):
    for n in (2, 5):
        path = tmp_path / ("p%d.stl" % n)
        export_stl(_boxes_pile(n), path)
        _, tris = read_stl(path)
        assert len(tris) == 12 * n


def test_stl_voxel_roundtrip(tmp_path, small_pile):
    from rubblepile.voids import voxelize
    path = tmp_path / "pile.stl"
    export_stl(small_pile, path)
    _, tris = read_stl(path)
    soup, _ = small_pile.triangle_soup()
    assert len(tris) == len(soup)
    assert np.allclose(tris, soup.astype(np.float32))


def test_depth_conversion():
    assert depth_to_png16(np.array([[1.234]]))[0, 0] == 1234
    assert depth_to_png16(np.array([[0.0]]))[0, 0] == 0
    assert depth_to_png16(np.array([[100.0]]))[0, 0] == 65535  # saturates


def _render_traj(pile, n_seconds=1.0, rate=10):
    scene = Scene(pile)
    wps = [(np.array([-3.0, 0, 2]), np.array([0, 0, 0.5])),
           (np.array([-3.0 + n_seconds, 0, 2]), np.array([0, 0, 0.5]))]
    traj = run_script(pile, wps, rate=rate, speed=1.0)
    rig = LightingRig()
    fog = FogField()
    frames = [render_frame(scene, st, rig, fog, t, frame_index=i)
              for i, (t, st) in enumerate(traj)]
    return traj, frames


def test_write_dataset_contract(tmp_path, small_pile):
    traj, frames = _render_traj(small_pile)
    root = str(tmp_path / "ds")
    man = DatasetManifest(root=root, config_text=serialize(SimConfig()),
                          config_hash="abc", seed=0,
                          frame_count=len(frames), rate=10.0)
    write_dataset(frames, man, pile=small_pile)
    assert len(glob.glob(os.path.join(root, "rgb", "*.png"))) == len(frames)
    assert len(glob.glob(os.path.join(root, "depth", "*.png"))) == len(frames)
    assert os.path.exists(os.path.join(root, "pile.stl"))
    gt = read_groundtruth(os.path.join(root, "groundtruth.txt"))
    assert len(gt) == len(frames)
    for ts, pos, quat in gt:
        assert abs(np.linalg.norm(quat) - 1) < 1e-6
    # timestamps as printed match the trajectory
    assert [t for t, _ in traj] == pytest.approx([g[0] for g in gt], abs=1e-9)


def test_depth_roundtrip_half_millimeter(tmp_path, small_pile):
    _, frames = _render_traj(small_pile, n_seconds=0.2, rate=10)
    root = str(tmp_path / "ds")
    man = DatasetManifest(root=root, config_text="", config_hash="x", seed=0,
                          frame_count=len(frames), rate=10.0)
    write_dataset(frames, man)
    d = read_depth_png(os.path.join(root, "depth", "000000.png"))
    mem = frames[0].depth
    mask = (mem > 0) & (mem < 65.535)
    assert np.abs(d - mem)[mask].max() <= 0.0005 + 1e-9
    # no-hit stays zero
    assert (d[mem == 0] == 0).all()


def test_frame_index_gap_rejected(tmp_path, small_pile):
    _, frames = _render_traj(small_pile, n_seconds=0.2, rate=10)
    frames[1].frame_index = 5
    man = DatasetManifest(root=str(tmp_path / "ds"), config_text="",
                          config_hash="x", seed=0,
                          frame_count=len(frames), rate=10.0)
    with pytest.raises(ExportError, match="gap"):
        write_dataset(frames, man)


def test_groundtruth_malformed_row(tmp_path):
    p = tmp_path / "gt.txt"
    p.write_text("0.0 1 2 3 0 0 0\n")
    with pytest.raises(ExportError, match="8 fields"):
        read_groundtruth(p)
