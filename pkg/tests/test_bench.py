import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rubblepile.bench import (AlignmentError, BenchError, EstimateRecord,
                              EstimatedTrajectory, align_model,
                              compute_report, count_segments, load_estimate)


def _gt(n, step=0.1):
    return [(i / 30.0, np.array([np.cos(i * 0.07) * 3,
                                 np.sin(i * 0.07) * 3,
                                 1.0 + step * i]),
             np.array([0.0, 0.0, 0.0, 1.0])) for i in range(n)]


def _records(gt, idxs, model_id=0, transform=None, noise=None):
    recs = []
    for i in idxs:
        p = gt[i][1]
        if transform is not None:
            p = transform(p)
        if noise is not None:
            p = p + noise[i]
        recs.append(EstimateRecord("%06d.png" % i, model_id, np.asarray(p),
                                   np.array([0.0, 0.0, 0.0, 1.0])))
    return recs


def test_align_identity():
    X = np.random.default_rng(0).random((10, 3))
    fit = align_model(X, X)
    assert abs(fit["scale"] - 1) < 1e-12
    assert fit["rmse"] < 1e-12


def test_align_recovers_similarity():
    rng = np.random.default_rng(1)
    X = rng.random((12, 3))
    # random rotation via QR
    Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    t = np.array([1.0, -2.0, 3.0])
    Y = 2.0 * X @ Q.T + t
    fit = align_model(X, Y)
    assert abs(fit["scale"] - 2.0) < 1e-9
    assert np.abs(fit["rotation"] - Q).max() < 1e-9
    assert np.abs(fit["translation"] - t).max() < 1e-9
    assert fit["rmse"] < 1e-9


def test_align_noise_monte_carlo():
    rng = np.random.default_rng(7)
    rmses = []
    for _ in range(100):
        X = rng.random((10, 3)) * 5
        Y = X + rng.normal(0, 0.01, X.shape)
        rmses.append(align_model(X, Y)["rmse"])
    assert np.mean(rmses) <= 0.02


def test_align_too_few():
    with pytest.raises(AlignmentError):
        align_model(np.zeros((2, 3)), np.zeros((2, 3)))


def test_align_collinear():
    line = np.outer(np.arange(6, dtype=float), [1.0, 0, 0])
    with pytest.raises(AlignmentError, match="collinear"):
        align_model(line, line)


def _brute_segments(on, mid):
    segs, i, n = 0, 0, len(on)
    while i < n:
        if on[i]:
            segs += 1
            m = mid[i]
            while i < n and on[i] and mid[i] == m:
                i += 1
        else:
            i += 1
    return segs


@settings(max_examples=300, deadline=None)
@given(st.lists(st.tuples(st.booleans(), st.integers(0, 3)), max_size=60))
def test_segments_match_brute_force(flags):
    on = [f for f, _ in flags]
    mid = [m if f else None for f, m in flags]
    assert count_segments(on, mid) == _brute_segments(on, mid)


def test_report_all_on_track():
    gt = _gt(40)
    est = EstimatedTrajectory(_records(gt, range(40)), {0: 10})
    rep = compute_report(est, gt)
    assert rep.track_segments == 1
    assert rep.pct_on_track == 100.0
    assert rep.points == 10


def test_report_two_models_gap():
    gt = _gt(88)
    recs = (_records(gt, range(0, 29), model_id=0)
            + _records(gt, range(58, 88), model_id=1))
    est = EstimatedTrajectory(recs, {0: 100, 1: 200})
    rep = compute_report(est, gt)
    assert rep.track_segments == 2
    assert rep.pct_on_track == round(100 * 59 / 88, 1)


def test_report_invariant_under_similarity():
    gt = _gt(50)
    rng = np.random.default_rng(3)
    Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    xf = lambda p: 3.7 * Q @ p + np.array([10.0, -4.0, 2.0])
    base = compute_report(
        EstimatedTrajectory(_records(gt, range(50)), {0: 5}), gt)
    moved = compute_report(
        EstimatedTrajectory(_records(gt, range(50), transform=xf), {0: 5}), gt)
    assert base.pct_on_track == moved.pct_on_track == 100.0
    assert base.track_segments == moved.track_segments == 1


def test_failed_model_marks_frames_off_track():
    gt = _gt(30, step=0.0)
    # model 1 has only 2 frames: alignment impossible, frames off-track
    recs = (_records(gt, range(0, 10), model_id=0)
            + _records(gt, [20, 21], model_id=1))
    est = EstimatedTrajectory(recs, {0: 1, 1: 1})
    rep = compute_report(est, gt)
    assert rep.pct_on_track == round(100 * 10 / 30, 1)
    assert rep.alignments[1] is None


def test_table2_exterior_row():
    gt = _gt(136)
    recs = _records(gt, range(126),
                    transform=lambda p: 0.5 * p + np.array([1.0, 2.0, 3.0]))
    est = EstimatedTrajectory(recs, {0: 79885})
    rep = compute_report(est, gt)
    assert rep.row() == "126 1 92.6 79885"


def test_load_estimate_tum(tmp_path):
    gt = _gt(10)
    p = tmp_path / "est.txt"
    lines = ["# points 0 42"]
    for r in _records(gt, range(10)):
        lines.append("%s %f %f %f %f %f %f %f %d"
                     % ((r.name,) + tuple(r.position)
                        + tuple(r.orientation) + (r.model_id,)))
    p.write_text("\n".join(lines) + "\n")
    est = load_estimate(str(p))
    assert len(est.records) == 10
    assert est.points == 42
    assert est.model_histogram() == {0: 10}


def test_load_estimate_empty(tmp_path):
    p = tmp_path / "empty.txt"
    p.write_text("")
    est = load_estimate(str(p))
    assert est.records == [] and est.points == 0


def test_load_estimate_malformed(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("000001.png 1 2 3\n")
    with pytest.raises(BenchError, match="line 1"):
        load_estimate(str(p))


def test_load_estimate_duplicate(tmp_path):
    p = tmp_path / "dup.txt"
    row = "000001.png 0 0 0 0 0 0 1 0\n"
    p.write_text(row + row)
    with pytest.raises(BenchError, match="duplicate"):
        load_estimate(str(p))


def test_load_estimate_colmap_dir(tmp_path):
    d = tmp_path / "model"
    d.mkdir()
    gt = _gt(20)
    img_lines = ["# colmap images"]
    for i, r in enumerate(_records(gt, range(20))):
        # world-to-camera with R=I: t = -C
        img_lines.append("%d 1 0 0 0 %f %f %f 1 %s"
                         % ((i + 1,) + tuple(-r.position) + (r.name,)))
        img_lines.append("0 0 -1")   # 2D-points line
    (d / "images.txt").write_text("\n".join(img_lines) + "\n")
    (d / "points3D.txt").write_text(
        "# pts\n" + "\n".join("%d 0 0 0" % k for k in range(55)) + "\n")
    est = load_estimate(str(d))
    assert len(est.records) == 20
    assert est.points == 55
    rep = compute_report(est, gt)
    assert rep.pct_on_track == 100.0


def test_model_histogram():
    gt = _gt(60)
    recs = (_records(gt, range(0, 40), model_id=0)
            + _records(gt, range(40, 60), model_id=1))
    est = EstimatedTrajectory(recs, {})
    assert est.model_histogram() == {0: 40, 1: 20}
