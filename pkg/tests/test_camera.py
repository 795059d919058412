import numpy as np
import pytest

from rubblepile.camera import (CameraError, CameraState, MotionCommand,
                               Trajectory, apply_command, look_at_quaternion,
                               parse_waypoints, quat_from_axis_angle,
                               run_script, slerp)


def test_axial_advance():
    s = CameraState()
    s2 = apply_command(s, MotionCommand(axial_speed=1.0), 1.0)
    assert np.allclose(s2.position, [1.0, 0.0, 0.0])


def test_half_turn_reverses():
    s = CameraState()
    s = apply_command(s, MotionCommand(dyaw=np.pi), 1e-6)
    s = apply_command(s, MotionCommand(axial_speed=1.0), 1.0)
    # started at ~0 (tiny advance during the turn step), ends 1 m behind
    assert np.linalg.norm(s.position - [-1.0, 0.0, 0.0]) < 1e-9


def test_four_quarter_yaws_identity():
    s = CameraState()
    q0 = s.orientation
    for _ in range(4):
        s = apply_command(s, MotionCommand(dyaw=np.pi / 2), 1e-9)
    assert min(np.linalg.norm(s.orientation - q0),
               np.linalg.norm(s.orientation + q0)) < 1e-6


def test_zero_command_is_identity():
    s = CameraState(position=np.array([1.0, 2.0, 3.0]))
    s2 = apply_command(s, MotionCommand(), 0.1)
    assert np.allclose(s2.position, s.position)
    assert np.allclose(s2.orientation, s.orientation)


def test_unit_quaternion_maintained():
    rng = np.random.default_rng(1)
    s = CameraState()
    for _ in range(200):
        cmd = MotionCommand(*rng.normal(0, 0.3, 3), axial_speed=rng.normal())
        s = apply_command(s, cmd, 0.05)
        assert abs(np.linalg.norm(s.orientation) - 1) < 1e-9


def test_nonfinite_command_rejected():
    with pytest.raises(CameraError):
        MotionCommand(dyaw=float("nan"))


def test_dt_must_be_positive():
    with pytest.raises(CameraError):
        apply_command(CameraState(), MotionCommand(), 0.0)


def test_vfov_bounds():
    with pytest.raises(CameraError):
        CameraState(vfov_deg=5.0)
    with pytest.raises(CameraError):
        CameraState(vfov_deg=175.0)


def test_run_script_sample_count():
    wps = [(np.array([0.0, 0, 1]), np.array([10.0, 0, 1])),
           (np.array([3.0, 0, 1]), np.array([10.0, 0, 1]))]
    traj = run_script(None, wps, rate=30, speed=1.0)
    assert len(traj) == 91
    ts = [t for t, _ in traj]
    assert ts[0] == 0.0
    assert abs(ts[-1] - 3.0) < 1e-9
    steps = np.diff(ts)
    assert np.all(np.abs(steps - 1 / 30) < 1e-9)


def test_run_script_collinear_positions():
    a = np.array([0.0, 0, 1])
    b = np.array([2.0, 1.0, 1.5])
    traj = run_script(None, [(a, b + [5, 0, 0]), (b, b + [5, 0, 0])],
                      rate=30, speed=0.7)
    d = b - a
    d = d / np.linalg.norm(d)
    for _, s in traj:
        off = s.position - a
        assert np.linalg.norm(off - (off @ d) * d) < 1e-9


def test_run_script_parallel_lookats_constant_orientation():
    wps = [(np.array([0.0, 0, 1]), np.array([100.0, 0, 1])),
           (np.array([5.0, 0, 1]), np.array([105.0, 0, 1]))]
    traj = run_script(None, wps)
    qs = np.array([s.orientation for _, s in traj])
    assert np.allclose(qs, qs[0], atol=1e-9)


def test_run_script_errors():
    with pytest.raises(CameraError):
        run_script(None, [(np.zeros(3), np.ones(3))])
    with pytest.raises(CameraError):
        run_script(None, [(np.zeros(3), np.ones(3)),
                          (np.zeros(3), np.ones(3))])


def test_trajectory_strictly_increasing():
    s = CameraState()
    with pytest.raises(CameraError):
        Trajectory([(0.0, s), (0.0, s)])


def test_look_at_points_forward():
    q = look_at_quaternion([0, 0, 0], [3, 4, 0])
    s = CameraState(orientation=q)
    assert np.allclose(s.forward, [0.6, 0.8, 0.0])
    assert s.up[2] > 0


def test_slerp_endpoints():
    qa = np.array([0.0, 0, 0, 1])
    qb = quat_from_axis_angle([0, 0, 1], 1.0)
    assert np.allclose(slerp(qa, qb, 0), qa)
    assert np.allclose(slerp(qa, qb, 1), qb)


def test_parse_waypoints():
    text = "# comment\n0 0 1 5 0 1\n\n1.0 2 3 4 5 6  # inline\n"
    wps = parse_waypoints(text)
    assert len(wps) == 2
    assert np.allclose(wps[1][0], [1, 2, 3])
    with pytest.raises(CameraError):
        parse_waypoints("1 2 3\n")
