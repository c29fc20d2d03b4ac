import numpy as np
import pytest

from laptime.track import (
    TrackError,
    curvature_from_xy,
    load_track_csv,
    make_mini_circuit,
    make_oval,
    make_s_curve,
    path_rate_chi,
    path_rates,
    save_track_csv,
)


def _circle_points(radius, step_deg=1.0):
    ang = np.deg2rad(np.arange(0.0, 360.0, step_deg))
    return np.column_stack([radius * np.cos(ang), radius * np.sin(ang)])


def test_collinear_points_zero_curvature():
    pts = np.column_stack([np.linspace(0, 100, 51), np.zeros(51)])
    track = curvature_from_xy(pts, closed=False)
    np.testing.assert_allclose(track.curvature, 0.0, atol=1e-12)


def test_circle_curvature_error():
    track = curvature_from_xy(_circle_points(50.0), closed=True)
    np.testing.assert_allclose(track.curvature, 0.02, atol=1e-5)
    assert track.total_length == pytest.approx(2 * np.pi * 50.0, rel=1e-4)


def test_ccw_circle_positive_curvature():
    track = curvature_from_xy(_circle_points(30.0), closed=True)
    assert np.all(track.curvature > 0)
    cw = curvature_from_xy(_circle_points(30.0)[::-1], closed=True)
    assert np.all(cw.curvature < 0)


def test_sine_crest_curvature():
    # analytic oracle: |C| = |y''| / (1 + y'^2)^1.5 -> 1 at the crest
    x = np.arange(0.0, np.pi, 0.002)
    pts = np.column_stack([x, np.sin(x)])
    track = curvature_from_xy(pts, closed=False, resample_step=0.01)
    s_crest = track.s[np.argmax(np.abs(track.curvature))]
    assert np.max(np.abs(track.curvature)) == pytest.approx(1.0, abs=1e-4)
    # crest sits at x = pi/2, arc length s = integral of sqrt(1+cos^2)
    assert 1.8 < s_crest < 2.0


def test_refinement_convergence_second_order():
    # independent oracle: analytic curvature of y = sin(x) mapped to arc length
    x_fine = np.linspace(0.0, np.pi, 40001)
    kappa_true = -np.sin(x_fine) / (1.0 + np.cos(x_fine) ** 2) ** 1.5
    s_fine = np.concatenate(
        [[0.0], np.cumsum(np.hypot(np.diff(x_fine), np.diff(np.sin(x_fine))))]
    )
    errors = []
    for step in (0.08, 0.04):
        x = np.arange(0.0, np.pi, step)
        track = curvature_from_xy(
            np.column_stack([x, np.sin(x)]), closed=False, resample_step=0.01
        )
        ref = np.interp(track.s, s_fine, kappa_true)
        interior = slice(20, -20)  # one-sided boundary stencils are first order
        errors.append(np.max(np.abs(track.curvature[interior] - ref[interior])))
    assert errors[0] / errors[1] >= 3.5


def test_coincident_points_rejected():
    pts = np.array([[0, 0], [1, 0], [1, 0], [2, 0], [3, 0]], dtype=float)
    with pytest.raises(TrackError, match="coincident"):
        curvature_from_xy(pts, closed=False)


def test_too_few_points_rejected():
    with pytest.raises(TrackError):
        curvature_from_xy(np.zeros((3, 2)))


def test_path_rates_identities():
    # straight run on the centerline
    s_dot, n_dot = path_rates(20.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    assert (s_dot, n_dot) == (20.0, 0.0)
    # heading rotated by pi/2
    s_dot, n_dot = path_rates(0.0, 20.0, np.pi / 2, 0.0, 0.0, 0.01)
    assert s_dot == pytest.approx(20.0)
    assert n_dot == pytest.approx(0.0, abs=1e-12)
    # offset such that n*C = 0.5 doubles the projection rate
    s_dot, _ = path_rates(15.0, 0.0, 0.0, 0.0, 25.0, 0.02)
    assert s_dot == pytest.approx(30.0)
    assert path_rate_chi(0.3, 0.02, 30.0) == pytest.approx(0.3 - 0.6)


def test_path_rates_singularity():
    with pytest.raises(TrackError, match="singularity"):
        path_rates(10.0, 0.0, 0.0, 0.0, 50.0, 0.02)


def test_chi_stays_zero_on_matched_circle():
    # a vehicle tracking the centerline of a circle keeps chi identically 0
    radius = 50.0
    track = curvature_from_xy(_circle_points(radius), closed=True)
    v = 20.0
    dt = 1e-3
    s, chi, yaw = 0.0, 0.0, np.pi / 2  # CCW circle tangent at angle 0
    for _ in range(2000):
        c_here = track.curvature_at(s)
        vx = v * np.cos(yaw)
        vy = v * np.sin(yaw)
        s_dot, n_dot = path_rates(vx, vy, yaw, chi, 0.0, c_here)
        chi_dot = path_rate_chi(v / radius, c_here, s_dot)
        s += s_dot * dt
        chi += chi_dot * dt
        yaw += (v / radius) * dt
    assert abs(chi) < 1e-3


def test_curvature_at_wraps_on_closed_track():
    track = curvature_from_xy(_circle_points(50.0), closed=True)
    assert track.curvature_at(0.0) == pytest.approx(0.02, abs=1e-5)
    assert track.curvature_at(track.total_length) == pytest.approx(
        track.curvature_at(0.0), abs=1e-12
    )
    assert track.curvature_at(track.total_length + 5.0) == pytest.approx(
        track.curvature_at(5.0), abs=1e-12
    )


def test_straight_track_query():
    pts = np.column_stack([np.linspace(0, 200, 101), np.zeros(101)])
    track = curvature_from_xy(pts, closed=False)
    assert track.curvature_at(123.4) == 0.0


def test_generators_close_and_validate():
    for maker, expected_len in ((make_oval, 1200.0), (make_mini_circuit, None)):
        track = maker()
        assert track.closed
        net = np.trapezoid(track.curvature, track.s)
        assert abs(abs(net) - 2 * np.pi) < 0.1
        track.validate(vehicle_half_width=0.8)
        if expected_len:
            assert track.total_length == pytest.approx(expected_len, rel=0.01)
    mini = make_mini_circuit()
    assert 1500.0 < mini.total_length < 2500.0
    assert np.min(mini.curvature) < -1e-3 < 1e-3 < np.max(mini.curvature)
    s_curve = make_s_curve()
    assert not s_curve.closed


def test_offset_position_consistency():
    track = make_oval()
    s = np.linspace(0, track.total_length, 50)
    x0, y0 = track.offset_position(s, 0.0)
    cx, cy = track.position_at(s)
    np.testing.assert_allclose(x0, cx)
    np.testing.assert_allclose(y0, cy)
    # the lateral offset is perpendicular to the tangent, at distance |n|
    for s_q in (150.0, 420.0, 800.0):
        xm, ym = track.position_at(s_q)
        xl, yl = track.offset_position(s_q, 2.0)
        assert np.hypot(xl - xm, yl - ym) == pytest.approx(2.0, abs=1e-9)
        th = track.heading_at(s_q)
        tangent = np.array([np.cos(th), np.sin(th)])
        offset = np.array([xl - xm, yl - ym])
        assert abs(tangent @ offset) < 1e-9
        # positive n sits to the left of the tangent
        assert np.cross(tangent, offset) > 0


def test_track_csv_roundtrip(tmp_path):
    track = make_oval()
    path = tmp_path / "oval.csv"
    save_track_csv(track, path)
    again = load_track_csv(path)
    assert again.closed
    assert again.total_length == pytest.approx(track.total_length)
    np.testing.assert_allclose(again.curvature, track.curvature, atol=1e-8)
    np.testing.assert_allclose(again.x, track.x, atol=1e-5)
