import numpy as np
import pytest

from laptime.tire import MagicFormulaTire, parse_tir, serialize_tir

ASYMMETRY_KEYS = [
    "PHX1", "PHX2", "PVX1", "PVX2", "PEX4",
    "PHY1", "PHY2", "PHY3", "PVY1", "PVY2", "PVY3", "PVY4", "PEY3", "PEY4",
    "RHX1", "RHY1", "RHY2", "RVY1", "RVY2", "RVY3", "RVY5", "RVY6",
    "QHZ1", "QHZ2", "QHZ3", "QHZ4", "QDZ6", "QDZ7", "QSX1",
]


def _symmetric_tire(tir_params):
    params = parse_tir(serialize_tir(tir_params))
    for key in ASYMMETRY_KEYS:
        params.set(key, 0.0)
    return MagicFormulaTire(params)


def test_zero_slip_zero_shift_gives_zero_planar_forces(tire):
    out = tire.forces(1500.0, 0.0, 0.0, 0.0, 20.0)
    # shipped file carries no shift terms, so zero slip means zero force
    assert out.fx == pytest.approx(0.0, abs=1e-12)
    assert out.fy == pytest.approx(0.0, abs=1e-12)
    assert out.mz == pytest.approx(0.0, abs=1e-12)


def test_odd_symmetry(tire, tir_params):
    sym = _symmetric_tire(tir_params)
    kappa = np.linspace(-0.3, 0.3, 41)
    alpha = np.linspace(-0.3, 0.3, 41)
    for fz in (400.0, 1500.0, 4000.0):
        plus = sym.forces(fz, kappa, 0.0, 0.0, 25.0)
        minus = sym.forces(fz, -kappa, 0.0, 0.0, 25.0)
        np.testing.assert_allclose(plus.fx, -minus.fx, atol=1e-12 * fz)
        plus = sym.forces(fz, 0.0, alpha, 0.0, 25.0)
        minus = sym.forces(fz, 0.0, -alpha, 0.0, 25.0)
        np.testing.assert_allclose(plus.fy, -minus.fy, atol=1e-12 * fz)
        np.testing.assert_allclose(plus.mz, -minus.mz, atol=1e-12 * fz)


def test_peak_force_matches_peak_factor(tire):
    # brute-force slip sweeps as the oracle for the peak factor identity
    kappa = np.linspace(-1.0, 1.0, 10_000)
    alpha = np.linspace(-0.5, 0.5, 10_000)
    for fz in (700.0, 1500.0, 3000.0):
        dx, dy = tire.peak_friction(fz)
        fx_peak = np.max(np.abs(tire.forces(fz, kappa, 0.0, 0.0, 25.0).fx))
        fy_peak = np.max(np.abs(tire.forces(fz, 0.0, alpha, 0.0, 25.0).fy))
        assert fx_peak == pytest.approx(float(dx), rel=5e-3)
        assert fy_peak == pytest.approx(float(dy), rel=5e-3)


def test_peak_inside_constraint_window(tire):
    # the path-constraint windows must contain the force peaks with margin
    kappa = np.linspace(-0.3, 0.3, 4001)
    fx = tire.forces(1500.0, kappa, 0.0, 0.0, 25.0).fx
    assert 0.02 < abs(kappa[np.argmax(fx)]) < 0.25
    alpha = np.linspace(-0.3, 0.3, 4001)
    fy = tire.forces(1500.0, 0.0, alpha, 0.0, 25.0).fy
    assert 0.02 < abs(alpha[np.argmax(fy)]) < 0.25


def test_batch_equals_scalar_loop(tire, rng):
    n = 64
    fz = rng.uniform(0.0, 5000.0, size=(4, n))
    kappa = rng.uniform(-0.5, 0.5, size=(4, n))
    alpha = rng.uniform(-0.4, 0.4, size=(4, n))
    gamma = rng.uniform(-0.1, 0.1, size=(4, n))
    vx = rng.uniform(0.0, 60.0, size=(1, n))
    batch = tire.forces(fz, kappa, alpha, gamma, vx)
    for i in range(4):
        for j in range(n):
            one = tire.forces(fz[i, j], kappa[i, j], alpha[i, j], gamma[i, j], vx[0, j])
            for name in ("fx", "fy", "mx", "my", "mz"):
                assert float(getattr(one, name)) == getattr(batch, name)[i, j]


def test_lift_off_outputs_exactly_zero(tire):
    out = tire.forces(0.0, 0.2, 0.1, 0.02, 30.0)
    for name in ("fx", "fy", "mx", "my", "mz"):
        assert float(getattr(out, name)) == 0.0
    out = tire.forces(-50.0, 0.2, 0.1, 0.02, 30.0)
    assert float(out.fx) == 0.0


def test_load_continuity_near_zero(tire):
    fz = np.array([1e-6, 1e-3, 1.0, 10.0])
    out = tire.forces(fz, 0.08, 0.05, 0.0, 20.0)
    assert np.all(np.abs(out.fx) <= 2.5 * fz)
    assert np.all(np.abs(out.fy) <= 2.5 * fz)


def test_friction_ellipse_bound(tire):
    kappa, alpha = np.meshgrid(np.linspace(-0.4, 0.4, 81), np.linspace(-0.4, 0.4, 81))
    for fz in (800.0, 1500.0, 3500.0):
        out = tire.forces(fz, kappa, alpha, 0.0, 30.0)
        total = np.hypot(out.fx, out.fy)
        dx, dy = tire.peak_friction(fz)
        assert total.max() <= 1.05 * max(float(dx), float(dy))


def test_vertical_force_cases(tire):
    kt = tire.vertical_stiffness
    assert float(tire.vertical_force(0.0, 0.0)) == 0.0
    assert float(MagicFormulaTire.vertical_force(tire, 2000.0 / kt, 0.0)) == pytest.approx(2000.0)
    assert float(tire.vertical_force(-0.01, 5.0)) == 0.0
    assert float(tire.vertical_force(-0.01, -5.0)) == 0.0
    # damping cannot pull the contact force negative
    assert float(tire.vertical_force(1e-6, -10.0)) == 0.0


def test_vertical_force_arithmetic():
    # declared spring law, independent arithmetic
    text = (
        "[VERTICAL]\nFNOMIN = 1000.0\nVERTICAL_STIFFNESS = 2.0e5\n"
        "VERTICAL_DAMPING = 0.0\n[DIMENSION]\nUNLOADED_RADIUS = 0.3\n"
    )
    tire = MagicFormulaTire(parse_tir(text))
    assert float(tire.vertical_force(0.01, 0.0)) == pytest.approx(2000.0)


def test_defaulted_keys_reported():
    text = (
        "[VERTICAL]\nFNOMIN = 1000.0\nVERTICAL_STIFFNESS = 2.0e5\n"
        "[DIMENSION]\nUNLOADED_RADIUS = 0.3\n"
    )
    tire = MagicFormulaTire(parse_tir(text))
    assert "PCX1" in tire.defaulted_keys
    assert "LMUX" in tire.defaulted_keys
    out = tire.forces(1000.0, 0.1, 0.1, 0.0, 20.0)
    assert np.isfinite(float(out.fx))
