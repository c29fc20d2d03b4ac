import numpy as np
import pytest

from laptime.suspension import default_suspension
from laptime.tire import MagicFormulaTire, parse_tir, serialize_tir
from laptime.track import make_oval
from laptime.vehicle import Vehicle, VehicleParams, build_default_vehicle, simulate
from laptime.vehicle import state as st


@pytest.fixture(scope="module")
def track():
    return make_oval()


@pytest.fixture(scope="module")
def vehicle():
    return build_default_vehicle()


def _lossless_vehicle(tir_params, frictionless=False, **param_overrides):
    """No dampers, no rolling resistance, no aero, no tire vertical damping.

    ``frictionless`` additionally zeroes the planar friction scalings so tire
    scrub cannot dissipate (needed when the test motion has nonzero slip
    velocities, e.g. roll rates at standstill).
    """
    params = parse_tir(serialize_tir(tir_params))
    zero_keys = ["QSY1", "QSY2", "QSY3", "QSY4", "VERTICAL_DAMPING"]
    if frictionless:
        zero_keys += ["LMUX", "LMUY", "LMX", "LMY", "LTR", "LRES", "LS", "LVMX"]
    for key in zero_keys:
        params.set(key, 0.0)
    tire = MagicFormulaTire(params)
    from laptime.vehicle.params import AeroParams

    vparams = VehicleParams(
        aero=AeroParams(
            drag_coefficient=0.0, lift_coefficient_front=0.0, lift_coefficient_rear=0.0
        ),
        **param_overrides,
    )
    susp = default_suspension(c_front=0.0, c_rear=0.0)
    return Vehicle(params=vparams, suspension=susp, tire=tire)


def test_static_equilibrium_residual(vehicle, track):
    x = vehicle.static_state(speed=0.0)
    dx = vehicle.dynamics(track, x, np.zeros(5))
    accel = np.concatenate([dx[st.QB_RATES], dx[st.VZW], dx[st.WSPIN]])
    assert np.max(np.abs(accel)) < 1e-9
    assert dx[st.S] == 0.0 and dx[st.N] == 0.0 and dx[st.CHI] == 0.0


def test_static_loads_split_by_geometry(vehicle):
    p = vehicle.params
    total = (p.sprung_mass + sum(p.unsprung_masses)) * p.gravity
    assert vehicle.static_wheel_load.sum() == pytest.approx(total)
    # CG closer to the rear axle carries more rear load
    assert vehicle.static_wheel_load[2] > vehicle.static_wheel_load[0]
    moment = np.sum(vehicle.spring_preload * p.wheel_x())
    assert moment == pytest.approx(0.0, abs=1e-9)


def test_gravity_only_generalized_forces(vehicle):
    # all tire/suspension/aero force inputs zero: only gravity remains
    from laptime.vehicle import generalized_forces

    x2 = np.atleast_2d(vehicle.static_state())
    zeros4 = np.zeros((1, 4))
    qb, qu = generalized_forces(
        vehicle.params, x2, zeros4, zeros4, (zeros4, zeros4, zeros4, zeros4),
        zeros4, zeros4, zeros4, (0.0, 0.0, 0.0),
    )
    p = vehicle.params
    np.testing.assert_allclose(
        qb[0], [0.0, 0.0, -p.sprung_mass * p.gravity, 0.0, 0.0, 0.0], atol=1e-12
    )
    np.testing.assert_allclose(qu[0, :4], 0.0, atol=1e-12)
    np.testing.assert_allclose(
        qu[0, 4:], -np.asarray(p.unsprung_masses) * p.gravity, rtol=1e-12
    )


def test_aero_vanishes_at_zero_speed(vehicle):
    # every aero contribution is quadratic in the longitudinal speed
    from laptime.vehicle import generalized_forces

    x2 = np.atleast_2d(vehicle.static_state(speed=0.0))
    zeros4 = np.zeros((1, 4))
    drag, df, dr = vehicle.aero_forces(np.array([0.0]))
    qb, _ = generalized_forces(
        vehicle.params, x2, zeros4, zeros4, (zeros4, zeros4, zeros4, zeros4),
        zeros4, zeros4, zeros4, (drag, df, dr),
    )
    np.testing.assert_allclose(qb[0, [0, 1]], 0.0, atol=1e-15)
    assert qb[0, 4] == pytest.approx(0.0, abs=1e-15)


def test_symmetric_drive_cancels_lateral_rows(vehicle):
    # symmetric drive torque, zero steer, symmetric loads: lateral and yaw
    # generalized-force rows cancel exactly
    from laptime.vehicle import generalized_forces

    x2 = np.atleast_2d(vehicle.static_state(speed=10.0))
    torque = np.full((1, 4), 120.0)
    delta = np.zeros((1, 4))
    fx = np.full((1, 4), 400.0)
    fy = np.zeros((1, 4))
    my = np.zeros((1, 4))
    mz = np.zeros((1, 4))
    fz = np.atleast_2d(vehicle.static_wheel_load)
    f_bs = np.atleast_2d(vehicle.spring_preload)
    qb, _ = generalized_forces(
        vehicle.params, x2, torque, delta, (fx, fy, my, mz), fz, f_bs,
        np.zeros((1, 4)), (0.0, 0.0, 0.0),
    )
    assert qb[0, 1] == pytest.approx(0.0, abs=1e-10)  # lateral
    assert qb[0, 3] == pytest.approx(0.0, abs=1e-10)  # roll
    assert qb[0, 5] == pytest.approx(0.0, abs=1e-10)  # yaw
    assert qb[0, 0] == pytest.approx(1600.0)


def test_straight_coast_is_stationary(tir_params, track):
    vehicle = _lossless_vehicle(tir_params)
    x = vehicle.static_state(speed=20.0)
    dx = vehicle.dynamics(track, x, np.zeros(5))
    accel = np.concatenate([dx[st.QB_RATES], dx[st.VZW], dx[st.WSPIN]])
    assert np.max(np.abs(accel)) < 1e-9
    assert dx[st.S] == pytest.approx(20.0)


def test_energy_conserved_straight_coast(tir_params, track):
    vehicle = _lossless_vehicle(tir_params)
    x0 = vehicle.static_state(speed=20.0)
    f = lambda x: vehicle.dynamics(track, x, np.zeros(5))
    xs = simulate(f, x0, 1e-3, 1000)
    e = vehicle.mechanical_energy(xs)
    drift = np.max(np.abs(e - e[0])) / abs(e[0])
    assert drift < 1e-6


def test_energy_conserved_vertical_oscillation(tir_params, track):
    # standing drop test with planar friction zeroed (roll rates would
    # otherwise scrub the contact patches and dissipate)
    vehicle = _lossless_vehicle(tir_params, frictionless=True)
    x0 = vehicle.static_state(speed=0.0)
    x0[st.Z] += 0.005
    x0[st.ROLL] = 0.002
    f = lambda x: vehicle.dynamics(track, x, np.zeros(5))
    xs = simulate(f, x0, 1e-4, 2000)
    e = vehicle.mechanical_energy(xs)
    drift = np.max(np.abs(e - e[0])) / (abs(e[0]) + 1.0)
    assert drift < 1e-6
    # sanity: the motion is genuinely dynamic
    assert np.std(xs[:, st.Z]) > 1e-4


def test_energy_balance_with_dissipation(vehicle, track):
    # audit: dE/dt matches the itemized power terms along a gentle maneuver
    x0 = vehicle.static_state(speed=25.0)
    x0[st.Z] += 0.004
    u = np.array([0.02, 40.0, 40.0, 50.0, 50.0])
    f = lambda x: vehicle.dynamics(track, x, u)
    h = 1e-3
    xs = simulate(f, x0, h, 1500)
    e = vehicle.mechanical_energy(xs)
    power_in = np.zeros(xs.shape[0])
    for k in range(xs.shape[0]):
        terms = vehicle.power_balance(track, xs[k], u)
        power_in[k] = (
            terms["control"]
            + terms["aero_vertical"]
            - terms["damper"]
            - terms["slip"]
            - terms["rolling"]
            - terms["drag"]
            - terms["tire_damping"]
        )
    # trapezoidal integral of the power matches the energy change
    work = np.concatenate([[0.0], np.cumsum(0.5 * h * (power_in[1:] + power_in[:-1]))])
    residual = np.max(np.abs((e - e[0]) - work))
    scale = abs(e[0]) + np.max(np.abs(work))
    assert residual / scale < 1e-4


def test_slip_quantities_identities(vehicle):
    x = np.atleast_2d(vehicle.static_state(speed=20.0))
    z_w = np.atleast_2d(x[0, st.ZW] - x[0, st.Z])
    delta = np.zeros((1, 4))
    kappa, alpha, vxw, vyw, _ = vehicle.slip_quantities(x, delta, z_w)
    np.testing.assert_allclose(kappa, 0.0, atol=1e-12)
    np.testing.assert_allclose(alpha, 0.0, atol=1e-12)
    np.testing.assert_allclose(vxw, 20.0)
    # locked wheel
    x_locked = x.copy()
    x_locked[0, st.WSPIN] = 0.0
    kappa, _, _, _, _ = vehicle.slip_quantities(x_locked, delta, z_w)
    np.testing.assert_allclose(kappa, -1.0)
    # lateral velocity equal to longitudinal: alpha = -pi/4
    x_side = x.copy()
    x_side[0, st.VY] = 20.0
    kappa, alpha, _, _, _ = vehicle.slip_quantities(x_side, delta, z_w)
    np.testing.assert_allclose(alpha, -np.pi / 4)


def test_symmetric_drive_keeps_straight(vehicle, track):
    x0 = vehicle.static_state(speed=15.0)
    u = np.array([0.0, 150.0, 150.0, 150.0, 150.0])
    f = lambda x: vehicle.dynamics(track, x, u)
    xs = simulate(f, x0, 1e-3, 500)
    assert xs[-1, st.VX] > x0[st.VX] + 0.5  # accelerates over half a second
    assert np.max(np.abs(xs[:, st.VY])) < 1e-9
    assert np.max(np.abs(xs[:, st.YAW])) < 1e-9
    assert np.max(np.abs(xs[:, st.ROLL])) < 1e-9


def test_aero_forces_scaling(vehicle):
    drag0, down_f0, down_r0 = vehicle.aero_forces(np.array([0.0]))
    assert drag0 == 0.0 and down_f0 == 0.0 and down_r0 == 0.0
    d1 = vehicle.aero_forces(np.array([25.0]))
    d2 = vehicle.aero_forces(np.array([50.0]))
    for a, b in zip(d1, d2):
        assert b == pytest.approx(4.0 * a)
    # repo default aero: Cd=1.0, rho=1.225, A=1.2 at 50 m/s
    assert d2[0].item() == pytest.approx(1837.5)


def test_batch_matches_single(vehicle, track, rng):
    xs = np.stack([vehicle.static_state(speed=v) for v in (5.0, 20.0, 35.0)])
    xs[:, st.N] = rng.uniform(-2, 2, size=3)
    xs[:, st.VY] = rng.uniform(-1, 1, size=3)
    us = rng.uniform(-100, 100, size=(3, 5))
    us[:, 0] = rng.uniform(-0.1, 0.1, size=3)
    batch = vehicle.dynamics(track, xs, us)
    for k in range(3):
        single = vehicle.dynamics(track, xs[k], us[k])
        np.testing.assert_array_equal(single, batch[k])


def test_frozen_vertical_rows(vehicle, track):
    x = vehicle.static_state(speed=20.0)
    u = np.array([0.05, 50.0, 50.0, 50.0, 50.0])
    dx = vehicle.dynamics(track, x, u, frozen_vertical=True)
    assert dx[st.VZ] == 0.0
    assert dx[st.WROLL] == 0.0 and dx[st.WPITCH] == 0.0
    assert np.all(dx[st.VZW] == 0.0)
    assert dx[st.WYAW] != 0.0  # planar dynamics still live


def test_downforce_loads_the_tires(vehicle, track):
    # settle the car at speed: integrate briefly and check the wheel loads
    # grew by roughly the downforce, split front/rear by the lift coefficients
    x0 = vehicle.static_state(speed=50.0)
    u = np.zeros(5)
    f = lambda x: vehicle.dynamics(track, x, u)
    xs = simulate(f, x0, 1e-3, 1500)
    fz, _, _ = vehicle.slip_state(xs[-1], u)
    q = 0.5 * 1.225 * 1.2 * xs[-1, st.VX] ** 2
    aero = vehicle.params.aero
    expected_front = vehicle.static_wheel_load[0] + 0.5 * aero.lift_coefficient_front * q
    expected_rear = vehicle.static_wheel_load[2] + 0.5 * aero.lift_coefficient_rear * q
    assert fz[0, 0] == pytest.approx(expected_front, rel=0.08)
    assert fz[0, 2] == pytest.approx(expected_rear, rel=0.08)
    assert fz[0, 0] > vehicle.static_wheel_load[0] + 300.0
