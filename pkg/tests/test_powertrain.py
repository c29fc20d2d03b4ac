import numpy as np
import pytest

from laptime.vehicle import (
    MotorParams,
    PowertrainMassParams,
    gearbox_mass,
    motor_mass,
    motor_speed_rpm,
    powertrain_masses,
    wheel_torque_limit,
)


def test_motor_mass_power_law():
    mm = PowertrainMassParams()
    m1 = motor_mass(40.0, 6000.0, mm)
    # doubling the motor count at fixed total power: each motor gets half the
    # power, so its mass scales by 2**-0.75
    m2 = motor_mass(20.0, 6000.0, mm)
    assert m2 / m1 == pytest.approx(2.0 ** -0.75)


def test_gearbox_mass_increasing_in_ratio():
    mm = PowertrainMassParams()
    ratios = np.linspace(1.0, 14.0, 40)
    masses = [gearbox_mass(60.0, ig, mm) for ig in ratios]
    assert np.all(np.diff(masses) > 0.0)
    # derivative of the ratio polynomial 1 + 1/i + i + i^2 is positive for i >= 1
    i = ratios
    dpoly = -1.0 / i**2 + 1.0 + 2.0 * i
    assert np.all(dpoly > 0.0)


def test_reference_masses_near_reported_designs():
    # calibration anchors for the shipped unit convention (not hard pins)
    mm = PowertrainMassParams()
    onboard = MotorParams(base_speed_rpm=6195.0, cpsr=3.92, gear_ratio=7.86, power_kw=41.25)
    inwheel = MotorParams(base_speed_rpm=6208.0, cpsr=4.02, gear_ratio=8.60, power_kw=41.25)
    m_total_ob = 4.0 * sum(powertrain_masses(onboard, mm))
    m_total_iw = 4.0 * sum(powertrain_masses(inwheel, mm))
    assert m_total_ob == pytest.approx(46.55, rel=0.02)
    assert m_total_iw == pytest.approx(50.25, rel=0.02)
    assert m_total_iw > m_total_ob


def test_torque_limit_arithmetic():
    t = wheel_torque_limit(3000.0, 7.86, 41.25, 6195.0)
    assert t == pytest.approx(9550.0 * 7.86 * 41.25 / 6195.0, rel=1e-12)
    assert float(t) == pytest.approx(499.85, abs=0.1)


def test_torque_limit_continuity_and_decay():
    nb = 6195.0
    below = wheel_torque_limit(nb - 1e-9, 7.86, 41.25, nb)
    above = wheel_torque_limit(nb + 1e-9, 7.86, 41.25, nb)
    assert abs(float(below) - float(above)) < 1e-9
    # inverse-speed region: double speed, half torque
    assert wheel_torque_limit(2 * nb, 7.86, 41.25, nb) == pytest.approx(float(below) / 2.0)
    speeds = np.linspace(nb, 4 * nb, 200)
    limits = wheel_torque_limit(speeds, 7.86, 41.25, nb)
    assert np.all(np.diff(limits) <= 0.0)


def test_motor_speed_conversion():
    assert motor_speed_rpm(2 * np.pi, 1.0) == pytest.approx(60.0)
    assert motor_speed_rpm(100.0, 8.0) == pytest.approx(100.0 * 8.0 * 60.0 / (2 * np.pi))
