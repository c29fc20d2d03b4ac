"""Powertrain mass model and motor torque envelope."""

from __future__ import annotations

import numpy as np

from .params import MotorParams, PowertrainMassParams

__all__ = ["motor_mass", "gearbox_mass", "powertrain_masses", "wheel_torque_limit", "motor_speed_rpm"]

RPM_TO_RADPS = 2.0 * np.pi / 60.0


def motor_mass(power_kw: float, base_speed_rpm: float, mm: PowertrainMassParams) -> float:
    """Single motor mass from its corner-point torque, ``rho_m * T_peak**0.75``."""
    omega_b = base_speed_rpm * RPM_TO_RADPS
    torque = power_kw * 1e3 / omega_b
    return mm.motor_mass_scale * mm.motor_mass_factor * torque**0.75


def gearbox_mass(input_torque: float, gear_ratio: float, mm: PowertrainMassParams) -> float:
    """Single-stage gearbox mass from the input-shaft torque and ratio."""
    ig = gear_ratio
    gear_sum = 1.0 + 1.0 / ig + ig + ig * ig
    return (
        mm.gear_mass_scale
        * (500.0 * input_torque / mm.surface_durability)
        * mm.fill_factor
        * mm.gearbox_correction
        * mm.gear_density
        * np.pi
        * gear_sum
    )


def powertrain_masses(motor: MotorParams, mm: PowertrainMassParams) -> tuple[float, float]:
    """(motor, gearbox) mass for one corner; gearbox input torque is the
    motor's base-region peak ``9550 P / n_b``."""
    m_d = motor_mass(motor.power_kw, motor.base_speed_rpm, mm)
    t_in = 9550.0 * motor.power_kw / motor.base_speed_rpm
    m_g = gearbox_mass(t_in, motor.gear_ratio, mm)
    return m_d, m_g


def motor_speed_rpm(wheel_spin_rate, gear_ratio):
    """Motor shaft speed [rpm] from wheel spin rate [rad/s]."""
    return np.asarray(wheel_spin_rate, dtype=float) * gear_ratio / RPM_TO_RADPS


def wheel_torque_limit(motor_speed, gear_ratio, power_kw, base_speed_rpm):
    """Available wheel torque [N m]: constant below base speed, constant power
    above, continuous at the junction.  ``motor_speed`` in rpm."""
    n = np.abs(np.asarray(motor_speed, dtype=float))
    return 9550.0 * gear_ratio * power_kw / np.maximum(n, base_speed_rpm)
