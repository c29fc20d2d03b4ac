"""14-DOF chassis model: parameters, mass matrices, powertrain, dynamics."""

from . import state
from .mass_matrix import (
    body_mass_matrix,
    body_mass_matrix_derivatives,
    effective_spin_inertia,
    unsprung_mass_matrix,
)
from .model import (
    DynamicsError,
    Vehicle,
    build_default_vehicle,
    generalized_forces,
    rk4_step,
    simulate,
)
from .params import (
    AeroParams,
    MotorParams,
    PowertrainMassParams,
    VehicleParams,
    load_vehicle_yaml,
)
from .powertrain import (
    gearbox_mass,
    motor_mass,
    motor_speed_rpm,
    powertrain_masses,
    wheel_torque_limit,
)

__all__ = [
    "state",
    "Vehicle",
    "VehicleParams",
    "AeroParams",
    "MotorParams",
    "PowertrainMassParams",
    "DynamicsError",
    "build_default_vehicle",
    "generalized_forces",
    "load_vehicle_yaml",
    "body_mass_matrix",
    "body_mass_matrix_derivatives",
    "unsprung_mass_matrix",
    "effective_spin_inertia",
    "motor_mass",
    "gearbox_mass",
    "powertrain_masses",
    "wheel_torque_limit",
    "motor_speed_rpm",
    "rk4_step",
    "simulate",
]
