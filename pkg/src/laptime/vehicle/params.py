"""Vehicle parameter set and config-file loading.

The YAML config uses the chassis/powertrain symbol names (m_v, l_f, l_r,
w_f, w_r, P_max, h_g, rho_m, psi_fill, rho_g, rho_gc, K) plus explicit keys
for everything the symbols do not cover (inertias, unsprung masses, aero
coefficients, suspension tables).  See data/vehicle_f3.yaml for the full
schema.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import yaml

from ..suspension import (
    AxleSuspension,
    SuspensionParams,
    Table1D,
    Table2D,
    default_suspension,
)

__all__ = ["AeroParams", "PowertrainMassParams", "MotorParams", "VehicleParams", "load_vehicle_yaml"]


@dataclass(frozen=True)
class AeroParams:
    drag_coefficient: float = 1.0
    frontal_area: float = 1.2          # [m^2]
    air_density: float = 1.225         # [kg/m^3]
    lift_coefficient_front: float = 1.1
    lift_coefficient_rear: float = 1.6
    drag_height: float = 0.18          # [m] drag application height
    drag_pitch_moment: bool = False    # off: drag acts at CG height


@dataclass(frozen=True)
class PowertrainMassParams:
    """Motor/gearbox mass model constants.

    The motor mass scales with its peak torque, ``rho_m * (P/omega_b)**0.75``
    (P in W, omega_b in rad/s).  The gearbox mass uses the printed volume
    formula with a calibration factor ``gear_mass_scale`` chosen so that the
    reference on-board and in-wheel designs both come out near 46.5/50.3 kg
    total with the published constants; the printed units alone are
    inconsistent by orders of magnitude.
    """

    motor_mass_factor: float = 0.2845      # rho_m
    fill_factor: float = 0.7               # psi_fill
    gear_density: float = 78550.0          # rho_g [kg/m^3]
    gearbox_correction: float = 3.1136     # rho_gc
    surface_durability: float = 8.92e6     # K [N/mm^2]
    gear_mass_scale: float = 3.8515e-5
    motor_mass_scale: float = 1.0


@dataclass(frozen=True)
class MotorParams:
    """One axle pair's motor/transmission design point."""

    base_speed_rpm: float = 6195.0
    cpsr: float = 3.92                 # max speed / base speed
    gear_ratio: float = 7.86
    power_kw: float = 41.25            # per motor

    @property
    def max_speed_rpm(self) -> float:
        return self.base_speed_rpm * self.cpsr


@dataclass(frozen=True)
class VehicleParams:
    sprung_mass: float = 490.0                      # m_v, includes reference powertrain
    body_inertia: tuple[float, float, float] = (40.0, 480.0, 520.0)
    unsprung_masses: tuple[float, ...] = (11.0, 11.0, 13.0, 13.0)
    wheel_inertias: tuple[float, ...] = (0.5, 0.5, 0.5, 0.5)
    rotor_inertia: float = 0.018                    # J_d per motor
    extra_wheel_inertia: float = 0.0                # in-wheel packaging allowance
    lf: float = 1.595
    lr: float = 1.135
    track_front: float = 1.585
    track_rear: float = 1.535
    cg_height: float = 0.30
    gravity: float = 9.81
    vehicle_half_width: float = 0.8
    max_power_kw: float = 165.0                     # vehicle total
    motor_mounting: str = "onboard"                 # or "inwheel"
    aero: AeroParams = field(default_factory=AeroParams)
    mass_model: PowertrainMassParams = field(default_factory=PowertrainMassParams)
    motor_front: MotorParams = field(default_factory=MotorParams)
    motor_rear: MotorParams = field(default_factory=MotorParams)

    def __post_init__(self):
        if self.lf <= 0 or self.lr <= 0:
            raise ValueError("axle distances must be positive")
        if min(self.unsprung_masses) <= 0 or self.sprung_mass <= 0:
            raise ValueError("masses must be positive")
        if min(self.body_inertia) <= 0:
            raise ValueError("body inertias must be positive")

    @property
    def wheelbase(self) -> float:
        return self.lf + self.lr

    def wheel_x(self) -> np.ndarray:
        return np.array([self.lf, self.lf, -self.lr, -self.lr])

    def wheel_y(self) -> np.ndarray:
        return 0.5 * np.array(
            [-self.track_front, self.track_front, -self.track_rear, self.track_rear]
        )

    def gear_ratios(self) -> np.ndarray:
        return np.array(
            [
                self.motor_front.gear_ratio,
                self.motor_front.gear_ratio,
                self.motor_rear.gear_ratio,
                self.motor_rear.gear_ratio,
            ]
        )

    def motor_powers_kw(self) -> np.ndarray:
        return np.array(
            [
                self.motor_front.power_kw,
                self.motor_front.power_kw,
                self.motor_rear.power_kw,
                self.motor_rear.power_kw,
            ]
        )

    def wheel_motor(self, i: int) -> MotorParams:
        return self.motor_front if i < 2 else self.motor_rear


def _table1(node) -> Table1D:
    return Table1D(np.asarray(node["x"], dtype=float), np.asarray(node["values"], dtype=float))


def _table2(node) -> Table2D:
    return Table2D(
        np.asarray(node["x"], dtype=float),
        np.asarray(node["y"], dtype=float),
        np.asarray(node["values"], dtype=float),
    )


def _axle_from_yaml(node, fallback: AxleSuspension) -> AxleSuspension:
    kwargs = dict(
        spring_stiffness=float(node.get("k_bs", fallback.spring_stiffness)),
        damping=float(node.get("c_d", fallback.damping)),
        motion_ratio=_table1(node["motion_ratio"]) if "motion_ratio" in node else fallback.motion_ratio,
        antiroll_table=_table2(node["antiroll_table"]) if "antiroll_table" in node else fallback.antiroll_table,
        antiroll_coefficient=float(node.get("k_atr", fallback.antiroll_coefficient)),
        camber_table=_table2(node["camber_table"]) if "camber_table" in node else fallback.camber_table,
        toe_table=_table1(node["toe_table"]) if "toe_table" in node else fallback.toe_table,
        ground_steer_table=_table2(node["ground_steer_table"])
        if "ground_steer_table" in node
        else fallback.ground_steer_table,
        steered=fallback.steered,
    )
    return AxleSuspension(**kwargs)


def load_vehicle_yaml(path) -> tuple[VehicleParams, SuspensionParams]:
    """Load chassis parameters and suspension tables from a YAML config."""
    with open(path) as fh:
        doc = yaml.safe_load(fh)

    aero_node = doc.get("aero", {})
    aero = AeroParams(
        drag_coefficient=float(aero_node.get("C_d", AeroParams.drag_coefficient)),
        frontal_area=float(aero_node.get("A", AeroParams.frontal_area)),
        air_density=float(aero_node.get("rho_air", AeroParams.air_density)),
        lift_coefficient_front=float(aero_node.get("C_l_front", AeroParams.lift_coefficient_front)),
        lift_coefficient_rear=float(aero_node.get("C_l_rear", AeroParams.lift_coefficient_rear)),
        drag_height=float(aero_node.get("h_g", AeroParams.drag_height)),
        drag_pitch_moment=bool(aero_node.get("drag_pitch_moment", False)),
    )
    mm_node = doc.get("powertrain_mass", {})
    mass_model = PowertrainMassParams(
        motor_mass_factor=float(mm_node.get("rho_m", PowertrainMassParams.motor_mass_factor)),
        fill_factor=float(mm_node.get("psi_fill", PowertrainMassParams.fill_factor)),
        gear_density=float(mm_node.get("rho_g", PowertrainMassParams.gear_density)),
        gearbox_correction=float(mm_node.get("rho_gc", PowertrainMassParams.gearbox_correction)),
        surface_durability=float(mm_node.get("K", PowertrainMassParams.surface_durability)),
        gear_mass_scale=float(mm_node.get("gear_mass_scale", PowertrainMassParams.gear_mass_scale)),
        motor_mass_scale=float(mm_node.get("motor_mass_scale", PowertrainMassParams.motor_mass_scale)),
    )

    def motor(node):
        return MotorParams(
            base_speed_rpm=float(node.get("n_b", MotorParams.base_speed_rpm)),
            cpsr=float(node.get("beta", MotorParams.cpsr)),
            gear_ratio=float(node.get("i_g", MotorParams.gear_ratio)),
            power_kw=float(node.get("P_kw", MotorParams.power_kw)),
        )

    params = VehicleParams(
        sprung_mass=float(doc.get("m_v", VehicleParams.sprung_mass)),
        body_inertia=tuple(doc.get("body_inertia", VehicleParams.body_inertia)),
        unsprung_masses=tuple(doc.get("unsprung_masses", VehicleParams.unsprung_masses)),
        wheel_inertias=tuple(doc.get("wheel_inertias", VehicleParams.wheel_inertias)),
        rotor_inertia=float(doc.get("J_d", VehicleParams.rotor_inertia)),
        extra_wheel_inertia=float(doc.get("extra_wheel_inertia", 0.0)),
        lf=float(doc.get("l_f", VehicleParams.lf)),
        lr=float(doc.get("l_r", VehicleParams.lr)),
        track_front=float(doc.get("w_f", VehicleParams.track_front)),
        track_rear=float(doc.get("w_r", VehicleParams.track_rear)),
        cg_height=float(doc.get("h_cg", VehicleParams.cg_height)),
        gravity=float(doc.get("g", VehicleParams.gravity)),
        vehicle_half_width=float(doc.get("vehicle_half_width", VehicleParams.vehicle_half_width)),
        max_power_kw=float(doc.get("P_max", VehicleParams.max_power_kw)),
        motor_mounting=str(doc.get("motor_mounting", "onboard")),
        aero=aero,
        mass_model=mass_model,
        motor_front=motor(doc.get("motor_front", doc.get("motor", {}))),
        motor_rear=motor(doc.get("motor_rear", doc.get("motor", {}))),
    )

    base = default_suspension()
    susp_node = doc.get("suspension", {})
    suspension = SuspensionParams(
        front=_axle_from_yaml(susp_node.get("front", {}), base.front),
        rear=_axle_from_yaml(susp_node.get("rear", {}), base.rear),
    )
    return params, suspension
