"""Table-driven suspension: spring/damper forces, anti-roll bars, wheel kinematics.

All geometry relations (motion ratio, camber, toe, ground steer, anti-roll
force) are lookup tables over wheel jounce and driver steering input, queried
with clamped piecewise-linear / bilinear interpolation.  Queries outside a
table are held at the boundary value so an optimizer cannot exploit
extrapolated tails.

The wheel-frame suspension force follows the motion-ratio chain: spring-frame
force ``k * lam * dD + c * lam * dD_dot`` maps back through ``lam``, so the
effective wheel rate is ``lam**2 * k``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "Table1D",
    "Table2D",
    "interp1",
    "interp2",
    "AxleSuspension",
    "SuspensionParams",
    "suspension_force",
    "antiroll_force",
    "wheel_kinematics",
    "default_suspension",
]


@dataclass(frozen=True)
class Table1D:
    x: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.x.size < 2:
            raise ValueError("1-D table needs at least 2 grid points")
        if not np.all(np.diff(self.x) > 0):
            raise ValueError("1-D table axis must be strictly increasing")
        if self.values.shape != self.x.shape:
            raise ValueError("1-D table values must match the axis length")


@dataclass(frozen=True)
class Table2D:
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray  # shape (len(x), len(y))

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.x.size < 2 or self.y.size < 2:
            raise ValueError("2-D table needs at least 2 grid points per axis")
        if not (np.all(np.diff(self.x) > 0) and np.all(np.diff(self.y) > 0)):
            raise ValueError("2-D table axes must be strictly increasing")
        if self.values.shape != (self.x.size, self.y.size):
            raise ValueError("2-D table values must be (len(x), len(y))")


def interp1(table: Table1D, x):
    """Clamped piecewise-linear interpolation (np.interp semantics)."""
    return np.interp(np.asarray(x, dtype=float), table.x, table.values)


def interp2(table: Table2D, x, y):
    """Clamped bilinear interpolation on a rectangular grid."""
    x = np.clip(np.asarray(x, dtype=float), table.x[0], table.x[-1])
    y = np.clip(np.asarray(y, dtype=float), table.y[0], table.y[-1])
    ix = np.clip(np.searchsorted(table.x, x, side="right") - 1, 0, table.x.size - 2)
    iy = np.clip(np.searchsorted(table.y, y, side="right") - 1, 0, table.y.size - 2)
    x0, x1 = table.x[ix], table.x[ix + 1]
    y0, y1 = table.y[iy], table.y[iy + 1]
    tx = (x - x0) / (x1 - x0)
    ty = (y - y0) / (y1 - y0)
    v00 = table.values[ix, iy]
    v10 = table.values[ix + 1, iy]
    v01 = table.values[ix, iy + 1]
    v11 = table.values[ix + 1, iy + 1]
    return (
        v00 * (1 - tx) * (1 - ty)
        + v10 * tx * (1 - ty)
        + v01 * (1 - tx) * ty
        + v11 * tx * ty
    )


@dataclass(frozen=True)
class AxleSuspension:
    """One axle's suspension data; wheel-level queries take per-wheel jounce."""

    spring_stiffness: float          # k_bs [N/m] at the spring
    damping: float                   # c_d [N s/m] at the damper
    motion_ratio: Table1D            # lam_s(jounce) [-]
    antiroll_table: Table2D          # F(mean jounce, right-minus-left jounce) [N]
    antiroll_coefficient: float      # proportional coefficient on the table
    camber_table: Table2D            # gamma(jounce, driver steer) [rad]
    toe_table: Table1D               # xi(jounce) [rad]
    ground_steer_table: Table2D      # delta_d(jounce, driver steer) [rad]
    steered: bool = False            # rear axles ignore the driver input

    def with_stiffness(self, k: float) -> "AxleSuspension":
        return replace(self, spring_stiffness=float(k))

    def with_damping_factor(self, c: float) -> "AxleSuspension":
        return replace(self, damping=self.damping * float(c))

    def with_antiroll_coefficient(self, k: float) -> "AxleSuspension":
        return replace(self, antiroll_coefficient=float(k))


@dataclass(frozen=True)
class SuspensionParams:
    front: AxleSuspension
    rear: AxleSuspension

    def axle(self, index: int) -> AxleSuspension:
        # wheel order fr, fl, rr, rl
        return self.front if index < 2 else self.rear


def suspension_force(axle: AxleSuspension, jounce, jounce_rate):
    """Wheel-frame vertical force for given jounce [m] and jounce rate [m/s].

    Excludes the static preload; the vehicle assembly adds it.
    """
    lam = interp1(axle.motion_ratio, jounce)
    spring_frame = axle.spring_stiffness * lam * np.asarray(jounce, dtype=float)
    spring_frame = spring_frame + axle.damping * lam * np.asarray(jounce_rate, dtype=float)
    return lam * spring_frame


def antiroll_force(axle: AxleSuspension, jounce_right, jounce_left):
    """Anti-roll bar force magnitude for one axle.

    The value is applied with opposite signs on the two wheels (+right,
    -left); a stabilizing table therefore has negative slope in the
    right-minus-left jounce difference.
    """
    mean = 0.5 * (np.asarray(jounce_right, dtype=float) + np.asarray(jounce_left, dtype=float))
    delta = np.asarray(jounce_right, dtype=float) - np.asarray(jounce_left, dtype=float)
    return axle.antiroll_coefficient * interp2(axle.antiroll_table, mean, delta)


def wheel_kinematics(axle: AxleSuspension, jounce, driver_steer):
    """Camber, toe and ground steering angle for one wheel.

    Returns ``(gamma, xi, delta)`` with ``delta = delta_d + xi``; rear axles
    see a zero driver input.
    """
    steer = np.asarray(driver_steer, dtype=float) if axle.steered else np.zeros_like(
        np.asarray(jounce, dtype=float)
    )
    gamma = interp2(axle.camber_table, jounce, steer)
    xi = interp1(axle.toe_table, jounce)
    delta = interp2(axle.ground_steer_table, jounce, steer) + xi
    return gamma, xi, delta


def _linear_arb_table(slope: float, travel: float = 0.12) -> Table2D:
    mean = np.array([-travel, travel])
    delta = np.array([-2 * travel, 2 * travel])
    values = slope * np.vstack([delta, delta])
    return Table2D(mean, delta, values)


def _plane_steer_table(travel: float = 0.12, max_steer: float = 0.6) -> Table2D:
    jounce = np.array([-travel, travel])
    steer = np.array([-max_steer, max_steer])
    values = np.vstack([steer, steer])
    return Table2D(jounce, steer, values)


def _zero_table2(travel: float = 0.12, max_steer: float = 0.6) -> Table2D:
    return Table2D(
        np.array([-travel, travel]),
        np.array([-max_steer, max_steer]),
        np.zeros((2, 2)),
    )


def default_suspension(
    k_front: float = 9.0e4,
    k_rear: float = 1.1e5,
    c_front: float = 5.0e3,
    c_rear: float = 5.5e3,
    arb_slope_front: float = -2.5e4,
    arb_slope_rear: float = -2.0e4,
) -> SuspensionParams:
    """Synthetic baseline tables: unit motion ratio, zero camber/toe, direct
    steering, linear stabilizing anti-roll bars.  Every table can be replaced
    through the vehicle config file."""
    travel = 0.12
    unit_ratio = Table1D(np.array([-travel, travel]), np.array([1.0, 1.0]))
    zero_toe = Table1D(np.array([-travel, travel]), np.zeros(2))

    def axle(k, c, slope, steered):
        return AxleSuspension(
            spring_stiffness=k,
            damping=c,
            motion_ratio=unit_ratio,
            antiroll_table=_linear_arb_table(slope),
            antiroll_coefficient=1.0,
            camber_table=_zero_table2(),
            toe_table=zero_toe,
            ground_steer_table=_plane_steer_table() if steered else _zero_table2(),
            steered=steered,
        )

    return SuspensionParams(
        front=axle(k_front, c_front, arb_slope_front, True),
        rear=axle(k_rear, c_rear, arb_slope_rear, False),
    )
