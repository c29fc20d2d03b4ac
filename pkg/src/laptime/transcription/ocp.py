"""Minimum-lap-time problem transcription.

Builds the finite NLP from a vehicle, a track and a design-parameter
specification: trapezoidal defect rows, per-node operating-envelope and
track-limit path rows, boundary rows for a flying lap (periodic) or a
standing start, bound-based variable scaling, row scaling from the
initial-guess Jacobian, and a structured central-difference Jacobian that
exploits the trapezoidal stencil (only node-local variables couple into
defect and path rows; final time and design columns are dense).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from ..solver.problem import NlpProblem
from ..track import Track
from ..vehicle import Vehicle, motor_speed_rpm, wheel_torque_limit
from ..vehicle import state as st
from .defects import trapezoid_defects
from .layout import VariableLayout
from .scaling import VariableScaling, row_scale_from_jacobian
from .seed import simulate_driver_lap
from .speed_profile import quasi_steady_profile

__all__ = ["DesignSpec", "OcpOptions", "LapOcp", "control_only_design"]

_BIG = 1e7
FD_STEP = 1e-6  # on scaled variables, which live in [-1, 1]

# states constrained periodic on a flying lap: all rates, heave/roll/pitch,
# wheel heights, lateral offset and heading error
PERIODIC_STATES = list(range(14)) + [st.Z, st.ROLL, st.PITCH, 20, 21, 22, 23, st.N, st.CHI]


@dataclass(frozen=True)
class DesignSpec:
    """Case-specific design vector: labels, bounds, and how it maps onto a
    vehicle.  ``apply`` must be pure; ``initial`` supplies the guess."""

    name: str
    labels: tuple[str, ...]
    units: tuple[str, ...]
    lower: np.ndarray
    upper: np.ndarray
    apply: Callable[[Vehicle, np.ndarray], Vehicle]
    initial: Callable[[Vehicle], np.ndarray]

    @property
    def n_design(self) -> int:
        return len(self.labels)


def control_only_design() -> DesignSpec:
    """Empty design vector: optimize controls with the vehicle frozen."""
    return DesignSpec(
        name="control-only",
        labels=(),
        units=(),
        lower=np.zeros(0),
        upper=np.zeros(0),
        apply=lambda vehicle, p: vehicle,
        initial=lambda vehicle: np.zeros(0),
    )


@dataclass
class OcpOptions:
    n_nodes: int = 200
    boundary: str = "flying"           # or "standing"
    guess: str = "profile"             # or "driver" (closed-loop simulation)
    # state bounds; the vertical/attitude boxes are deliberately snug (a few
    # times the physical excursions) so the scaled variables reflect real
    # sensitivities -- slack boxes make the stiff suspension directions look
    # near-singular to the solver
    speed_max: float = 90.0
    vz_max: float = 1.0
    rollpitch_rate_max: float = 3.0
    yaw_rate_max: float = 2.5
    wheel_vz_max: float = 1.5
    spin_rate_bounds: tuple[float, float] = (-5.0, 320.0)
    z_margin: float = 0.05
    rollpitch_max: float = 0.08
    wheel_height_margin: tuple[float, float] = (0.03, 0.02)
    spin_angle_bounds: tuple[float, float] = (-100.0, 2.0e4)
    chi_max: float = 0.7
    yaw_margin: float = 7.0
    # control bounds
    steer_max: float = 0.25
    torque_max: float = 600.0
    tf_bounds: tuple[float, float] | None = None  # default: (0.25, 3) x guess
    # path windows; the slip windows keep the tires at or below their force
    # peaks (the monotone part of the slip curves), which is both the model's
    # validity range and what keeps the transcription well behaved
    motor_speed_window: tuple[float, float] = (5000.0, 25000.0)
    fz_window: tuple[float, float] = (-1.0e3, 9.0e3)
    kappa_window: tuple[float, float] = (-0.12, 0.12)
    alpha_window: tuple[float, float] = (-0.15, 0.15)
    # tiny convex regularization on the scaled controls: keeps the reduced
    # Hessian positive along control directions without moving the lap time
    # by more than milliseconds
    control_reg: float = 1e-3
    control_rate_reg: float = 0.1


N_PATH_ROWS = 28  # 2 speed windows, 4 overspeed, 8 torque envelope, 12 tire, 2 track


class LapOcp:
    """One transcribed lap-time problem instance.

    ``options.guess`` selects the seed: "profile" builds an analytic
    quasi-steady guess, "driver" runs the closed-loop driver simulation
    (slower to construct, but starts the solve nearly feasible).
    """

    def __init__(self, vehicle: Vehicle, track: Track, design: DesignSpec,
                 options: OcpOptions | None = None):
        self.base_vehicle = vehicle
        self.track = track
        self.design = design
        self.opt = options or OcpOptions()
        if self.opt.boundary not in ("flying", "standing"):
            raise ValueError(f"unknown boundary mode {self.opt.boundary!r}")
        if self.opt.boundary == "flying" and not track.closed:
            raise ValueError("flying-lap closure needs a closed track")
        track.validate(vehicle.params.vehicle_half_width)

        self.layout = VariableLayout(
            n_nodes=self.opt.n_nodes,
            n_states=st.N_STATES,
            n_controls=st.N_CONTROLS,
            n_design=design.n_design,
        )
        self._cache_key = None
        self._cache_vehicle = None
        self._control_idx = self.layout.control_indices()
        states, controls, t_f, p0 = self.initial_guess()
        self._tf_bounds = self.opt.tf_bounds or (0.25 * t_f, 3.0 * t_f)
        self._build_bounds()
        y0 = self.layout.pack(states, controls, t_f, p0)
        y0 = np.clip(y0, self.lb_y + 1e-9 * self.span_y, self.ub_y - 1e-9 * self.span_y)
        self.scaling = VariableScaling.from_bounds(self.lb_y, self.ub_y)
        self.y0_scaled = self.scaling.to_scaled(y0)
        self.row_scale = np.ones(self.n_constraints)
        jac0 = self._jacobian_scaled(self.y0_scaled)
        self.row_scale = row_scale_from_jacobian(jac0)

    # ------------------------------------------------------------------
    @property
    def n_constraints(self) -> int:
        n = self.opt.n_nodes
        return (n - 1) * st.N_STATES + n * N_PATH_ROWS + self._n_boundary()

    def _n_boundary(self) -> int:
        return 32  # both closures use 32 rows

    def _build_bounds(self):
        o = self.opt
        track = self.track
        xlb = np.empty(st.N_STATES)
        xub = np.empty(st.N_STATES)
        xlb[[st.VX, st.VY]] = -o.speed_max
        xub[[st.VX, st.VY]] = o.speed_max
        xlb[st.VZ], xub[st.VZ] = -o.vz_max, o.vz_max
        xlb[[st.WROLL, st.WPITCH]] = -o.rollpitch_rate_max
        xub[[st.WROLL, st.WPITCH]] = o.rollpitch_rate_max
        xlb[st.WYAW], xub[st.WYAW] = -o.yaw_rate_max, o.yaw_rate_max
        xlb[st.VZW], xub[st.VZW] = -o.wheel_vz_max, o.wheel_vz_max
        xlb[st.WSPIN], xub[st.WSPIN] = o.spin_rate_bounds
        pad = 100.0
        xlb[st.X], xub[st.X] = track.x.min() - pad, track.x.max() + pad
        xlb[st.Y], xub[st.Y] = track.y.min() - pad, track.y.max() + pad
        veh = self.base_vehicle
        xlb[st.Z] = veh.ride_height - o.z_margin
        xub[st.Z] = veh.ride_height + o.z_margin
        xlb[[st.ROLL, st.PITCH]] = -o.rollpitch_max
        xub[[st.ROLL, st.PITCH]] = o.rollpitch_max
        h0, h1 = track.heading.min(), track.heading.max()
        xlb[st.YAW], xub[st.YAW] = h0 - o.yaw_margin, h1 + o.yaw_margin
        xlb[st.ZW] = veh.wheel_height0.min() - o.wheel_height_margin[0]
        xub[st.ZW] = veh.wheel_height0.max() + o.wheel_height_margin[1]
        xlb[st.SPIN], xub[st.SPIN] = o.spin_angle_bounds
        xlb[st.S], xub[st.S] = -5.0, track.total_length + 5.0
        usable = np.min(track.half_width) - veh.params.vehicle_half_width
        if not np.isfinite(usable):
            usable = 50.0
        xlb[st.N], xub[st.N] = -usable, usable
        xlb[st.CHI], xub[st.CHI] = -o.chi_max, o.chi_max

        ulb = np.concatenate([[-o.steer_max], np.full(4, -o.torque_max)])
        uub = np.concatenate([[o.steer_max], np.full(4, o.torque_max)])

        n = self.opt.n_nodes
        node_lb = np.concatenate([xlb, ulb])
        node_ub = np.concatenate([xub, uub])
        self.lb_y = np.concatenate(
            [np.tile(node_lb, n), [self._tf_bounds[0]], self.design.lower]
        )
        self.ub_y = np.concatenate(
            [np.tile(node_ub, n), [self._tf_bounds[1]], self.design.upper]
        )
        self.span_y = self.ub_y - self.lb_y
        self.state_lb, self.state_ub = xlb, xub

        # constraint bounds
        n_defect = (n - 1) * st.N_STATES
        cl_path, cu_path = self._path_bounds()
        self.cl = np.concatenate(
            [np.zeros(n_defect), np.tile(cl_path, n), np.zeros(self._n_boundary())]
        )
        self.cu = np.concatenate(
            [np.zeros(n_defect), np.tile(cu_path, n), np.zeros(self._n_boundary())]
        )

    def _path_bounds(self):
        o = self.opt
        cl = np.concatenate(
            [
                np.full(2, o.motor_speed_window[0]),   # axle max-speed windows
                np.full(4, -_BIG),                     # overspeed residuals
                np.full(4, -_BIG),                     # torque upper envelope
                np.zeros(4),                           # torque lower envelope
                np.full(4, o.fz_window[0]),
                np.full(4, o.kappa_window[0]),
                np.full(4, o.alpha_window[0]),
                np.full(2, -_BIG),                     # track limits
            ]
        )
        cu = np.concatenate(
            [
                np.full(2, o.motor_speed_window[1]),
                np.zeros(4),
                np.zeros(4),
                np.full(4, _BIG),
                np.full(4, o.fz_window[1]),
                np.full(4, o.kappa_window[1]),
                np.full(4, o.alpha_window[1]),
                np.zeros(2),
            ]
        )
        return cl, cu

    # ------------------------------------------------------------------
    def _vehicle_for(self, p: np.ndarray) -> Vehicle:
        key = np.asarray(p, dtype=float).tobytes()
        if key != self._cache_key:
            self._cache_vehicle = self.design.apply(self.base_vehicle, np.asarray(p, dtype=float))
            self._cache_key = key
        return self._cache_vehicle

    def path_constraints(self, states, controls, vehicle: Vehicle,
                         envelope=None) -> np.ndarray:
        """Per-node operating-envelope rows (nodes x 28).

        ``envelope`` takes a precomputed (fz, kappa, alpha) triple when the
        caller already evaluated the dynamics.
        """
        n = states.shape[0]
        p = vehicle.params
        ig = p.gear_ratios()
        n_m = motor_speed_rpm(states[:, st.WSPIN], ig)
        powers = p.motor_powers_kw()
        base = np.array(
            [
                p.motor_front.base_speed_rpm,
                p.motor_front.base_speed_rpm,
                p.motor_rear.base_speed_rpm,
                p.motor_rear.base_speed_rpm,
            ]
        )
        t_max = wheel_torque_limit(n_m, ig, powers, base)
        n_max = np.array([p.motor_front.max_speed_rpm, p.motor_rear.max_speed_rpm])
        torque = controls[:, st.U_TORQUE]

        fz, kappa, alpha = envelope if envelope is not None else vehicle.slip_state(
            states, controls
        )
        clearance = (
            self.track.half_width_at(states[:, st.S]) - p.vehicle_half_width
        )
        g = np.empty((n, N_PATH_ROWS))
        g[:, 0:2] = n_max
        g[:, 2:6] = n_m - n_max[[0, 0, 1, 1]]
        g[:, 6:10] = torque - t_max
        g[:, 10:14] = torque + t_max
        g[:, 14:18] = fz
        g[:, 18:22] = kappa
        g[:, 22:26] = alpha
        g[:, 26] = states[:, st.N] - clearance
        g[:, 27] = -states[:, st.N] - clearance
        return g

    def boundary_constraints(self, x_first, x_last, vehicle: Vehicle) -> np.ndarray:
        track = self.track
        if self.opt.boundary == "flying":
            rows = list(x_last[PERIODIC_STATES] - x_first[PERIODIC_STATES])
            rows.append(x_first[st.X] - track.x[0])
            rows.append(x_first[st.Y] - track.y[0])
            rows.append(x_first[st.YAW] - track.heading[0])
            rows.extend(x_first[st.SPIN])
            rows.append(x_first[st.S])
            rows.append(x_last[st.S] - track.total_length)
            return np.asarray(rows)
        x_start = vehicle.static_state(speed=0.0, yaw=float(track.heading[0]))
        x_start[st.X] = track.x[0]
        x_start[st.Y] = track.y[0]
        rows = list(x_first - x_start)
        rows.append(x_last[st.S] - track.total_length)
        return np.asarray(rows)

    # ------------------------------------------------------------------
    def initial_guess(self):
        """Seed trajectory: driver simulation or analytic quasi-steady profile."""
        o = self.opt
        track = self.track
        n = o.n_nodes
        veh = self.base_vehicle
        standing = self.opt.boundary == "standing"
        if o.guess == "driver":
            return (*simulate_driver_lap(veh, track, n, standing_start=standing),
                    self.design.initial(veh))
        s_prof, v_prof, a_prof, t_prof, t_f = quasi_steady_profile(
            veh, track, standing_start=standing
        )
        t_ext = np.append(t_prof, t_f)
        s_ext = np.append(s_prof, track.total_length)
        v_ext = np.append(v_prof, v_prof[0] if track.closed and not standing else v_prof[-1])
        a_ext = np.append(a_prof, a_prof[0] if track.closed and not standing else a_prof[-1])
        t_grid = np.linspace(0.0, t_f, n)
        s_grid = np.interp(t_grid, t_ext, s_ext)
        v_grid = np.interp(t_grid, t_ext, v_ext)
        a_grid = np.interp(t_grid, t_ext, a_ext)

        heading = track.heading_at(s_grid)
        curv = track.curvature_at(s_grid)

        # settle the vertical states under downforce so the seeded tires carry
        # realistic loads at speed
        pveh = veh.params
        aero0 = pveh.aero
        q_dyn = 0.5 * aero0.air_density * aero0.frontal_area * v_grid**2
        down_f = aero0.lift_coefficient_front * q_dyn
        down_r = aero0.lift_coefficient_rear * q_dyn
        extra = np.empty((n, 4))
        extra[:, 0] = extra[:, 1] = 0.5 * down_f
        extra[:, 2] = extra[:, 3] = 0.5 * down_r
        fz_w = veh.static_wheel_load[None, :] + extra
        kt = veh.tire.vertical_stiffness
        z_u = veh.tire.unloaded_radius - fz_w / kt
        k_wheel = np.array(
            [
                veh.suspension.front.spring_stiffness,
                veh.suspension.front.spring_stiffness,
                veh.suspension.rear.spring_stiffness,
                veh.suspension.rear.spring_stiffness,
            ]
        )
        z_w = veh.jounce_ref[None, :] + extra / k_wheel
        body_h = z_u - z_w  # equals y*roll - x*pitch + Z per wheel
        h_front = 0.5 * (body_h[:, 0] + body_h[:, 1])
        h_rear = 0.5 * (body_h[:, 2] + body_h[:, 3])
        pitch = (h_rear - h_front) / pveh.wheelbase
        z_cg = h_front + pveh.lf * pitch

        # lateral consistency: bicycle-model side slip and steering for the
        # lateral acceleration the profile implies
        a_lat = v_grid * v_grid * curv
        mass = pveh.sprung_mass + sum(pveh.unsprung_masses)
        c_front = 2.0 * veh.tire.cornering_stiffness(float(np.mean(fz_w[:, :2])))
        c_rear = 2.0 * veh.tire.cornering_stiffness(float(np.mean(fz_w[:, 2:])))
        force_front = mass * a_lat * pveh.lr / pveh.wheelbase
        force_rear = mass * a_lat * pveh.lf / pveh.wheelbase
        alpha_f = np.clip(force_front / c_front, -0.8 * o.alpha_window[1], -0.8 * o.alpha_window[0])
        alpha_r = np.clip(force_rear / c_rear, -0.8 * o.alpha_window[1], -0.8 * o.alpha_window[0])
        v_safe = np.maximum(v_grid, 3.0)
        yaw_rate = curv * v_grid
        vy_body = pveh.lr * yaw_rate - alpha_r * v_safe
        steer = alpha_f + (vy_body + pveh.lf * yaw_rate) / v_safe

        xs = np.zeros((n, st.N_STATES))
        xs[:, st.VX] = v_grid * np.cos(heading) - vy_body * np.sin(heading)
        xs[:, st.VY] = v_grid * np.sin(heading) + vy_body * np.cos(heading)
        xs[:, st.WYAW] = yaw_rate
        xs[:, st.X], xs[:, st.Y] = track.position_at(s_grid)
        xs[:, st.Z] = z_cg
        xs[:, st.PITCH] = pitch
        xs[:, st.YAW] = heading
        xs[:, st.ZW] = z_u
        xs[:, st.WSPIN] = v_grid[:, None] / z_u
        r_mean = float(np.mean(veh.wheel_height0))
        xs[:, st.SPIN] = (s_grid / r_mean)[:, None] * np.ones(4)
        xs[:, st.S] = s_grid

        us = np.zeros((n, st.N_CONTROLS))
        us[:, st.U_STEER] = np.clip(steer, -o.steer_max * 0.9, o.steer_max * 0.9)
        aero = veh.params.aero
        drag = 0.5 * aero.drag_coefficient * aero.air_density * aero.frontal_area * v_grid**2
        total_mass = veh.params.sprung_mass + sum(veh.params.unsprung_masses)
        tc = veh.tire.c
        vr = v_grid / tc["LONGVL"]
        rolling = (tc["QSY1"] + tc["QSY3"] * np.abs(vr) + tc["QSY4"] * vr**4) * np.sum(
            fz_w, axis=1
        )
        wheel_force = 0.25 * (drag + rolling + total_mass * a_grid)
        # stay strictly inside the motor envelope at the seeded speeds
        ig = veh.params.gear_ratios()
        n_m = motor_speed_rpm(v_grid[:, None] / veh.wheel_height0, ig)
        base = np.array(
            [
                veh.params.motor_front.base_speed_rpm,
                veh.params.motor_front.base_speed_rpm,
                veh.params.motor_rear.base_speed_rpm,
                veh.params.motor_rear.base_speed_rpm,
            ]
        )
        t_lim = wheel_torque_limit(n_m, ig, veh.params.motor_powers_kw(), base)
        torque = np.clip(wheel_force[:, None] * r_mean, -0.9 * t_lim, 0.9 * t_lim)
        us[:, st.U_TORQUE] = np.clip(torque, -0.95 * o.torque_max, 0.95 * o.torque_max)
        return xs, us, t_f, self.design.initial(self.base_vehicle)

    # ------------------------------------------------------------------
    def _constraints_physical(self, y: np.ndarray) -> np.ndarray:
        states, controls, t_f, p = self.layout.unpack(y)
        veh = self._vehicle_for(p)
        try:
            f, envelope = veh.dynamics(self.track, states, controls, with_envelope=True)
        except Exception as exc:  # annotate with the worst node
            margins = 1.0 - states[:, st.N] * self.track.curvature_at(states[:, st.S])
            raise RuntimeError(
                f"dynamics failed (min curvilinear margin {margins.min():.4f} "
                f"at node {int(np.argmin(margins))})"
            ) from exc
        zeta = trapezoid_defects(states, f, t_f)
        g = self.path_constraints(states, controls, veh, envelope=envelope)
        b = self.boundary_constraints(states[0], states[-1], veh)
        return np.concatenate([zeta.ravel(), g.ravel(), b])

    def constraints_scaled(self, ys: np.ndarray) -> np.ndarray:
        return self.row_scale * self._constraints_physical(self.scaling.to_physical(ys))

    def objective_scaled(self, ys: np.ndarray) -> float:
        # minimize the scaled final-time slot (unit gradient) plus the tiny
        # control regularizer; the physical lap time comes back through
        # solution_parts
        n = self.layout.n_nodes
        u = ys[self._control_idx]
        du = u[1:] - u[:-1]
        reg = (
            self.opt.control_reg * float(np.sum(u * u)) / n
            + self.opt.control_rate_reg * float(np.sum(du * du)) / n
        )
        return float(ys[self.layout.tf_index]) + reg

    def gradient_scaled(self, ys: np.ndarray) -> np.ndarray:
        g = np.zeros(self.layout.size)
        g[self.layout.tf_index] = 1.0
        n = self.layout.n_nodes
        u = ys[self._control_idx]
        gu = 2.0 * self.opt.control_reg * u / n
        du = u[1:] - u[:-1]
        gu[1:] += 2.0 * self.opt.control_rate_reg * du / n
        gu[:-1] -= 2.0 * self.opt.control_rate_reg * du / n
        g[self._control_idx] = gu
        return g

    # ------------------------------------------------------------------
    def _node_block_derivatives(self, ys: np.ndarray):
        """Batched central differences of dynamics and path rows w.r.t. the
        36 scaled node slots, for every node at once."""
        layout = self.layout
        n = layout.n_nodes
        width = layout.node_width
        a_dyn = np.empty((n, st.N_STATES, width))
        a_path = np.empty((n, N_PATH_ROWS, width))
        node_idx = np.arange(n) * width
        for slot in range(width):
            cols = node_idx + slot
            ys_hi = ys.copy()
            ys_hi[cols] += FD_STEP
            ys_lo = ys.copy()
            ys_lo[cols] -= FD_STEP
            s_hi, c_hi, _, p = layout.unpack(self.scaling.to_physical(ys_hi))
            s_lo, c_lo, _, _ = layout.unpack(self.scaling.to_physical(ys_lo))
            veh = self._vehicle_for(p)
            f_hi, env_hi = veh.dynamics(self.track, s_hi, c_hi, with_envelope=True)
            f_lo, env_lo = veh.dynamics(self.track, s_lo, c_lo, with_envelope=True)
            g_hi = self.path_constraints(s_hi, c_hi, veh, envelope=env_hi)
            g_lo = self.path_constraints(s_lo, c_lo, veh, envelope=env_lo)
            a_dyn[:, :, slot] = (f_hi - f_lo) / (2.0 * FD_STEP)
            a_path[:, :, slot] = (g_hi - g_lo) / (2.0 * FD_STEP)
        return a_dyn, a_path

    def _jacobian_scaled(self, ys: np.ndarray) -> sp.csr_matrix:
        layout = self.layout
        n = layout.n_nodes
        width = layout.node_width
        nx = st.N_STATES
        y = self.scaling.to_physical(ys)
        states, controls, t_f, p = layout.unpack(y)
        veh = self._vehicle_for(p)
        f0 = veh.dynamics(self.track, states, controls)
        a_dyn, a_path = self._node_block_derivatives(ys)

        h_t = t_f / (n - 1)
        half_state = self.scaling.half[: nx]  # state slots of node 0

        rows: list[np.ndarray] = []
        cols: list[np.ndarray] = []
        vals: list[np.ndarray] = []

        # defect rows: rows (k*nx + i), node-k and node-(k+1) blocks
        k_arr = np.arange(n - 1)
        row_base = (k_arr * nx)[:, None, None] + np.arange(nx)[None, :, None]
        col_k = (k_arr * width)[:, None, None] + np.arange(width)[None, None, :]
        col_k1 = col_k + width

        eye_block = np.zeros((nx, width))
        eye_block[:, :nx] = np.diag(half_state)
        d_k = -eye_block[None, :, :] - 0.5 * h_t * a_dyn[:-1]
        d_k1 = eye_block[None, :, :] - 0.5 * h_t * a_dyn[1:]
        for block, col in ((d_k, col_k), (d_k1, col_k1)):
            rows.append(np.broadcast_to(row_base, block.shape).ravel())
            cols.append(np.broadcast_to(col, block.shape).ravel())
            vals.append(block.ravel())

        # defect tf column (analytic: h depends linearly on tf)
        tf_col = self.layout.tf_index
        dtf = -(self.scaling.half[tf_col] / (2.0 * (n - 1))) * (f0[1:] + f0[:-1])
        rows.append((row_base[..., 0]).ravel())
        cols.append(np.full((n - 1) * nx, tf_col))
        vals.append(dtf.ravel())

        # path rows
        offset_path = (n - 1) * nx
        kp = np.arange(n)
        prow = offset_path + (kp * N_PATH_ROWS)[:, None, None] + np.arange(N_PATH_ROWS)[None, :, None]
        pcol = (kp * width)[:, None, None] + np.arange(width)[None, None, :]
        rows.append(np.broadcast_to(prow, a_path.shape).ravel())
        cols.append(np.broadcast_to(pcol, a_path.shape).ravel())
        vals.append(a_path.ravel())

        # boundary rows: small dense FD over first/last node slots
        offset_bnd = offset_path + n * N_PATH_ROWS
        nb = self._n_boundary()

        def bnd_of(ys_loc):
            y_loc = self.scaling.to_physical(ys_loc)
            s_loc, _, _, p_loc = layout.unpack(y_loc)
            return self.boundary_constraints(s_loc[0], s_loc[-1], self._vehicle_for(p_loc))

        for node in (0, n - 1):
            for slot in range(nx):  # boundary rows depend on states only
                j = node * width + slot
                ys_hi = ys.copy()
                ys_hi[j] += FD_STEP
                ys_lo = ys.copy()
                ys_lo[j] -= FD_STEP
                col_vals = (bnd_of(ys_hi) - bnd_of(ys_lo)) / (2.0 * FD_STEP)
                nz = np.nonzero(col_vals)[0]
                rows.append(offset_bnd + nz)
                cols.append(np.full(nz.size, j))
                vals.append(col_vals[nz])

        # design columns: dense central FD through the full constraint vector
        for d in range(layout.n_design):
            j = layout.tf_index + 1 + d
            ys_hi = ys.copy()
            ys_hi[j] += FD_STEP
            ys_lo = ys.copy()
            ys_lo[j] -= FD_STEP
            col_vals = (
                self._constraints_physical(self.scaling.to_physical(ys_hi))
                - self._constraints_physical(self.scaling.to_physical(ys_lo))
            ) / (2.0 * FD_STEP)
            nz = np.nonzero(col_vals)[0]
            rows.append(nz)
            cols.append(np.full(nz.size, j))
            vals.append(col_vals[nz])

        jac = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.n_constraints, layout.size),
        )
        return sp.diags(self.row_scale) @ jac

    # ------------------------------------------------------------------
    def build_nlp(self) -> NlpProblem:
        return NlpProblem(
            n=self.layout.size,
            objective=self.objective_scaled,
            gradient=self.gradient_scaled,
            constraints=self.constraints_scaled,
            jacobian=self._jacobian_scaled,
            lb=np.full(self.layout.size, -1.0),
            ub=np.full(self.layout.size, 1.0),
            cl=self.row_scale * self.cl,
            cu=self.row_scale * self.cu,
            x0=self.y0_scaled.copy(),
            name=f"lap-{self.design.name}-{self.opt.boundary}",
            dense_columns=np.arange(self.layout.tf_index, self.layout.size),
        )

    def with_initial(self, states, controls, t_f, design) -> None:
        """Replace the initial guess (warm start)."""
        y0 = self.layout.pack(states, controls, t_f, np.asarray(design, dtype=float))
        y0 = np.clip(y0, self.lb_y + 1e-9 * self.span_y, self.ub_y - 1e-9 * self.span_y)
        self.y0_scaled = self.scaling.to_scaled(y0)

    def solution_parts(self, ys: np.ndarray):
        """(states, controls, t_f, design) in physical units."""
        return self.layout.unpack(self.scaling.to_physical(ys))

    # ------------------------------------------------------------------
    def reintegrate(self, states, controls, t_f, design, substeps: int = 25):
        """RK4 re-integration from the first node with linearly interpolated
        controls; returns (terminal error scaled by state spans, final state)."""
        from ..vehicle import rk4_step

        veh = self._vehicle_for(np.asarray(design, dtype=float))
        n = states.shape[0]
        h = t_f / (n - 1)
        x = states[0].copy()
        for k in range(n - 1):
            u0, u1 = controls[k], controls[k + 1]
            dt = h / substeps
            for j in range(substeps):
                tau0 = j / substeps
                tau_mid = (j + 0.5) / substeps
                tau1 = (j + 1) / substeps
                u_of = {
                    0.0: u0 + (u1 - u0) * tau0,
                    0.5: u0 + (u1 - u0) * tau_mid,
                    1.0: u0 + (u1 - u0) * tau1,
                }
                k1 = veh.dynamics(self.track, x, u_of[0.0])
                k2 = veh.dynamics(self.track, x + 0.5 * dt * k1, u_of[0.5])
                k3 = veh.dynamics(self.track, x + 0.5 * dt * k2, u_of[0.5])
                k4 = veh.dynamics(self.track, x + dt * k3, u_of[1.0])
                x = x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        err = np.max(np.abs(x - states[-1]) / self.scaling.half[: st.N_STATES])
        return float(err), x

    # ------------------------------------------------------------------
    def save_solution(self, path, ys: np.ndarray, meta: dict | None = None) -> None:
        states, controls, t_f, p = self.solution_parts(ys)
        doc = {
            "layout": {
                "n_nodes": self.layout.n_nodes,
                "n_states": self.layout.n_states,
                "n_controls": self.layout.n_controls,
                "n_design": self.layout.n_design,
            },
            "design_case": self.design.name,
            "boundary": self.opt.boundary,
            "t_f": t_f,
            "states": states.tolist(),
            "controls": controls.tolist(),
            "design": np.asarray(p).tolist(),
            "meta": meta or {},
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, sort_keys=True)

    @staticmethod
    def load_solution(path) -> dict:
        with open(path) as fh:
            doc = json.load(fh)
        doc["states"] = np.asarray(doc["states"])
        doc["controls"] = np.asarray(doc["controls"])
        doc["design"] = np.asarray(doc["design"])
        return doc
