"""Vehicle assembly and the 31-state derivative function.

``Vehicle`` binds chassis parameters, suspension tables and a tire evaluator,
and precomputes the static equilibrium (spring preloads, ride height, wheel
heights) so that the all-zero-velocity state is an exact equilibrium of
``dynamics``.

``dynamics`` evaluates the chassis equations in batch: the sprung block
solves

    M_gb(q) qdd_b = Q_b - M_gb_dot q_b_dot + 0.5 * grad_q(q_b_dot^T M_gb q_b_dot)

with the closed-form matrix derivatives, the unsprung block divides by its
constant diagonal, and the path block appends the curvilinear projection
rates.  All force conventions follow the generalized-force rows of the
chassis model: tire forces act at ground level with the CG height as moment
arm, the longitudinal force reacts on the wheel spin with the wheel-center
height as arm, drive torque reacts on the body, and anti-roll forces carry
the +right/-left sign pattern.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..suspension import (
    SuspensionParams,
    antiroll_force,
    default_suspension,
    interp1,
    interp2,
    suspension_force,
    wheel_kinematics,
)
from ..tire import MagicFormulaTire, load_tir
from ..track import Track, path_rate_chi, path_rates
from . import state as st
from .mass_matrix import (
    body_mass_matrix,
    body_mass_matrix_derivatives,
    effective_spin_inertia,
    unsprung_mass_matrix,
)
from .params import VehicleParams

__all__ = ["Vehicle", "DynamicsError", "build_default_vehicle", "rk4_step", "simulate"]

V_EPS = 0.1  # slip-denominator regularization [m/s]
MIN_WHEEL_HEIGHT = 0.05


class DynamicsError(RuntimeError):
    pass


def generalized_forces(params, x2, torque, delta, tire_planar, fz, f_bs, f_atr, aero):
    """Assemble the sprung (6) and unsprung (8) generalized force rows.

    ``tire_planar`` is ``(fx, fy, my, mz)`` per wheel, ``aero`` is
    ``(drag, downforce_front, downforce_rear)``; ``f_atr`` already carries the
    +right/-left signs.  The unsprung rows are ordered spins first, verticals
    second.  Tire forces act at ground level (CG height as roll/pitch arm),
    the longitudinal force reacts on the spin with the wheel-center height as
    arm, and drive-torque reaction loads the body about the steered axle
    direction.
    """
    fx, fy, my, mz = tire_planar
    f_drag, f_down_f, f_down_r = aero
    p = params
    xw = p.wheel_x()
    yw = p.wheel_y()
    n = x2.shape[0]
    c, s = np.cos(x2[:, st.YAW]), np.sin(x2[:, st.YAW])
    cd, sd = np.cos(delta), np.sin(delta)
    bfx = fx * cd - fy * sd
    bfy = fx * sd + fy * cd

    zab = x2[:, st.Z]
    qb = np.empty((n, 6))
    qb[:, 0] = np.sum(bfx, axis=1) * c - np.sum(bfy, axis=1) * s - f_drag * c
    qb[:, 1] = np.sum(bfx, axis=1) * s + np.sum(bfy, axis=1) * c - f_drag * s
    # downforce magnitudes act downward on the sprung mass
    qb[:, 2] = np.sum(f_bs, axis=1) - p.sprung_mass * p.gravity - f_down_f - f_down_r
    qb[:, 3] = (
        -np.sum(f_atr * yw, axis=1)
        + np.sum(f_bs * yw, axis=1)
        + np.sum(bfy, axis=1) * zab
        + np.sum(torque * sd, axis=1)
    )
    qb[:, 4] = (
        f_down_f * p.lf
        - f_down_r * p.lr
        - np.sum(f_bs * xw, axis=1)
        - np.sum(bfx, axis=1) * zab
        - np.sum(torque * cd, axis=1)
    )
    if p.aero.drag_pitch_moment:
        qb[:, 4] += f_drag * (zab - p.aero.drag_height)
    qb[:, 5] = np.sum(mz, axis=1) + np.sum(bfy * xw, axis=1) - np.sum(bfx * yw, axis=1)

    qu = np.empty((n, 8))
    qu[:, :4] = torque + my - fx * x2[:, st.ZW]
    qu[:, 4:] = f_atr - f_bs + fz - np.asarray(p.unsprung_masses) * p.gravity
    return qb, qu


@dataclass(frozen=True)
class Vehicle:
    params: VehicleParams
    suspension: SuspensionParams
    tire: MagicFormulaTire
    tire_mode: str = "magic"  # or "linear" for the reduced-model checks
    linear_kappa_stiffness: float = 0.0
    linear_alpha_stiffness: float = 0.0
    # static equilibrium, derived in __post_init__
    static_wheel_load: np.ndarray = field(default=None, repr=False)
    spring_preload: np.ndarray = field(default=None, repr=False)
    ride_height: float = field(default=None, repr=False)
    wheel_height0: np.ndarray = field(default=None, repr=False)
    jounce_ref: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        p = self.params
        g = p.gravity
        lf, lr, wb = p.lf, p.lr, p.wheelbase
        mb = p.sprung_mass
        preload_front = mb * g * lr / (2.0 * wb)
        preload_rear = mb * g * lf / (2.0 * wb)
        preload = np.array([preload_front, preload_front, preload_rear, preload_rear])
        fz0 = preload + np.asarray(p.unsprung_masses) * g
        kt = self.tire.vertical_stiffness
        zu0 = self.tire.unloaded_radius - fz0 / kt
        z0 = p.cg_height
        object.__setattr__(self, "static_wheel_load", fz0)
        object.__setattr__(self, "spring_preload", preload)
        object.__setattr__(self, "ride_height", float(z0))
        object.__setattr__(self, "wheel_height0", zu0)
        object.__setattr__(self, "jounce_ref", zu0 - z0)

    # ------------------------------------------------------------------
    def static_state(self, speed: float = 0.0, yaw: float = 0.0) -> np.ndarray:
        """Equilibrium state rolling straight at ``speed`` (zero slip)."""
        x = np.zeros(st.N_STATES)
        x[st.VX] = speed * np.cos(yaw)
        x[st.VY] = speed * np.sin(yaw)
        x[st.Z] = self.ride_height
        x[st.YAW] = yaw
        x[st.ZW] = self.wheel_height0
        x[st.WSPIN] = speed / self.wheel_height0
        return x

    def with_tire_mode(self, mode: str, reference_load: float | None = None) -> "Vehicle":
        """Return a copy in linearized-tire mode (stiffness at the given load)."""
        if mode == "magic":
            return replace(self, tire_mode="magic")
        load = reference_load if reference_load is not None else float(
            np.mean(self.static_wheel_load)
        )
        return replace(
            self,
            tire_mode="linear",
            linear_kappa_stiffness=self.tire.longitudinal_stiffness(load),
            linear_alpha_stiffness=self.tire.cornering_stiffness(load),
        )

    # ------------------------------------------------------------------
    def _wheel_geometry(self, x2: np.ndarray, u2: np.ndarray):
        p = self.params
        xw = p.wheel_x()
        yw = p.wheel_y()
        z = x2[:, st.Z][:, None]
        roll = x2[:, st.ROLL][:, None]
        pitch = x2[:, st.PITCH][:, None]
        vz = x2[:, st.VZ][:, None]
        wroll = x2[:, st.WROLL][:, None]
        wpitch = x2[:, st.WPITCH][:, None]
        zu = x2[:, st.ZW]
        vzu = x2[:, st.VZW]
        z_w = zu - (yw * roll - xw * pitch + z)
        zdot_w = vzu - (yw * wroll - xw * wpitch + vz)
        jounce = z_w - self.jounce_ref
        return z_w, zdot_w, jounce

    def _kinematics(self, jounce: np.ndarray, steer: np.ndarray):
        # both wheels of an axle share tables: stack the queries per axle
        gamma = np.empty_like(jounce)
        delta = np.empty_like(jounce)
        for axle, pair in ((self.suspension.front, (0, 1)), (self.suspension.rear, (2, 3))):
            j2 = jounce[:, pair]
            s2 = np.broadcast_to(steer[:, None], j2.shape)
            g, _, d = wheel_kinematics(axle, j2, s2)
            gamma[:, pair] = g
            delta[:, pair] = d
        return gamma, delta

    def _suspension_forces(self, jounce, jounce_rate):
        f = np.empty_like(jounce)
        for axle, pair in ((self.suspension.front, (0, 1)), (self.suspension.rear, (2, 3))):
            f[:, pair] = self.spring_preload[list(pair)] + suspension_force(
                axle, jounce[:, pair], jounce_rate[:, pair]
            )
        return f

    def _antiroll_forces(self, jounce):
        # wheel order is (fr, fl, rr, rl); right wheel first per axle
        front = antiroll_force(self.suspension.front, jounce[:, 0], jounce[:, 1])
        rear = antiroll_force(self.suspension.rear, jounce[:, 2], jounce[:, 3])
        return np.stack([front, -front, rear, -rear], axis=1)

    def tire_normal_force(self, zu, vzu):
        deflection = self.tire.unloaded_radius - zu
        return self.tire.vertical_force(deflection, -vzu)

    def _tire_planar(self, fz, kappa, alpha, gamma, vx):
        if self.tire_mode == "linear":
            zero = np.zeros_like(fz)
            return (
                self.linear_kappa_stiffness * kappa * (fz > 0),
                self.linear_alpha_stiffness * alpha * (fz > 0),
                zero,
                zero,
                zero,
            )
        out = self.tire.forces(fz, kappa, alpha, gamma, vx)
        return out.fx, out.fy, out.mx, out.my, out.mz

    def slip_quantities(self, x2: np.ndarray, delta: np.ndarray, z_w: np.ndarray):
        """Per-wheel slip ratio, slip angle, and wheel-frame velocities.

        Wheel-center planar velocity from rigid transport at height ``z_w``,
        rotated into the steered wheel frame; denominators regularized with
        ``V_EPS`` for standing starts.
        """
        p = self.params
        xw = p.wheel_x()
        yw = p.wheel_y()
        c, s = np.cos(x2[:, st.YAW]), np.sin(x2[:, st.YAW])
        vx_b = (c * x2[:, st.VX] + s * x2[:, st.VY])[:, None]
        vy_b = (-s * x2[:, st.VX] + c * x2[:, st.VY])[:, None]
        wroll = x2[:, st.WROLL][:, None]
        wpitch = x2[:, st.WPITCH][:, None]
        wyaw = x2[:, st.WYAW][:, None]
        v_ux = vx_b + z_w * wpitch - yw * wyaw
        v_uy = vy_b - z_w * wroll + xw * wyaw
        cd, sd = np.cos(delta), np.sin(delta)
        vxw = v_ux * cd + v_uy * sd
        vyw = -v_ux * sd + v_uy * cd
        r_e = np.maximum(x2[:, st.ZW], MIN_WHEEL_HEIGHT)
        denom = np.maximum(np.abs(vxw), V_EPS)
        kappa = (x2[:, st.WSPIN] * r_e - vxw) / denom
        alpha = -np.arctan2(vyw, denom)
        return kappa, alpha, vxw, vyw, r_e

    def aero_forces(self, vx_b):
        a = self.params.aero
        q = 0.5 * a.air_density * a.frontal_area * vx_b * np.abs(vx_b)
        return a.drag_coefficient * q, a.lift_coefficient_front * q, a.lift_coefficient_rear * q

    # ------------------------------------------------------------------
    def dynamics(self, track: Track, x, u, frozen_vertical: bool = False,
                 with_envelope: bool = False):
        """State derivative f(x, u); batched over leading axis when 2-D.

        ``frozen_vertical`` zeroes the heave/roll/pitch and wheel-vertical
        accelerations (rigid-suspension reduced model).  ``with_envelope``
        additionally returns the (fz, kappa, alpha) pages computed on the
        way, for operating-envelope rows that would otherwise re-evaluate
        the wheel kinematics.
        """
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        single = x.ndim == 1
        x2 = np.atleast_2d(x)
        u2 = np.atleast_2d(u)
        n = x2.shape[0]
        p = self.params
        xw = p.wheel_x()
        yw = p.wheel_y()

        z_w, zdot_w, jounce = self._wheel_geometry(x2, u2)
        steer = u2[:, st.U_STEER]
        torque = u2[:, st.U_TORQUE]
        gamma, delta = self._kinematics(jounce, steer)

        fz = self.tire_normal_force(x2[:, st.ZW], x2[:, st.VZW])
        kappa, alpha, vxw, vyw, r_e = self.slip_quantities(x2, delta, z_w)
        c, s = np.cos(x2[:, st.YAW]), np.sin(x2[:, st.YAW])
        vx_b = c * x2[:, st.VX] + s * x2[:, st.VY]
        fx, fy, _mx, my, mz = self._tire_planar(fz, kappa, alpha, gamma, vx_b[:, None])

        f_bs = self._suspension_forces(jounce, zdot_w)
        f_atr = self._antiroll_forces(jounce)
        f_drag, f_down_f, f_down_r = self.aero_forces(vx_b)

        qb, qu = generalized_forces(
            p, x2, torque, delta, (fx, fy, my, mz), fz, f_bs, f_atr,
            (f_drag, f_down_f, f_down_r),
        )
        q_spin = qu[:, :4]
        q_vert = qu[:, 4:]

        # sprung block: M qdd = Q - Mdot qdot + 0.5 * grad(qdot' M qdot)
        psi = x2[:, st.YAW]
        m_gb = body_mass_matrix(psi, z_w, p)
        d_psi, d_zw = body_mass_matrix_derivatives(psi, z_w, p)
        qdot = x2[:, st.QB_RATES]
        m_dot = d_psi * x2[:, st.WYAW][:, None, None] + np.einsum(
            "ni,nijk->njk", zdot_w, d_zw
        )
        # chain z_w = z_u - (yw roll - xw pitch + Z) into the coordinate partials
        quad_zw = np.einsum("nj,nijk,nk->ni", qdot, d_zw, qdot)  # qdot' dM/dz_w,i qdot
        grad = np.zeros((n, 6))
        grad[:, 2] = -np.sum(quad_zw, axis=1)
        grad[:, 3] = -np.sum(quad_zw * yw, axis=1)
        grad[:, 4] = np.sum(quad_zw * xw, axis=1)
        grad[:, 5] = np.einsum("nj,njk,nk->n", qdot, d_psi, qdot)

        rhs = qb - np.einsum("njk,nk->nj", m_dot, qdot) + 0.5 * grad
        try:
            qdd_b = np.linalg.solve(m_gb, rhs[..., None])[..., 0]
        except np.linalg.LinAlgError as exc:
            cond = np.linalg.cond(m_gb.reshape(-1, 6, 6))
            raise DynamicsError(
                f"singular sprung mass matrix (max cond {np.max(cond):.3g})"
            ) from exc

        thdd = q_spin / effective_spin_inertia(p)
        zdd = q_vert / np.asarray(p.unsprung_masses)

        curv = track.curvature_at(x2[:, st.S])
        s_dot, n_dot = path_rates(
            x2[:, st.VX], x2[:, st.VY], psi, x2[:, st.CHI], x2[:, st.N], curv
        )
        chi_dot = path_rate_chi(x2[:, st.WYAW], curv, s_dot)

        dx = np.empty_like(x2)
        dx[:, st.QB_RATES] = qdd_b
        dx[:, st.VZW] = zdd
        dx[:, st.WSPIN] = thdd
        dx[:, st.QB_COORDS] = x2[:, st.QB_RATES]
        dx[:, st.ZW] = x2[:, st.VZW]
        dx[:, st.SPIN] = x2[:, st.WSPIN]
        dx[:, st.S] = s_dot
        dx[:, st.N] = n_dot
        dx[:, st.CHI] = chi_dot
        if frozen_vertical:
            dx[:, [st.VZ, st.WROLL, st.WPITCH]] = 0.0
            dx[:, st.VZW] = 0.0
        out = dx[0] if single else dx
        if with_envelope:
            return out, (fz, kappa, alpha)
        return out

    # ------------------------------------------------------------------
    def slip_state(self, x, u):
        """Per-node (fz, kappa, alpha) without evaluating the force model;
        the operating-envelope rows of the transcription need only these."""
        x2 = np.atleast_2d(np.asarray(x, dtype=float))
        u2 = np.atleast_2d(np.asarray(u, dtype=float))
        z_w, _, jounce = self._wheel_geometry(x2, u2)
        _, delta = self._kinematics(jounce, u2[:, st.U_STEER])
        fz = self.tire_normal_force(x2[:, st.ZW], x2[:, st.VZW])
        kappa, alpha, _, _, _ = self.slip_quantities(x2, delta, z_w)
        return fz, kappa, alpha

    def tire_state(self, track: Track, x, u):
        """Per-node tire quantities (fz, kappa, alpha, fx, fy) for reporting."""
        x2 = np.atleast_2d(np.asarray(x, dtype=float))
        u2 = np.atleast_2d(np.asarray(u, dtype=float))
        z_w, zdot_w, jounce = self._wheel_geometry(x2, u2)
        gamma, delta = self._kinematics(jounce, u2[:, st.U_STEER])
        fz = self.tire_normal_force(x2[:, st.ZW], x2[:, st.VZW])
        kappa, alpha, _, _, _ = self.slip_quantities(x2, delta, z_w)
        c, s = np.cos(x2[:, st.YAW]), np.sin(x2[:, st.YAW])
        vx_b = c * x2[:, st.VX] + s * x2[:, st.VY]
        fx, fy, _, _, _ = self._tire_planar(fz, kappa, alpha, gamma, vx_b[:, None])
        return fz, kappa, alpha, fx, fy

    def mechanical_energy(self, x) -> float:
        """Kinetic plus potential energy from the generalized mass matrices
        and the spring/gravity potentials; independent of ``dynamics``."""
        x = np.asarray(x, dtype=float)
        p = self.params
        x2 = np.atleast_2d(x)
        z_w, _, jounce = self._wheel_geometry(x2, np.zeros((x2.shape[0], 5)))
        m_gb = body_mass_matrix(x2[:, st.YAW], z_w, p)
        qdot = x2[:, st.QB_RATES]
        t_b = 0.5 * np.einsum("nj,njk,nk->n", qdot, m_gb, qdot)
        j_spin = effective_spin_inertia(p)
        t_u = 0.5 * np.sum(j_spin * x2[:, st.WSPIN] ** 2, axis=1)
        t_u += 0.5 * np.sum(np.asarray(p.unsprung_masses) * x2[:, st.VZW] ** 2, axis=1)

        v_grav = p.sprung_mass * p.gravity * x2[:, st.Z]
        v_grav += np.sum(np.asarray(p.unsprung_masses) * p.gravity * x2[:, st.ZW], axis=1)

        v_susp = np.zeros(x2.shape[0])
        for i in range(4):
            axle = self.suspension.axle(i)
            lam = interp1(axle.motion_ratio, jounce[:, i])
            wheel_rate = lam * lam * axle.spring_stiffness
            v_susp += self.spring_preload[i] * jounce[:, i] + 0.5 * wheel_rate * jounce[:, i] ** 2

        v_arb = np.zeros(x2.shape[0])
        for axle, (ir, il) in ((self.suspension.front, (0, 1)), (self.suspension.rear, (2, 3))):
            mean = 0.5 * (jounce[:, ir] + jounce[:, il])
            delta = jounce[:, ir] - jounce[:, il]
            # stored energy is -integral of F over the jounce difference
            # (exact for tables independent of the mean jounce); 64 panels
            tau = np.linspace(0.0, 1.0, 65)
            grid = delta[:, None] * tau[None, :]
            vals = axle.antiroll_coefficient * interp2(
                axle.antiroll_table,
                np.repeat(mean[:, None], tau.size, axis=1),
                grid,
            )
            v_arb += -np.trapezoid(vals, grid, axis=1)

        deflection = np.maximum(self.tire.unloaded_radius - x2[:, st.ZW], 0.0)
        v_tire = 0.5 * self.tire.vertical_stiffness * np.sum(deflection**2, axis=1)

        total = t_b + t_u + v_grav + v_susp + v_arb + v_tire
        return float(total[0]) if x.ndim == 1 else total

    def power_balance(self, track: Track, x, u) -> dict[str, float]:
        """Instantaneous power bookkeeping for the energy audit."""
        x2 = np.atleast_2d(np.asarray(x, dtype=float))
        u2 = np.atleast_2d(np.asarray(u, dtype=float))
        p = self.params
        xw, yw = p.wheel_x(), p.wheel_y()
        z_w, zdot_w, jounce = self._wheel_geometry(x2, u2)
        gamma, delta = self._kinematics(jounce, u2[:, st.U_STEER])
        fz = self.tire_normal_force(x2[:, st.ZW], x2[:, st.VZW])
        kappa, alpha, vxw, vyw, r_e = self.slip_quantities(x2, delta, z_w)
        c, s = np.cos(x2[:, st.YAW]), np.sin(x2[:, st.YAW])
        vx_b = c * x2[:, st.VX] + s * x2[:, st.VY]
        vy_b = -s * x2[:, st.VX] + c * x2[:, st.VY]
        fx, fy, _mx, my, mz = self._tire_planar(fz, kappa, alpha, gamma, vx_b[:, None])

        spin = x2[:, st.WSPIN]
        p_control = np.sum(u2[:, st.U_TORQUE] * spin, axis=1)
        p_rolling = -np.sum(my * spin, axis=1)

        # contact-point velocities (force acts at ground level, arm = CG height)
        z = x2[:, st.Z][:, None]
        v_cx = vx_b[:, None] - z * x2[:, st.WPITCH][:, None] - yw * x2[:, st.WYAW][:, None]
        v_cy = vy_b[:, None] + z * x2[:, st.WROLL][:, None] + xw * x2[:, st.WYAW][:, None]
        cdel, sdel = np.cos(delta), np.sin(delta)
        vcxw = v_cx * cdel + v_cy * sdel
        vcyw = -v_cx * sdel + v_cy * cdel
        p_slip = -np.sum(fx * (vcxw - spin * x2[:, st.ZW]) + fy * vcyw, axis=1)

        p_damper = np.zeros(x2.shape[0])
        for i in range(4):
            axle = self.suspension.axle(i)
            lam = interp1(axle.motion_ratio, jounce[:, i])
            p_damper += lam * lam * axle.damping * zdot_w[:, i] ** 2

        f_drag, f_down_f, f_down_r = self.aero_forces(vx_b)
        p_drag = f_drag * vx_b
        p_aero_vert = -(f_down_f + f_down_r) * x2[:, st.VZ] + (
            f_down_f * p.lf - f_down_r * p.lr
        ) * x2[:, st.WPITCH]

        deflection = self.tire.unloaded_radius - x2[:, st.ZW]
        contact = deflection > 0
        p_tire_damp = np.sum(
            self.tire.vertical_damping * x2[:, st.VZW] ** 2 * contact, axis=1
        )

        out = {
            "control": p_control,
            "rolling": p_rolling,
            "slip": p_slip,
            "damper": p_damper,
            "drag": p_drag,
            "aero_vertical": p_aero_vert,
            "tire_damping": p_tire_damp,
        }
        if np.asarray(x).ndim == 1:
            out = {k: float(v[0]) for k, v in out.items()}
        return out


def build_default_vehicle(
    params: VehicleParams | None = None,
    suspension: SuspensionParams | None = None,
    tire: MagicFormulaTire | None = None,
) -> Vehicle:
    from ..data import default_tir_path

    if tire is None:
        tire = MagicFormulaTire(load_tir(default_tir_path()))
    return Vehicle(
        params=params or VehicleParams(),
        suspension=suspension or default_suspension(),
        tire=tire,
    )


def rk4_step(f, x, h):
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def simulate(f, x0, h: float, n_steps: int) -> np.ndarray:
    """Fixed-step RK4 trajectory; returns (n_steps + 1, n_x)."""
    out = np.empty((n_steps + 1, np.asarray(x0).size))
    out[0] = x0
    for k in range(n_steps):
        out[k + 1] = rk4_step(f, out[k], h)
        if not np.all(np.isfinite(out[k + 1])):
            raise DynamicsError(f"integration diverged at t = {(k + 1) * h:.4f} s")
    return out
