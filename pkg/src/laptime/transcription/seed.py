"""Closed-loop driver simulation used to seed the transcription.

A simple driver model (centerline/heading tracking steer, speed-profile
tracking torque) runs the full chassis model through one lap with fixed-step
RK4.  Sampling that trajectory at the collocation nodes starts the optimizer
essentially feasible, so the solve is a descent polish instead of a
feasibility excursion.
"""

from __future__ import annotations

import numpy as np

from ..track import Track
from ..vehicle import state as st
from ..vehicle.model import Vehicle, rk4_step
from ..vehicle.powertrain import motor_speed_rpm, wheel_torque_limit
from .speed_profile import quasi_steady_profile

__all__ = ["simulate_driver_lap"]


def _driver_controls(vehicle: Vehicle, track: Track, x, v_target, accel_ff,
                     steer_gain_heading=0.9, steer_gain_lateral=0.08,
                     speed_gain=1.2, steer_max=0.22, torque_max=580.0):
    p = vehicle.params
    s = x[st.S]
    curv = float(track.curvature_at(s))
    v = float(np.hypot(x[st.VX], x[st.VY]))

    steer = (
        p.wheelbase * curv
        - steer_gain_heading * x[st.CHI]
        - steer_gain_lateral * x[st.N]
    )
    steer = float(np.clip(steer, -steer_max, steer_max))

    mass = p.sprung_mass + sum(p.unsprung_masses)
    aero = p.aero
    drag = 0.5 * aero.drag_coefficient * aero.air_density * aero.frontal_area * v * v
    tc = vehicle.tire.c
    vr = v / tc["LONGVL"]
    fz_est = mass * p.gravity + 0.5 * aero.air_density * aero.frontal_area * (
        aero.lift_coefficient_front + aero.lift_coefficient_rear
    ) * v * v
    rolling = (tc["QSY1"] + tc["QSY3"] * abs(vr) + tc["QSY4"] * vr**4) * fz_est
    force = mass * (accel_ff + speed_gain * (v_target - v)) + drag + rolling
    r_mean = float(np.mean(x[st.ZW]))
    torque = 0.25 * force * r_mean

    ig = p.gear_ratios()
    n_m = motor_speed_rpm(x[st.WSPIN], ig)
    base = np.array(
        [p.motor_front.base_speed_rpm] * 2 + [p.motor_rear.base_speed_rpm] * 2
    )
    t_lim = wheel_torque_limit(n_m, ig, p.motor_powers_kw(), base)
    torques = np.clip(torque, -0.92 * t_lim, 0.92 * t_lim)
    torques = np.clip(torques, -torque_max, torque_max)
    u = np.empty(st.N_CONTROLS)
    u[st.U_STEER] = steer
    u[st.U_TORQUE] = torques
    return u


def simulate_driver_lap(vehicle: Vehicle, track: Track, n_nodes: int,
                        standing_start: bool = False, dt: float = 3.0e-3,
                        speed_margin: float = 0.93):
    """(states, controls, t_f) sampled at ``n_nodes`` uniform times.

    The lap ends when the traveled distance reaches the track length; the
    returned lap time is the simulated duration.
    """
    s_prof, v_prof, a_prof, _, t_est = quasi_steady_profile(
        vehicle, track, standing_start=standing_start
    )
    s_ext = np.append(s_prof, track.total_length)
    v_ext = np.append(v_prof, v_prof[0] if track.closed and not standing_start else v_prof[-1])
    a_ext = np.append(a_prof, a_prof[0] if track.closed and not standing_start else a_prof[-1])

    def target(s):
        return (
            speed_margin * np.interp(s, s_ext, v_ext),
            np.interp(s, s_ext, a_ext) * speed_margin,
        )

    v0, _ = target(0.0)
    x = vehicle.static_state(speed=0.0 if standing_start else float(v0),
                             yaw=float(track.heading[0]))
    x[st.X] = track.x[0]
    x[st.Y] = track.y[0]

    max_steps = int(3.0 * t_est / dt) + 2000
    ts = [0.0]
    xs = [x.copy()]
    us = []
    t = 0.0
    for _ in range(max_steps):
        v_t, a_ff = target(x[st.S])
        u = _driver_controls(vehicle, track, x, float(v_t), float(a_ff))
        us.append(u)
        x = rk4_step(lambda z: vehicle.dynamics(track, z, u), x, dt)
        t += dt
        ts.append(t)
        xs.append(x.copy())
        if x[st.S] >= track.total_length:
            break
    else:
        raise RuntimeError("driver lap did not finish within the step budget")
    us.append(us[-1])

    ts = np.asarray(ts)
    xs = np.stack(xs)
    us = np.stack(us)
    # interpolate the lap time where s crosses the finish line exactly
    s_tr = xs[:, st.S]
    k = int(np.searchsorted(s_tr, track.total_length))
    frac = (track.total_length - s_tr[k - 1]) / max(s_tr[k] - s_tr[k - 1], 1e-12)
    t_f = float(ts[k - 1] + frac * dt)

    t_nodes = np.linspace(0.0, t_f, n_nodes)
    states = np.empty((n_nodes, st.N_STATES))
    controls = np.empty((n_nodes, st.N_CONTROLS))
    for j in range(st.N_STATES):
        states[:, j] = np.interp(t_nodes, ts, xs[:, j])
    for j in range(st.N_CONTROLS):
        controls[:, j] = np.interp(t_nodes, ts, us[:, j])
    states[-1, st.S] = track.total_length
    return states, controls, t_f
