"""Quasi-steady lap speed profile for initial guesses.

Classic point-mass profile: a curvature-limited corner speed including the
downforce gain, then a forward pass (traction and power limited) and a
backward pass (braking limited) with friction-ellipse coupling.  Closed
tracks get wrap-around passes so the start/finish speeds agree; a standing
start pins the launch at rest and replays the forward pass once.  The result
seeds the transcription far closer to the optimum than a constant-speed
centerline run.
"""

from __future__ import annotations

import numpy as np

from ..track import Track
from ..vehicle.model import Vehicle

__all__ = ["quasi_steady_profile"]


def quasi_steady_profile(vehicle: Vehicle, track: Track, margin: float = 0.92,
                         standing_start: bool = False):
    """Profile on the track's arc-length grid.

    Returns ``(s, v, a_long, t, lap_time)``; ``margin`` shrinks the grip and
    power limits so the seeded trajectory starts strictly inside the
    operating envelopes.
    """
    p = vehicle.params
    s = track.s
    n = s.size
    if track.closed:
        ds = np.diff(np.append(s, track.total_length))
    else:
        ds = np.append(np.diff(s), np.diff(s)[-1])
    curv = np.abs(track.curvature)

    mass = p.sprung_mass + sum(p.unsprung_masses)
    g = p.gravity
    fz_static = float(np.sum(vehicle.static_wheel_load))
    dx, dy = vehicle.tire.peak_friction(fz_static / 4.0)
    mu_x = float(dx) / (fz_static / 4.0) * margin
    mu_y = float(dy) / (fz_static / 4.0) * margin

    aero = p.aero
    k_drag = 0.5 * aero.air_density * aero.frontal_area * aero.drag_coefficient
    k_down = 0.5 * aero.air_density * aero.frontal_area * (
        aero.lift_coefficient_front + aero.lift_coefficient_rear
    )
    power = p.max_power_kw * 1e3 * margin

    tc = vehicle.tire.c
    v_ref = tc["LONGVL"]

    def rolling_coeff(v_i):
        vr = v_i / v_ref
        return tc["QSY1"] + tc["QSY3"] * abs(vr) + tc["QSY4"] * vr**4

    def resist_force(v_i):
        nf = mass * g + k_down * v_i * v_i
        return k_drag * v_i * v_i + rolling_coeff(v_i) * nf

    def accel_limits(v_i, c_i):
        """(max drive accel, max braking decel), friction-ellipse coupled."""
        nf = mass * g + k_down * v_i * v_i
        a_lat = v_i * v_i * c_i
        lat_cap = max(mu_y * nf / mass, 1e-9)
        frac = min(abs(a_lat) / lat_cap, 1.0)
        ellipse = (mu_x * nf / mass) * np.sqrt(1.0 - frac * frac)
        a_pow = (power / max(v_i, 3.0) - resist_force(v_i)) / mass
        drive = max(min(ellipse, a_pow), 0.0)
        brake = ellipse + resist_force(v_i) / mass
        return drive, brake

    # curvature-limited speed: m v^2 C = mu_y (m g + k_down v^2)
    v_corner = np.full(n, 120.0)
    tight = curv > 1e-6
    denom = mass * curv[tight] - mu_y * k_down
    vc = np.full(int(np.count_nonzero(tight)), 120.0)
    ok = denom > 1e-9
    vc[ok] = np.sqrt(mu_y * mass * g / denom[ok])
    v_corner[tight] = np.minimum(vc, 120.0)
    # top speed: drive power balances aero plus rolling resistance
    v_top = (power / k_drag) ** (1.0 / 3.0)
    for _ in range(30):
        v_top = v_top - (v_top * resist_force(v_top) - power) / (
            resist_force(v_top) + v_top * (2 * k_drag * v_top + rolling_coeff(v_top) * 2 * k_down * v_top)
        )
    v = np.minimum(v_corner, float(v_top))

    def forward_pass(v, wrap):
        steps = n if wrap else n - 1
        for i in range(steps):
            j = (i + 1) % n
            drive, _ = accel_limits(v[i], curv[i])
            v[j] = min(v[j], np.sqrt(v[i] ** 2 + 2.0 * drive * ds[i]))
        return v

    def backward_pass(v, wrap):
        steps = n if wrap else n - 1
        for i in range(steps, 0, -1):
            j = i % n
            k = j - 1 if j > 0 else n - 1
            _, brake = accel_limits(v[j], curv[j])
            v[k] = min(v[k], np.sqrt(v[j] ** 2 + 2.0 * brake * ds[k]))
        return v

    wrap = track.closed
    for _ in range(3 if wrap else 1):
        v = forward_pass(v, wrap)
        v = backward_pass(v, wrap)
    if standing_start:
        v[0] = 0.0
        v = forward_pass(v, wrap=False)

    v_floor = 0.0 if standing_start else 0.1
    v = np.maximum(v, v_floor)

    if track.closed:
        v_next = np.roll(v, -1)
    else:
        v_next = np.append(v[1:], v[-1])
    v_mid = np.maximum(0.5 * (v + v_next), 0.05)
    dt = ds / v_mid
    t = np.concatenate([[0.0], np.cumsum(dt)])[:n]
    lap_time = float(np.sum(dt)) if track.closed else float(t[-1])

    a_long = np.gradient(0.5 * v * v, s)
    return s, v, a_long, t, lap_time
