"""Generalized mass matrices of the 14-DOF chassis.

The sprung block couples the body coordinates with the planar motion of the
four unsprung masses, which are carried along in x-y by body-fixed points at
(wheel_x, wheel_y, z_w).  With the yaw rotation ``h`` and the rigid-body
transport rows ``g_i``::

    v_u,i = g_i(z_w,i) . h(psi) . q_b_dot
    M_gb  = M_b + sum_i m_i (g_i h)^T (g_i h)

``M_b`` is diagonal and yaw-invariant, so all state dependence lives in the
transport terms, closed-form in (psi, z_w).  The time derivative and the six
coordinate partials are hard-coded from that closed form; a finite-difference
cross-check lives in the test suite.

The unsprung block is constant: gear-referred spin inertias and the wheel
masses on the diagonal, ordered spins first then verticals.
"""

from __future__ import annotations

import numpy as np

from .params import VehicleParams

__all__ = [
    "body_mass_matrix",
    "body_mass_matrix_derivatives",
    "unsprung_mass_matrix",
    "effective_spin_inertia",
]


def _base_blocks(params: VehicleParams):
    mb = params.sprung_mass
    jx, jy, jz = params.body_inertia
    return np.diag([mb, mb, mb, jx, jy, jz])


def body_mass_matrix(psi, z_w, params: VehicleParams) -> np.ndarray:
    """Sprung generalized mass matrix, batched.

    ``psi``: yaw angle(s) shape (...,); ``z_w``: wheel verticals relative to
    the body frame, shape (..., 4).  Returns shape (..., 6, 6), symmetric
    positive definite for physical parameters.
    """
    psi = np.asarray(psi, dtype=float)
    z_w = np.asarray(z_w, dtype=float)
    batch = psi.shape
    c, s = np.cos(psi), np.sin(psi)
    xw = params.wheel_x()
    yw = params.wheel_y()
    mu = np.asarray(params.unsprung_masses)

    m = np.zeros(batch + (6, 6))
    m[...] = _base_blocks(params)

    m_tot = mu.sum()
    m[..., 0, 0] += m_tot
    m[..., 1, 1] += m_tot
    szw = np.einsum("i,...i->...", mu, z_w)          # sum m_i z_w,i
    szw2 = np.einsum("i,...i,...i->...", mu, z_w, z_w)
    sxzw = np.einsum("i,i,...i->...", mu, xw, z_w)
    syzw = np.einsum("i,i,...i->...", mu, yw, z_w)
    sxy = float(np.sum(mu * (xw * xw + yw * yw)))
    sx = float(np.sum(mu * xw))
    sy = float(np.sum(mu * yw))

    m[..., 0, 3] += s * szw
    m[..., 0, 4] += c * szw
    m[..., 0, 5] += -c * sy - s * sx
    m[..., 1, 3] += -c * szw
    m[..., 1, 4] += s * szw
    m[..., 1, 5] += c * sx - s * sy
    m[..., 3, 3] += szw2
    m[..., 3, 5] += -sxzw
    m[..., 4, 4] += szw2
    m[..., 4, 5] += -syzw
    m[..., 5, 5] += sxy

    for a, b in ((0, 3), (0, 4), (0, 5), (1, 3), (1, 4), (1, 5), (3, 5), (4, 5)):
        m[..., b, a] = m[..., a, b]
    return m


def body_mass_matrix_derivatives(psi, z_w, params: VehicleParams):
    """Closed-form partials of the sprung mass matrix.

    Returns ``(d_psi, d_zw)`` with shapes (..., 6, 6) and (..., 4, 6, 6):
    derivative w.r.t. yaw and w.r.t. each wheel's relative vertical.
    The caller chains these into the time derivative and the body-coordinate
    gradient (z_w depends on Z, roll, pitch and the wheel heights).
    """
    psi = np.asarray(psi, dtype=float)
    z_w = np.asarray(z_w, dtype=float)
    batch = psi.shape
    c, s = np.cos(psi), np.sin(psi)
    xw = params.wheel_x()
    yw = params.wheel_y()
    mu = np.asarray(params.unsprung_masses)

    szw = np.einsum("i,...i->...", mu, z_w)
    sx = float(np.sum(mu * xw))
    sy = float(np.sum(mu * yw))

    d_psi = np.zeros(batch + (6, 6))
    d_psi[..., 0, 3] = c * szw
    d_psi[..., 0, 4] = -s * szw
    d_psi[..., 0, 5] = s * sy - c * sx
    d_psi[..., 1, 3] = s * szw
    d_psi[..., 1, 4] = c * szw
    d_psi[..., 1, 5] = -s * sx - c * sy

    d_zw = np.zeros(batch + (4, 6, 6))
    for i in range(4):
        mi = mu[i]
        d_zw[..., i, 0, 3] = mi * s
        d_zw[..., i, 0, 4] = mi * c
        d_zw[..., i, 1, 3] = -mi * c
        d_zw[..., i, 1, 4] = mi * s
        d_zw[..., i, 3, 3] = 2.0 * mi * z_w[..., i]
        d_zw[..., i, 4, 4] = 2.0 * mi * z_w[..., i]
        d_zw[..., i, 3, 5] = -mi * xw[i]
        d_zw[..., i, 4, 5] = -mi * yw[i]

    for a, b in ((0, 3), (0, 4), (0, 5), (1, 3), (1, 4), (1, 5), (3, 5), (4, 5)):
        d_psi[..., b, a] = d_psi[..., a, b]
        d_zw[..., b, a] = d_zw[..., a, b]
    return d_psi, d_zw


def effective_spin_inertia(params: VehicleParams) -> np.ndarray:
    """Per-wheel spin inertia including the gear-referred rotor: J_u + i_g^2 J_d."""
    ig = params.gear_ratios()
    ju = np.asarray(params.wheel_inertias) + params.extra_wheel_inertia
    return ju + ig * ig * params.rotor_inertia


def unsprung_mass_matrix(params: VehicleParams) -> np.ndarray:
    """Constant 8x8 block-diagonal unsprung matrix (spins, then verticals)."""
    return np.diag(np.concatenate([effective_spin_inertia(params), params.unsprung_masses]))
