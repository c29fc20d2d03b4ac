"""Steady-state Magic Formula tire force and moment evaluation.

Implements the combined-slip force-and-moment equation set of the Magic
Formula (5.2-generation steady state: pure slip sine formulas, cosine
combined-slip weighting, pneumatic-trail aligning moment, overturning and
rolling-resistance moments).  Turn slip and transient relaxation are out of
scope: every evaluation is a quasi-static map from (Fz, kappa, alpha, gamma,
Vx) to (Fx, Fy, Mx, My, Mz).

Sign conventions used throughout the package:

* positive ``kappa`` (driving slip) produces positive ``Fx``,
* positive ``alpha`` produces positive ``Fy`` (the caller builds
  ``alpha = -atan2(v_y, |v_x|)`` so that side slip generates a restoring
  force),
* ``gamma`` is the inclination angle of the wheel plane,
* ``Fz >= 0``; a wheel with ``Fz == 0`` returns exactly zero for all five
  outputs (no adhesion after lift-off).

All formulas broadcast over arbitrary input shapes; batched evaluation is
bit-identical to an elementwise scalar loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tir_file import TirParams

__all__ = ["MagicFormulaTire", "TireOutputs"]

# Coefficient names read by the evaluator.  Absent keys resolve to 0, except
# scaling factors which resolve to 1 (see TirParams.get).
_COEFFS = [
    # dimensions / nominal
    "FNOMIN", "UNLOADED_RADIUS", "LONGVL",
    "VERTICAL_STIFFNESS", "VERTICAL_DAMPING",
    # scalings
    "LFZO", "LCX", "LMUX", "LEX", "LKX", "LHX", "LVX",
    "LCY", "LMUY", "LEY", "LKY", "LHY", "LVY",
    "LTR", "LRES", "LXAL", "LYKA", "LVYKA", "LS", "LMX", "LVMX", "LMY", "LGAY",
    # longitudinal
    "PCX1", "PDX1", "PDX2", "PDX3", "PEX1", "PEX2", "PEX3", "PEX4",
    "PKX1", "PKX2", "PKX3", "PHX1", "PHX2", "PVX1", "PVX2",
    "RBX1", "RBX2", "RCX1", "REX1", "REX2", "RHX1",
    # lateral
    "PCY1", "PDY1", "PDY2", "PDY3", "PEY1", "PEY2", "PEY3", "PEY4",
    "PKY1", "PKY2", "PKY3", "PHY1", "PHY2", "PHY3", "PVY1", "PVY2", "PVY3", "PVY4",
    "RBY1", "RBY2", "RBY3", "RCY1", "REY1", "REY2", "RHY1", "RHY2",
    "RVY1", "RVY2", "RVY3", "RVY4", "RVY5", "RVY6",
    # aligning
    "QBZ1", "QBZ2", "QBZ3", "QBZ4", "QBZ5", "QBZ9", "QBZ10",
    "QCZ1", "QDZ1", "QDZ2", "QDZ3", "QDZ4", "QDZ6", "QDZ7", "QDZ8", "QDZ9",
    "QEZ1", "QEZ2", "QEZ3", "QEZ4", "QEZ5",
    "QHZ1", "QHZ2", "QHZ3", "QHZ4",
    "SSZ1", "SSZ2", "SSZ3", "SSZ4",
    # overturning, rolling resistance
    "QSX1", "QSX2", "QSX3",
    "QSY1", "QSY2", "QSY3", "QSY4",
]

_EPS = 1e-9


@dataclass(frozen=True)
class TireOutputs:
    """Force/moment pages: Fx, Fy [N]; Mx, My, Mz [N m]."""

    fx: np.ndarray
    fy: np.ndarray
    mx: np.ndarray
    my: np.ndarray
    mz: np.ndarray


class MagicFormulaTire:
    """Evaluator bound to one coefficient set.

    Coefficients are resolved once at construction; keys that fell back to
    their default are listed in ``defaulted_keys``.  Instances are immutable
    after construction and safe for concurrent use.
    """

    def __init__(self, params: TirParams):
        params.validate()
        defaulted: set[str] = set()
        self.c = {name: params.get(name, defaulted) for name in _COEFFS}
        if self.c["LONGVL"] == 0.0:
            self.c["LONGVL"] = 16.7
            defaulted.add("LONGVL")
        self.defaulted_keys = tuple(sorted(defaulted))
        self.nominal_load = self.c["FNOMIN"]
        self.unloaded_radius = self.c["UNLOADED_RADIUS"]
        self.vertical_stiffness = self.c["VERTICAL_STIFFNESS"]
        self.vertical_damping = self.c["VERTICAL_DAMPING"]

    # ------------------------------------------------------------------
    def forces(self, fz, kappa, alpha, gamma, vx) -> TireOutputs:
        """Evaluate the five steady-state outputs.

        ``fz`` [N], ``kappa`` [-], ``alpha`` [rad], ``gamma`` [rad] share one
        broadcast shape (wheels x pages in vehicle use); ``vx`` [m/s]
        broadcasts against it.  Negative ``fz`` is clamped to zero.
        """
        c = self.c
        fz, kappa, alpha, gamma, vx = np.broadcast_arrays(
            *(np.asarray(v, dtype=float) for v in (fz, kappa, alpha, gamma, vx))
        )
        loaded = fz > 0.0
        fz = np.where(loaded, fz, 0.0)

        fz0p = c["FNOMIN"] * c["LFZO"]
        dfz = (fz - fz0p) / fz0p
        gs = np.sin(gamma) * c["LGAY"]
        als = np.tan(alpha)
        r0 = c["UNLOADED_RADIUS"]

        # --- longitudinal, pure slip -----------------------------------
        shx = (c["PHX1"] + c["PHX2"] * dfz) * c["LHX"]
        svx = fz * (c["PVX1"] + c["PVX2"] * dfz) * c["LVX"] * c["LMUX"]
        kx = kappa + shx
        cx = c["PCX1"] * c["LCX"]
        mux = (c["PDX1"] + c["PDX2"] * dfz) * (1.0 - c["PDX3"] * gamma * gamma) * c["LMUX"]
        dx = mux * fz
        ex = np.minimum(
            (c["PEX1"] + c["PEX2"] * dfz + c["PEX3"] * dfz * dfz)
            * (1.0 - c["PEX4"] * np.sign(kx)) * c["LEX"],
            1.0,
        )
        kxk = fz * (c["PKX1"] + c["PKX2"] * dfz) * np.exp(c["PKX3"] * dfz) * c["LKX"]
        bx = kxk / (cx * dx + _EPS)
        bxk = bx * kx
        fx0 = dx * np.sin(cx * np.arctan(bxk - ex * (bxk - np.arctan(bxk)))) + svx

        # --- lateral, pure slip -----------------------------------------
        kya = (
            c["PKY1"] * fz0p
            * np.sin(2.0 * np.arctan(fz / (c["PKY2"] * fz0p + _EPS)))
            * (1.0 - c["PKY3"] * np.abs(gs)) * c["LKY"]
        )
        shy = (c["PHY1"] + c["PHY2"] * dfz) * c["LHY"] + c["PHY3"] * gs
        svy = fz * (
            (c["PVY1"] + c["PVY2"] * dfz) * c["LVY"]
            + (c["PVY3"] + c["PVY4"] * dfz) * gs
        ) * c["LMUY"]
        ay = als + shy
        cy = c["PCY1"] * c["LCY"]
        muy = (c["PDY1"] + c["PDY2"] * dfz) * (1.0 - c["PDY3"] * gs * gs) * c["LMUY"]
        dy = muy * fz
        ey = np.minimum(
            (c["PEY1"] + c["PEY2"] * dfz)
            * (1.0 - (c["PEY3"] + c["PEY4"] * gs) * np.sign(ay)) * c["LEY"],
            1.0,
        )
        by = kya / (cy * dy + _EPS)
        bya = by * ay
        fy0 = dy * np.sin(cy * np.arctan(bya - ey * (bya - np.arctan(bya)))) + svy

        # --- combined slip weighting functions --------------------------
        shxa = c["RHX1"]
        bxa = c["RBX1"] * np.cos(np.arctan(c["RBX2"] * kappa)) * c["LXAL"]
        cxa = c["RCX1"]
        exa = np.minimum(c["REX1"] + c["REX2"] * dfz, 1.0)
        as_ = als + shxa

        def _cosw(b, cc, e, z):
            bz = b * z
            return np.cos(cc * np.arctan(bz - e * (bz - np.arctan(bz))))

        gxa = _cosw(bxa, cxa, exa, as_) / _cosw(bxa, cxa, exa, shxa)
        fx = gxa * fx0

        shyk = c["RHY1"] + c["RHY2"] * dfz
        byk = c["RBY1"] * np.cos(np.arctan(c["RBY2"] * (als - c["RBY3"]))) * c["LYKA"]
        cyk = c["RCY1"]
        eyk = np.minimum(c["REY1"] + c["REY2"] * dfz, 1.0)
        ks = kappa + shyk
        dvyk = (
            muy * fz
            * (c["RVY1"] + c["RVY2"] * dfz + c["RVY3"] * gs)
            * np.cos(np.arctan(c["RVY4"] * als))
        )
        svyk = dvyk * np.sin(c["RVY5"] * np.arctan(c["RVY6"] * kappa)) * c["LVYKA"]
        gyk = _cosw(byk, cyk, eyk, ks) / _cosw(byk, cyk, eyk, shyk)
        fy = gyk * fy0 + svyk

        # --- aligning moment --------------------------------------------
        kyap = kya + _EPS * np.sign(kya + (kya == 0.0))
        sht = c["QHZ1"] + c["QHZ2"] * dfz + (c["QHZ3"] + c["QHZ4"] * dfz) * gs
        at = als + sht
        shf = shy + svy / kyap
        ar = als + shf
        lky_on_lmuy = c["LKY"] / max(c["LMUY"], _EPS)
        bt = (
            (c["QBZ1"] + c["QBZ2"] * dfz + c["QBZ3"] * dfz * dfz)
            * (1.0 + c["QBZ4"] * gs + c["QBZ5"] * np.abs(gs))
            * lky_on_lmuy
        )
        ct = c["QCZ1"]
        dt = (
            fz * (c["QDZ1"] + c["QDZ2"] * dfz)
            * (1.0 + c["QDZ3"] * gs + c["QDZ4"] * gs * gs)
            * (r0 / fz0p) * c["LTR"]
        )
        et = np.minimum(
            (c["QEZ1"] + c["QEZ2"] * dfz + c["QEZ3"] * dfz * dfz)
            * (1.0 + (c["QEZ4"] + c["QEZ5"] * gs) * (2.0 / np.pi) * np.arctan(bt * ct * at)),
            1.0,
        )
        br = c["QBZ9"] * lky_on_lmuy + c["QBZ10"] * by * cy
        dr = (
            fz * r0
            * ((c["QDZ6"] + c["QDZ7"] * dfz) * c["LRES"] + (c["QDZ8"] + c["QDZ9"] * dfz) * gs)
            * c["LMUY"]
        )
        # Equivalent slip angles blend the longitudinal slip into the trail.
        bk = kxk / kyap
        keq = bk * bk
        ateq = np.sqrt(at * at + keq * kappa * kappa) * np.sign(at + (at == 0.0))
        areq = np.sqrt(ar * ar + keq * kappa * kappa) * np.sign(ar + (ar == 0.0))
        bta = bt * ateq
        trail = (
            dt * np.cos(ct * np.arctan(bta - et * (bta - np.arctan(bta)))) * np.cos(alpha)
        )
        mzr = dr * np.cos(np.arctan(br * areq)) * np.cos(alpha)
        fy_no_shift = fy - svyk
        s_arm = (
            r0 * (c["SSZ1"] + c["SSZ2"] * (fy / fz0p) + (c["SSZ3"] + c["SSZ4"] * dfz) * gs)
            * c["LS"]
        )
        mz = -trail * fy_no_shift + mzr + s_arm * fx

        # --- overturning and rolling resistance --------------------------
        mx = (
            r0 * fz
            * (c["QSX1"] * c["LVMX"] - c["QSX2"] * gamma + c["QSX3"] * fy / fz0p)
            * c["LMX"]
        )
        v0 = c["LONGVL"]
        vr = vx / v0
        vr2 = vr * vr
        # Rolling resistance opposes the rolling direction; the tanh gate
        # removes the spurious standstill torque of the raw formula.
        my = (
            -r0 * fz
            * (c["QSY1"] + c["QSY2"] * fx / fz0p + c["QSY3"] * np.abs(vr) + c["QSY4"] * vr2 * vr2)
            * c["LMY"] * np.tanh(vx)
        )

        zero = np.zeros_like(fz)
        return TireOutputs(
            fx=np.where(loaded, fx, zero),
            fy=np.where(loaded, fy, zero),
            mx=np.where(loaded, mx, zero),
            my=np.where(loaded, my, zero),
            mz=np.where(loaded, mz, zero),
        )

    # ------------------------------------------------------------------
    def vertical_force(self, deflection, deflection_rate):
        """Unilateral linear spring-damper normal force.

        ``Fz = max(0, k_t * max(0, d) + c_t * d_dot * [d > 0])``; a lifted
        wheel (negative deflection) carries no load.
        """
        d = np.asarray(deflection, dtype=float)
        dd = np.asarray(deflection_rate, dtype=float)
        contact = d > 0.0
        fz = self.vertical_stiffness * np.maximum(d, 0.0) + self.vertical_damping * dd * contact
        return np.maximum(fz, 0.0)

    def peak_friction(self, fz, gamma=0.0) -> tuple[np.ndarray, np.ndarray]:
        """Peak factors (Dx, Dy) at the given load; used by sanity sweeps."""
        c = self.c
        fz = np.asarray(fz, dtype=float)
        dfz = (fz - c["FNOMIN"] * c["LFZO"]) / (c["FNOMIN"] * c["LFZO"])
        gs = np.sin(np.asarray(gamma, dtype=float))
        mux = (c["PDX1"] + c["PDX2"] * dfz) * (1.0 - c["PDX3"] * np.square(np.asarray(gamma))) * c["LMUX"]
        muy = (c["PDY1"] + c["PDY2"] * dfz) * (1.0 - c["PDY3"] * gs * gs) * c["LMUY"]
        return mux * fz, muy * fz

    def cornering_stiffness(self, fz, h=1e-5) -> float:
        """d Fy / d alpha at zero slip for a single load (central difference)."""
        up = self.forces(fz, 0.0, h, 0.0, 20.0).fy
        dn = self.forces(fz, 0.0, -h, 0.0, 20.0).fy
        return float((up - dn) / (2.0 * h))

    def longitudinal_stiffness(self, fz, h=1e-5) -> float:
        """d Fx / d kappa at zero slip for a single load."""
        up = self.forces(fz, h, 0.0, 0.0, 20.0).fx
        dn = self.forces(fz, -h, 0.0, 0.0, 20.0).fx
        return float((up - dn) / (2.0 * h))
