"""Independent reference implementations used only as test oracles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def solve_qp_active_set(Q, q, G=None, h=None, lb=None, ub=None, x0=None, max_iter=300):
    """Primal active-set method for a strictly convex QP.

    min 0.5 x'Qx + q'x  s.t.  Gx <= h,  lb <= x <= ub

    ``x0`` must be strictly feasible.  Bounds are folded into inequality
    rows.  Deterministic tie-breaking (lowest index).
    """
    Q = np.asarray(Q, dtype=float)
    q = np.asarray(q, dtype=float)
    n = q.size
    rows = []
    rhs = []
    if G is not None:
        rows.append(np.asarray(G, dtype=float))
        rhs.append(np.asarray(h, dtype=float))
    if ub is not None:
        rows.append(np.eye(n))
        rhs.append(np.asarray(ub, dtype=float))
    if lb is not None:
        rows.append(-np.eye(n))
        rhs.append(-np.asarray(lb, dtype=float))
    A = np.vstack(rows) if rows else np.zeros((0, n))
    b = np.concatenate(rhs) if rhs else np.zeros(0)

    x = np.asarray(x0, dtype=float).copy()
    if np.any(A @ x > b + 1e-10):
        raise ValueError("x0 is not feasible")
    work: list[int] = []

    for _ in range(max_iter):
        g = Q @ x + q
        if work:
            Aw = A[work]
            kkt = np.block([[Q, Aw.T], [Aw, np.zeros((len(work), len(work)))]])
            sol = np.linalg.solve(kkt, np.concatenate([-g, np.zeros(len(work))]))
            p = sol[:n]
            lam = sol[n:]
        else:
            p = np.linalg.solve(Q, -g)
            lam = np.zeros(0)

        if np.linalg.norm(p, np.inf) < 1e-11:
            if lam.size == 0 or np.min(lam) >= -1e-9:
                full_lam = np.zeros(A.shape[0])
                for idx, row in enumerate(work):
                    full_lam[row] = lam[idx]
                return x, full_lam
            work.pop(int(np.argmin(lam)))
            continue

        alpha = 1.0
        blocking = -1
        slack = b - A @ x
        denom = A @ p
        for i in range(A.shape[0]):
            if i in work or denom[i] <= 1e-13:
                continue
            a_i = slack[i] / denom[i]
            if a_i < alpha - 1e-14:
                alpha = a_i
                blocking = i
        x = x + alpha * p
        if blocking >= 0:
            work.append(blocking)
            work.sort()
    raise RuntimeError("active-set oracle did not converge")


@dataclass(frozen=True)
class BicycleModel:
    """Linear 2-DOF single-track model (lateral velocity, yaw rate)."""

    mass: float
    yaw_inertia: float
    lf: float
    lr: float
    cornering_front: float  # per-axle stiffness [N/rad]
    cornering_rear: float

    def system(self, speed: float):
        m, j = self.mass, self.yaw_inertia
        cf, cr = self.cornering_front, self.cornering_rear
        lf, lr = self.lf, self.lr
        a = np.array(
            [
                [-(cf + cr) / (m * speed), -(cf * lf - cr * lr) / (m * speed) - speed],
                [-(cf * lf - cr * lr) / (j * speed), -(cf * lf**2 + cr * lr**2) / (j * speed)],
            ]
        )
        b = np.array([cf / m, cf * lf / j])
        return a, b

    def steady_state_yaw_rate(self, speed: float, steer: float) -> float:
        a, b = self.system(speed)
        x = np.linalg.solve(a, -b * steer)
        return float(x[1])

    def step_response(self, speed: float, steer: float, t_end: float, h: float = 1e-3):
        a, b = self.system(speed)
        n = int(round(t_end / h))
        xs = np.zeros((n + 1, 2))
        for k in range(n):
            x = xs[k]
            f = lambda z: a @ z + b * steer
            k1 = f(x)
            k2 = f(x + 0.5 * h * k1)
            k3 = f(x + 0.5 * h * k2)
            k4 = f(x + h * k3)
            xs[k + 1] = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = np.arange(n + 1) * h
        return t, xs[:, 1], xs[:, 0]

    def yaw_rate_gain(self, speed: float, omega: float) -> float:
        a, b = self.system(speed)
        h = np.linalg.solve(1j * omega * np.eye(2) - a, b)
        return float(np.abs(h[1]))


def richardson_fd(fun, y, j, h):
    """Richardson-extrapolated central difference of component j."""
    e = np.zeros_like(y)
    e[j] = 1.0

    def central(step):
        return (fun(y + step * e) - fun(y - step * e)) / (2.0 * step)

    d1 = central(h)
    d2 = central(h / 2.0)
    return (4.0 * d2 - d1) / 3.0
