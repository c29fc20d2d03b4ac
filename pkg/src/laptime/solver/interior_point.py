"""Primal-dual interior-point solver with filter line search.

Reference solver for the lap-time NLPs: general constraint rows are slacked
into equalities, variable and slack bounds carry logarithmic barriers, and
the barrier subproblems are solved by damped Newton steps with

* a limited-memory BFGS approximation of the Lagrangian Hessian (compact
  form, applied through the sparse KKT factorization by a low-rank update),
* a (theta, phi) filter line search with a Gauss-Newton feasibility
  restoration fallback,
* monotone barrier reduction (factor 0.2) with a superlinear final phase,
* fraction-to-the-boundary steps and safeguarded dual updates.

The solve is deterministic: identical problems and options produce identical
iteration logs.  Target scale is the desk problems of this package (tens of
thousands of KKT rows); the linear solves use scipy's sparse LU.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .problem import NlpProblem, NlpSolution

__all__ = ["IpOptions", "solve"]

_BIG = 1e19


@dataclass
class IpOptions:
    tol: float = 1e-3                  # scaled first-order error
    constr_viol_tol: float = 1e-7      # unscaled slacked-residual norm
    mu0: float = 0.1
    # weight of the squared Jacobian column norms in the quasi-Newton seed
    # diagonal; biases steps away from constraint-stiff directions
    hessian_col_weight: float = 0.0
    kappa_mu: float = 0.2              # monotone barrier reduction factor
    theta_mu: float = 1.5              # superlinear final phase exponent
    kappa_eps: float = 10.0            # barrier subproblem tolerance factor
    tau_min: float = 0.99
    max_iter: int = 500
    lbfgs_memory: int = 6
    gamma_theta: float = 1e-5
    gamma_phi: float = 1e-5
    eta_phi: float = 1e-4
    s_theta: float = 1.1
    s_phi: float = 2.3
    delta_switch: float = 1.0
    kappa_sigma: float = 1e10
    bound_push: float = 1e-2
    max_soc: int = 0                   # second-order corrections disabled
    verbose: bool = False


class _Lbfgs:
    """Damped limited-memory BFGS in compact form, B = sigma*I + U M U^T."""

    def __init__(self, n: int, memory: int):
        self.n = n
        self.memory = memory
        self.s: list[np.ndarray] = []
        self.q: list[np.ndarray] = []
        self.sigma = 1.0

    def update(self, s: np.ndarray, q: np.ndarray) -> None:
        ss = float(s @ s)
        if ss < 1e-30:
            return
        bs = self.apply(s)
        sbs = float(s @ bs)
        sq = float(s @ q)
        if sq < 0.2 * sbs:  # Powell damping keeps B positive definite
            theta = 0.8 * sbs / (sbs - sq)
            q = theta * q + (1.0 - theta) * bs
            sq = float(s @ q)
        if sq <= 1e-12 * ss:
            return
        self.s.append(s.copy())
        self.q.append(q.copy())
        if len(self.s) > self.memory:
            self.s.pop(0)
            self.q.pop(0)
        self.sigma = min(max(float(q @ q) / sq, 1e-8), 1e8)

    def compact(self):
        """Return (U, M) with B = sigma I + U M U^T; U is n x 2k."""
        k = len(self.s)
        if k == 0:
            return None, None
        s_mat = np.stack(self.s, axis=1)
        q_mat = np.stack(self.q, axis=1)
        sts = s_mat.T @ s_mat
        stq = s_mat.T @ q_mat
        low = np.tril(stq, -1)
        d = np.diag(np.diag(stq))
        middle = np.block([[self.sigma * sts, low], [low.T, -d]])
        u = np.hstack([self.sigma * s_mat, q_mat])
        try:
            m = -np.linalg.inv(middle)
        except np.linalg.LinAlgError:
            return None, None
        return u, m

    def apply(self, x: np.ndarray) -> np.ndarray:
        u, m = self.compact()
        out = self.sigma * x
        if u is not None:
            out = out + u @ (m @ (u.T @ x))
        return out

    def reset(self):
        self.s.clear()
        self.q.clear()
        self.sigma = 1.0


class _Kkt:
    """Slack-condensed KKT factorization with low-rank corrections.

    The slack stationarity and inequality rows are eliminated analytically
    (the slack Hessian is diagonal and every inequality row carries a unit
    slack), leaving the system::

        [H_y + J_I' H_s J_I,  J_E'] [dy  ]   [rhs_y]
        [J_E,               -de I ] [lamE] = [rhs_E]

    Only equality rows are regularized; inequality rows are satisfied
    exactly by the recovered slack step.

    Dense Jacobian columns (final time, design parameters of a transcribed
    problem) would fill the factorization; they are pulled out of the sparse
    factor and reapplied exactly, together with the limited-memory BFGS
    part, through one Sherman-Morrison-Woodbury correction.
    """

    def __init__(self, h_y, h_s, j_y, eq_rows, delta_eq, u=None, m=None,
                 dense_cols=None):
        n = h_y.size
        self.n = n
        self.eq_rows = eq_rows
        dense_cols = np.asarray(dense_cols, dtype=int) if dense_cols is not None else np.zeros(0, dtype=int)
        if j_y is not None and dense_cols.size:
            j_y = j_y.tocsc(copy=True)
            dense_block = np.asarray(j_y[:, dense_cols].todense())
            mask = np.ones(j_y.shape[1], dtype=bool)
            mask[dense_cols] = False
            keep = sp.diags(mask.astype(float))
            j_y = (j_y @ keep).tocsr()
        else:
            dense_block = None

        if j_y is not None and np.any(~eq_rows):
            self.j_i = j_y[~eq_rows]
            h_block = sp.diags(h_y) + self.j_i.T @ sp.diags(h_s) @ self.j_i
        else:
            self.j_i = None
            h_block = sp.diags(h_y)
        self.j_e = j_y[eq_rows] if (j_y is not None and np.any(eq_rows)) else None
        self.m_e = self.j_e.shape[0] if self.j_e is not None else 0
        nv_tot = n + self.m_e
        if self.m_e:
            k0 = sp.bmat(
                [
                    [h_block, self.j_e.T],
                    [self.j_e, -delta_eq * sp.eye(self.m_e)],
                ],
                format="csc",
            )
        else:
            k0 = sp.csc_matrix(h_block)
        self.lu = spla.splu(k0)
        self.h_s = h_s

        # assemble the joint low-rank correction [lbfgs | dense columns]
        blocks_u = []
        blocks_m = []
        if u is not None:
            uhat = np.zeros((nv_tot, u.shape[1]))
            uhat[:n, :] = u
            blocks_u.append(uhat)
            blocks_m.append(m)
        self.dense_cols = dense_cols
        self.dense_eq = None
        self.dense_ineq = None
        if dense_block is not None:
            p = dense_cols.size
            a_eq = dense_block[eq_rows] if self.m_e else np.zeros((0, p))
            d_iq = dense_block[~eq_rows] if (self.j_i is not None) else np.zeros((0, p))
            self.dense_eq = a_eq
            self.dense_ineq = d_iq
            e_hat = np.zeros((nv_tot, p))
            e_hat[dense_cols, np.arange(p)] = 1.0
            b_hat = np.zeros((nv_tot, p))
            if self.j_i is not None and d_iq.size:
                hsd = self.h_s[:, None] * d_iq
                b_hat[:n, :] = self.j_i.T @ hsd
                g_small = d_iq.T @ hsd
                b_hat[:n, :] += 0.5 * (e_hat[:n, :] @ g_small)
            if self.m_e:
                b_hat[n:, :] += a_eq
            blocks_u.append(np.hstack([e_hat, b_hat]))
            swap = np.zeros((2 * p, 2 * p))
            swap[:p, p:] = np.eye(p)
            swap[p:, :p] = np.eye(p)
            blocks_m.append(swap)

        if blocks_u:
            self.uhat = np.hstack(blocks_u)
            m_joint = np.zeros((self.uhat.shape[1], self.uhat.shape[1]))
            at = 0
            self._m_inv_blocks = []
            for mb in blocks_m:
                k = mb.shape[0]
                m_joint[at:at + k, at:at + k] = np.linalg.inv(mb)
                at += k
            k0iu = self.lu.solve(self.uhat)
            self.t = m_joint + self.uhat.T @ k0iu
            self.k0iu = k0iu
        else:
            self.uhat = None

    def _solve_condensed(self, rhs: np.ndarray) -> np.ndarray:
        x = self.lu.solve(rhs)
        if self.uhat is not None:
            w = np.linalg.solve(self.t, self.uhat.T @ x)
            x = x - self.k0iu @ w
        return x

    def solve(self, g_y, g_s, r_eq, r_ineq):
        """Newton step from the barrier gradients and residual split.

        Returns (dy, ds, lam) with lam ordered as the original rows.
        """
        rhs_y = -g_y
        if self.j_i is not None:
            work = g_s + self.h_s * r_ineq
            rhs_y = rhs_y - self.j_i.T @ work
            if self.dense_ineq is not None and self.dense_ineq.size:
                rhs_y[self.dense_cols] -= self.dense_ineq.T @ work
        rhs = np.concatenate([rhs_y, -r_eq]) if self.m_e else rhs_y
        sol = self._solve_condensed(rhs)
        dy = sol[: self.n]
        lam_e = sol[self.n :]
        if self.j_i is not None:
            ds = self.j_i @ dy + r_ineq
            if self.dense_ineq is not None and self.dense_ineq.size:
                ds = ds + self.dense_ineq @ dy[self.dense_cols]
            lam_i = self.h_s * ds + g_s
        else:
            ds = np.zeros(0)
            lam_i = np.zeros(0)
        lam = np.zeros(self.eq_rows.size)
        lam[self.eq_rows] = lam_e
        lam[~self.eq_rows] = lam_i
        return dy, ds, lam


def _finite(a):
    return np.isfinite(a)


def solve(problem: NlpProblem, options: IpOptions | None = None) -> NlpSolution:
    """Solve the NLP; see module docstring for the algorithm outline."""
    opt = options or IpOptions()
    n = problem.n
    m_all = problem.m

    lb = np.where(_finite(problem.lb), problem.lb, -_BIG)
    ub = np.where(_finite(problem.ub), problem.ub, _BIG)

    eq_rows = np.zeros(0, dtype=bool)
    if m_all:
        eq_rows = problem.cl == problem.cu
    ineq = ~eq_rows
    n_ineq = int(np.count_nonzero(ineq))
    cl_i = problem.cl[ineq] if m_all else np.zeros(0)
    cu_i = problem.cu[ineq] if m_all else np.zeros(0)

    nv = n + n_ineq
    lo = np.concatenate([lb, np.where(_finite(cl_i), cl_i, -_BIG)])
    up = np.concatenate([ub, np.where(_finite(cu_i), cu_i, _BIG)])
    has_lo = lo > -_BIG
    has_up = up < _BIG

    def push_inside(vals, lo_, up_):
        span = up_ - lo_
        pad_lo = np.where(
            up_ < _BIG, np.minimum(opt.bound_push * np.maximum(1.0, np.abs(lo_)), 0.25 * span),
            opt.bound_push * np.maximum(1.0, np.abs(lo_)),
        )
        pad_up = np.where(
            lo_ > -_BIG, np.minimum(opt.bound_push * np.maximum(1.0, np.abs(up_)), 0.25 * span),
            opt.bound_push * np.maximum(1.0, np.abs(up_)),
        )
        out = np.clip(vals, np.where(lo_ > -_BIG, lo_ + pad_lo, vals),
                      np.where(up_ < _BIG, up_ - pad_up, vals))
        return out

    def eval_c(y):
        return np.asarray(problem.constraints(y), dtype=float) if m_all else np.zeros(0)

    def eval_jac(y):
        if not m_all:
            return None
        jac = problem.jacobian(y)
        return sp.csr_matrix(jac)

    def residual(y, s, c=None):
        """Slacked equality residual r(v)."""
        if not m_all:
            return np.zeros(0)
        c = eval_c(y) if c is None else c
        r = np.empty(m_all)
        r[eq_rows] = c[eq_rows] - problem.cl[eq_rows]
        r[ineq] = c[ineq] - s
        return r

    def lagrangian_gradient(grad_y, jy, lam_, zl_, zu_):
        """Gradient of the Lagrangian over (y, s) without forming the
        augmented Jacobian: the slack block is simply -lam on its rows."""
        gy = grad_y + (jy.T @ lam_ if m_all else 0.0)
        gs = -lam_[ineq] if n_ineq else np.zeros(0)
        return np.concatenate([gy, gs]) - zl_ + zu_

    # --- initial point -------------------------------------------------
    y = push_inside(problem.x0.copy(), lb, ub)
    c0 = eval_c(y)
    s = push_inside(c0[ineq] if m_all else np.zeros(0), lo[n:], up[n:])
    v = np.concatenate([y, s])

    mu = opt.mu0
    tau = max(opt.tau_min, 1.0 - mu)
    zl = np.where(has_lo, mu / np.maximum(v - lo, 1e-8), 0.0)
    zu = np.where(has_up, mu / np.maximum(up - v, 1e-8), 0.0)
    lam = np.zeros(m_all)

    lbfgs = _Lbfgs(n, opt.lbfgs_memory)
    filt: list[tuple[float, float]] = []
    log: list[dict] = []
    delta_w = 0.0
    soft_restarts = 0
    status = "max-iterations"
    message = ""

    def barrier_value(v_, f_):
        val = f_
        dl = v_ - lo
        du = up - v_
        if np.any(dl[has_lo] <= 0.0) or np.any(du[has_up] <= 0.0):
            return np.inf
        val -= mu * float(np.sum(np.log(dl[has_lo])))
        val -= mu * float(np.sum(np.log(du[has_up])))
        return val

    def theta_of(r_):
        return float(np.linalg.norm(r_, 1)) / max(1.0, np.sqrt(m_all)) if m_all else 0.0

    def kkt_error(grad_y, jy, r_, v_, zl_, zu_, lam_, mu_):
        grad_l = lagrangian_gradient(grad_y, jy, lam_, zl_, zu_)
        smax = 100.0
        z_sum = float(np.sum(np.abs(zl_)) + np.sum(np.abs(zu_)))
        lam_sum = float(np.sum(np.abs(lam_)))
        n_mults = zl_.size + zu_.size + max(lam_.size, 1)
        sd = max(smax, (lam_sum + z_sum) / n_mults) / smax
        sc = max(smax, z_sum / max(zl_.size + zu_.size, 1)) / smax
        e_stat = float(np.max(np.abs(grad_l))) / sd
        e_feas = float(np.max(np.abs(r_))) if m_all else 0.0
        comp_l = np.abs(zl_ * (v_ - lo) - mu_)[has_lo]
        comp_u = np.abs(zu_ * (up - v_) - mu_)[has_up]
        e_comp = float(max(np.max(comp_l, initial=0.0), np.max(comp_u, initial=0.0))) / sc
        return max(e_stat, e_feas, e_comp), e_stat, e_feas, e_comp

    f_val = float(problem.objective(y))
    grad = np.asarray(problem.gradient(y), dtype=float)
    c_val = eval_c(y)
    jy = eval_jac(y)
    r = residual(y, s, c_val)
    n_iter = 0

    for n_iter in range(1, opt.max_iter + 1):
        err0, e_stat, e_feas, e_comp = kkt_error(grad, jy, r, v, zl, zu, lam, 0.0)
        theta = theta_of(r)
        if err0 <= opt.tol and e_feas <= opt.constr_viol_tol:
            status = "optimal"
            break

        # barrier update: possibly several reductions per outer test
        err_mu, _, _, _ = kkt_error(grad, jy, r, v, zl, zu, lam, mu)
        while mu > 1e-11 and err_mu <= opt.kappa_eps * mu:
            mu = max(opt.tol / 100.0 * 1e-2, min(opt.kappa_mu * mu, mu**opt.theta_mu))
            tau = max(opt.tau_min, 1.0 - mu)
            filt.clear()
            err_mu, _, _, _ = kkt_error(grad, jy, r, v, zl, zu, lam, mu)

        dl = np.maximum(v - lo, 1e-14)
        du = np.maximum(up - v, 1e-14)
        sig_l = np.where(has_lo, zl / dl, 0.0)
        sig_u = np.where(has_up, zu / du, 0.0)
        sigma = sig_l + sig_u

        grad_phi = np.concatenate([grad, np.zeros(n_ineq)])
        grad_phi = grad_phi - np.where(has_lo, mu / dl, 0.0) + np.where(has_up, mu / du, 0.0)

        u_lr, m_lr = lbfgs.compact()
        col_sq = np.zeros(n)
        if opt.hessian_col_weight > 0.0 and m_all:
            col_sq = np.asarray(jy.multiply(jy).sum(axis=0)).ravel()

        accepted = False
        delta_try = delta_w
        for attempt in range(8):
            h_y = sigma[:n] + delta_try + lbfgs.sigma + opt.hessian_col_weight * col_sq
            h_s = sigma[n:]
            delta_eq = 1e-8 * mu**0.25
            try:
                kkt = _Kkt(h_y, h_s, jy, eq_rows, delta_eq, u_lr, m_lr,
                           dense_cols=problem.dense_columns)
                dy, ds, lam_new = kkt.solve(
                    grad_phi[:n], grad_phi[n:], r[eq_rows], r[ineq]
                )
            except (RuntimeError, np.linalg.LinAlgError):
                delta_try = max(10.0 * delta_try, 1e-4)
                continue
            dv = np.concatenate([dy, ds])
            if not np.all(np.isfinite(dv)):
                delta_try = max(10.0 * delta_try, 1e-4)
                continue
            dphi = float(grad_phi @ dv)
            if theta <= opt.constr_viol_tol * 10.0 and dphi > 0.0:
                # need a descent direction once (nearly) feasible
                delta_try = max(10.0 * delta_try, 1e-4)
                continue
            accepted = True
            break
        if not accepted:
            status = "error"
            message = "linear system breakdown after regularized restarts"
            break
        delta_w = 0.0 if delta_try == 0.0 else delta_try / 3.0
        if delta_w < 1e-12:
            delta_w = 0.0

        dzl = np.where(has_lo, mu / dl - zl - sig_l * dv, 0.0)
        dzu = np.where(has_up, mu / du - zu + sig_u * dv, 0.0)

        # fraction to the boundary
        def max_step(vals, dvals, lower, mask):
            alpha = 1.0
            neg = mask & (dvals < 0.0)
            if np.any(neg):
                alpha = min(alpha, float(np.min(-tau * (vals - lower)[neg] / dvals[neg])))
            return alpha

        alpha_max = min(
            max_step(v, dv, lo, has_lo),
            max_step(-v, -dv, -up, has_up),
        )
        alpha_z = 1.0
        for z_, dz_, mask in ((zl, dzl, has_lo), (zu, dzu, has_up)):
            neg = mask & (dz_ < 0.0)
            if np.any(neg):
                alpha_z = min(alpha_z, float(np.min(-tau * z_[neg] / dz_[neg])))

        phi0 = barrier_value(v, f_val)
        sw_rhs = opt.delta_switch * theta**opt.s_theta

        alpha = alpha_max
        ls_ok = False
        was_f_type = False
        n_trials = 0
        while alpha > 1e-12:
            n_trials += 1
            v_trial = v + alpha * dv
            y_trial = v_trial[:n]
            s_trial = v_trial[n:]
            f_trial = float(problem.objective(y_trial))
            c_trial = eval_c(y_trial)
            r_trial = residual(y_trial, s_trial, c_trial)
            theta_trial = theta_of(r_trial)
            phi_trial = barrier_value(v_trial, f_trial)
            if np.isfinite(phi_trial):
                in_filter = any(
                    theta_trial >= (1.0 - opt.gamma_theta) * th
                    and phi_trial >= ph - opt.gamma_phi * th
                    for th, ph in filt
                )
                if not in_filter:
                    f_type = dphi < 0.0 and alpha * max(-dphi, 0.0) ** opt.s_phi > sw_rhs
                    if f_type:
                        if phi_trial <= phi0 + opt.eta_phi * alpha * dphi:
                            ls_ok = True
                            was_f_type = True
                    else:
                        if (
                            theta_trial <= (1.0 - opt.gamma_theta) * theta
                            or phi_trial <= phi0 - opt.gamma_phi * theta
                        ):
                            ls_ok = True
                            filt.append(
                                (
                                    (1.0 - opt.gamma_theta) * theta,
                                    phi0 - opt.gamma_phi * theta,
                                )
                            )
            if ls_ok:
                break
            alpha *= 0.5

        if not ls_ok:
            # stalled at numerical precision: a feasible, near-stationary
            # point that the line search can no longer improve
            if e_feas <= opt.constr_viol_tol and err0 <= 100.0 * opt.tol:
                status = "acceptable"
                message = "line search at numerical floor; point feasible and near-stationary"
                break
            made_progress = False
            if theta > 10.0 * opt.constr_viol_tol:
                # feasibility restoration: damped Gauss-Newton on the residual
                v_r, rest_ok = _restoration(
                    problem, v, lo, up, has_lo, has_up, eq_rows, ineq, mu, tau,
                    residual, eval_jac, theta_of, filt, opt,
                )
                if rest_ok:
                    made_progress = float(np.max(np.abs(v_r - v))) > 1e-14
                    v = v_r
                    y, s = v[:n], v[n:]
                    f_val = float(problem.objective(y))
                    grad = np.asarray(problem.gradient(y), dtype=float)
                    c_val = eval_c(y)
                    jy = eval_jac(y)
                    r = residual(y, s, c_val)
                elif theta > max(1e3 * opt.constr_viol_tol, 1e-2):
                    status = "infeasible"
                    message = "restoration stalled at positive infeasibility"
                    break
            if not made_progress:
                # soft restart: re-center the barrier and drop stale curvature
                soft_restarts += 1
                if soft_restarts > 8:
                    status = "error"
                    message = "repeated line-search failures"
                    break
                mu = min(max(10.0 * mu, 1e-4), opt.mu0)
                tau = max(opt.tau_min, 1.0 - mu)
                filt.clear()
            lbfgs.reset()
            log.append(
                {
                    "iter": n_iter, "objective": f_val, "theta": theta_of(r),
                    "phi": barrier_value(v, f_val), "f_type": 0,
                    "dual_inf": e_stat, "mu": mu, "alpha": 0.0, "restoration": 1,
                }
            )
            continue

        # dual updates with safeguards
        zl = np.where(has_lo, zl + alpha_z * dzl, 0.0)
        zu = np.where(has_up, zu + alpha_z * dzu, 0.0)
        lam = lam + alpha * (lam_new - lam) if m_all else lam
        dl_new = np.maximum(v + alpha * dv - lo, 1e-14)
        du_new = np.maximum(up - v - alpha * dv, 1e-14)
        zl = np.where(
            has_lo,
            np.clip(zl, mu / (opt.kappa_sigma * dl_new), opt.kappa_sigma * mu / dl_new),
            0.0,
        )
        zu = np.where(
            has_up,
            np.clip(zu, mu / (opt.kappa_sigma * du_new), opt.kappa_sigma * mu / du_new),
            0.0,
        )

        grad_old = grad
        jy_old = jy
        y_old = y.copy()
        v = v + alpha * dv
        y, s = v[:n], v[n:]
        f_val = float(problem.objective(y))
        grad = np.asarray(problem.gradient(y), dtype=float)
        c_val = eval_c(y)
        jy = eval_jac(y)
        r = residual(y, s, c_val)

        # quasi-Newton pair on the y-block Lagrangian gradient
        zl_y, zu_y = zl[:n], zu[:n]
        if m_all:
            gl_new = grad + jy.T @ lam - zl_y + zu_y
            gl_old = grad_old + jy_old.T @ lam - zl_y + zu_y
        else:
            gl_new = grad - zl_y + zu_y
            gl_old = grad_old - zl_y + zu_y
        lbfgs.update(y - y_old, gl_new - gl_old)

        log.append(
            {
                "iter": n_iter, "objective": f_val, "theta": theta_of(r),
                "phi": barrier_value(v, f_val), "f_type": int(was_f_type),
                "dual_inf": e_stat, "mu": mu, "alpha": alpha, "restoration": 0,
            }
        )
        if opt.verbose and (n_iter % 10 == 0 or n_iter == 1):
            print(
                f"[{problem.name}] it {n_iter:4d} f {f_val:.6e} "
                f"theta {theta_of(r):.3e} dual {e_stat:.3e} mu {mu:.1e} a {alpha:.2e}"
            )

    else:
        n_iter = opt.max_iter

    if status == "max-iterations":
        err0, _, e_feas, _ = kkt_error(grad, jy, r, v, zl, zu, lam, 0.0)
        if err0 <= 10.0 * opt.tol and e_feas <= opt.constr_viol_tol:
            status = "acceptable"

    viol = float(np.max(np.abs(r))) if m_all else 0.0
    return NlpSolution(
        x=y.copy(),
        objective=float(problem.objective(y)),
        violation=viol,
        status=status,
        multipliers=lam.copy(),
        bound_multipliers_lower=zl[:n].copy(),
        bound_multipliers_upper=zu[:n].copy(),
        iterations=n_iter,
        message=message,
        log=log,
    )


def _restoration(problem, v, lo, up, has_lo, has_up, eq_rows, ineq, mu, tau,
                 residual, eval_jac, theta_of, filt, opt):
    """Reduce the slacked residual by damped Gauss-Newton, staying interior.

    Returns (v_new, ok); ok is False when no filter-acceptable point with
    reduced infeasibility could be found.  A Jacobian refresh every step is
    unnecessary here: each factorization is reused for a capped number of
    steps before re-linearizing.
    """
    n = problem.n
    v = v.copy()
    theta_enter = theta_of(residual(v[:n], v[n:]))
    rho = 1e-6
    for _ in range(12):
        y, s = v[:n], v[n:]
        r = residual(y, s)
        theta = theta_of(r)
        if theta <= max(0.9 * theta_enter, opt.constr_viol_tol * 0.1):
            acceptable = not any(
                theta >= (1.0 - opt.gamma_theta) * th for th, _ in filt
            )
            if acceptable or theta <= opt.constr_viol_tol:
                return v, True
        jy = eval_jac(y)
        dl = np.maximum(v - lo, 1e-14)
        du = np.maximum(up - v, 1e-14)
        sigma = np.where(has_lo, mu / (dl * dl), 0.0) + np.where(has_up, mu / (du * du), 0.0)
        try:
            kkt = _Kkt(sigma[:n] + rho, sigma[n:] + rho, jy, eq_rows, 1.0, None, None,
                       dense_cols=problem.dense_columns)
        except (RuntimeError, np.linalg.LinAlgError):
            rho *= 10.0
            continue
        improved_any = False
        for _inner in range(3):
            r = residual(v[:n], v[n:])
            theta = theta_of(r)
            dy, ds, _ = kkt.solve(
                np.zeros(n), np.zeros(int(np.count_nonzero(~eq_rows))),
                r[eq_rows], r[~eq_rows],
            )
            dv = np.concatenate([dy, ds])
            if not np.all(np.isfinite(dv)) or float(np.linalg.norm(dv)) < 1e-14:
                break
            alpha = 1.0
            neg = has_lo & (dv < 0.0)
            if np.any(neg):
                alpha = min(alpha, float(np.min(-tau * (v - lo)[neg] / dv[neg])))
            pos = has_up & (dv > 0.0)
            if np.any(pos):
                alpha = min(alpha, float(np.min(tau * (up - v)[pos] / dv[pos])))
            improved = False
            while alpha > 1e-12:
                v_t = v + alpha * dv
                th_t = theta_of(residual(v_t[:n], v_t[n:]))
                if th_t <= (1.0 - 1e-4 * alpha) * theta:
                    v = v_t
                    improved = True
                    improved_any = True
                    break
                alpha *= 0.5
            if not improved:
                break
        if not improved_any:
            theta = theta_of(residual(v[:n], v[n:]))
            return v, theta <= max(0.99 * theta_enter, opt.constr_viol_tol)
    theta_final = theta_of(residual(v[:n], v[n:]))
    return v, theta_final < theta_enter * 0.99
