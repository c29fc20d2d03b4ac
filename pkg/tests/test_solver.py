import numpy as np
import pytest

from laptime.solver import IpOptions, NlpProblem, check_kkt, dense_jacobian, solve

from oracles import solve_qp_active_set


def _tight():
    return IpOptions(tol=1e-9, constr_viol_tol=1e-9, max_iter=300)


def _quadratic_problem():
    # min x^2 s.t. x >= 1 (as a constraint row)
    return NlpProblem(
        n=1,
        objective=lambda y: float(y[0] ** 2),
        gradient=lambda y: np.array([2.0 * y[0]]),
        constraints=lambda y: np.array([y[0]]),
        jacobian=dense_jacobian(lambda y: np.array([[1.0]])),
        lb=np.array([-10.0]),
        ub=np.array([10.0]),
        cl=np.array([1.0]),
        cu=np.array([np.inf]),
        x0=np.array([3.0]),
    )


def test_scalar_quadratic_with_constraint():
    sol = solve(_quadratic_problem(), _tight())
    assert sol.status == "optimal"
    assert sol.x[0] == pytest.approx(1.0, abs=1e-7)
    # KKT by hand: gradient 2 at x=1 balanced by the row multiplier
    assert abs(sol.multipliers[0]) == pytest.approx(2.0, abs=1e-5)


def test_scalar_quadratic_with_bound():
    prob = NlpProblem(
        n=1,
        objective=lambda y: float(y[0] ** 2),
        gradient=lambda y: np.array([2.0 * y[0]]),
        constraints=lambda y: np.zeros(0),
        jacobian=dense_jacobian(lambda y: np.zeros((0, 1))),
        lb=np.array([1.0]),
        ub=np.array([10.0]),
        cl=np.zeros(0),
        cu=np.zeros(0),
        x0=np.array([4.0]),
    )
    sol = solve(prob, _tight())
    assert sol.status == "optimal"
    assert sol.x[0] == pytest.approx(1.0, abs=1e-7)
    assert sol.bound_multipliers_lower[0] == pytest.approx(2.0, abs=1e-5)


def test_rosenbrock_with_box():
    def f(y):
        return float((1 - y[0]) ** 2 + 100.0 * (y[1] - y[0] ** 2) ** 2)

    def g(y):
        return np.array(
            [
                -2.0 * (1 - y[0]) - 400.0 * y[0] * (y[1] - y[0] ** 2),
                200.0 * (y[1] - y[0] ** 2),
            ]
        )

    prob = NlpProblem(
        n=2,
        objective=f,
        gradient=g,
        constraints=lambda y: np.zeros(0),
        jacobian=dense_jacobian(lambda y: np.zeros((0, 2))),
        lb=np.array([-2.0, -2.0]),
        ub=np.array([2.0, 2.0]),
        cl=np.zeros(0),
        cu=np.zeros(0),
        x0=np.array([-1.2, 1.0]),
    )
    sol = solve(prob, IpOptions(tol=1e-10, constr_viol_tol=1e-9, max_iter=600))
    assert sol.converged
    np.testing.assert_allclose(sol.x, [1.0, 1.0], atol=1e-6)


def test_infeasible_detected():
    # x <= 0 and x >= 1 cannot hold together
    prob = NlpProblem(
        n=1,
        objective=lambda y: float(y[0]),
        gradient=lambda y: np.array([1.0]),
        constraints=lambda y: np.array([y[0], y[0]]),
        jacobian=dense_jacobian(lambda y: np.array([[1.0], [1.0]])),
        lb=np.array([-5.0]),
        ub=np.array([5.0]),
        cl=np.array([-np.inf, 1.0]),
        cu=np.array([0.0, np.inf]),
        x0=np.array([0.5]),
    )
    sol = solve(prob, IpOptions(tol=1e-8, max_iter=100))
    assert sol.status == "infeasible"


def _random_qp(rng, n):
    m_ineq = rng.integers(1, 6)
    a = rng.standard_normal((n, n))
    Q = a.T @ a + n * np.eye(n)
    q = rng.standard_normal(n)
    x_int = rng.uniform(-0.3, 0.3, size=n)
    G = rng.standard_normal((m_ineq, n))
    h = G @ x_int + rng.uniform(0.5, 2.0, size=m_ineq)
    lb = np.full(n, -1.5)
    ub = np.full(n, 1.5)
    return Q, q, G, h, lb, ub, x_int


def test_qp_battery_matches_active_set_oracle():
    rng = np.random.default_rng(42)
    for trial in range(10):
        n = int(rng.integers(4, 51))
        Q, q, G, h, lb, ub, x_int = _random_qp(rng, n)
        x_star, _ = solve_qp_active_set(Q, q, G, h, lb, ub, x_int)
        f_star = 0.5 * x_star @ Q @ x_star + q @ x_star

        prob = NlpProblem(
            n=n,
            objective=lambda y, Q=Q, q=q: float(0.5 * y @ Q @ y + q @ y),
            gradient=lambda y, Q=Q, q=q: Q @ y + q,
            constraints=lambda y, G=G: G @ y,
            jacobian=dense_jacobian(lambda y, G=G: G),
            lb=lb,
            ub=ub,
            cl=np.full(G.shape[0], -np.inf),
            cu=h,
            x0=x_int,
        )
        sol = solve(prob, IpOptions(tol=2e-8, constr_viol_tol=1e-9, max_iter=400))
        assert sol.converged, f"trial {trial}: {sol.status} {sol.message}"
        f_ip = sol.objective
        denom = max(1.0, abs(f_star))
        assert abs(f_ip - f_star) / denom < 1e-6, f"trial {trial}"
        np.testing.assert_allclose(sol.x, x_star, atol=2e-5)


def test_determinism_identical_logs():
    runs = []
    for _ in range(2):
        sol = solve(_quadratic_problem(), _tight())
        runs.append(sol)
    assert runs[0].log == runs[1].log
    np.testing.assert_array_equal(runs[0].x, runs[1].x)


def test_filter_no_accepted_iterate_dominated():
    rng = np.random.default_rng(3)
    Q, q, G, h, lb, ub, x_int = _random_qp(rng, 12)
    prob = NlpProblem(
        n=12,
        objective=lambda y: float(0.5 * y @ Q @ y + q @ y),
        gradient=lambda y: Q @ y + q,
        constraints=lambda y: G @ y,
        jacobian=dense_jacobian(lambda y: G),
        lb=lb,
        ub=ub,
        cl=np.full(G.shape[0], -np.inf),
        cu=h,
        x0=x_int,
    )
    sol = solve(prob, IpOptions(tol=2e-8, constr_viol_tol=1e-9, max_iter=300))
    assert sol.converged
    # within one barrier phase, a theta-type entry blocks later dominated points
    gamma_theta, gamma_phi = 1e-5, 1e-5
    by_mu = {}
    for row in sol.log:
        by_mu.setdefault(row["mu"], []).append(row)
    for rows in by_mu.values():
        entries = []
        for row in rows:
            if row["restoration"]:
                continue
            dominated = any(
                row["theta"] >= (1 - gamma_theta) * th and row["phi"] >= ph - gamma_phi * th
                for th, ph in entries
            )
            assert not dominated
            if not row["f_type"]:
                entries.append((row["theta"], row["phi"]))


def test_log_csv_renders():
    sol = solve(_quadratic_problem(), _tight())
    text = sol.log_csv()
    assert text.splitlines()[0].startswith("iter,")
    assert len(text.splitlines()) == len(sol.log) + 1


def test_check_kkt_hand_qp():
    prob = _quadratic_problem()
    sol = solve(prob, _tight())
    report = check_kkt(prob, sol)
    assert report.stationarity < 1e-6
    assert report.primal_violation < 1e-8
    assert report.complementarity < 1e-6


def test_check_kkt_detects_perturbation():
    prob = _quadratic_problem()
    sol = solve(prob, _tight())
    base = check_kkt(prob, sol).stationarity
    residuals = [base]
    for shift in (0.05, 0.1, 0.2):
        shifted = sol
        shifted = type(sol)(
            x=sol.x + shift,
            objective=sol.objective,
            violation=sol.violation,
            status=sol.status,
            multipliers=sol.multipliers,
            bound_multipliers_lower=sol.bound_multipliers_lower,
            bound_multipliers_upper=sol.bound_multipliers_upper,
            iterations=sol.iterations,
        )
        residuals.append(check_kkt(prob, shifted).stationarity)
    assert all(b > a for a, b in zip(residuals, residuals[1:]))


def test_check_kkt_unconstrained_vertex():
    prob = NlpProblem(
        n=2,
        objective=lambda y: float(np.sum((y - 0.3) ** 2)),
        gradient=lambda y: 2.0 * (y - 0.3),
        constraints=lambda y: np.zeros(0),
        jacobian=dense_jacobian(lambda y: np.zeros((0, 2))),
        lb=np.array([-4.0, -4.0]),
        ub=np.array([4.0, 4.0]),
        cl=np.zeros(0),
        cu=np.zeros(0),
        x0=np.array([2.0, -2.0]),
    )
    sol = solve(prob, _tight())
    assert sol.converged
    report = check_kkt(prob, sol)
    assert report.stationarity < 1e-6
