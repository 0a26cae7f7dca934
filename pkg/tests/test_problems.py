import json

import numpy as np
import pytest
from scipy import optimize

from rsd.errors import DomainError
from rsd.problems import InputDesignProblem, SyntheticFS1D, TransportNetwork, make_problem

REPORTED_POINT = np.array([0.2314, 0.5, 1.7206, 0.9763, 0.5, 0.5, 0.0, 3.4283])


# synthetic -----------------------------------------------------------------

def test_synthetic_solve_and_violation():
    p = SyntheticFS1D()
    out = p.solve([0.2, 0.9, 0.5])
    assert out.x[0] == 0.9
    assert p.analytic_violation(out.x) == pytest.approx(0.1)
    assert p.solve([0.37]).x[0] == 0.37
    with pytest.raises(DomainError):
        p.solve([])


def test_synthetic_constraint_sign():
    p = SyntheticFS1D()
    theta = np.array([0.6])
    assert p.constraint_value(theta, 0.5) < 0 < p.constraint_value(theta, 0.7)


# input design --------------------------------------------------------------

def test_one_step_exact_reach():
    p = InputDesignProblem(A0=np.array([[0.3, -1.0], [2.0, 0.5]]), B=[1.0, 0.0], x_bar=[1.0, 0.0],
                           horizon=1, rho=0.0, lam=0.0)
    out = p.solve(np.zeros((1, 2, 2)))
    assert out.x[0] == pytest.approx(1.0, abs=1e-3)
    assert out.objective == pytest.approx(0.0, abs=1e-6)


def test_no_uncertainty_collapses_to_least_squares():
    p = InputDesignProblem(rho=0.0)
    samples = p.sample_many(np.random.default_rng(0), 7)
    assert not samples.any()
    R = p.reachability(samples[0])
    lhs = np.vstack([R, np.sqrt(p.lam) * np.eye(p.horizon)])
    rhs = np.concatenate([p.x_bar, np.zeros(p.horizon)])
    u = np.linalg.lstsq(lhs, rhs, rcond=None)[0]
    ref = np.sum((R @ u - p.x_bar) ** 2) + p.lam * u @ u
    out = p.solve(samples)
    assert out.objective == pytest.approx(ref, rel=1e-5)


def test_reachability_columns_by_matrix_power():
    p = InputDesignProblem()
    rng = np.random.default_rng(3)
    Q = p.sample(rng)
    R = p.reachability(Q)
    A = p.A0 + Q
    for t in rng.choice(p.horizon, 4, replace=False):
        np.testing.assert_allclose(R[:, t], np.linalg.matrix_power(A, p.horizon - 1 - t) @ p.B, rtol=1e-12, atol=1e-12)


def test_input_design_sampler():
    p = InputDesignProblem()
    draws = p.sample_many(np.random.default_rng(1), 100_000)
    assert np.abs(draws).max() <= p.rho
    sd = p.rho / np.sqrt(3) / np.sqrt(len(draws))
    assert np.all(np.abs(draws.mean(0)) <= 4 * sd)


def test_input_design_matches_independent_solver():
    p = InputDesignProblem()
    samples = p.sample_many(np.random.default_rng(11), 200)
    out = p.solve(samples)
    R = p.reachability(samples)

    def cons(theta):
        u, g = theta[:-1], theta[-1]
        r = R @ u - p.x_bar
        return g - (np.einsum("ki,ki->k", r, r) + p.lam * u @ u)

    x0 = np.append(np.zeros(p.horizon), 100.0)
    ref = optimize.minimize(lambda th: th[-1], x0, jac=lambda th: np.eye(len(th))[-1],
                            constraints=[{"type": "ineq", "fun": cons}], method="SLSQP",
                            options={"ftol": 1e-12, "maxiter": 500})
    assert ref.success
    assert out.objective == pytest.approx(ref.fun, rel=1e-5)
    assert np.all(p.constraint_values(out.x, samples) <= 1e-9)


def test_input_design_gamma_limit():
    p = InputDesignProblem()
    q = p.sample(np.random.default_rng(0))
    theta = np.append(np.zeros(p.horizon), 1e12)
    assert p.constraint_value(theta, q) < -1e11


def test_input_design_validation(tmp_path):
    with pytest.raises(DomainError):
        InputDesignProblem(B=[1.0, 0.0])
    with pytest.raises(DomainError):
        InputDesignProblem(horizon=0)
    p = InputDesignProblem()
    with pytest.raises(DomainError):
        p.constraint_values(np.zeros(3), p.sample_many(np.random.default_rng(0), 2))
    path = tmp_path / "inst.json"
    path.write_text(json.dumps(p.to_dict()))
    again = make_problem("input-design", path)
    np.testing.assert_array_equal(again.A0, p.A0)
    assert again.lam == p.lam and again.n == 11


# transport -----------------------------------------------------------------

def nominal_lp_oracle(q):
    """Scenario LP for one q assembled by hand and solved with HiGHS."""
    q1, q2, q3 = q
    tau = 1e-9
    # variables: xi1..xi4, mu12, mu32, mu23, gamma
    A = [
        [-3 - q1, 0, 0, 0, 1, 0, 0, 0],
        [0, 0, 0, 0, -1, -1, 1, 0],
        [2 + q1, 0, -2 - q3, 1 + q2, 0, 1, -1, 0],
        [0, 0, 2 + q3, -5 - q2, 0, 0, 0, 0],
        [1, 1, 1, 1, 0, 0, 0, -1],
        [0, -1, 0, 0, 1, 0, 0, 0],
        [0, -1, 0, 0, 0, 1, 0, 0],
        [0, 0, -1, 0, 0, 0, 1, 0],
    ]
    b = [-tau, -1 - tau, -tau, -tau, -tau, 0, 0, 0]
    bounds = [(0, None)] * 7 + [(None, None)]
    res = optimize.linprog(np.eye(8)[-1], A_ub=A, b_ub=b, bounds=bounds, method="highs")
    assert res.status == 0
    return res.fun


def test_transport_nominal_optimum():
    t = TransportNetwork()
    out = t.solve(np.zeros((1, 3)))
    assert out.optimal
    assert out.objective == pytest.approx(nominal_lp_oracle((0.0, 0.0, 0.0)), abs=1e-8)


@pytest.mark.parametrize("seed", range(3))
def test_transport_random_scenarios_match_highs(seed):
    t = TransportNetwork()
    q = t.sample_many(np.random.default_rng(seed), 25)
    out = t.solve(q)
    lp = t.build(q)
    res = optimize.linprog(lp.objective, A_ub=lp.matrix, b_ub=lp.rhs,
                           bounds=list(zip(lp.lower, [None] * 8)), method="highs")
    assert out.objective == pytest.approx(res.fun, abs=1e-8)
    assert np.all(t.constraint_values(out.x, q) <= -1e-9 + 1e-12)


def test_transport_reported_point_feasible_at_nominal():
    t = TransportNetwork()
    xi, mu, gamma = REPORTED_POINT[:4], REPORTED_POINT[4:7], REPORTED_POINT[7]
    assert t.constraint_value(REPORTED_POINT, np.zeros(3)) <= 1e-4
    assert xi.sum() <= gamma + 1e-4
    assert mu[0] <= xi[1] and mu[1] <= xi[1] and mu[2] <= xi[2]
    assert t.build(np.zeros(3)).residual(REPORTED_POINT) <= 1e-4


def test_transport_duplicates_do_not_move_optimum():
    t = TransportNetwork()
    q = t.sample_many(np.random.default_rng(4), 6)
    once = t.solve(q)
    twice = t.solve(np.vstack([q, q]))
    assert twice.objective == pytest.approx(once.objective, abs=1e-10)


def test_transport_nominal_structure_is_metzler():
    t = TransportNetwork()
    out = t.solve(np.zeros((1, 3)))
    rates, degenerate = t.transfer_rates(out.x)
    assert not degenerate
    assert np.all((rates >= -1e-9) & (rates <= 1 + 1e-9))
    A = t.system_matrix(rates, np.zeros(3))
    off = A[~np.eye(4, dtype=bool)]
    assert np.all(off >= -1e-9)
    # the columns of a closed network lose mass: nonpositive column sums
    assert np.all(A.sum(axis=0) <= 1e-9)


def test_transfer_rates_degenerate_guard():
    theta = REPORTED_POINT.copy()
    theta[1] = 0.0
    rates, degenerate = TransportNetwork.transfer_rates(theta)
    assert degenerate and np.all(np.isfinite(rates))


def test_transport_sampler():
    t = TransportNetwork()
    q = t.sample_many(np.random.default_rng(2), 100_000)
    assert np.abs(q).max() <= 1.0
    assert np.all(np.abs(q.mean(0)) <= 3 * 0.2 / np.sqrt(len(q)) + 1e-3)
    np.testing.assert_allclose(q.std(0), 0.2, rtol=0.01)


def test_transport_validation():
    t = TransportNetwork()
    with pytest.raises(DomainError):
        t.build(np.array([[2.0, 0.0, 0.0]]))
    with pytest.raises(DomainError):
        t.build(np.zeros((1, 2)))
    with pytest.raises(DomainError):
        make_problem("nope")
    with pytest.raises(DomainError):
        make_problem("synthetic", "x.json")
