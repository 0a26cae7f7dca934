import numpy as np
import pytest

from rsd.errors import DomainError
from rsd.solver import MinimaxTolerances, QuadraticFamily, minimax_quadratic_solve


def grid_minimax(family, lam, lo=-3.0, hi=3.0):
    """Max-of-quadratics minimized on a 2-D grid, refined twice around the best cell."""
    center = np.zeros(2)
    half = (hi - lo) / 2
    best = None
    for _ in range(3):
        axis = np.linspace(-half, half, 401)
        U = np.stack(np.meshgrid(center[0] + axis, center[1] + axis, indexing="ij"), -1).reshape(-1, 2)
        vals = np.einsum("pi,kij,pj->pk", U, family.P, U) + U @ family.b.T + family.c + lam * (U**2).sum(1)[:, None]
        worst = vals.max(1)
        i = int(np.argmin(worst))
        best, center = worst[i], U[i]
        half = 4 * half / 400
    return best, center


def test_single_square():
    out = minimax_quadratic_solve([(np.array([[1.0]]), np.array([0.0]), 0.0)])
    assert out.optimal
    assert out.x[0] == pytest.approx(0.0, abs=1e-3) and out.objective == pytest.approx(0.0, abs=1e-6)


def test_symmetric_pair():
    terms = [(np.array([[1.0]]), np.array([-2.0]), 1.0), (np.array([[1.0]]), np.array([2.0]), 1.0)]
    out = minimax_quadratic_solve(terms)
    assert out.x[0] == pytest.approx(0.0, abs=1e-5) and out.objective == pytest.approx(1.0, abs=1e-5)


@pytest.mark.parametrize("seed", range(5))
def test_random_quadratics_against_grid(seed):
    rng = np.random.default_rng(seed)
    P = []
    for _ in range(3):
        M = rng.normal(size=(2, 2))
        P.append(M @ M.T + 0.1 * np.eye(2))
    fam = QuadraticFamily(np.array(P), rng.normal(size=(3, 2)), rng.normal(size=3))
    out = minimax_quadratic_solve(fam, lam=0.05)
    ref, _ = grid_minimax(fam, 0.05)
    assert out.optimal
    assert out.objective == pytest.approx(ref, abs=1e-4)
    # the reported gamma is the true max at the returned point
    assert out.objective == pytest.approx(fam.values(out.x[:2], 0.05).max(), abs=1e-12)


def test_box_expansion():
    # minimizer at u = 500 lies far outside the initial box
    terms = [(np.array([[1.0]]), np.array([-1000.0]), 0.0)]
    out = minimax_quadratic_solve(terms)
    # the gap test bounds the objective; u is only accurate to about sqrt(gap)
    assert out.optimal and out.objective == pytest.approx(-250000.0, rel=1e-6)
    assert out.x[0] == pytest.approx(500.0, abs=1.0)
    assert out.info["half_width"] > 10


def test_box_cap_reports_unbounded():
    terms = [(np.array([[0.0]]), np.array([-1.0]), 0.0)]  # linear, no minimum
    out = minimax_quadratic_solve(terms, tolerances=MinimaxTolerances(max_half_width=1e3))
    assert out.status == "unbounded"


def test_iteration_limit():
    rng = np.random.default_rng(1)
    M = rng.normal(size=(3, 3))
    fam = QuadraticFamily((M @ M.T)[None], rng.normal(size=(1, 3)), [0.0])
    out = minimax_quadratic_solve(fam, tolerances=MinimaxTolerances(max_iterations=2))
    assert out.status == "iteration-limit"


def test_validation():
    with pytest.raises(DomainError):
        minimax_quadratic_solve([(np.eye(1), np.zeros(1), 0.0)], lam=-1.0)
    with pytest.raises(DomainError):
        minimax_quadratic_solve([])
    with pytest.raises(DomainError):
        QuadraticFamily(np.zeros((1, 2, 3)), np.zeros((1, 2)), [0.0])
