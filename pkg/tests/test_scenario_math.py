import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import assume, given, settings
from scipy import integrate, stats

from rsd.errors import DomainError, UnboundedRuntimeError
from rsd.scenario_math import (
    DesignDims,
    Levels,
    bad_exit_bound_fs,
    bad_exit_bound_general,
    bar_beta,
    beta_eps,
    dvo_runtime_bounds,
    geometric_exit_pmf,
    h_eps,
    h_one,
    h_one_asymptotic,
    oracle_threshold,
    rvo_runtime_bounds,
)


def accept_prob_oracle(n, N, N_o, z, upper=1.0):
    """int_0^upper P{Bin(N_o, t) <= z} beta(n, N+1-n; t) dt by adaptive quadrature."""

    def f(t):
        return stats.binom.cdf(z, N_o, t) * stats.beta.pdf(t, n, N + 1 - n)

    # split at the beta mode so quad sees the peak
    mode = (n - 1) / (N - 1) if N > 1 else 0.5
    cuts = sorted({0.0, min(mode, upper), upper})
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi > lo:
            total += integrate.quad(f, lo, hi, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
    return total


def relaxed_h_oracle(n, N, N_o, eps_prime):
    # H = E[beta_T(N)], T ~ beta(z+1, N_o - z), z = eps' N_o real
    z = eps_prime * N_o

    def f(t):
        return stats.beta.sf(t, n, N + 1 - n) * stats.beta.pdf(t, z + 1, N_o - z)

    return integrate.quad(f, 0, 1, points=[(z + 1) / (N_o + 1)], epsabs=1e-14, epsrel=1e-12, limit=400)[0]


GRID = [
    (1, 5, 20, 0.3),
    (1, 10, 40, 0.1),
    (2, 10, 30, 0.2),
    (2, 25, 50, 0.05),
    (3, 12, 17, 0.25),
    (3, 40, 50, 0.1),
    (4, 20, 45, 0.15),
    (5, 30, 10, 0.3),
    (5, 50, 50, 0.08),
    (6, 18, 33, 0.2),
    (1, 3, 50, 0.45),
    (2, 7, 9, 0.35),
    (7, 44, 26, 0.12),
    (8, 50, 40, 0.1),
    (3, 9, 1, 0.6),
    (1, 50, 50, 0.02),
    (4, 11, 23, 0.4),
    (10, 50, 35, 0.2),
    (2, 33, 48, 0.07),
    (6, 29, 12, 0.33),
]


@pytest.mark.parametrize("n,N,N_o,eps_prime", GRID)
def test_h_functions_match_quadrature(n, N, N_o, eps_prime):
    dims = DesignDims(n, N, N_o)
    z = oracle_threshold(eps_prime, N_o)
    eps = min(1.0, 1.6 * eps_prime)
    assert h_one(dims, eps_prime) == pytest.approx(1 - accept_prob_oracle(n, N, N_o, z), abs=1e-8)
    assert h_eps(dims, eps, eps_prime) == pytest.approx(1 - accept_prob_oracle(n, N, N_o, z, eps), abs=1e-8)


@pytest.mark.parametrize("n,N,N_o,eps_prime", [(1, 5, 200, 0.3), (3, 40, 77, 0.1), (11, 2000, 63000, 0.0035)])
def test_relaxed_h_matches_quadrature(n, N, N_o, eps_prime):
    dims = DesignDims(n, N, N_o)
    assert h_one(dims, eps_prime, "relaxed") == pytest.approx(relaxed_h_oracle(n, N, N_o, eps_prime), abs=1e-8)


def test_conventions_agree_on_integer_thresholds():
    dims = DesignDims(3, 30, 50)  # 0.2 * 50 = 10
    assert h_one(dims, 0.2, "relaxed") == pytest.approx(h_one(dims, 0.2, "floor"), abs=1e-10)
    assert h_eps(dims, 0.3, 0.2, "relaxed") == pytest.approx(h_eps(dims, 0.3, 0.2, "floor"), abs=1e-10)


def test_threshold_floor_absorbs_float_noise():
    assert oracle_threshold(0.3, 200) == 60
    assert oracle_threshold(0.07, 100) == 7
    assert oracle_threshold(0.0035, 63000) == 220
    assert oracle_threshold(1.0, 17) == 17
    assert oracle_threshold(0.0, 17) == 0


def test_beta_eps_closed_form_small():
    # n = 1: beta_eps(N) = (1 - eps)^N
    assert beta_eps(10, 1, 0.1) == pytest.approx(0.9**10, rel=1e-14)
    assert beta_eps(5, 5, 0.2) == pytest.approx(1 - 0.2**5, rel=1e-14)
    with pytest.raises(DomainError):
        beta_eps(3, 4, 0.1)


def test_reference_h_values():
    d1 = DesignDims(11, 2000, 63000)
    d2 = DesignDims(8, 1340, 62273)
    assert h_one(d1, 0.0035, "relaxed") == pytest.approx(0.8963, abs=5e-5)
    assert h_one(d2, 0.0035, "relaxed") == pytest.approx(0.8931, abs=5e-5)
    # the exact integer-threshold law sits a little higher
    assert h_one(d1, 0.0035) == pytest.approx(0.897404, abs=1e-6)
    assert h_one(d2, 0.0035) == pytest.approx(0.894999, abs=1e-6)


def test_h_one_gap_to_limit_shrinks():
    gaps = [abs(h_one(DesignDims(11, 2000, N_o), 0.0035) - h_one_asymptotic(2000, 11, 0.0035)) for N_o in (10**4, 10**5, 10**6)]
    assert gaps[0] > gaps[1] > gaps[2]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 40), st.integers(1, 80), st.floats(0.02, 0.5), st.floats(1.0, 2.0))
def test_h_ordering_properties(n, extra, N_o, eps_prime, ratio):
    N = n + extra
    eps = min(1.0, eps_prime * ratio)
    dims = DesignDims(n, N, N_o)
    h1 = h_one(dims, eps_prime)
    he = h_eps(dims, eps, eps_prime)
    assert 0.0 <= h1 <= he + 1e-12 <= 1.0 + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 30), st.integers(5, 120), st.floats(0.05, 0.4), st.floats(1.05, 2.0))
def test_fs_bad_exit_below_bar_beta(n, extra, N_o, eps_prime, ratio):
    # fully supported: P{BadExit} = (H_eps - H_1) / (1 - H_1) exactly
    N = n + extra
    eps = min(0.99, eps_prime * ratio)
    dims = DesignDims(n, N, N_o)
    h1 = h_one(dims, eps_prime)
    assume(h1 < 1 - 1e-9)
    bad = (h_eps(dims, eps, eps_prime) - h1) / (1 - h1)
    assert bad <= bar_beta(dims, eps, eps_prime) + 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 200), st.floats(0.001, 0.5))
def test_beta_eps_decreases_in_N(n, extra, eps):
    N = n + extra
    assert beta_eps(N + 1, n, eps) <= beta_eps(N, n, eps) + 1e-15


def test_bar_beta_and_bounds():
    dims = DesignDims(11, 2000, 63000)
    assert bad_exit_bound_fs(dims, 0.005, 0.0035) == bar_beta(dims, 0.005, 0.0035)
    assert 1e-8 < bar_beta(dims, 0.005, 0.0035) < 3e-8
    general = bad_exit_bound_general(dims, 0.005, 0.0035)
    assert not general.vacuous and general.value > bar_beta(dims, 0.005, 0.0035)


def test_general_bound_vacuous_flag():
    out = bad_exit_bound_general(DesignDims(5, 6, 3), 0.3, 0.2)
    assert out.vacuous and out.value == 1.0


def test_zero_count_threshold_still_accepts_sometimes():
    # z = 0: acceptance needs a clean oracle batch, probability int (1-t)^50 dt = 1/51
    dims = DesignDims(1, 1, 50)
    assert h_one(dims, 0.0) == pytest.approx(50 / 51, rel=1e-12)
    assert bad_exit_bound_general(dims, 0.5, 0.0).value < 1.0


def test_runtime_bounds():
    exp_k, cdf = dvo_runtime_bounds(10, 1, 0.1, 3)
    assert exp_k == pytest.approx(1 / (1 - 0.9**10))
    assert cdf == pytest.approx(1 - 0.9**30)
    dims = DesignDims(11, 2000, 63000)
    assert rvo_runtime_bounds(dims, 0.0035, 1, "relaxed").expected_bound == pytest.approx(9.64, abs=0.01)
    with pytest.raises(UnboundedRuntimeError):
        dvo_runtime_bounds(10, 10, 0.0, 1)
    with pytest.raises(DomainError):
        dvo_runtime_bounds(10, 1, 0.1, 0)


def test_geometric_pmf_sums_to_one():
    p = 0.3
    assert sum(geometric_exit_pmf(p, k) for k in range(1, 200)) == pytest.approx(1.0)
    assert geometric_exit_pmf(p, 0) == 0.0


def test_dataclass_validation():
    with pytest.raises(DomainError):
        DesignDims(3, 2, 10)
    with pytest.raises(DomainError):
        DesignDims(1.5, 2, 10)
    with pytest.raises(DomainError):
        Levels(0.1, 0.2, 1e-3)
    with pytest.raises(DomainError):
        Levels(0.1, 0.05, 1.0)
    assert Levels(0.1, 0.05, 1e-3).delta == pytest.approx(0.05)
    with pytest.raises(DomainError):
        h_one(DesignDims(1, 2, 3), 0.1, "ceil")


def test_relaxed_matches_floor_at_large_No_trend():
    # at N_o = 1e6 both conventions sit close to the asymptotic value
    dims = DesignDims(11, 2000, 10**6)
    target = h_one_asymptotic(2000, 11, 0.0035)
    assert abs(h_one(dims, 0.0035) - target) < 1e-3
    assert abs(h_one(dims, 0.0035, "relaxed") - target) < 1e-3
    assert np.isfinite(h_eps(dims, 0.005, 0.0035, "relaxed"))
