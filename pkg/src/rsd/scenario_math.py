"""Scenario-design calculus: beta_eps(N), the H-functions, bad-exit bounds,
and running-time laws of the repetitive scenario design algorithms.

Two conventions exist for the oracle acceptance threshold z:

* ``"floor"``: z = floor(eps' * N_o), the integer the oracle actually
  compares against. This is the exact acceptance law of the randomized
  oracle and the default everywhere.
* ``"relaxed"``: z = eps' * N_o kept real. H is then evaluated through its
  integral representation. This is the convention that reproduces the
  published worked-example values (e.g. H = 0.8963 for n=11, N=2000,
  N_o=63000, eps'=0.0035), whereas the floor law gives 0.8974 there.

The two coincide whenever eps' * N_o is an integer.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

from .errors import BoundUndefinedError, DomainError, UnboundedRuntimeError
from .prob_kernel import (
    beta_binom_cdf_pair,
    beta_binom_log_pmf,
    beta_log_pdf,
    check_probability,
    inc_beta_pair,
    kahan_sum_exp,
    reg_inc_beta,
)

Threshold = Literal["floor", "relaxed"]

# Guard absorbing float noise in eps' * N_o, e.g. 0.3 * 200 = 60.000000000000007
# or 0.07 * 100 = 7.000000000000001 must floor to 60 and 7, not 59 or 6.
_FLOOR_GUARD = 1e-9


@dataclass(frozen=True)
class DesignDims:
    """Decision dimension n, design samples N, oracle samples N_o."""

    n: int
    N: int
    N_o: int

    def __post_init__(self):
        for name in ("n", "N", "N_o"):
            value = getattr(self, name)
            if int(value) != value:
                raise DomainError(f"{name} must be an integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        if self.N < self.n:
            raise DomainError(f"N must be >= n, got N={self.N}, n={self.n}")
        if self.N_o < 1:
            raise DomainError(f"N_o must be >= 1, got {self.N_o}")


@dataclass(frozen=True)
class Levels:
    """Robustness level eps, oracle level eps' <= eps, failure target beta."""

    eps: float
    eps_prime: float
    beta: float

    def __post_init__(self):
        eps = check_probability("eps", self.eps)
        eps_prime = check_probability("eps_prime", self.eps_prime)
        beta = check_probability("beta", self.beta)
        if eps == 0.0:
            raise DomainError("eps must be > 0")
        if eps_prime > eps:
            raise DomainError(f"eps_prime must not exceed eps, got {eps_prime} > {eps}")
        if not 0.0 < beta < 1.0:
            raise DomainError(f"beta must lie in (0, 1), got {beta}")
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "eps_prime", eps_prime)
        object.__setattr__(self, "beta", beta)

    @property
    def delta(self) -> float:
        return self.eps - self.eps_prime


class BoundValue(NamedTuple):
    value: float
    vacuous: bool


class RuntimeBounds(NamedTuple):
    expected_bound: float
    cdf_bound_at_k: float


def oracle_threshold(eps_prime: float, n_oracle: int) -> int:
    """Largest violation count the eps'-oracle accepts: floor(eps' * N_o)."""
    eps_prime = check_probability("eps_prime", eps_prime)
    return min(int(math.floor(eps_prime * n_oracle + _FLOOR_GUARD)), int(n_oracle))


def beta_eps(N: int, n: int, eps: float) -> float:
    """beta_eps(N) = sum_{i=0}^{n-1} C(N,i) eps^i (1-eps)^(N-i).

    Upper bound on the probability that a one-shot scenario solution with
    N samples and n decision variables is *not* eps-robust; exact for fully
    supported problems. Computed as the small tail itself, so values like
    1e-12 keep full relative accuracy.
    """
    N, n = int(N), int(n)
    eps = check_probability("eps", eps)
    if n < 1 or N < n:
        raise DomainError(f"need N >= n >= 1, got N={N}, n={n}")
    return inc_beta_pair(n, N + 1 - n, eps)[1]


def h_one_asymptotic(N: int, n: int, eps_prime: float) -> float:
    """Large-N_o limit of H_{1,eps'}(N, N_o), which is beta_{eps'}(N)."""
    return beta_eps(N, n, eps_prime)


def _relaxed_z(dims: DesignDims, eps_prime: float) -> float:
    return eps_prime * dims.N_o


def _gauss_nodes(lo: float, hi: float, panels: int = 24, order: int = 20):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    for left, right in zip(edges[:-1], edges[1:]):
        half = 0.5 * (right - left)
        mid = 0.5 * (right + left)
        for xi, wi in zip(x, w):
            yield mid + half * xi, half * wi


def _threshold_weight_integral(dims: DesignDims, z: float, upper: float) -> float:
    """int_0^upper Fbeta(n, N+1-n; t) * beta(z+1, N_o-z; t) dt.

    The beta(z+1, N_o-z) weight is sharply concentrated for large N_o, so the
    quadrature window is its mean +/- 16 standard deviations.
    """
    a = z + 1.0
    b = dims.N_o - z
    s = a + b
    mean = a / s
    sd = math.sqrt(a * b / (s * s * (s + 1.0)))
    lo = max(0.0, mean - 16.0 * sd)
    hi = min(upper, mean + 16.0 * sd)
    if hi <= lo:
        return 0.0
    acc = 0.0
    for t, w in _gauss_nodes(lo, hi):
        dens = math.exp(beta_log_pdf(a, b, t))
        acc += w * dens * reg_inc_beta(dims.n, dims.N + 1 - dims.n, t)
    return acc


def h_one(dims: DesignDims, eps_prime: float, threshold: Threshold = "floor") -> float:
    """H_{1,eps'}(N, N_o) = 1 - P{S <= z}, S ~ BetaBinomial(N_o, n, N+1-n).

    For fully supported problems this is exactly the probability that the
    eps'-oracle rejects a stage; in general it upper-bounds it.
    """
    eps_prime = check_probability("eps_prime", eps_prime)
    if threshold == "floor":
        z = oracle_threshold(eps_prime, dims.N_o)
        if z >= dims.N_o:
            return 0.0
        return beta_binom_cdf_pair(dims.N_o, dims.n, dims.N + 1 - dims.n, z)[1]
    if threshold == "relaxed":
        z = _relaxed_z(dims, eps_prime)
        if z >= dims.N_o:
            return 0.0
        # H = E[beta_T(N)], T ~ beta(z+1, N_o-z)  (integration by parts of A.2)
        accepted = _threshold_weight_integral(dims, z, 1.0)
        return min(max(1.0 - accepted, 0.0), 1.0)
    raise DomainError(f"unknown threshold convention {threshold!r}")


def h_eps(
    dims: DesignDims, eps: float, eps_prime: float, threshold: Threshold = "floor"
) -> float:
    """H_{eps,eps'}(N, N_o); 1 - H is P{GoodTrue} for fully supported problems."""
    eps = check_probability("eps", eps)
    eps_prime = check_probability("eps_prime", eps_prime)
    if eps_prime > eps:
        raise DomainError(f"eps_prime must not exceed eps, got {eps_prime} > {eps}")
    if eps == 0.0:
        return 1.0
    n, N, N_o = dims.n, dims.N, dims.N_o
    if threshold == "floor":
        z = oracle_threshold(eps_prime, N_o)
        log_terms = []
        for i in range(z + 1):
            weight = reg_inc_beta(n + i, N + N_o - n - i + 1, eps)
            if weight > 0.0:
                log_terms.append(beta_binom_log_pmf(N_o, n, N + 1 - n, i) + math.log(weight))
        good = kahan_sum_exp(log_terms)
        return min(max(1.0 - good, 0.0), 1.0)
    if threshold == "relaxed":
        z = _relaxed_z(dims, eps_prime)
        if z >= N_o:
            return 1.0 - reg_inc_beta(n, N + 1 - n, eps)
        # 1 - H = (1 - G(eps)) F(eps) + int_0^eps F g,  G = Fbeta(z+1, N_o-z)
        tail_g = inc_beta_pair(z + 1.0, N_o - z, eps)[1]
        good = tail_g * reg_inc_beta(n, N + 1 - n, eps)
        good += _threshold_weight_integral(dims, z, eps)
        return min(max(1.0 - good, 0.0), 1.0)
    raise DomainError(f"unknown threshold convention {threshold!r}")


def bar_beta(dims: DesignDims, eps: float, eps_prime: float) -> float:
    """bar-beta = Fbeta(N + (1-eps')N_o - n + 1, n + eps' N_o; 1 - eps).

    eps' * N_o is deliberately not floored here.
    """
    eps = check_probability("eps", eps)
    eps_prime = check_probability("eps_prime", eps_prime)
    n, N, N_o = dims.n, dims.N, dims.N_o
    a = N + (1.0 - eps_prime) * N_o - n + 1.0
    b = n + eps_prime * N_o
    return inc_beta_pair(a, b, 1.0 - eps, eps)[0]


def bad_exit_bound_fs(dims: DesignDims, eps: float, eps_prime: float) -> float:
    """Bound on P{BadExit} valid for fully supported problems (= bar-beta)."""
    return bar_beta(dims, eps, eps_prime)


def _oracle_pass_at_eps(N_o: int, eps: float, eps_prime: float) -> float:
    # Fbeta((1-eps')N_o, eps' N_o + 1; 1 - eps)
    if eps == 1.0:
        return 0.0
    a = (1.0 - eps_prime) * N_o
    b = eps_prime * N_o + 1.0
    if a <= 0.0:
        return 1.0  # point mass at 0: every t > 0 is above it
    return inc_beta_pair(a, b, 1.0 - eps, eps)[0]


def bad_exit_bound_general(
    dims: DesignDims, eps: float, eps_prime: float, threshold: Threshold = "floor"
) -> BoundValue:
    """General bound on P{BadExit}; reported as 1 with ``vacuous`` set if >= 1."""
    eps = check_probability("eps", eps)
    eps_prime = check_probability("eps_prime", eps_prime)
    if eps_prime > eps:
        raise DomainError(f"eps_prime must not exceed eps, got {eps_prime} > {eps}")
    lead = _oracle_pass_at_eps(dims.N_o, eps, eps_prime)
    if lead == 0.0:
        return BoundValue(0.0, False)
    h1 = h_one(dims, eps_prime, threshold)
    if h1 >= 1.0:
        raise BoundUndefinedError("H_{1,eps'} == 1: bad-exit bound undefined")
    value = lead * beta_eps(dims.N, dims.n, eps) / (1.0 - h1)
    if value >= 1.0:
        return BoundValue(1.0, True)
    return BoundValue(value, False)


def _runtime_bounds(fail_prob: float, k: int, label: str) -> RuntimeBounds:
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if fail_prob >= 1.0:
        raise UnboundedRuntimeError(f"{label} == 1: expected running time is unbounded")
    return RuntimeBounds(1.0 / (1.0 - fail_prob), 1.0 - fail_prob ** int(k))


def dvo_runtime_bounds(N: int, n: int, eps: float, k: int) -> RuntimeBounds:
    """(bound on E[K], lower bound on P{K <= k}) for the exact-oracle algorithm."""
    return _runtime_bounds(beta_eps(N, n, eps), k, "beta_eps(N)")


def rvo_runtime_bounds(
    dims: DesignDims, eps_prime: float, k: int, threshold: Threshold = "floor"
) -> RuntimeBounds:
    """(bound on E[K], lower bound on P{K <= k}) for the randomized-oracle algorithm."""
    return _runtime_bounds(h_one(dims, eps_prime, threshold), k, "H_{1,eps'}")


def geometric_exit_pmf(success: float, k: int) -> float:
    """P{K = k} for a first-success time with per-stage success probability."""
    success = check_probability("success", success)
    if k < 1:
        return 0.0
    return (1.0 - success) ** (k - 1) * success
