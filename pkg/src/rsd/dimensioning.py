"""Sizing of the scenario block (N) and the oracle block (N_o)."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .errors import DimensioningError, DomainError
from .prob_kernel import check_probability
from .scenario_math import (
    DesignDims,
    Levels,
    bad_exit_bound_general,
    bar_beta,
    beta_eps,
    h_one,
)

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class ScenarioConfig:
    """Full dimensioning of one RSD deployment."""

    dims: DesignDims
    levels: Levels
    iteration_cap: int
    seed: int = 0

    def __post_init__(self):
        if int(self.iteration_cap) < 1:
            raise DomainError(f"iteration_cap must be >= 1, got {self.iteration_cap}")
        if not 0 <= int(self.seed) <= _SEED_MASK:
            raise DomainError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "iteration_cap", int(self.iteration_cap))
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def build(cls, n, N, N_o, eps, eps_prime, beta=1e-12, iteration_cap=1000, seed=0):
        return cls(DesignDims(n, N, N_o), Levels(eps, eps_prime, beta), iteration_cap, seed)

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return ScenarioConfig(self.dims, self.levels, self.iteration_cap, seed)

    def to_dict(self) -> dict:
        out = {**asdict(self.dims), **asdict(self.levels)}
        out["iteration_cap"] = self.iteration_cap
        out["seed"] = self.seed
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        return cls.build(
            data["n"], data["N"], data["N_o"], data["eps"], data["eps_prime"],
            data.get("beta", 1e-12), data.get("iteration_cap", 1000), data.get("seed", 0),
        )


@dataclass(frozen=True)
class TradeoffPoint:
    N: int
    expected_repetitions_bound: float


@dataclass(frozen=True)
class DimensioningReport:
    """Config chosen by :func:`dimension_rsd` plus the figures behind it."""

    config: ScenarioConfig
    n_o_closed_form: int
    asymptotic_expected_reps: float
    h_one: float
    expected_reps_bound: float
    bad_exit_fs: float
    bad_exit_general: float
    bad_exit_general_vacuous: bool
    n_plain: int

    def to_dict(self) -> dict:
        out = self.config.to_dict()
        out.update(
            N_o_closed_form=self.n_o_closed_form,
            asymptotic_expected_reps=self.asymptotic_expected_reps,
            h_one=self.h_one,
            expected_reps_bound=self.expected_reps_bound,
            bad_exit_fs=self.bad_exit_fs,
            bad_exit_general=self.bad_exit_general,
            bad_exit_general_vacuous=self.bad_exit_general_vacuous,
            n_plain=self.n_plain,
        )
        return out


def least_integer(pred: Callable[[int], bool], start: int) -> int:
    """Smallest k >= start with pred(k) true, for pred monotone false -> true.

    Doubles the step from ``start`` to bracket, then bisects.
    """
    if pred(start):
        return start
    lo = start  # pred(lo) is False
    step = 1
    hi = start + step
    while not pred(hi):
        lo = hi
        step *= 2
        hi = start + step
        if step > 1 << 62:
            raise DimensioningError("search did not bracket a solution")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _check_target(beta_target: float) -> float:
    beta_target = check_probability("beta", beta_target)
    if not 0.0 < beta_target < 1.0:
        raise DomainError(f"beta must lie in (0, 1), got {beta_target}")
    return beta_target


def n_plain_closed_form(n: int, eps: float, beta_target: float) -> int:
    """ceil((2/eps)(ln(1/beta) + n - 1)): explicit, possibly conservative N."""
    eps = check_probability("eps", eps)
    beta_target = _check_target(beta_target)
    if eps == 0.0 or n < 1:
        raise DomainError("need eps > 0 and n >= 1")
    return math.ceil((2.0 / eps) * (math.log(1.0 / beta_target) + n - 1))


def n_plain_exact(n: int, eps: float, beta_target: float) -> int:
    """Least N >= n with beta_eps(N) <= beta (one-shot scenario design)."""
    eps = check_probability("eps", eps)
    beta_target = _check_target(beta_target)
    if eps == 0.0 or n < 1:
        raise DomainError("need eps > 0 and n >= 1")
    return least_integer(lambda N: beta_eps(N, n, eps) <= beta_target, n)


def _closed_form_holds(N_o: int, N: int, n: int, eps: float, eps_prime: float, beta: float) -> bool:
    delta = eps - eps_prime
    lhs = N_o * delta + N * (delta / 2.0 + eps_prime)
    rhs = (eps / delta) * math.log(1.0 / beta) + n - 1
    return lhs >= rhs


def min_no_closed_form(N: int, n: int, eps: float, eps_prime: float, beta_target: float) -> int:
    """Least N_o >= 1 with N_o*d + N*(d/2 + eps') >= (eps/d) ln(1/beta) + n - 1, d = eps - eps'."""
    eps = check_probability("eps", eps)
    eps_prime = check_probability("eps_prime", eps_prime)
    beta_target = _check_target(beta_target)
    delta = eps - eps_prime
    if not delta > 0.0:
        raise DomainError(f"need eps' < eps, got eps={eps}, eps'={eps_prime}")
    rhs = (eps / delta) * math.log(1.0 / beta_target) + n - 1
    guess = max(1, math.ceil((rhs - N * (delta / 2.0 + eps_prime)) / delta))
    # the float division can land one off either way; settle it exactly
    while guess > 1 and _closed_form_holds(guess - 1, N, n, eps, eps_prime, beta_target):
        guess -= 1
    while not _closed_form_holds(guess, N, n, eps, eps_prime, beta_target):
        guess += 1
    return guess


min_no_eq19 = min_no_closed_form  # name kept for existing callers


def min_no_bar_beta(N: int, n: int, eps: float, eps_prime: float, beta_target: float) -> int:
    """Least N_o >= 1 with bar-beta(N, N_o) <= beta, by numeric search."""
    beta_target = _check_target(beta_target)
    if not eps_prime < eps:
        raise DomainError(f"need eps' < eps, got eps={eps}, eps'={eps_prime}")
    return least_integer(
        lambda N_o: bar_beta(DesignDims(n, N, N_o), eps, eps_prime) <= beta_target, 1
    )


def asymptotic_expected_reps(N: int, n: int, eps_prime: float) -> float:
    """(1 - beta_{eps'}(N))^{-1}; inf where beta_{eps'}(N) == 1."""
    b = beta_eps(N, n, eps_prime)
    return math.inf if b >= 1.0 else 1.0 / (1.0 - b)


def tradeoff_curve(
    n: int, eps_prime: float, N_low: int, N_high: int, points: int = 50
) -> list[TradeoffPoint]:
    """Asymptotic expected-repetition bound on a log-spaced grid of N."""
    if N_low < n:
        raise DomainError(f"N range must start at or above n={n}, got {N_low}")
    if N_high < N_low or points < 1:
        raise DomainError("need N_high >= N_low and points >= 1")
    grid = np.unique(np.round(np.geomspace(N_low, N_high, points)).astype(int))
    return [TradeoffPoint(int(N), asymptotic_expected_reps(int(N), n, eps_prime)) for N in grid]


def iteration_cap_for(h1: float, beta_target: float) -> int:
    """Smallest k with h1**k <= beta (P{K > k} <= beta)."""
    if h1 <= 0.0:
        return 1
    if h1 >= 1.0:
        raise DimensioningError("H_{1,eps'} == 1: no finite iteration cap exists")
    k = max(1, math.ceil(math.log(beta_target) / math.log(h1)))
    while k > 1 and h1 ** (k - 1) <= beta_target:
        k -= 1
    while h1**k > beta_target:
        k += 1
    return k


def dimension_rsd(
    n: int,
    eps: float,
    beta_target: float,
    eps_prime_fraction: float = 0.7,
    target_expected_reps: float = 10.0,
    *,
    N: int | None = None,
    seed: int = 0,
) -> DimensioningReport:
    """Size (N, N_o, iteration cap) for the randomized-oracle RSD algorithm.

    N is the smallest value whose asymptotic repetition bound
    (1 - beta_{eps'}(N))^{-1} meets ``target_expected_reps`` unless given
    explicitly. N_o starts from the closed-form sufficient condition and is
    raised, by numeric search, until bar-beta <= beta actually holds.
    """
    eps = check_probability("eps", eps)
    beta_target = _check_target(beta_target)
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if not 0.0 < eps_prime_fraction < 1.0:
        raise DomainError(f"eps_prime_fraction must lie in (0, 1), got {eps_prime_fraction}")
    eps_prime = float(f"{eps_prime_fraction * eps:.15g}")  # 0.7*0.005 -> 0.0035, not ...0996
    if N is None:
        if not target_expected_reps > 1.0:
            raise DimensioningError("target expected repetitions must exceed 1")
        ceiling = 1.0 - 1.0 / target_expected_reps
        N = least_integer(lambda m: beta_eps(m, n, eps_prime) <= ceiling, n)
    dims_probe = DesignDims(n, N, 1)  # validates n, N
    n_o_closed_form = min_no_closed_form(N, n, eps, eps_prime, beta_target)
    N_o = n_o_closed_form
    if bar_beta(DesignDims(n, N, N_o), eps, eps_prime) > beta_target:
        N_o = least_integer(
            lambda m: bar_beta(DesignDims(n, N, m), eps, eps_prime) <= beta_target, N_o
        )
    dims = DesignDims(dims_probe.n, N, N_o)
    h1 = h_one(dims, eps_prime)
    general = bad_exit_bound_general(dims, eps, eps_prime)
    config = ScenarioConfig(
        dims, Levels(eps, eps_prime, beta_target), iteration_cap_for(h1, beta_target), seed
    )
    return DimensioningReport(
        config=config,
        n_o_closed_form=n_o_closed_form,
        asymptotic_expected_reps=asymptotic_expected_reps(N, n, eps_prime),
        h_one=h1,
        expected_reps_bound=math.inf if h1 >= 1.0 else 1.0 / (1.0 - h1),
        bad_exit_fs=bar_beta(dims, eps, eps_prime),
        bad_exit_general=general.value,
        bad_exit_general_vacuous=general.vacuous,
        n_plain=n_plain_exact(n, eps, beta_target),
    )
