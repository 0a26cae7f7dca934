"""Scenario problems: a synthetic fully supported 1-D program, robust
finite-horizon input design, and an uncertain transportation network LP.

Every problem follows the same contract: draw uncertainty with an explicit
``numpy.random.Generator``, solve the scenario program for a sample batch and
evaluate f(theta, q), where f > 0 means theta violates the constraint at q.
"""
from __future__ import annotations

import json
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError
from .solver import LinearProgram, LPTolerances, SolveOutcome, lp_solve
from .solver.minimax import MinimaxTolerances, QuadraticFamily, minimax_quadratic_solve


class ScenarioProblem(ABC):
    """Interface consumed by the RSD engine."""

    name: str = "problem"

    @property
    @abstractmethod
    def n(self) -> int:
        """Number of decision variables."""

    @abstractmethod
    def sample_many(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Stack of ``count`` i.i.d. uncertainty draws (first axis indexes draws)."""

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.sample_many(rng, 1)[0]

    @abstractmethod
    def solve(self, samples: np.ndarray) -> SolveOutcome:
        """Scenario program over ``samples``; deterministic for a fixed batch."""

    @abstractmethod
    def constraint_values(self, theta: np.ndarray, samples: np.ndarray) -> np.ndarray:
        """f(theta, q) for each q in ``samples``."""

    def constraint_value(self, theta: np.ndarray, q) -> float:
        return float(self.constraint_values(theta, np.asarray(q, dtype=float)[None])[0])

    def analytic_violation(self, theta: np.ndarray) -> float | None:
        """Exact V(theta) when it is known in closed form, else None."""
        return None

    def to_dict(self) -> dict:
        return {"problem": self.name}


def _check_batch(samples, tail_shape: tuple) -> np.ndarray:
    arr = np.asarray(samples, dtype=float)
    if arr.ndim == len(tail_shape):
        arr = arr[None]
    if arr.shape[0] == 0:
        raise DomainError("sample list must be nonempty")
    if arr.shape[1:] != tail_shape:
        raise DomainError(f"samples must have trailing shape {tail_shape}, got {arr.shape[1:]}")
    return arr


class SyntheticFS1D(ScenarioProblem):
    """min theta s.t. theta >= q_i,  q ~ U[0, 1].

    Fully supported with n = 1: the optimum is max q_i and V(theta) = 1 - theta.
    """

    name = "synthetic"

    @property
    def n(self) -> int:
        return 1

    def sample_many(self, rng, count):
        return rng.random(count)

    def solve(self, samples):
        q = np.asarray(samples, dtype=float).reshape(-1)
        if q.size == 0:
            raise DomainError("sample list must be nonempty")
        top = float(q.max())
        return SolveOutcome("optimal", x=np.array([top]), objective=top, iterations=0)

    def constraint_values(self, theta, samples):
        return np.asarray(samples, dtype=float).reshape(-1) - float(np.asarray(theta).reshape(-1)[0])

    def analytic_violation(self, theta):
        t = float(np.asarray(theta).reshape(-1)[0])
        return float(min(max(1.0 - t, 0.0), 1.0))


# Canonical input-design instance.
_A0 = (
    (-0.7214, -0.0578, 0.2757, 0.7255, 0.2171, 0.3901),
    (0.5704, 0.1762, 0.3684, -0.0971, 0.6822, -0.5604),
    (-1.3983, -0.1795, 0.1511, 1.0531, -0.1601, 0.9031),
    (-0.6308, -0.0058, 0.4422, 0.8169, 0.5120, 0.2105),
    (0.7539, 0.1423, 0.2039, -0.3757, 0.5088, -0.6081),
    (-1.3571, -0.1769, 0.1076, 1.0032, -0.1781, 0.9151),
)


@dataclass
class InputDesignProblem(ScenarioProblem):
    """Robust input sequence u steering x(T) of x+ = (A0 + Q) x + B u towards x_bar.

    theta = (u(0), ..., u(T-1), gamma) and
    f(theta, Q) = |R(Q) u - x_bar|^2 + lam |u|^2 - gamma, Q ~ U[-rho, rho]^(na x na).
    """

    A0: np.ndarray = field(default_factory=lambda: np.array(_A0))
    B: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0, 1.0, 0.0, 1.0]))
    x_bar: np.ndarray = field(default_factory=lambda: np.array([1.0, -0.5, 2.0, 1.0, -1.0, 2.0]))
    horizon: int = 10
    rho: float = 0.001
    lam: float = 0.005
    tolerances: MinimaxTolerances = field(default_factory=MinimaxTolerances)

    name = "input-design"

    def __post_init__(self):
        self.A0 = np.asarray(self.A0, dtype=float)
        self.B = np.asarray(self.B, dtype=float).reshape(-1)
        self.x_bar = np.asarray(self.x_bar, dtype=float).reshape(-1)
        na = self.A0.shape[0]
        if self.A0.shape != (na, na) or self.B.shape != (na,) or self.x_bar.shape != (na,):
            raise DomainError("A0 must be square and B, x_bar must match its size")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise DomainError(f"horizon must be a positive integer, got {self.horizon}")
        self.horizon = int(self.horizon)
        if not self.rho >= 0.0:
            raise DomainError(f"rho must be nonnegative, got {self.rho}")
        if not self.lam >= 0.0:
            raise DomainError(f"lam must be nonnegative, got {self.lam}")

    @property
    def n(self) -> int:
        return self.horizon + 1

    @property
    def n_states(self) -> int:
        return self.A0.shape[0]

    @classmethod
    def from_json(cls, path: str | Path, **overrides) -> "InputDesignProblem":
        data = json.loads(Path(path).read_text())
        data.update(overrides)
        keys = {"A0", "B", "x_bar", "horizon", "rho", "lam"}
        unknown = set(data) - keys - {"problem"}
        if unknown:
            raise DomainError(f"unknown instance keys: {sorted(unknown)}")
        return cls(**{k: v for k, v in data.items() if k in keys})

    def to_dict(self) -> dict:
        return {
            "problem": self.name,
            "A0": self.A0.tolist(),
            "B": self.B.tolist(),
            "x_bar": self.x_bar.tolist(),
            "horizon": self.horizon,
            "rho": self.rho,
            "lam": self.lam,
        }

    def sample_many(self, rng, count):
        na = self.n_states
        return rng.uniform(-self.rho, self.rho, size=(count, na, na))

    def reachability(self, Q: np.ndarray) -> np.ndarray:
        """R(Q) for one matrix or a stack; column t is A^(T-1-t) B."""
        Q = np.asarray(Q, dtype=float)
        single = Q.ndim == 2
        Q = _check_batch(Q, (self.n_states, self.n_states))
        A = self.A0 + Q
        T = self.horizon
        R = np.empty((Q.shape[0], self.n_states, T))
        col = np.broadcast_to(self.B, (Q.shape[0], self.n_states)).copy()
        for t in range(T - 1, -1, -1):
            R[:, :, t] = col
            col = np.einsum("kij,kj->ki", A, col)
        return R[0] if single else R

    def quadratic_family(self, samples) -> QuadraticFamily:
        R = self.reachability(_check_batch(samples, (self.n_states, self.n_states)))
        P = np.einsum("kit,kis->kts", R, R)
        b = -2.0 * np.einsum("kit,i->kt", R, self.x_bar)
        c = np.full(R.shape[0], float(self.x_bar @ self.x_bar))
        return QuadraticFamily(P, b, c)

    def solve(self, samples):
        return minimax_quadratic_solve(self.quadratic_family(samples), self.lam, self.tolerances)

    def constraint_values(self, theta, samples):
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.shape != (self.n,):
            raise DomainError(f"theta must have {self.n} entries, got {theta.shape}")
        u, gamma = theta[:-1], theta[-1]
        R = self.reachability(_check_batch(samples, (self.n_states, self.n_states)))
        resid = R @ u - self.x_bar
        return np.einsum("ki,ki->k", resid, resid) + self.lam * (u @ u) - gamma


# Strict inequalities of the transport LP are enforced as <= -TRANSPORT_MARGIN;
# f(theta, q) reports the raw rows, so f > 0 is a violation of the strict constraint.
TRANSPORT_MARGIN = 1e-9


@dataclass
class TransportNetwork(ScenarioProblem):
    """Minimum peak-to-peak gain design of a four-buffer network.

    theta = (xi_1..xi_4, mu_12, mu_32, mu_23, gamma) where mu = l * xi are the
    transfer rates scaled by buffer levels; q ~ N(0, sigma^2 I) truncated to
    |q|_inf <= 1.
    """

    sigma: float = 0.2
    bound: float = 1.0
    margin: float = TRANSPORT_MARGIN
    tolerances: LPTolerances = field(default_factory=LPTolerances)

    name = "transport"

    def __post_init__(self):
        if not (self.sigma > 0.0 and self.bound > 0.0 and self.margin >= 0.0):
            raise DomainError("need sigma > 0, bound > 0, margin >= 0")

    @property
    def n(self) -> int:
        return 8

    def to_dict(self) -> dict:
        return {"problem": self.name, "sigma": self.sigma, "bound": self.bound, "margin": self.margin}

    @classmethod
    def from_json(cls, path: str | Path, **overrides) -> "TransportNetwork":
        data = json.loads(Path(path).read_text())
        data.update(overrides)
        return cls(**{k: data[k] for k in ("sigma", "bound", "margin") if k in data})

    def sample_many(self, rng, count):
        out = np.empty((count, 3))
        filled = 0
        while filled < count:
            draw = rng.normal(0.0, self.sigma, size=(count - filled, 3))
            keep = draw[np.max(np.abs(draw), axis=1) <= self.bound]
            out[filled : filled + len(keep)] = keep
            filled += len(keep)
        return out

    @staticmethod
    def scenario_rows(samples: np.ndarray) -> np.ndarray:
        """(K, 4, 7) coefficient blocks on (xi, mu); the constant B*1 adds 1 to row 2."""
        q = _check_batch(samples, (3,))
        q1, q2, q3 = q[:, 0], q[:, 1], q[:, 2]
        rows = np.zeros((q.shape[0], 4, 7))
        rows[:, 0, 0] = -3.0 - q1
        rows[:, 0, 4] = 1.0
        rows[:, 1, 4:7] = (-1.0, -1.0, 1.0)
        rows[:, 2, 0] = 2.0 + q1
        rows[:, 2, 2] = -2.0 - q3
        rows[:, 2, 3] = 1.0 + q2
        rows[:, 2, 5:7] = (1.0, -1.0)
        rows[:, 3, 2] = 2.0 + q3
        rows[:, 3, 3] = -5.0 - q2
        return rows

    def build(self, samples) -> LinearProgram:
        """Scenario LP; the q-independent second row is emitted once."""
        q = _check_batch(samples, (3,))
        if np.any(np.abs(q) > self.bound):
            raise DomainError("transport samples must satisfy |q|_inf <= bound")
        blocks = self.scenario_rows(q)
        tau = self.margin
        uncertain = blocks[:, [0, 2, 3], :].reshape(-1, 7)
        rows = [np.hstack([uncertain, np.zeros((uncertain.shape[0], 1))])]
        rhs = [np.full(uncertain.shape[0], -tau)]
        fixed = np.zeros((5, 8))
        fixed[0, :7] = blocks[0, 1]  # -mu12 - mu32 + mu23 + 1 <= -tau
        fixed[1, :4] = 1.0  # sum xi - gamma <= -tau
        fixed[1, 7] = -1.0
        fixed[2, [4, 1]] = (1.0, -1.0)  # mu12 <= xi2
        fixed[3, [5, 1]] = (1.0, -1.0)  # mu32 <= xi2
        fixed[4, [6, 2]] = (1.0, -1.0)  # mu23 <= xi3
        rows.append(fixed)
        rhs.append(np.array([-1.0 - tau, -tau, 0.0, 0.0, 0.0]))
        objective = np.zeros(8)
        objective[7] = 1.0
        lower = np.zeros(8)
        lower[7] = -np.inf
        return LinearProgram(
            objective, np.vstack(rows), np.concatenate(rhs),
            lower=lower, upper=np.full(8, np.inf),
        )

    def solve(self, samples):
        return lp_solve(self.build(samples), self.tolerances)

    def constraint_values(self, theta, samples):
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.shape != (8,):
            raise DomainError(f"theta must have 8 entries, got {theta.shape}")
        blocks = self.scenario_rows(samples)
        vals = blocks @ theta[:7]
        vals[:, 1] += 1.0
        return vals.max(axis=1)

    @staticmethod
    def transfer_rates(theta, floor: float = 1e-12) -> tuple[np.ndarray, bool]:
        """l = (l12, l23, l32) recovered from mu / xi; flags a degenerate xi."""
        theta = np.asarray(theta, dtype=float).reshape(-1)
        xi2, xi3 = theta[1], theta[2]
        mu12, mu32, mu23 = theta[4:7]
        degenerate = xi2 < floor or xi3 < floor
        l12 = mu12 / xi2 if xi2 >= floor else 0.0
        l32 = mu32 / xi2 if xi2 >= floor else 0.0
        l23 = mu23 / xi3 if xi3 >= floor else 0.0
        return np.array([l12, l23, l32]), bool(degenerate)

    @staticmethod
    def system_matrix(rates, q) -> np.ndarray:
        """A(l, q) of the network dynamics."""
        l12, l23, l32 = np.asarray(rates, dtype=float)
        q1, q2, q3 = np.asarray(q, dtype=float)
        l31, l34, l43 = 2.0 + q1, 1.0 + q2, 2.0 + q3
        return np.array([
            [-1.0 - l31, l12, 0.0, 0.0],
            [0.0, -l12 - l32, l23, 0.0],
            [l31, l32, -l23 - l43, l34],
            [0.0, 0.0, l43, -4.0 - l34],
        ])


PROBLEMS = {"synthetic": SyntheticFS1D, "input-design": InputDesignProblem, "transport": TransportNetwork}


def make_problem(name: str, instance: str | Path | None = None, **overrides) -> ScenarioProblem:
    """Problem by id, optionally loaded from a JSON instance file."""
    try:
        cls = PROBLEMS[name]
    except KeyError:
        raise DomainError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
    if instance is not None:
        if cls is SyntheticFS1D:
            raise DomainError("the synthetic problem takes no instance file")
        return cls.from_json(instance, **overrides)
    return cls(**overrides)
