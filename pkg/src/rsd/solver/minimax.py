"""Kelley cutting planes for  min_u max_i g_i(u),  g_i convex quadratic.

Equivalently  min gamma  s.t.  g_i(u) <= gamma  for every i.  Each round
linearizes the currently largest g_i at the incumbent and re-solves a master
LP over a box around the start point; the box grows tenfold whenever the
master optimum ends up on its boundary.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import DomainError
from .simplex import LinearProgram, LPTolerances, SolveOutcome, lp_solve


@dataclass(frozen=True)
class MinimaxTolerances:
    relative_gap: float = 1e-6
    initial_half_width: float = 10.0
    max_half_width: float = 1e6
    max_iterations: int = 5000
    lp: LPTolerances = LPTolerances()


@dataclass
class QuadraticFamily:
    """Stacked convex quadratics g_i(u) = u'P_i u + b_i'u + c_i."""

    P: np.ndarray  # (K, m, m), symmetric PSD
    b: np.ndarray  # (K, m)
    c: np.ndarray  # (K,)

    def __post_init__(self):
        self.P = np.asarray(self.P, dtype=float)
        if self.P.ndim == 2:
            self.P = self.P[None]
        K, m, m2 = self.P.shape
        if m != m2:
            raise DomainError("each P_i must be square")
        self.P = 0.5 * (self.P + np.swapaxes(self.P, 1, 2))
        self.b = np.asarray(self.b, dtype=float).reshape(K, m)
        self.c = np.asarray(self.c, dtype=float).reshape(K)

    @classmethod
    def from_terms(cls, terms: Sequence[tuple]) -> "QuadraticFamily":
        if not terms:
            raise DomainError("need at least one quadratic term")
        P, b, c = zip(*terms)
        return cls(np.stack([np.atleast_2d(p) for p in P]), np.stack([np.atleast_1d(v) for v in b]), np.array(c))

    @property
    def dim(self) -> int:
        return self.P.shape[1]

    def values(self, u: np.ndarray, lam: float = 0.0) -> np.ndarray:
        Pu = self.P @ u
        return Pu @ u + self.b @ u + self.c + lam * (u @ u)

    def gradient(self, i: int, u: np.ndarray, lam: float = 0.0) -> np.ndarray:
        return 2.0 * (self.P[i] @ u) + self.b[i] + 2.0 * lam * u


def minimax_quadratic_solve(
    terms: QuadraticFamily | Sequence[tuple],
    lam: float = 0.0,
    tolerances: MinimaxTolerances | None = None,
    start: np.ndarray | None = None,
) -> SolveOutcome:
    """Minimize gamma s.t. g_i(u) + lam*|u|^2 <= gamma for all i.

    Returns x = (u*, gamma*) with gamma* = max_i g_i(u*) + lam*|u*|^2, so the
    returned point is feasible for every term by construction.
    """
    family = terms if isinstance(terms, QuadraticFamily) else QuadraticFamily.from_terms(terms)
    if lam < 0:
        raise DomainError(f"regularizer must be nonnegative, got {lam}")
    tol = tolerances or MinimaxTolerances()
    m = family.dim
    center = np.zeros(m) if start is None else np.asarray(start, dtype=float).copy()
    half = tol.initial_half_width
    u = center.copy()
    cuts: list[np.ndarray] = []
    cut_rhs: list[float] = []
    objective = np.zeros(m + 1)
    objective[-1] = 1.0
    upper = np.inf
    best = u
    lower = -np.inf
    pivots = 0
    for it in range(1, tol.max_iterations + 1):
        vals = family.values(u, lam)
        i = int(np.argmax(vals))
        if vals[i] < upper:
            upper, best = float(vals[i]), u
        grad = family.gradient(i, u, lam)
        # grad'v - gamma <= grad'u - g_i(u)
        cuts.append(np.append(grad, -1.0))
        cut_rhs.append(float(grad @ u - vals[i]))
        master = LinearProgram(
            objective,
            np.array(cuts),
            np.array(cut_rhs),
            lower=np.append(center - half, -np.inf),
            upper=np.append(center + half, np.inf),
        )
        out = lp_solve(master, tol.lp)
        pivots += out.iterations
        if not out.optimal:
            return SolveOutcome(out.status, iterations=it, info={"stage": "master", "lp_pivots": pivots})
        u = out.x[:m]
        lower = out.objective
        if upper - lower <= tol.relative_gap * (1.0 + abs(upper)):
            on_box = np.any(np.abs(u - center) >= half * (1.0 - 1e-9))
            if not on_box:
                break
            if half >= tol.max_half_width:
                return SolveOutcome(
                    "unbounded", iterations=it, info={"stage": "box-cap", "half_width": half}
                )
            half *= 10.0
    else:
        return SolveOutcome(
            "iteration-limit",
            x=np.append(best, upper),
            objective=upper,
            iterations=tol.max_iterations,
            info={"lower": lower, "lp_pivots": pivots},
        )
    return SolveOutcome(
        "optimal",
        x=np.append(best, upper),
        objective=upper,
        iterations=it,
        info={"lower": lower, "gap": upper - lower, "lp_pivots": pivots, "half_width": half},
    )
