"""Dense two-phase primal simplex with Bland's anti-cycling rule.

General LPs are reduced to an inequality form over nonnegative and free
variables. That form is solved either directly (``method="primal"``) or,
for the tall constraint matrices typical of scenario programs, through its
dual (``method="dual"``); the primal point is then read off the simplex
multipliers of the dual. Both routes use the same tableau code.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from ..errors import DomainError

Status = Literal["optimal", "infeasible", "unbounded", "iteration-limit"]
_SENSES = ("<=", ">=", "=")


@dataclass(frozen=True)
class LPTolerances:
    pivot: float = 1e-9
    feasibility: float = 1e-9
    optimality: float = 1e-10
    max_iterations: int = 200_000


@dataclass
class LinearProgram:
    """min c^T x  s.t.  A x (<=|>=|=) b,  lower <= x <= upper."""

    objective: np.ndarray
    matrix: np.ndarray
    rhs: np.ndarray
    senses: Sequence[str] | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).ravel()
        m = self.objective.size
        self.matrix = np.asarray(self.matrix, dtype=float).reshape(-1, m)
        r = self.matrix.shape[0]
        self.rhs = np.asarray(self.rhs, dtype=float).ravel()
        if self.rhs.size != r:
            raise DomainError(f"rhs has {self.rhs.size} entries for {r} rows")
        self.senses = tuple(self.senses) if self.senses is not None else ("<=",) * r
        if len(self.senses) != r or any(s not in _SENSES for s in self.senses):
            raise DomainError("senses must hold one of '<=', '>=', '=' per row")
        self.lower = np.zeros(m) if self.lower is None else np.asarray(self.lower, float).ravel()
        self.upper = np.full(m, np.inf) if self.upper is None else np.asarray(self.upper, float).ravel()
        if self.lower.size != m or self.upper.size != m:
            raise DomainError("bounds must have one entry per variable")
        for name in ("objective", "matrix", "rhs"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise DomainError(f"{name} must be finite")
        if np.any(self.lower == np.inf) or np.any(self.upper == -np.inf):
            raise DomainError("bounds must leave the variable a nonempty range")

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def residual(self, x: np.ndarray) -> float:
        """Largest violation of any row or bound at x."""
        ax = self.matrix @ x - self.rhs
        worst = 0.0
        for val, sense in zip(ax, self.senses):
            if sense == "<=":
                worst = max(worst, val)
            elif sense == ">=":
                worst = max(worst, -val)
            else:
                worst = max(worst, abs(val))
        worst = max(worst, float(np.max(self.lower - x, initial=0.0)))
        worst = max(worst, float(np.max(x - self.upper, initial=0.0)))
        return worst

    def to_dict(self) -> dict:
        def bound(v):
            return [None if not np.isfinite(t) else float(t) for t in v]

        return {
            "objective": self.objective.tolist(),
            "rows": self.matrix.tolist(),
            "rhs": self.rhs.tolist(),
            "senses": list(self.senses),
            "lower": bound(self.lower),
            "upper": bound(self.upper),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LinearProgram":
        m = len(data["objective"])
        lower = data.get("lower")
        upper = data.get("upper")
        lower = None if lower is None else [-np.inf if v is None else v for v in lower]
        upper = None if upper is None else [np.inf if v is None else v for v in upper]
        rows = data.get("rows") or np.zeros((0, m))
        return cls(data["objective"], rows, data.get("rhs", []), data.get("senses"), lower, upper)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "LinearProgram":
        return cls.from_dict(json.loads(text))


@dataclass
class SolveOutcome:
    status: Status
    x: np.ndarray | None = None
    objective: float | None = None
    iterations: int = 0
    info: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


# --------------------------------------------------------------------------
# tableau core: min c^T v, A v = b, v >= 0


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    factor = T[:, col].copy()
    factor[row] = 0.0
    T -= np.outer(factor, T[row])


def _bland_loop(T, basis, allowed, tol: LPTolerances, budget: int):
    """Run Bland pivots on tableau T in place; returns (status, pivots)."""
    rows = T.shape[0] - 1
    pivots = 0
    while True:
        cost = T[-1, :-1]
        candidates = np.flatnonzero((cost < -tol.optimality) & allowed)
        if candidates.size == 0:
            return "optimal", pivots
        if pivots >= budget:
            return "iteration-limit", pivots
        col = int(candidates[0])
        column = T[:rows, col]
        positive = np.flatnonzero(column > tol.pivot)
        if positive.size == 0:
            return "unbounded", pivots
        ratios = T[positive, -1] / column[positive]
        best = ratios.min()
        ties = positive[ratios <= best + 1e-12 * (1.0 + abs(best))]
        row = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, row, col)
        basis[row] = col
        pivots += 1


def _standard_simplex(c, A, b, tol: LPTolerances):
    """Two-phase simplex. Returns (status, basis, kept_rows, row_sign, pivots)."""
    r, n = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    A = A * sign[:, None]
    b = b * sign
    T = np.zeros((r + 1, n + r + 1))
    T[:r, :n] = A
    T[:r, n : n + r] = np.eye(r)
    T[:r, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + r))
    allowed = np.ones(n + r, dtype=bool)
    status, pivots = _bland_loop(T, basis, allowed, tol, tol.max_iterations)
    if status == "iteration-limit":
        return status, None, None, sign, pivots
    scale = 1.0 + float(np.abs(b).max(initial=0.0))
    if -T[-1, -1] > tol.feasibility * scale:
        return "infeasible", None, None, sign, pivots
    # drive zero-level artificials out of the basis; drop redundant rows
    keep = []
    for i in range(r):
        if basis[i] >= n:
            nz = np.flatnonzero(np.abs(T[i, :n]) > tol.pivot)
            if nz.size == 0:
                continue
            _pivot(T, i, int(nz[0]))
            basis[i] = int(nz[0])
            pivots += 1
        keep.append(i)
    T = np.vstack([T[keep][:, list(range(n)) + [n + r]], np.zeros((1, n + 1))])
    basis = [basis[i] for i in keep]
    cb = c[basis]
    T[-1, :n] = c - cb @ T[:-1, :n]
    T[-1, -1] = -cb @ T[:-1, -1]
    status, more = _bland_loop(T, basis, np.ones(n, dtype=bool), tol, tol.max_iterations - pivots)
    return status, basis, keep, sign, pivots + more


# --------------------------------------------------------------------------
# reduction of a general LP to inequality form over y (x = shift + flip * y)


@dataclass
class _Canonical:
    c: np.ndarray
    G: np.ndarray
    h: np.ndarray
    E: np.ndarray
    f: np.ndarray
    nonneg: np.ndarray
    shift: np.ndarray
    flip: np.ndarray
    const: float

    def to_x(self, y: np.ndarray) -> np.ndarray:
        return self.shift + self.flip * y


def _canonical(lp: LinearProgram) -> _Canonical:
    m = lp.objective.size
    shift = np.zeros(m)
    flip = np.ones(m)
    nonneg = np.zeros(m, dtype=bool)
    extra_rows, extra_rhs = [], []
    for j in range(m):
        lo, hi = lp.lower[j], lp.upper[j]
        if np.isfinite(lo):
            shift[j], nonneg[j] = lo, True
            if np.isfinite(hi):
                row = np.zeros(m)
                row[j] = 1.0
                extra_rows.append(row)
                extra_rhs.append(hi - lo)
        elif np.isfinite(hi):
            shift[j], flip[j], nonneg[j] = hi, -1.0, True
    A = lp.matrix * flip[None, :]
    b = lp.rhs - lp.matrix @ shift
    senses = np.array(lp.senses)
    le = senses == "<="
    ge = senses == ">="
    eq = senses == "="
    G = np.vstack([A[le], -A[ge], np.array(extra_rows).reshape(-1, m)])
    h = np.concatenate([b[le], -b[ge], np.array(extra_rhs)])
    return _Canonical(
        c=lp.objective * flip,
        G=G,
        h=h,
        E=A[eq],
        f=b[eq],
        nonneg=nonneg,
        shift=shift,
        flip=flip,
        const=float(lp.objective @ shift),
    )


def _solve_primal(cf: _Canonical, tol: LPTolerances):
    m = cf.c.size
    P = np.flatnonzero(cf.nonneg)
    F = np.flatnonzero(~cf.nonneg)
    rG, rE = cf.G.shape[0], cf.E.shape[0]
    M = np.vstack([cf.G, cf.E])
    A = np.hstack([M[:, P], M[:, F], -M[:, F], np.vstack([np.eye(rG), np.zeros((rE, rG))])])
    c = np.concatenate([cf.c[P], cf.c[F], -cf.c[F], np.zeros(rG)])
    b = np.concatenate([cf.h, cf.f])
    status, basis, keep, sign, pivots = _standard_simplex(c, A, b, tol)
    if status != "optimal":
        return status, None, pivots
    v = np.zeros(A.shape[1])
    B = (A * sign[:, None])[keep][:, basis]
    v[basis] = np.linalg.lstsq(B, (b * sign)[keep], rcond=None)[0]
    y = np.zeros(m)
    y[P] = v[: P.size]
    y[F] = v[P.size : P.size + F.size] - v[P.size + F.size : P.size + 2 * F.size]
    return "optimal", y, pivots


def _solve_dual(cf: _Canonical, tol: LPTolerances):
    """Solve min h'w - f'u  s.t.  (-G'w + E'u)_j <= c_j (j >= 0), = c_j (j free), w >= 0.

    Its simplex multipliers pi give the primal point y = -pi.
    """
    m = cf.c.size
    P = np.flatnonzero(cf.nonneg)
    rG, rE = cf.G.shape[0], cf.E.shape[0]
    slack = np.zeros((m, P.size))
    slack[P, np.arange(P.size)] = 1.0
    A = np.hstack([-cf.G.T, cf.E.T, -cf.E.T, slack]).reshape(m, rG + 2 * rE + P.size)
    c = np.concatenate([cf.h, -cf.f, cf.f, np.zeros(P.size)])
    b = cf.c.copy()
    status, basis, keep, sign, pivots = _standard_simplex(c, A, b, tol)
    if status == "unbounded":
        return "infeasible", None, pivots
    if status != "optimal":
        return status, None, pivots
    B = (A * sign[:, None])[keep][:, basis]
    pi_kept = np.linalg.lstsq(B.T, c[basis], rcond=None)[0]
    pi = np.zeros(m)
    pi[keep] = pi_kept * sign[keep]
    return "optimal", -pi, pivots


def lp_solve(
    lp: LinearProgram,
    tolerances: LPTolerances | None = None,
    method: Literal["auto", "primal", "dual"] = "auto",
) -> SolveOutcome:
    """Solve a dense LP; deterministic pivot order (Bland) for fixed input."""
    tol = tolerances or LPTolerances()
    cf = _canonical(lp)
    n_rows = cf.G.shape[0] + cf.E.shape[0]
    if method == "auto":
        method = "dual" if n_rows > 2 * cf.c.size else "primal"
    if method == "dual":
        status, y, pivots = _solve_dual(cf, tol)
        if status == "infeasible" and cf.G.shape[0] + cf.E.shape[0] > 0:
            # an infeasible dual means primal infeasible *or* unbounded
            status, y, more = _solve_primal(cf, tol)
            pivots += more
    elif method == "primal":
        status, y, pivots = _solve_primal(cf, tol)
    else:
        raise DomainError(f"unknown method {method!r}")
    if status != "optimal":
        return SolveOutcome(status, iterations=pivots, info={"method": method})
    x = cf.to_x(y)
    return SolveOutcome(
        "optimal",
        x=x,
        objective=float(lp.objective @ x),
        iterations=pivots,
        info={"method": method, "residual": lp.residual(x)},
    )
