"""The two repetitive scenario design loops.

``run_dvo`` pairs each scenario solve with an exact violation test and is only
available for problems that know V(theta) in closed form. ``run_rvo`` replaces
the exact test with the randomized oracle ``rvo``.

Randomness: every (iteration, role, chunk) triple owns an independent Philox
stream derived from the run seed, so design draws of different iterations
never overlap and oracle flags do not depend on how many threads evaluate the
oracle chunks.
"""
from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .dimensioning import ScenarioConfig
from .errors import CapabilityError, DomainError, SolverError
from .problems import ScenarioProblem
from .prob_kernel import check_probability
from .scenario_math import oracle_threshold

DESIGN, ORACLE = 0, 1
DEFAULT_CHUNK = 8192


def stream(seed: int, iteration: int, role: int, chunk: int = 0) -> np.random.Generator:
    """Independent generator for one (iteration, role, chunk) slot of a run."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(iteration), int(role), int(chunk)))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class OracleOutcome:
    flag: bool
    violation_count: int
    samples_used: int
    empirical_violation: float
    threshold: int
    # set when the oracle stopped early: the count is then only a lower bound
    truncated: bool = False


@dataclass
class IterationRecord:
    iteration: int
    objective: float
    passed: bool
    oracle: OracleOutcome | None = None
    true_violation: float | None = None
    solve_seconds: float = 0.0
    oracle_seconds: float = 0.0


@dataclass
class RunResult:
    algorithm: str
    seed: int
    status: str  # "returned" | "cap-exceeded"
    exit_iteration: int
    theta_star: np.ndarray
    objective: float
    iterations: list[IterationRecord] = field(default_factory=list)

    @property
    def returned(self) -> bool:
        return self.status == "returned"

    @property
    def final_oracle(self) -> OracleOutcome | None:
        return self.iterations[-1].oracle if self.iterations else None

    @property
    def empirical_violation(self) -> float:
        last = self.iterations[-1]
        if last.oracle is not None:
            return last.oracle.empirical_violation
        return float("nan") if last.true_violation is None else last.true_violation

    @property
    def solve_seconds(self) -> float:
        return sum(r.solve_seconds for r in self.iterations)

    @property
    def oracle_seconds(self) -> float:
        return sum(r.oracle_seconds for r in self.iterations)

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "seed": self.seed,
            "status": self.status,
            "exit_iteration": self.exit_iteration,
            "theta_star": np.asarray(self.theta_star).tolist(),
            "objective": self.objective,
            "iterations": [asdict(r) for r in self.iterations],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    def summary_row(self, run_id=0) -> dict:
        return {
            "run": run_id,
            "exit_iteration": self.exit_iteration,
            "objective": self.objective,
            "empirical_violation": self.empirical_violation,
        }

    def to_csv(self, run_id=0) -> str:
        buf = io.StringIO()
        row = self.summary_row(run_id)
        writer = csv.DictWriter(buf, fieldnames=list(row), lineterminator="\n")
        writer.writeheader()
        writer.writerow(row)
        return buf.getvalue()


ChunkSource = Callable[[int], np.random.Generator]


def rvo(
    theta: np.ndarray,
    problem: ScenarioProblem,
    N_o: int,
    eps_prime: float,
    rng: np.random.Generator | ChunkSource,
    *,
    chunk_size: int = DEFAULT_CHUNK,
    workers: int = 1,
    short_circuit: bool = False,
) -> OracleOutcome:
    """Randomized violation oracle: accept iff #{i : f(theta, q_i) > 0} <= eps' N_o.

    ``rng`` is either one generator, consumed chunk after chunk, or a map from
    chunk index to its own generator; only the latter is evaluated on several
    threads. With ``short_circuit`` the scan stops as soon as the count passes
    the threshold; the flag is unchanged but the count becomes a lower bound.
    """
    N_o = int(N_o)
    if N_o < 1:
        raise DomainError(f"N_o must be >= 1, got {N_o}")
    if chunk_size < 1 or workers < 1:
        raise DomainError("chunk_size and workers must be >= 1")
    z = oracle_threshold(eps_prime, N_o)
    sizes = [min(chunk_size, N_o - start) for start in range(0, N_o, chunk_size)]
    source = rng.__call__ if callable(rng) and not isinstance(rng, np.random.Generator) else None
    if source is None and workers > 1:
        raise DomainError("parallel oracle evaluation needs per-chunk streams")

    def count(index: int) -> int:
        gen = source(index) if source is not None else rng
        draws = problem.sample_many(gen, sizes[index])
        return int(np.count_nonzero(problem.constraint_values(theta, draws) > 0.0))

    total = used = 0
    truncated = False
    if workers == 1:
        for index, size in enumerate(sizes):
            total += count(index)
            used += size
            if short_circuit and total > z and used < N_o:
                truncated = True
                break
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for start in range(0, len(sizes), workers):
                batch = range(start, min(start + workers, len(sizes)))
                total += sum(pool.map(count, batch))
                used += sum(sizes[i] for i in batch)
                if short_circuit and total > z and used < N_o:
                    truncated = True
                    break
    return OracleOutcome(total <= z, total, used, total / used, z, truncated)


def _solve_stage(problem: ScenarioProblem, seed: int, k: int, N: int):
    samples = problem.sample_many(stream(seed, k, DESIGN), N)
    t0 = time.perf_counter()
    try:
        out = problem.solve(samples)
    except Exception as exc:  # keep the iteration in the message
        raise SolverError(f"scenario solve raised at iteration {k}: {exc}") from exc
    elapsed = time.perf_counter() - t0
    if not out.optimal:
        raise SolverError(f"scenario solve ended with status {out.status!r} at iteration {k}")
    return out, elapsed


def _has_analytic_violation(problem: ScenarioProblem) -> bool:
    return type(problem).analytic_violation is not ScenarioProblem.analytic_violation


def run_dvo(problem: ScenarioProblem, N: int, eps: float, cap: int, seed: int = 0) -> RunResult:
    """Scenario solve + exact test V(theta) <= eps, repeated until it passes or ``cap``."""
    if not _has_analytic_violation(problem):
        raise CapabilityError(f"problem {problem.name!r} has no closed-form violation probability")
    eps = check_probability("eps", eps)
    if int(N) < problem.n:
        raise DomainError(f"N must be >= n={problem.n}, got {N}")
    if int(cap) < 1:
        raise DomainError(f"cap must be >= 1, got {cap}")
    records = []
    out = None
    for k in range(1, int(cap) + 1):
        out, elapsed = _solve_stage(problem, seed, k, int(N))
        t0 = time.perf_counter()
        v = problem.analytic_violation(out.x)
        passed = v <= eps
        records.append(IterationRecord(k, out.objective, passed, None, v, elapsed, time.perf_counter() - t0))
        if passed:
            return RunResult("dvo", seed, "returned", k, out.x, out.objective, records)
    return RunResult("dvo", seed, "cap-exceeded", int(cap), out.x, out.objective, records)


def run_rvo(
    problem: ScenarioProblem,
    config: ScenarioConfig,
    *,
    workers: int = 1,
    chunk_size: int = DEFAULT_CHUNK,
    short_circuit: bool = False,
) -> RunResult:
    """Scenario solve + randomized oracle, repeated until accepted or the cap is hit."""
    dims, levels, seed = config.dims, config.levels, config.seed
    if dims.n != problem.n:
        raise DomainError(f"config has n={dims.n} but problem {problem.name!r} has n={problem.n}")
    records = []
    out = None
    for k in range(1, config.iteration_cap + 1):
        out, elapsed = _solve_stage(problem, seed, k, dims.N)
        t0 = time.perf_counter()
        verdict = rvo(
            out.x, problem, dims.N_o, levels.eps_prime,
            lambda c, k=k: stream(seed, k, ORACLE, c),
            chunk_size=chunk_size, workers=workers, short_circuit=short_circuit,
        )
        records.append(
            IterationRecord(k, out.objective, verdict.flag, verdict, None, elapsed, time.perf_counter() - t0)
        )
        if verdict.flag:
            return RunResult("rvo", seed, "returned", k, out.x, out.objective, records)
    return RunResult("rvo", seed, "cap-exceeded", config.iteration_cap, out.x, out.objective, records)
