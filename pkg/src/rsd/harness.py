"""Monte Carlo driver: many independent RSD runs, aggregated and written to CSV."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .dimensioning import ScenarioConfig
from .engine import RunResult, run_dvo, run_rvo
from .errors import DomainError
from .problems import ScenarioProblem, make_problem

CSV_HEADER = "# rsd-montecarlo v1"
CSV_COLUMNS = ("trial", "exit_iteration", "status", "objective", "empirical_violation", "solve_ms", "oracle_ms")
QUANTILES = (0.0, 0.25, 0.5, 0.75, 1.0)


def trial_seed(seed: int, trial: int) -> int:
    """64-bit run seed of one trial, derived from the experiment seed."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(trial),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class ExperimentSpec:
    problem: str
    config: ScenarioConfig
    trials: int = 100
    instance: str | None = None
    output: str | None = None
    workers: int = 1
    algorithm: str = "rvo"
    # wall-clock columns break byte-identical reruns, so they are opt-in
    record_timings: bool = False

    def __post_init__(self):
        if int(self.trials) < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        if int(self.workers) < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers}")
        if self.algorithm not in ("rvo", "dvo"):
            raise DomainError(f"algorithm must be 'rvo' or 'dvo', got {self.algorithm!r}")
        self.trials = int(self.trials)
        self.workers = int(self.workers)

    def make_problem(self) -> ScenarioProblem:
        return make_problem(self.problem, self.instance)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["config"] = self.config.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        data = dict(data)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"unknown experiment keys: {sorted(unknown)}")
        data["config"] = ScenarioConfig.from_dict(data["config"])
        return cls(**data)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class TrialRow:
    trial: int
    exit_iteration: int
    status: str
    objective: float
    empirical_violation: float
    solve_ms: float | None = None
    oracle_ms: float | None = None

    @classmethod
    def from_run(cls, trial: int, run: RunResult, timings: bool) -> "TrialRow":
        return cls(
            trial,
            run.exit_iteration,
            run.status,
            float(run.objective),
            float(run.empirical_violation),
            1e3 * run.solve_seconds if timings else None,
            1e3 * run.oracle_seconds if timings else None,
        )


@dataclass
class ExperimentStats:
    rows: list[TrialRow]
    mean_exit: float = field(init=False)
    max_exit: int = field(init=False)
    exit_histogram: dict[int, int] = field(init=False)
    mean_violation: float = field(init=False)
    max_violation: float = field(init=False)
    objective_quantiles: dict[float, float] = field(init=False)
    cap_exceeded: int = field(init=False)

    def __post_init__(self):
        if not self.rows:
            raise DomainError("no trials to aggregate")
        self.rows = sorted(self.rows, key=lambda r: r.trial)
        exits = np.array([r.exit_iteration for r in self.rows])
        viol = np.array([r.empirical_violation for r in self.rows])
        obj = np.array([r.objective for r in self.rows])
        self.mean_exit = float(exits.mean())
        self.max_exit = int(exits.max())
        values, counts = np.unique(exits, return_counts=True)
        self.exit_histogram = {int(v): int(c) for v, c in zip(values, counts)}
        self.mean_violation = float(viol.mean())
        self.max_violation = float(viol.max())
        self.objective_quantiles = {q: float(np.quantile(obj, q)) for q in QUANTILES}
        self.cap_exceeded = sum(r.status != "returned" for r in self.rows)

    @property
    def trials(self) -> int:
        return len(self.rows)

    def aggregates(self) -> dict:
        return {
            "trials": self.trials,
            "mean_exit": self.mean_exit,
            "max_exit": self.max_exit,
            "exit_histogram": self.exit_histogram,
            "mean_violation": self.mean_violation,
            "max_violation": self.max_violation,
            "objective_quantiles": self.objective_quantiles,
            "cap_exceeded": self.cap_exceeded,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow([
                r.trial, r.exit_iteration, r.status, repr(r.objective), repr(r.empirical_violation),
                "" if r.solve_ms is None else f"{r.solve_ms:.3f}",
                "" if r.oracle_ms is None else f"{r.oracle_ms:.3f}",
            ])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ExperimentStats":
        lines = text.splitlines()
        if not lines or lines[0] != CSV_HEADER:
            raise DomainError(f"not an experiment CSV (expected header {CSV_HEADER!r})")
        reader = csv.DictReader(lines[1:])
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise DomainError(f"unexpected CSV columns {reader.fieldnames}")

        def opt(v):
            return None if v == "" else float(v)

        rows = [
            TrialRow(
                int(d["trial"]), int(d["exit_iteration"]), d["status"], float(d["objective"]),
                float(d["empirical_violation"]), opt(d["solve_ms"]), opt(d["oracle_ms"]),
            )
            for d in reader
        ]
        return cls(rows)


def _run_trial(args) -> TrialRow:
    spec, problem, trial = args
    config = spec.config.with_seed(trial_seed(spec.config.seed, trial))
    if spec.algorithm == "dvo":
        run = run_dvo(problem, config.dims.N, config.levels.eps, config.iteration_cap, config.seed)
    else:
        run = run_rvo(problem, config)
    return TrialRow.from_run(trial, run, spec.record_timings)


def monte_carlo(spec: ExperimentSpec, problem: ScenarioProblem | None = None) -> ExperimentStats:
    """Run ``spec.trials`` independent executions; cap-exceeded trials are kept as rows."""
    problem = problem or spec.make_problem()
    jobs = [(spec, problem, t) for t in range(spec.trials)]
    if spec.workers == 1:
        rows = [_run_trial(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            rows = list(pool.map(_run_trial, jobs, chunksize=max(1, math.ceil(len(jobs) / (4 * spec.workers)))))
    stats = ExperimentStats(rows)
    if spec.output:
        Path(spec.output).write_text(stats.to_csv())
    return stats
