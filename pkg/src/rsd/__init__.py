"""Repetitive scenario design: exact scenario bounds, dimensioning, the RSD
algorithms with exact and randomized violation oracles, and a Monte Carlo
harness."""
from .dimensioning import ScenarioConfig, dimension_rsd, min_no_closed_form, min_no_eq19, n_plain_exact, tradeoff_curve
from .engine import OracleOutcome, RunResult, run_dvo, run_rvo, rvo
from .errors import (
    BoundUndefinedError,
    CapabilityError,
    ConvergenceError,
    DimensioningError,
    DomainError,
    RSDError,
    SolverError,
    UnboundedRuntimeError,
)
from .harness import ExperimentSpec, ExperimentStats, monte_carlo
from .problems import InputDesignProblem, ScenarioProblem, SyntheticFS1D, TransportNetwork, make_problem
from .scenario_math import DesignDims, Levels, bar_beta, beta_eps, h_eps, h_one

__version__ = "0.1.0"
