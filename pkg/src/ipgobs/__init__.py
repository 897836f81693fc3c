"""Iteratively preconditioned gradient-descent observer for discrete-time
nonlinear systems, a Newton-observer baseline, numerical estimation of the
convergence-theory constants, and an experiment harness."""

from .benchmarks import BUILTIN_IDS, builtin_system, default_window_n
from .conditions import ConditionReport, check_theorem_conditions
from .constants import (
    ConstantsReport,
    Region,
    RhoMeasurement,
    estimate_constants,
    measure_rho,
)
from .errors import (
    ConfigurationError,
    DivergenceError,
    InsufficientDataError,
    IpgObsError,
    NumericalEvaluationError,
    SingularJacobianError,
)
from .estimators import IpgObserver, NewtonObserver
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    RateFit,
    config_from_dict,
    fit_linear_rate,
    load_config,
    run_experiment,
)
from .ipg import (
    ConstantAlpha,
    CustomAlpha,
    IpgConfig,
    IpgState,
    TheoremSchedule,
    advance_window,
    ipg_inner_step,
    propagate_estimate,
    run_ipg_observer,
    step_size,
)
from .newton import NewtonConfig, newton_inner_step, run_newton_observer
from .observability import ObservabilityWindow
from .systems import SystemModel, Trajectory, fd_jacobian, simulate
from .trace import CSV_HEADER, RunTrace, TraceRecord

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_IDS",
    "CSV_HEADER",
    "ConditionReport",
    "ConfigurationError",
    "ConstantAlpha",
    "ConstantsReport",
    "CustomAlpha",
    "DivergenceError",
    "ExperimentConfig",
    "ExperimentResult",
    "InsufficientDataError",
    "IpgConfig",
    "IpgObsError",
    "IpgObserver",
    "IpgState",
    "NewtonConfig",
    "NewtonObserver",
    "NumericalEvaluationError",
    "ObservabilityWindow",
    "RateFit",
    "Region",
    "RhoMeasurement",
    "RunTrace",
    "SingularJacobianError",
    "SystemModel",
    "TheoremSchedule",
    "TraceRecord",
    "Trajectory",
    "advance_window",
    "builtin_system",
    "check_theorem_conditions",
    "config_from_dict",
    "default_window_n",
    "estimate_constants",
    "fd_jacobian",
    "fit_linear_rate",
    "ipg_inner_step",
    "load_config",
    "measure_rho",
    "newton_inner_step",
    "propagate_estimate",
    "run_experiment",
    "run_ipg_observer",
    "run_newton_observer",
    "simulate",
    "step_size",
]
