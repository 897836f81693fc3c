"""Newton-type observer baseline over the same measurement window.

Each inner iteration solves the linearized window equation

    w' = w - damping * H_x(w)^{-1} (H(w) - Y)

via a linear solve (never an explicit inverse), with a condition-number
gate. The windowing skeleton, estimate propagation, and window advance are
shared with the preconditioned observer so side-by-side runs differ only
in the inner step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from ._validation import as_vector, check_positive_int
from .errors import ConfigurationError, DivergenceError, SingularJacobianError
from .ipg import IpgState, advance_window, iter_windows, propagate_estimate, W_NORM_LIMIT
from .trace import SUMMARY_I, RunTrace, TraceRecord

COND_LIMIT = 1e12


@dataclass(frozen=True)
class NewtonConfig:
    """Newton observer parameters for one run."""

    d: int
    w_init: Sequence[float]
    damping: float = 1.0

    def __post_init__(self):
        check_positive_int(self.d, "d")
        if not (0 < self.damping <= 1):
            raise ConfigurationError(f"damping must lie in (0, 1], got {self.damping}")


def newton_inner_step(w, Y, window, damping=1.0):
    """One damped Newton update of the window-anchor estimate."""
    n = window.system.n
    w = as_vector(w, n, "w")
    Y = as_vector(Y, n, "Y")
    jac = window.jacobian(w)
    cond = np.linalg.cond(jac)
    if not math.isfinite(cond) or cond > COND_LIMIT:
        raise SingularJacobianError(
            f"window Jacobian is singular or ill-conditioned (cond={cond:.3e}) at w={w}",
            point=w,
        )
    step = np.linalg.solve(jac, window.evaluate(w) - Y)
    return w - damping * step


def run_newton_observer(system, measurements, inputs=(), config=None, truth=None):
    """Run the Newton observer; same contract as the preconditioned run.

    Trace rows fill only the error columns: the baseline keeps no
    preconditioner, so alpha / precond_residual / err_K stay empty.
    """
    if config is None:
        raise ConfigurationError("config is required")
    N = system.n // system.p
    w = as_vector(config.w_init, system.n, "w_init")
    trace = RunTrace()
    estimates = []
    last_k = len(measurements) - 1

    try:
        for k, window, Y, advance_input in iter_windows(system, measurements, inputs):
            x_ref = truth.states[k - N + 1] if truth is not None else None
            for i in range(config.d):
                trace.append(TraceRecord(k=k, i=i, err_w=_err(w, x_ref)))
                w = newton_inner_step(w, Y, window, config.damping)
                if not np.all(np.isfinite(w)) or np.linalg.norm(w) > W_NORM_LIMIT:
                    raise DivergenceError(
                        f"Newton estimate diverged at instant k={k}, iteration i={i}",
                        k=k,
                        i=i,
                    )
            x_hat = propagate_estimate(w, window)
            trace.append(
                TraceRecord(
                    k=k,
                    i=SUMMARY_I,
                    err_w=_err(w, x_ref),
                    err_xhat=_err(x_hat, truth.states[k] if truth is not None else None),
                )
            )
            estimates.append(x_hat)
            if k < last_k:
                state = IpgState(w=w, K=np.eye(system.n), k=k, i=config.d)
                w = advance_window(state, window, advance_input).w
    except DivergenceError as err:
        err.partial_trace = trace
        err.partial_estimates = estimates
        raise
    return estimates, trace


def _err(vec, ref):
    return None if ref is None else float(np.linalg.norm(vec - ref))
