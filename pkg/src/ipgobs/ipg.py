"""Iteratively preconditioned gradient-descent observer.

At each sampling instant the observer holds an estimate ``w`` of the
oldest state in the measurement window and a preconditioner ``K`` that is
iteratively driven toward the inverse window Jacobian.  One inner
iteration applies the coupled pair of updates

    K' = K - alpha * ((H_x(w) + beta*I) K - I)
    w' = w - delta * K * (H(w) - Y)

where *both* right-hand sides use the pre-update pair (K, w): the w-update
deliberately uses the stale preconditioner of the same iteration.  After
``d`` inner iterations the current-state estimate is obtained by pushing w
through the window dynamics, and the next instant starts from the
one-step-propagated w with K carried over unchanged.

``beta`` shifts only the preconditioner target, from the inverse Jacobian
to the inverse of (H_x + beta*I); the w-update is left untouched.  With
beta = 0 this is the plain method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

import numpy as np

from ._validation import as_matrix, as_vector, check_positive_int
from .errors import ConfigurationError, DivergenceError
from .observability import ObservabilityWindow
from .trace import SUMMARY_I, RunTrace, TraceRecord

W_NORM_LIMIT = 1e12


# ---------------------------------------------------------------------------
# step-size policies


@dataclass(frozen=True)
class ConstantAlpha:
    """Fixed step size for every inner iteration."""

    value: float

    def __post_init__(self):
        if not (self.value > 0 and math.isfinite(self.value)):
            raise ConfigurationError(f"alpha must be positive, got {self.value}")

    def alpha(self, i):
        return self.value


@dataclass(frozen=True)
class TheoremSchedule:
    """Iteration-indexed step-size bound realized with a 0.99 safety factor.

    Produces ``0.99 * min(1/Lambda, min(varrho, D2) * mu**i * (1 - mu*rho)
    / (2*l*(1 - (mu*rho)**(i+1))))``.  The multiplicative 0.99 turns the
    strict inequality the schedule must satisfy into a concrete, testable
    margin.  ``rho`` and ``mu`` are design inputs (e.g. estimated over a
    region and re-checked after a run); see the audit workflow in the
    README.
    """

    Lambda: float
    l: float  # noqa: E741 - established symbol in the report wire format
    rho: float
    mu: float
    varrho: float
    D2: float

    def __post_init__(self):
        checks = [
            (self.Lambda > 0, f"Lambda must be positive, got {self.Lambda}"),
            (self.l > 0, f"l must be positive, got {self.l}"),
            (0 < self.rho < 1, f"rho must lie in (0, 1), got {self.rho}"),
            (self.mu > 1, f"mu must exceed 1, got {self.mu}"),
            (self.mu * self.rho < 1, f"mu*rho must be < 1, got {self.mu * self.rho}"),
            (self.varrho > 0, f"varrho must be positive, got {self.varrho}"),
            (
                self.varrho < 1 - self.rho,
                f"varrho must be < 1 - rho = {1 - self.rho}, got {self.varrho}",
            ),
            (self.D2 > 0, f"D2 must be positive, got {self.D2}"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigurationError(f"TheoremSchedule: {msg}")

    def bound(self, i):
        """The strict upper bound the step size must stay below at iteration i."""
        mr = self.mu * self.rho
        second = (
            min(self.varrho, self.D2)
            * self.mu**i
            * (1 - mr)
            / (2 * self.l * (1 - mr ** (i + 1)))
        )
        return min(1.0 / self.Lambda, second)

    def alpha(self, i):
        return 0.99 * self.bound(i)


@dataclass(frozen=True)
class CustomAlpha:
    """Explicit per-iteration step sizes."""

    values: tuple

    def __init__(self, values):
        vals = tuple(float(v) for v in values)
        if not vals or any(not (v > 0 and math.isfinite(v)) for v in vals):
            raise ConfigurationError("CustomAlpha needs a non-empty list of positive values")
        object.__setattr__(self, "values", vals)

    def alpha(self, i):
        if i >= len(self.values):
            raise ConfigurationError(
                f"CustomAlpha has {len(self.values)} entries, requested index {i}"
            )
        return self.values[i]


AlphaSchedule = Union[ConstantAlpha, TheoremSchedule, CustomAlpha]


def step_size(i, policy):
    """Step size produced by a policy at inner iteration ``i``."""
    a = policy.alpha(i)
    if not (a > 0 and math.isfinite(a)):
        raise ConfigurationError(f"schedule produced a non-positive step size {a} at i={i}")
    return a


# ---------------------------------------------------------------------------
# configuration and state


@dataclass(frozen=True)
class IpgConfig:
    """Observer parameters for one run."""

    d: int
    alpha_schedule: AlphaSchedule
    w_init: Sequence[float]
    K_init: Sequence[Sequence[float]]
    delta_step: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        check_positive_int(self.d, "d")
        if self.beta < 0:
            raise ConfigurationError(f"beta must be >= 0, got {self.beta}")
        if not math.isfinite(self.delta_step):
            raise ConfigurationError("delta_step must be finite")


@dataclass(frozen=True)
class IpgState:
    """Value-type observer state at instant ``k``, inner iteration ``i``."""

    w: np.ndarray
    K: np.ndarray
    k: int
    i: int
    x_hat: Optional[np.ndarray] = None


# ---------------------------------------------------------------------------
# single-step operations


def ipg_inner_step(state, Y, window, alpha, delta_step=1.0, beta=0.0):
    """One coupled preconditioner/estimate update from the pre-update pair."""
    jac = window.jacobian(state.w)
    return _inner_step_with_jacobian(state, Y, window, jac, alpha, delta_step, beta)


def _inner_step_with_jacobian(state, Y, window, jac, alpha, delta_step, beta):
    n = window.system.n
    Y = as_vector(Y, n, "Y")
    shifted = jac + beta * np.eye(n) if beta else jac
    residual = window.evaluate(state.w) - Y
    K_next = state.K - alpha * (shifted @ state.K - np.eye(n))
    w_next = state.w - delta_step * (state.K @ residual)
    if not (np.all(np.isfinite(K_next)) and np.all(np.isfinite(w_next))):
        raise DivergenceError(
            f"non-finite observer state at instant k={state.k}, iteration i={state.i}",
            k=state.k,
            i=state.i,
        )
    if np.linalg.norm(w_next) > W_NORM_LIMIT:
        raise DivergenceError(
            f"estimate norm exceeded {W_NORM_LIMIT:g} at instant k={state.k}, "
            f"iteration i={state.i}",
            k=state.k,
            i=state.i,
        )
    return replace(state, w=w_next, K=K_next, i=state.i + 1)


def propagate_estimate(w_d, window):
    """Current-state estimate: push w through all N-1 window inputs."""
    return window.propagate(w_d)


def advance_window(state, window, next_input=None):
    """Initialize the next instant: propagate w one step with the oldest
    window input (or ``next_input`` for single-measurement windows on
    driven systems); K is carried over unchanged."""
    u = window.oldest_input() if next_input is None else next_input
    w_next = window.system.step(state.w, u)
    return IpgState(w=w_next, K=state.K, k=state.k + 1, i=0)


# ---------------------------------------------------------------------------
# full run


def _spectral(mat):
    return float(np.linalg.norm(mat, 2))


def iter_windows(system, measurements, inputs):
    """Yield (k, window, Y, advance_input) for every full window.

    Instants are 0-based measurement indices; the first full window sits at
    k = N - 1 and anchors at state index k - N + 1.  No estimates exist for
    earlier instants.
    """
    p = system.p
    if system.n % p != 0:
        raise ConfigurationError(
            f"state dimension {system.n} is not a multiple of output dimension {p}"
        )
    N = system.n // p
    measurements = [as_vector(y, p, f"measurements[{j}]") for j, y in enumerate(measurements)]
    if len(measurements) < N:
        raise ConfigurationError(
            f"need at least {N} measurements for a window, got {len(measurements)}"
        )
    if system.m > 0:
        inputs = [as_vector(u, system.m, f"inputs[{j}]") for j, u in enumerate(inputs)]
        if len(inputs) < len(measurements) - 1:
            raise ConfigurationError(
                f"need {len(measurements) - 1} inputs for {len(measurements)} "
                f"measurements, got {len(inputs)}"
            )
    for k in range(N - 1, len(measurements)):
        window_inputs = tuple(inputs[k - N + 1 : k]) if system.m > 0 else ()
        window = ObservabilityWindow(system, N, window_inputs)
        Y = np.concatenate(measurements[k - N + 1 : k + 1])
        if system.m > 0 and N == 1 and k < len(measurements) - 1:
            advance_input = inputs[k]
        else:
            advance_input = None
        yield k, window, Y, advance_input


def run_ipg_observer(system, measurements, inputs=(), config=None, truth=None):
    """Run the observer over a measurement sequence.

    Returns ``(estimates, trace)`` where ``estimates[j]`` is the estimate of
    the state at instant ``N - 1 + j``.  Truth columns in the trace are
    filled only when a reference Trajectory is supplied.  On divergence the
    raised error carries the partial trace and estimates.
    """
    if config is None:
        raise ConfigurationError("config is required")
    N = system.n // system.p
    w = as_vector(config.w_init, system.n, "w_init")
    K = as_matrix(config.K_init, (system.n, system.n), "K_init")
    trace = RunTrace()
    estimates = []
    eye = np.eye(system.n)
    last_k = len(measurements) - 1

    try:
        for k, window, Y, advance_input in iter_windows(system, measurements, inputs):
            x_ref = truth.states[k - N + 1] if truth is not None else None
            inv_ref = None
            if x_ref is not None:
                inv_ref = np.linalg.inv(window.jacobian(x_ref))
            state = IpgState(w=w, K=K, k=k, i=0)
            for i in range(config.d):
                alpha = step_size(i, config.alpha_schedule)
                jac = window.jacobian(state.w)
                if not np.all(np.isfinite(jac)):
                    raise DivergenceError(
                        f"non-finite window Jacobian at instant k={k}, iteration i={i}",
                        k=k,
                        i=i,
                    )
                shifted = jac + config.beta * eye if config.beta else jac
                trace.append(
                    TraceRecord(
                        k=k,
                        i=i,
                        alpha=alpha,
                        err_w=_err(state.w, x_ref),
                        precond_residual=_spectral(jac @ state.K - eye),
                        err_K=_err_mat(state.K, inv_ref),
                        contraction=_spectral(eye - alpha * shifted),
                    )
                )
                state = _inner_step_with_jacobian(
                    state, Y, window, jac, alpha, config.delta_step, config.beta
                )
            x_hat = propagate_estimate(state.w, window)
            state = replace(state, x_hat=x_hat)
            jac_d = window.jacobian(state.w)
            trace.append(
                TraceRecord(
                    k=k,
                    i=SUMMARY_I,
                    err_w=_err(state.w, x_ref),
                    err_xhat=_err(x_hat, truth.states[k] if truth is not None else None),
                    precond_residual=_spectral(jac_d @ state.K - eye),
                    err_K=_err_mat(state.K, inv_ref),
                )
            )
            estimates.append(x_hat)
            if k < last_k:
                nxt = advance_window(state, window, advance_input)
                w, K = nxt.w, nxt.K
    except DivergenceError as err:
        err.partial_trace = trace
        err.partial_estimates = estimates
        raise
    return estimates, trace


def _err(vec, ref):
    return None if ref is None else float(np.linalg.norm(vec - ref))


def _err_mat(mat, ref):
    return None if ref is None else _spectral(mat - ref)
