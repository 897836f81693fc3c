"""Discrete-time system models and reference-trajectory simulation.

A system is the pair of maps

    x_next = dynamics(x, u),    y = output(x),

with state dimension ``n``, input dimension ``m`` (0 for autonomous
systems, which are handled by the same code path with an empty input
vector), and output dimension ``p``.  Analytic Jacobians are optional;
``fd_jacobian`` is the central-difference oracle used both as a fallback
and to cross-check user-supplied derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._validation import as_vector, check_nonnegative_int, check_positive_int
from .errors import ConfigurationError, NumericalEvaluationError

_EMPTY = np.zeros(0)


@dataclass(frozen=True)
class SystemModel:
    """Immutable description of a discrete-time system.

    ``dynamics`` maps (state, input) to the next state and ``output`` maps a
    state to a measurement.  Both must be pure functions: evaluation is
    assumed side-effect free and safe to call concurrently.
    """

    n: int
    m: int
    p: int
    dynamics: Callable[[np.ndarray, np.ndarray], np.ndarray]
    output: Callable[[np.ndarray], np.ndarray]
    dynamics_jacobian: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    output_jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = ""

    def __post_init__(self):
        check_positive_int(self.n, "n")
        check_nonnegative_int(self.m, "m")
        check_positive_int(self.p, "p")

    def step(self, x, u=None):
        """Apply the dynamics once, validating dimensions."""
        x = as_vector(x, self.n, "state")
        u = _EMPTY if u is None and self.m == 0 else as_vector(u, self.m, "input")
        nxt = np.asarray(self.dynamics(x, u), dtype=float)
        return as_vector(nxt, self.n, "dynamics(x, u)")

    def measure(self, x):
        """Evaluate the output map, validating dimensions."""
        x = as_vector(x, self.n, "state")
        y = np.asarray(self.output(x), dtype=float)
        return as_vector(y, self.p, "output(x)")

    def step_jacobian(self, x, u=None):
        """n-by-n Jacobian of the dynamics w.r.t. the state (analytic or FD)."""
        x = as_vector(x, self.n, "state")
        u = _EMPTY if u is None and self.m == 0 else as_vector(u, self.m, "input")
        if self.dynamics_jacobian is not None:
            jac = np.asarray(self.dynamics_jacobian(x, u), dtype=float)
        else:
            jac = fd_jacobian(lambda z: self.step(z, u), x, _fd_step(x))
        if jac.shape != (self.n, self.n):
            raise ConfigurationError(
                f"dynamics_jacobian must return shape {(self.n, self.n)}, got {jac.shape}"
            )
        return jac

    def output_jacobian_at(self, x):
        """p-by-n Jacobian of the output map (analytic or FD)."""
        x = as_vector(x, self.n, "state")
        if self.output_jacobian is not None:
            jac = np.asarray(self.output_jacobian(x), dtype=float)
        else:
            jac = fd_jacobian(self.measure, x, _fd_step(x))
        if jac.shape != (self.p, self.n):
            raise ConfigurationError(
                f"output_jacobian must return shape {(self.p, self.n)}, got {jac.shape}"
            )
        return jac


@dataclass(frozen=True)
class Trajectory:
    """Index-aligned reference run: states[k+1] = F(states[k], inputs[k])."""

    states: tuple
    inputs: tuple
    outputs: tuple = field(default=())

    def __len__(self):
        return len(self.states)


def _fd_step(x):
    return 1e-5 * (1.0 + float(np.linalg.norm(x, np.inf))) if len(x) else 1e-5


def fd_jacobian(f, x, h):
    """Central-difference Jacobian of a vector function.

    Column ``j`` is ``(f(x + h e_j) - f(x - h e_j)) / (2 h)``.  Non-finite
    function values are rejected rather than silently propagated.
    """
    if h <= 0:
        raise ConfigurationError(f"finite-difference step must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    scalar_input = x.ndim == 0
    x = np.atleast_1d(x)
    cols = []
    for j in range(x.shape[0]):
        e = np.zeros_like(x)
        e[j] = h
        fp = np.atleast_1d(np.asarray(f(x[j] + h if scalar_input else x + e), dtype=float))
        fm = np.atleast_1d(np.asarray(f(x[j] - h if scalar_input else x - e), dtype=float))
        if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
            raise NumericalEvaluationError(
                f"function returned non-finite values near x={x}"
            )
        cols.append((fp - fm) / (2.0 * h))
    return np.column_stack(cols)


def simulate(system, x0, inputs=(), steps=0):
    """Roll the system forward ``steps`` times from ``x0``.

    Returns a Trajectory of ``steps + 1`` states whose outputs are produced
    by the exact same arithmetic path as the states, so stacked-measurement
    identities hold bitwise downstream.
    """
    steps = check_nonnegative_int(steps, "steps")
    x0 = as_vector(x0, system.n, "x0")
    if system.m == 0:
        used = [None] * steps
    else:
        if len(inputs) < steps:
            raise ConfigurationError(
                f"need at least {steps} inputs for {steps} steps, got {len(inputs)}"
            )
        used = [as_vector(u, system.m, f"inputs[{j}]") for j, u in enumerate(inputs[:steps])]

    states = [x0]
    for u in used:
        states.append(system.step(states[-1], u))
    outputs = [system.measure(x) for x in states]
    for arr in states + outputs:
        arr.setflags(write=False)
    return Trajectory(
        states=tuple(states),
        inputs=tuple(u for u in used if u is not None),
        outputs=tuple(outputs),
    )
