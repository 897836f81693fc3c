"""Stacked-measurement window: the map from a past state to N outputs.

For a window of length N anchored at state x, block j of ``evaluate``
is the output after j applications of the input-indexed dynamics:

    [ h(x), h(F_{u0}(x)), ..., h(F_{u_{N-2}} o ... o F_{u0}(x)) ]

with measurements stored oldest-first and the N-1 window inputs stored
oldest-first.  Only the square case n = N * p is supported; the window
Jacobian is then n-by-n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import as_vector
from .errors import ConfigurationError
from .systems import fd_jacobian, _fd_step


@dataclass(frozen=True)
class ObservabilityWindow:
    """Immutable N-measurement stacked map for one sampling window."""

    system: object
    window_n: int
    inputs: tuple = ()

    def __post_init__(self):
        sys = self.system
        if self.window_n < 1:
            raise ConfigurationError(f"window_n must be >= 1, got {self.window_n}")
        if sys.n != self.window_n * sys.p:
            raise ConfigurationError(
                "unsupported: non-square observability map "
                f"(n={sys.n}, N={self.window_n}, p={sys.p}; need n = N*p)"
            )
        inputs = tuple(
            as_vector(u, sys.m, f"inputs[{j}]") for j, u in enumerate(self.inputs)
        )
        if sys.m > 0 and len(inputs) != self.window_n - 1:
            raise ConfigurationError(
                f"window needs {self.window_n - 1} inputs, got {len(inputs)}"
            )
        if sys.m == 0 and len(inputs) != 0:
            raise ConfigurationError("autonomous system takes an empty input window")
        object.__setattr__(self, "inputs", inputs)

    def _input_at(self, j):
        return self.inputs[j] if self.system.m > 0 else None

    def evaluate(self, x):
        """Stacked outputs (length N*p) generated from anchor state ``x``."""
        sys = self.system
        z = as_vector(x, sys.n, "x")
        blocks = [sys.measure(z)]
        for j in range(self.window_n - 1):
            z = sys.step(z, self._input_at(j))
            blocks.append(sys.measure(z))
        return np.concatenate(blocks)

    def jacobian(self, x):
        """n-by-n Jacobian of ``evaluate`` at ``x``.

        Chain rule over analytic model Jacobians when they are available;
        otherwise a central finite difference of ``evaluate`` with step
        1e-5 * (1 + |x|_inf).
        """
        sys = self.system
        x = as_vector(x, sys.n, "x")
        analytic = sys.output_jacobian is not None and (
            self.window_n == 1 or sys.dynamics_jacobian is not None
        )
        if not analytic:
            return fd_jacobian(self.evaluate, x, _fd_step(x))
        z = x
        chain = np.eye(sys.n)
        blocks = [sys.output_jacobian_at(z) @ chain]
        for j in range(self.window_n - 1):
            chain = sys.step_jacobian(z, self._input_at(j)) @ chain
            z = sys.step(z, self._input_at(j))
            blocks.append(sys.output_jacobian_at(z) @ chain)
        return np.vstack(blocks)

    def propagate(self, w):
        """Apply all N-1 window inputs: maps the anchor estimate to the
        newest-instant estimate.  Identity for N = 1."""
        z = as_vector(w, self.system.n, "w")
        for j in range(self.window_n - 1):
            z = self.system.step(z, self._input_at(j))
        return z

    def oldest_input(self):
        """Oldest window input, or None for autonomous / single-measurement windows."""
        return self.inputs[0] if (self.system.m > 0 and self.window_n > 1) else None
