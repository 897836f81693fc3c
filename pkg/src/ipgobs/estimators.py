"""Scikit-learn style estimator wrappers.

The observers are sequence transformers: a (T, p) array of measurements
goes in, a (T - N + 1, n) array of state estimates comes out.  Parameters
live verbatim on the instance so ``get_params`` / ``set_params`` / ``clone``
compose with the usual tooling; all numerical work is delegated to the
functional core.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import ConfigurationError
from .ipg import ConstantAlpha, IpgConfig, run_ipg_observer
from .newton import NewtonConfig, run_newton_observer


def _as_measurement_rows(Y, p):
    arr = np.asarray(Y, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[1] != p:
        raise ConfigurationError(
            f"measurements must have shape (T, {p}), got {np.shape(Y)}"
        )
    return [arr[j] for j in range(arr.shape[0])]


def _as_input_rows(U, m):
    if U is None:
        return ()
    arr = np.asarray(U, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[1] != m:
        raise ConfigurationError(f"inputs must have shape (T-1, {m}), got {np.shape(U)}")
    return [arr[j] for j in range(arr.shape[0])]


class IpgObserver(TransformerMixin, BaseEstimator):
    """Preconditioned gradient-descent observer with a fit/transform API.

    Parameters mirror the functional config: ``d`` inner iterations per
    instant, ``alpha`` either a scalar (constant step size) or any object
    with an ``alpha(i)`` method, the gradient step ``delta_step``, the
    eigenvalue shift ``beta``, and the initial estimate/preconditioner
    (defaults: zero state, identity preconditioner).
    """

    def __init__(self, system=None, d=10, alpha=0.5, delta_step=1.0, beta=0.0,
                 w_init=None, K_init=None):
        self.system = system
        self.d = d
        self.alpha = alpha
        self.delta_step = delta_step
        self.beta = beta
        self.w_init = w_init
        self.K_init = K_init

    def _config(self):
        if self.system is None:
            raise ConfigurationError("IpgObserver needs a system")
        n = self.system.n
        alpha = self.alpha
        schedule = ConstantAlpha(float(alpha)) if np.isscalar(alpha) else alpha
        w0 = np.zeros(n) if self.w_init is None else np.asarray(self.w_init, dtype=float)
        k0 = np.eye(n) if self.K_init is None else np.asarray(self.K_init, dtype=float)
        return IpgConfig(
            d=self.d,
            alpha_schedule=schedule,
            w_init=w0,
            K_init=k0,
            delta_step=self.delta_step,
            beta=self.beta,
        )

    def fit(self, Y, U=None, truth=None):
        """Run the observer over the measurement sequence and keep the results."""
        config = self._config()
        measurements = _as_measurement_rows(Y, self.system.p)
        inputs = _as_input_rows(U, self.system.m) if self.system.m else ()
        estimates, trace = run_ipg_observer(
            self.system, measurements, inputs=inputs, config=config, truth=truth
        )
        self.estimates_ = np.vstack(estimates)
        self.trace_ = trace
        self.n_features_in_ = self.system.p
        return self

    def transform(self, Y, U=None):
        """Measurement sequence -> state-estimate sequence, shape (T-N+1, n)."""
        return self.fit(Y, U=U).estimates_

    def predict(self, Y, U=None):
        return self.transform(Y, U=U)


class NewtonObserver(TransformerMixin, BaseEstimator):
    """Newton-observer baseline with the same fit/transform surface."""

    def __init__(self, system=None, d=3, damping=1.0, w_init=None):
        self.system = system
        self.d = d
        self.damping = damping
        self.w_init = w_init

    def _config(self):
        if self.system is None:
            raise ConfigurationError("NewtonObserver needs a system")
        w0 = (
            np.zeros(self.system.n)
            if self.w_init is None
            else np.asarray(self.w_init, dtype=float)
        )
        return NewtonConfig(d=self.d, w_init=w0, damping=self.damping)

    def fit(self, Y, U=None, truth=None):
        config = self._config()
        measurements = _as_measurement_rows(Y, self.system.p)
        inputs = _as_input_rows(U, self.system.m) if self.system.m else ()
        estimates, trace = run_newton_observer(
            self.system, measurements, inputs=inputs, config=config, truth=truth
        )
        self.estimates_ = np.vstack(estimates)
        self.trace_ = trace
        self.n_features_in_ = self.system.p
        return self

    def transform(self, Y, U=None):
        return self.fit(Y, U=U).estimates_

    def predict(self, Y, U=None):
        return self.transform(Y, U=U)
