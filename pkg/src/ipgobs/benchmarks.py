"""Built-in benchmark systems.

Each builder returns a SystemModel with analytic Jacobians.  All built-ins
are autonomous (m = 0), so the no-input code path is exercised end to end.
The docstrings state which regularity/positivity requirements each system
meets; ``indefinite_jacobian`` deliberately has a sign-indefinite window
Jacobian over any region containing (-1, 1) to exercise the shifted
preconditioner update.
"""

from __future__ import annotations

import numpy as np

from ._validation import reject_unknown_keys
from .errors import ConfigurationError
from .systems import SystemModel

BUILTIN_IDS = (
    "scalar_linear",
    "planar_linear",
    "planar_mild_nonlinear",
    "cubic_output",
    "indefinite_jacobian",
)


def _scalar_linear(a=0.5):
    """x' = a x, y = x; N = 1.  Contractive for |a| < 1; window Jacobian
    is the constant 1, so every positivity and Lipschitz requirement holds
    with room to spare."""
    return SystemModel(
        n=1,
        m=0,
        p=1,
        dynamics=lambda x, u: a * x,
        output=lambda x: x.copy(),
        dynamics_jacobian=lambda x, u: np.array([[a]]),
        output_jacobian=lambda x: np.array([[1.0]]),
        name=f"scalar_linear(a={a})",
    )


def _planar_two_step(a=0.9, epsilon=0.0, name=""):
    def dyn(x, u):
        return np.array([x[1], a * x[0] + epsilon * np.sin(x[0])])

    def dyn_jac(x, u):
        return np.array([[0.0, 1.0], [a + epsilon * np.cos(x[0]), 0.0]])

    return SystemModel(
        n=2,
        m=0,
        p=1,
        dynamics=dyn,
        output=lambda x: x[:1].copy(),
        dynamics_jacobian=dyn_jac,
        output_jacobian=lambda x: np.array([[1.0, 0.0]]),
        name=name,
    )


def _planar_linear(a=0.9):
    """x' = (x2, a x1), y = x1; N = 2.  The two-measurement stacked map is
    the identity, so its Jacobian is constantly I."""
    return _planar_two_step(a=a, epsilon=0.0, name=f"planar_linear(a={a})")


def _planar_mild_nonlinear(a=0.9, epsilon=0.05):
    """x' = (x2, a x1 + eps sin x1), y = x1; N = 2.  The nonlinearity sits
    one step beyond the window, so the stacked map is still the identity;
    only the dynamics (propagation and window advance) are nonlinear.
    Stable for a + eps < 1."""
    return _planar_two_step(
        a=a, epsilon=epsilon, name=f"planar_mild_nonlinear(a={a}, eps={epsilon})"
    )


def _cubic_output(a=0.8):
    """x' = a x, y = x + x^3; N = 1.  Window Jacobian 1 + 3 x^2 >= 1 is
    positive everywhere but genuinely state-dependent, so the curvature
    and inverse-Jacobian constants are non-trivial."""
    return SystemModel(
        n=1,
        m=0,
        p=1,
        dynamics=lambda x, u: a * x,
        output=lambda x: x + x**3,
        dynamics_jacobian=lambda x, u: np.array([[a]]),
        output_jacobian=lambda x: np.array([[1.0 + 3.0 * x[0] ** 2]]),
        name=f"cubic_output(a={a})",
    )


def _indefinite_jacobian(a=0.5, b=1.0):
    """x' = a x + b, y = x^3/3 - x; N = 1.  The window Jacobian x^2 - 1 is
    negative on (-1, 1), so the eigenvalue-positivity requirement fails on
    any region covering that interval and the plain preconditioner update
    expands there.  The trajectory itself settles at b/(1-a) (= 2 by
    default) where the Jacobian is positive, so the shifted update can
    still track it."""
    return SystemModel(
        n=1,
        m=0,
        p=1,
        dynamics=lambda x, u: a * x + b,
        output=lambda x: x**3 / 3.0 - x,
        dynamics_jacobian=lambda x, u: np.array([[a]]),
        output_jacobian=lambda x: np.array([[x[0] ** 2 - 1.0]]),
        name=f"indefinite_jacobian(a={a}, b={b})",
    )


_BUILDERS = {
    "scalar_linear": (_scalar_linear, {"a"}),
    "planar_linear": (_planar_linear, {"a"}),
    "planar_mild_nonlinear": (_planar_mild_nonlinear, {"a", "epsilon"}),
    "cubic_output": (_cubic_output, {"a"}),
    "indefinite_jacobian": (_indefinite_jacobian, {"a", "b"}),
}


def builtin_system(system_id, params=None):
    """Instantiate a built-in system by identifier with numeric parameters."""
    if system_id not in _BUILDERS:
        raise ConfigurationError(
            f"unknown system id {system_id!r}; valid ids: {', '.join(BUILTIN_IDS)}"
        )
    builder, allowed = _BUILDERS[system_id]
    params = dict(params or {})
    reject_unknown_keys(params, allowed, f"system {system_id!r} params")
    return builder(**{k: float(v) for k, v in params.items()})


def default_window_n(system):
    """Square window length implied by the dimensions (n = N p)."""
    if system.n % system.p != 0:
        raise ConfigurationError(
            f"state dimension {system.n} is not a multiple of output dimension {system.p}"
        )
    return system.n // system.p
