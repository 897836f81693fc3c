"""Numerical estimation of the regularity constants behind the observer
convergence guarantee.

Everything here is a sampled *lower bound* of a supremum (or upper bound of
an infimum for the smallest eigenvalue): sampling can only ever see values
the true extremum dominates.  The sample set is constructed so that raising
the budget never shrinks it — random draws are prefix-stable streams of a
seeded PCG64 generator and grids refine dyadically — which makes the
estimates monotone in the budget for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._validation import check_positive_int
from .errors import ConfigurationError, InsufficientDataError
from .observability import ObservabilityWindow

BETA_MARGIN = 0.1
_SINGULAR_RTOL = 1e-12
_NEAR_DIAG_SCALE = 1e-3


@dataclass(frozen=True)
class Region:
    """Axis-aligned box with a sampling budget and seed."""

    lower: tuple
    upper: tuple
    samples: int = 512
    seed: int = 0

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float).reshape(-1)
        hi = np.asarray(self.upper, dtype=float).reshape(-1)
        if lo.shape != hi.shape or lo.size == 0:
            raise ConfigurationError("region bounds must be equal-length vectors")
        if np.any(lo > hi):
            raise ConfigurationError("region requires lower <= upper componentwise")
        check_positive_int(self.samples, "samples")
        if self.samples < 2:
            raise ConfigurationError("samples must be >= 2")
        object.__setattr__(self, "lower", tuple(lo))
        object.__setattr__(self, "upper", tuple(hi))

    @property
    def dim(self):
        return len(self.lower)

    def _rng(self, stream):
        return np.random.default_rng([int(self.seed), stream])

    def grid_points(self):
        """Dyadic grid (2**k + 1 points per axis) so larger budgets refine
        rather than replace the grid."""
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        per_dim = max(2.0, self.samples ** (1.0 / self.dim))
        k = max(0, int(math.floor(math.log2(per_dim - 1)))) if per_dim > 2 else 0
        g = 2**k + 1
        axes = [np.linspace(lo[j], hi[j], g) for j in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        return pts, g

    def random_points(self):
        rng = self._rng(0)
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        return lo + rng.random((self.samples, self.dim)) * (hi - lo)

    def random_pairs(self):
        rng = self._rng(1)
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        raw = lo + rng.random((self.samples, 2, self.dim)) * (hi - lo)
        return raw[:, 0, :], raw[:, 1, :]

    def near_diagonal_pairs(self):
        """Pairs (x, x + delta*u) probing local slopes; delta is fixed at
        1e-3 of the box diagonal so the pair set is budget-independent in
        scale."""
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        diam = float(np.linalg.norm(hi - lo))
        if diam == 0.0:
            return np.zeros((0, self.dim)), np.zeros((0, self.dim))
        x = lo + self._rng(2).random((self.samples, self.dim)) * (hi - lo)
        direction = self._rng(3).standard_normal((self.samples, self.dim))
        norms = np.linalg.norm(direction, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        y = np.clip(x + _NEAR_DIAG_SCALE * diam * direction / norms, lo, hi)
        return x, y

    def grid_neighbor_pairs(self):
        pts, g = self.grid_points()
        shape = (g,) * self.dim
        idx = np.arange(pts.shape[0]).reshape(shape)
        pairs = []
        for axis in range(self.dim):
            a = np.take(idx, range(0, g - 1), axis=axis).ravel()
            b = np.take(idx, range(1, g), axis=axis).ravel()
            pairs.append((pts[a], pts[b]))
        xs = np.concatenate([p[0] for p in pairs], axis=0)
        ys = np.concatenate([p[1] for p in pairs], axis=0)
        return xs, ys


@dataclass(frozen=True)
class ConstantsReport:
    """Sampled regularity constants over a region (lower bounds of suprema)."""

    L: float
    l: float  # noqa: E741 - wire-format symbol
    gamma: float
    Lambda: float
    lambda_min: float
    eta: float
    L2: float
    C_seq: tuple
    method: str = "sampled lower bounds"
    beta_required: float = 0.0
    singular_samples: int = 0
    jacobian_invertible: bool = True
    eigenvalues_complex: bool = False
    window_n: int = 1
    sample_count: int = 0

    def to_json_dict(self):
        return {
            "L": self.L,
            "l": self.l,
            "gamma": self.gamma,
            "Lambda": self.Lambda,
            "lambda_min": self.lambda_min,
            "eta": self.eta,
            "L2": self.L2,
            "C_seq": list(self.C_seq),
            "method": self.method,
            "beta_required": self.beta_required,
            "singular_samples": self.singular_samples,
            "jacobian_invertible": self.jacobian_invertible,
            "eigenvalues_complex": self.eigenvalues_complex,
            "window_n": self.window_n,
            "sample_count": self.sample_count,
        }


def estimate_constants(system, window_n, region, inputs=None, trajectory=None):
    """Sample Lipschitz quotients and Jacobian spectra over a region.

    ``inputs`` fixes the window's input sequence (required when the system
    is driven); the dynamics constants then take the worst case over those
    inputs.  ``trajectory`` supplies the consecutive-state distances used
    by the instant-indexed audit inequalities.
    """
    if region.dim != system.n:
        raise ConfigurationError(
            f"region dimension {region.dim} does not match state dimension {system.n}"
        )
    if system.m > 0 and not inputs:
        raise ConfigurationError("driven systems need a window input sequence")
    window = ObservabilityWindow(
        system, window_n, tuple(inputs) if system.m > 0 else ()
    )
    step_inputs = list(window.inputs) if system.m > 0 else [None]

    grid_pts, _ = region.grid_points()
    points = np.concatenate([grid_pts, region.random_points()], axis=0)

    # spectra, inverse norms, and the shifted-step quantities at single points
    lam_max = -math.inf
    lam_min = math.inf
    eta = 0.0
    singular = 0
    complex_seen = False
    inv_cache = {}

    def inverse_at(x):
        key = x.tobytes()
        if key not in inv_cache:
            jac = window.jacobian(x)
            smin = np.linalg.svd(jac, compute_uv=False)[-1]
            if smin < _SINGULAR_RTOL * max(1.0, np.linalg.norm(jac, 2)):
                inv_cache[key] = None
            else:
                inv_cache[key] = np.linalg.inv(jac)
        return inv_cache[key]

    for x in points:
        jac = window.jacobian(x)
        eig = np.linalg.eigvals(jac)
        if np.any(np.abs(eig.imag) > 1e-9 * (1.0 + np.abs(eig))):
            complex_seen = True
        lam_max = max(lam_max, float(np.max(eig.real)))
        lam_min = min(lam_min, float(np.min(eig.real)))
        if inverse_at(x) is None:
            singular += 1
        for u in step_inputs:
            fx = system.step(x, u)
            jac_f = window.jacobian(fx)
            smin = np.linalg.svd(jac_f, compute_uv=False)[-1]
            if smin < _SINGULAR_RTOL * max(1.0, np.linalg.norm(jac_f, 2)):
                singular += 1
            else:
                eta = max(eta, 1.0 / float(smin))

    # pairwise Lipschitz quotients
    L = 0.0
    l_h = 0.0
    gamma = 0.0
    L2 = 0.0
    pair_sets = [region.random_pairs(), region.near_diagonal_pairs(), region.grid_neighbor_pairs()]
    for xs, ys in pair_sets:
        for x, y in zip(xs, ys):
            dist = float(np.linalg.norm(x - y))
            if dist == 0.0:
                continue
            for u in step_inputs:
                L = max(L, float(np.linalg.norm(system.step(x, u) - system.step(y, u))) / dist)
            l_h = max(l_h, float(np.linalg.norm(window.evaluate(x) - window.evaluate(y))) / dist)
            jx = window.jacobian(x)
            jy = window.jacobian(y)
            gamma = max(gamma, float(np.linalg.norm(jx - jy, 2)) / dist)
            ix = inverse_at(np.asarray(x))
            iy = inverse_at(np.asarray(y))
            if ix is not None and iy is not None:
                L2 = max(L2, float(np.linalg.norm(ix - iy, 2)) / dist)

    c_seq = ()
    if trajectory is not None and len(trajectory.states) >= 2:
        states = trajectory.states
        c_seq = tuple(
            float(np.linalg.norm(states[j] - states[j + 1]))
            for j in range(len(states) - 1)
        )

    beta_required = (max(0.0, -lam_min) + BETA_MARGIN) if lam_min <= 0 else 0.0
    return ConstantsReport(
        L=L,
        l=l_h,
        gamma=gamma,
        Lambda=lam_max,
        lambda_min=lam_min,
        eta=eta,
        L2=L2,
        C_seq=c_seq,
        beta_required=beta_required,
        singular_samples=singular,
        jacobian_invertible=singular == 0,
        eigenvalues_complex=complex_seen,
        window_n=window_n,
        sample_count=int(points.shape[0]),
    )


@dataclass(frozen=True)
class RhoMeasurement:
    """Measured contraction suprema of a completed run."""

    rho_N: float
    rho: float
    contraction_ok: bool  # rho < 1

    def to_json_dict(self):
        return {"rho_N": self.rho_N, "rho": self.rho, "contraction_ok": self.contraction_ok}


def measure_rho(trace):
    """Suprema of |I - alpha*(H_x + beta I)| over the recorded inner steps.

    ``rho_N`` restricts to the first sampling instant; ``rho`` ranges over
    the whole run.
    """
    triples = trace.contractions()
    if not triples:
        raise InsufficientDataError("trace holds no inner-iteration contraction data")
    first_k = min(t[0] for t in triples)
    rho_n = max(v for k, _, v in triples if k == first_k)
    rho = max(v for _, _, v in triples)
    return RhoMeasurement(rho_N=rho_n, rho=rho, contraction_ok=rho < 1.0)
