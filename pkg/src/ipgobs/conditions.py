"""Audit of the sufficient conditions for local linear convergence.

The checker is pure arithmetic: it instantiates each inequality with the
supplied constants and records left-hand side, right-hand side, and
verdict, so every verdict is recomputable from the stored numbers.
Precondition violations become failed entries rather than exceptions — a
report is always produced.

``rho`` / ``rho_N`` here are the contraction-rate values the user designed
the step-size schedule around (or measured on a previous run); the
self-measured suprema of a run live in RhoMeasurement and can be fed back
in a second pass.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

from .ipg import step_size


@dataclass(frozen=True)
class ConditionEntry:
    name: str
    holds: bool
    lhs: Optional[float]
    rhs: Optional[float]
    inequality: str
    auditable: bool = True
    detail: str = ""

    def to_json_dict(self):
        return {
            "holds": self.holds,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "inequality": self.inequality,
            "auditable": self.auditable,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class ConditionReport:
    """Verdicts for conditions (i)-(v) plus the derived quantities."""

    entries: tuple
    preconditions: tuple
    rho: float
    rho_N: float
    mu: float
    varrho: float
    D2: float
    delta: Optional[float]
    delta_bar: Optional[float]
    d: int
    d_min: float
    d_min_int: int
    mu_upper: float
    D1_bound: float

    def entry(self, name):
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    @property
    def all_pass(self):
        return all(e.holds for e in self.preconditions) and all(
            e.holds for e in self.entries if e.auditable
        )

    @property
    def fully_auditable(self):
        return all(e.auditable for e in self.entries)

    def to_json_dict(self):
        return {
            "rho": self.rho,
            "rho_N": self.rho_N,
            "mu": self.mu,
            "varrho": self.varrho,
            "D2": self.D2,
            "delta": self.delta,
            "delta_bar": self.delta_bar,
            "d": self.d,
            "d_min": self.d_min,
            "d_min_int": self.d_min_int,
            "mu_upper": self.mu_upper,
            "D1_bound": self.D1_bound,
            "preconditions": {e.name: e.to_json_dict() for e in self.preconditions},
            "conditions": {e.name: e.to_json_dict() for e in self.entries},
            "all_pass": self.all_pass,
        }

    def to_json(self):
        return json.dumps(self.to_json_dict(), indent=2)


def _log_base(value, base):
    if value <= 0:
        return -math.inf
    return math.log(value) / math.log(base)


def check_theorem_conditions(
    constants,
    config,
    *,
    rho,
    rho_N,
    delta,
    delta_bar,
    mu,
    varrho,
    D2,
    window_n,
    k_init_error=None,
    c_seq=None,
):
    """Evaluate conditions (i)-(v) for a configured run.

    ``delta`` and ``delta_bar`` are the anchor-estimate errors before and
    after the first instant's inner iterations (delta_bar is produced by a
    run; the audit workflow is two-pass).  ``k_init_error`` is
    |K_init - H_x(x_first)^{-1}|; condition (ii) is marked unauditable when
    it is unavailable (no ground truth).
    """
    L = constants.L
    l_h = constants.l
    gamma = constants.gamma
    Lambda = constants.Lambda
    eta = constants.eta
    L2 = constants.L2
    c_seq = tuple(constants.C_seq) if c_seq is None else tuple(c_seq)
    d = int(config.d)

    pre = []

    def precondition(name, holds, detail):
        pre.append(
            ConditionEntry(
                name=name, holds=bool(holds), lhs=None, rhs=None,
                inequality=detail, auditable=True,
            )
        )

    finite = all(
        math.isfinite(v) for v in (L, l_h, gamma, Lambda, eta, L2, rho, rho_N, mu, varrho, D2)
    )
    precondition("constants_finite", finite, "all constants finite")
    precondition(
        "mu_range",
        1.0 < mu < (1.0 / rho if rho > 0 else math.inf),
        f"1 < mu < 1/rho: 1 < {mu} < {1.0 / rho if rho > 0 else math.inf}",
    )
    precondition(
        "varrho_range", 0 < varrho < 1.0 - rho, f"0 < varrho < 1 - rho = {1.0 - rho}"
    )
    if delta is not None and delta_bar is not None and L > 0:
        precondition(
            "contraction_over_first_instant",
            delta_bar < delta / L,
            f"delta_bar < delta / L: {delta_bar} < {delta / L}",
        )

    entries = []

    # (i) enough inner iterations per sampling instant
    d_min = max(1.0, 1.0 + _log_base(L, mu), (window_n - 1) * _log_base(L, mu))
    d_min_int = max(1, math.ceil(d_min - 1e-12))
    entries.append(
        ConditionEntry(
            name="i",
            holds=d >= d_min,
            lhs=float(d),
            rhs=d_min,
            inequality="d >= max{1, 1 + log_mu(L), (N-1) log_mu(L)}",
            detail=f"integer threshold {d_min_int}",
        )
    )

    # (ii) initialization inside the region of attraction
    if k_init_error is None or delta is None:
        entries.append(
            ConditionEntry(
                name="ii",
                holds=False,
                lhs=None,
                rhs=1.0 / (2.0 * mu),
                inequality="eta*gamma*delta/2 + l*|K0 - Hx(x_first)^-1| <= 1/(2 mu)",
                auditable=False,
                detail="unauditable: requires ground truth for x_first",
            )
        )
    else:
        lhs_ii = eta * gamma * delta / 2.0 + l_h * k_init_error
        rhs_ii = 1.0 / (2.0 * mu)
        entries.append(
            ConditionEntry(
                name="ii",
                holds=lhs_ii <= rhs_ii,
                lhs=lhs_ii,
                rhs=rhs_ii,
                inequality="eta*gamma*delta/2 + l*|K0 - Hx(x_first)^-1| <= 1/(2 mu)",
            )
        )

    # (iii) step sizes below the schedule bound at every inner iteration
    if Lambda <= 0 or l_h <= 0 or not (0 < mu * rho < 1):
        entries.append(
            ConditionEntry(
                name="iii",
                holds=False,
                lhs=None,
                rhs=None,
                inequality="alpha_i < min{1/Lambda, min(varrho, D2) mu^i (1-mu rho) / (2 l (1-(mu rho)^(i+1)))}",
                auditable=False,
                detail="unauditable: needs Lambda > 0, l > 0, 0 < mu*rho < 1",
            )
        )
    else:
        mr = mu * rho
        worst = None
        for i in range(d):
            a_i = step_size(i, config.alpha_schedule)
            bound_i = min(
                1.0 / Lambda,
                min(varrho, D2) * mu**i * (1 - mr) / (2 * l_h * (1 - mr ** (i + 1))),
            )
            margin = bound_i - a_i
            if worst is None or margin < worst[2]:
                worst = (a_i, bound_i, margin, i)
        entries.append(
            ConditionEntry(
                name="iii",
                holds=worst[2] > 0,
                lhs=worst[0],
                rhs=worst[1],
                inequality="alpha_i < min{1/Lambda, min(varrho, D2) mu^i (1-mu rho) / (2 l (1-(mu rho)^(i+1)))}",
                detail=f"tightest at i={worst[3]}",
            )
        )

    # (iv) preconditioner-carryover inequality at every instant k >= 1
    iv_ineq = (
        "l C_k L2 / (L delta_bar) <= (1 - rho^d)/(2 mu L delta_bar)"
        " + mu^(1-k) (rho^d eta gamma/2 - varrho eta gamma/2 - eta gamma/(2 mu))"
    )
    if len(c_seq) < 2:
        entries.append(
            ConditionEntry(
                name="iv", holds=False, lhs=None, rhs=None, inequality=iv_ineq,
                auditable=False, detail="unauditable: no reference trajectory (C_k)",
            )
        )
    elif delta_bar is None or delta_bar <= 0 or L <= 0:
        entries.append(
            ConditionEntry(
                name="iv", holds=False, lhs=None, rhs=None, inequality=iv_ineq,
                auditable=False,
                detail="unauditable: needs positive delta_bar and L (two-pass audit)",
            )
        )
    else:
        worst = None
        for k in range(1, len(c_seq)):
            lhs_k = l_h * c_seq[k] * L2 / (L * delta_bar)
            rhs_k = (1 - rho**d) / (2 * mu * L * delta_bar) + mu ** (1 - k) * (
                rho**d * eta * gamma / 2.0
                - varrho * eta * gamma / 2.0
                - eta * gamma / (2.0 * mu)
            )
            margin = rhs_k - lhs_k
            if worst is None or margin < worst[2]:
                worst = (lhs_k, rhs_k, margin, k)
        entries.append(
            ConditionEntry(
                name="iv",
                holds=worst[2] >= 0,
                lhs=worst[0],
                rhs=worst[1],
                inequality=iv_ineq,
                detail=f"tightest at k={worst[3]} of {len(c_seq) - 1}",
            )
        )

    # (v) first-instant inequality; the delta*(...) product is expanded so a
    # zero initial error stays well-defined
    v_ineq = (
        "l C_0 L2 <= (1 - rho_N^d)(1/(2 mu) - eta gamma delta/2)"
        " + delta eta gamma/2 - eta gamma L delta_bar/2 - delta l D2"
    )
    if not c_seq:
        entries.append(
            ConditionEntry(
                name="v", holds=False, lhs=None, rhs=None, inequality=v_ineq,
                auditable=False, detail="unauditable: no reference trajectory (C_0)",
            )
        )
    elif delta is None or delta_bar is None:
        entries.append(
            ConditionEntry(
                name="v", holds=False, lhs=None, rhs=None, inequality=v_ineq,
                auditable=False, detail="unauditable: needs delta and delta_bar",
            )
        )
    else:
        lhs_v = l_h * c_seq[0] * L2
        rhs_v = (1 - rho_N**d) * (1.0 / (2.0 * mu) - eta * gamma * delta / 2.0) + (
            delta * eta * gamma / 2.0
            - eta * gamma * L * delta_bar / 2.0
            - delta * l_h * D2
        )
        entries.append(
            ConditionEntry(
                name="v", holds=lhs_v <= rhs_v, lhs=lhs_v, rhs=rhs_v, inequality=v_ineq
            )
        )

    return ConditionReport(
        entries=tuple(entries),
        preconditions=tuple(pre),
        rho=rho,
        rho_N=rho_N,
        mu=mu,
        varrho=varrho,
        D2=D2,
        delta=delta,
        delta_bar=delta_bar,
        d=d,
        d_min=d_min,
        d_min_int=d_min_int,
        mu_upper=(1.0 / rho if rho > 0 else math.inf),
        D1_bound=eta * gamma / 2.0 * varrho,
    )
