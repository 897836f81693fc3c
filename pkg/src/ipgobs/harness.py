"""Experiment orchestration: declarative configs, runs, rate fitting,
and CSV/JSON persistence.

A config is a nested key-value document (YAML).  Unknown keys anywhere in
the document are rejected, so typos fail loudly instead of silently
running a different experiment.  Given a fixed seed, a run is fully
deterministic and its artifacts are byte-identical across repeats.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import yaml

from ._validation import reject_unknown_keys
from .benchmarks import builtin_system, default_window_n
from .conditions import check_theorem_conditions
from .constants import Region, estimate_constants, measure_rho
from .errors import ConfigurationError, DivergenceError, InsufficientDataError
from .ipg import ConstantAlpha, CustomAlpha, IpgConfig, TheoremSchedule, run_ipg_observer
from .newton import NewtonConfig, run_newton_observer
from .observability import ObservabilityWindow
from .systems import simulate

FIT_FLOOR = 1e-12

OBSERVER_KINDS = ("ipg", "ipg_beta", "newton")


# ---------------------------------------------------------------------------
# rate fitting


@dataclass(frozen=True)
class RateFit:
    mu_hat: float
    r_squared: float
    points: int


def fit_linear_rate(errors):
    """Fit log(error) vs. instant index by least squares.

    Entries at or below the 1e-12 floor are excluded (they sit in the
    numerical-noise plateau, not the transient the rate describes).
    Returns the per-instant rate ``mu_hat = exp(-slope)`` and the fit's
    r-squared; a perfect zero-variance fit reports r-squared 1.
    """
    errs = np.asarray(list(errors), dtype=float)
    if errs.size and np.any(errs < 0):
        raise ConfigurationError("errors must be non-negative")
    mask = errs > FIT_FLOOR
    if int(mask.sum()) < 3:
        raise InsufficientDataError(
            f"need at least 3 errors above {FIT_FLOOR:g}, got {int(mask.sum())}"
        )
    ks = np.arange(errs.size, dtype=float)[mask]
    logs = np.log(errs[mask])
    slope, intercept = np.polyfit(ks, logs, 1)
    pred = slope * ks + intercept
    ss_res = float(np.sum((logs - pred) ** 2))
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 and ss_res <= 1e-24 else 1.0 - ss_res / ss_tot
    return RateFit(mu_hat=float(np.exp(-slope)), r_squared=float(r2), points=int(mask.sum()))


# ---------------------------------------------------------------------------
# declarative configuration

_TOP_KEYS = {
    "seed", "horizon", "truth_x0", "outputs", "formats",
    "system", "region", "observer", "conditions", "sweep",
}
_SYSTEM_KEYS = {"id", "params"}
_REGION_KEYS = {"lower", "upper", "samples", "seed"}
_OBSERVER_KEYS = {
    "kind", "d", "delta_step", "beta", "w_init", "w_perturb",
    "K_init", "alpha", "damping",
}
_ALPHA_KEYS = {"policy", "value", "values", "Lambda", "l", "rho", "mu", "varrho", "D2"}
_CONDITIONS_KEYS = {"mu", "varrho", "D2", "rho", "rho_N", "delta_bar"}


@dataclass(frozen=True)
class ObserverSpec:
    kind: str
    d: int
    alpha: Optional[dict] = None
    delta_step: float = 1.0
    beta: Optional[float] = None
    w_init: object = "truth"
    w_perturb: Optional[tuple] = None
    K_init: object = 1.0
    damping: float = 1.0


@dataclass(frozen=True)
class ConditionsSpec:
    mu: float
    varrho: float
    D2: float
    rho: Optional[float] = None
    rho_N: Optional[float] = None
    delta_bar: Optional[float] = None


@dataclass(frozen=True)
class ExperimentConfig:
    system_id: str
    system_params: dict
    region: Region
    horizon: int
    truth_x0: tuple
    observer: ObserverSpec
    conditions: Optional[ConditionsSpec] = None
    outputs: Optional[str] = None
    formats: tuple = ("csv", "json")
    seed: int = 0
    sweep: dict = field(default_factory=dict)


def load_config(path):
    """Parse a config file; every unknown key is an error."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ConfigurationError(f"config {path} must be a mapping document")
    return config_from_dict(doc)


def config_from_dict(doc):
    reject_unknown_keys(doc, _TOP_KEYS, "config")
    for required in ("system", "region", "horizon", "truth_x0", "observer"):
        if required not in doc:
            raise ConfigurationError(f"config is missing the {required!r} section")

    sys_doc = doc["system"]
    reject_unknown_keys(sys_doc, _SYSTEM_KEYS, "config.system")
    if "id" not in sys_doc:
        raise ConfigurationError("config.system needs an 'id'")

    seed = int(doc.get("seed", 0))
    reg_doc = doc["region"]
    reject_unknown_keys(reg_doc, _REGION_KEYS, "config.region")
    region = Region(
        lower=tuple(float(v) for v in reg_doc["lower"]),
        upper=tuple(float(v) for v in reg_doc["upper"]),
        samples=int(reg_doc.get("samples", 512)),
        seed=int(reg_doc.get("seed", seed)),
    )

    obs_doc = doc["observer"]
    reject_unknown_keys(obs_doc, _OBSERVER_KEYS, "config.observer")
    kind = obs_doc.get("kind", "ipg")
    if kind not in OBSERVER_KINDS:
        raise ConfigurationError(
            f"unknown observer kind {kind!r}; valid kinds: {', '.join(OBSERVER_KINDS)}"
        )
    alpha_doc = obs_doc.get("alpha")
    if alpha_doc is not None:
        reject_unknown_keys(alpha_doc, _ALPHA_KEYS, "config.observer.alpha")
    observer = ObserverSpec(
        kind=kind,
        d=int(obs_doc.get("d", 10)),
        alpha=dict(alpha_doc) if alpha_doc is not None else None,
        delta_step=float(obs_doc.get("delta_step", 1.0)),
        beta=(None if obs_doc.get("beta") is None else float(obs_doc["beta"])),
        w_init=obs_doc.get("w_init", "truth"),
        w_perturb=(
            None
            if obs_doc.get("w_perturb") is None
            else tuple(float(v) for v in obs_doc["w_perturb"])
        ),
        K_init=obs_doc.get("K_init", 1.0),
        damping=float(obs_doc.get("damping", 1.0)),
    )

    conditions = None
    if doc.get("conditions") is not None:
        cond_doc = doc["conditions"]
        reject_unknown_keys(cond_doc, _CONDITIONS_KEYS, "config.conditions")
        for required in ("mu", "varrho", "D2"):
            if required not in cond_doc:
                raise ConfigurationError(f"config.conditions needs {required!r}")
        conditions = ConditionsSpec(
            mu=float(cond_doc["mu"]),
            varrho=float(cond_doc["varrho"]),
            D2=float(cond_doc["D2"]),
            rho=None if cond_doc.get("rho") is None else float(cond_doc["rho"]),
            rho_N=None if cond_doc.get("rho_N") is None else float(cond_doc["rho_N"]),
            delta_bar=(
                None if cond_doc.get("delta_bar") is None else float(cond_doc["delta_bar"])
            ),
        )

    formats = tuple(doc.get("formats", ["csv", "json"]))
    for fmt in formats:
        if fmt not in ("csv", "json"):
            raise ConfigurationError(f"unknown format {fmt!r}; valid: csv, json")

    return ExperimentConfig(
        system_id=sys_doc["id"],
        system_params=dict(sys_doc.get("params", {})),
        region=region,
        horizon=int(doc["horizon"]),
        truth_x0=tuple(float(v) for v in doc["truth_x0"]),
        observer=observer,
        conditions=conditions,
        outputs=doc.get("outputs"),
        formats=formats,
        seed=seed,
        sweep=dict(doc.get("sweep", {})),
    )


def _build_alpha(alpha_doc):
    if alpha_doc is None:
        return ConstantAlpha(0.5)
    policy = alpha_doc.get("policy", "constant")
    if policy == "constant":
        return ConstantAlpha(float(alpha_doc.get("value", 0.5)))
    if policy == "custom":
        return CustomAlpha(alpha_doc.get("values", ()))
    if policy == "theorem":
        try:
            return TheoremSchedule(
                Lambda=float(alpha_doc["Lambda"]),
                l=float(alpha_doc["l"]),
                rho=float(alpha_doc["rho"]),
                mu=float(alpha_doc["mu"]),
                varrho=float(alpha_doc["varrho"]),
                D2=float(alpha_doc["D2"]),
            )
        except KeyError as exc:
            raise ConfigurationError(f"theorem schedule needs parameter {exc}") from None
    raise ConfigurationError(f"unknown alpha policy {policy!r}")


def _resolve_w_init(spec, truth, n):
    if isinstance(spec.w_init, str):
        if spec.w_init != "truth":
            raise ConfigurationError(f"w_init must be a vector or 'truth', got {spec.w_init!r}")
        w = np.array(truth.states[0], dtype=float)
    else:
        w = np.asarray(spec.w_init, dtype=float)
    if spec.w_perturb is not None:
        w = w + np.asarray(spec.w_perturb, dtype=float)
    if w.shape != (n,):
        raise ConfigurationError(f"w_init must have length {n}, got shape {w.shape}")
    return w


def _resolve_k_init(spec, first_window, truth, n):
    if isinstance(spec.K_init, str):
        if spec.K_init != "true_inverse_jacobian":
            raise ConfigurationError(
                f"K_init must be a matrix, a scalar, or 'true_inverse_jacobian', "
                f"got {spec.K_init!r}"
            )
        return np.linalg.inv(first_window.jacobian(truth.states[0]))
    if np.isscalar(spec.K_init):
        return float(spec.K_init) * np.eye(n)
    mat = np.asarray(spec.K_init, dtype=float)
    if mat.shape != (n, n):
        raise ConfigurationError(f"K_init must have shape {(n, n)}, got {mat.shape}")
    return mat


# ---------------------------------------------------------------------------
# results and verdicts


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    detail: str = ""

    def to_json_dict(self):
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    estimates: tuple
    trace: object
    constants: object
    rho_measured: object
    conditions: object
    fitted: Optional[RateFit]
    verdicts: tuple

    @property
    def all_pass(self):
        return all(v.passed for v in self.verdicts)

    @property
    def fitted_mu(self):
        return None if self.fitted is None else self.fitted.mu_hat

    def to_json_dict(self):
        return {
            "system": self.config.system_id,
            "observer_kind": self.config.observer.kind,
            "seed": self.config.seed,
            "horizon": self.config.horizon,
            "constants": self.constants.to_json_dict(),
            "rho_measured": None if self.rho_measured is None else self.rho_measured.to_json_dict(),
            "conditions": None if self.conditions is None else self.conditions.to_json_dict(),
            "fitted_mu": None if self.fitted is None else self.fitted.mu_hat,
            "fit_r_squared": None if self.fitted is None else self.fitted.r_squared,
            "fit_points": None if self.fitted is None else self.fitted.points,
            "verdicts": [v.to_json_dict() for v in self.verdicts],
            "all_pass": self.all_pass,
            "divergence": None,
        }


# ---------------------------------------------------------------------------
# orchestration


def run_experiment(config, out_dir=None):
    """Simulate truth, run the configured observer, audit, fit, persist.

    ``out_dir`` overrides ``config.outputs``.  On divergence the partial
    trace and a result document recording the blow-up location are flushed
    before the error propagates.
    """
    system = builtin_system(config.system_id, config.system_params)
    window_n = default_window_n(system)
    if config.horizon < window_n:
        raise ConfigurationError(
            f"horizon {config.horizon} is below the window length {window_n}"
        )
    truth = simulate(system, config.truth_x0, steps=config.horizon)
    constants = estimate_constants(system, window_n, config.region, trajectory=truth)

    first_window = ObservabilityWindow(system, window_n)
    spec = config.observer
    w0 = _resolve_w_init(spec, truth, system.n)
    out = out_dir if out_dir is not None else config.outputs

    if spec.kind == "newton":
        obs_config = NewtonConfig(d=spec.d, w_init=w0, damping=spec.damping)
        runner = run_newton_observer
    else:
        beta = spec.beta
        if spec.kind == "ipg_beta" and beta is None:
            beta = constants.beta_required
        k0 = _resolve_k_init(spec, first_window, truth, system.n)
        obs_config = IpgConfig(
            d=spec.d,
            alpha_schedule=_build_alpha(spec.alpha),
            w_init=w0,
            K_init=k0,
            delta_step=spec.delta_step,
            beta=0.0 if beta is None else float(beta),
        )
        runner = run_ipg_observer

    try:
        estimates, trace = runner(
            system, truth.outputs, inputs=truth.inputs, config=obs_config, truth=truth
        )
    except DivergenceError as err:
        if out:
            _flush_divergence(out, config, constants, err)
        raise

    rho_measured = None
    if spec.kind != "newton":
        rho_measured = measure_rho(trace)

    conditions = None
    if config.conditions is not None and spec.kind != "newton":
        cs = config.conditions
        delta = float(np.linalg.norm(w0 - truth.states[0]))
        first_summary = trace.summary_records()[0]
        delta_bar = cs.delta_bar if cs.delta_bar is not None else first_summary.err_w
        k_init_error = float(
            np.linalg.norm(
                obs_config.K_init - np.linalg.inv(first_window.jacobian(truth.states[0])),
                2,
            )
        )
        conditions = check_theorem_conditions(
            constants,
            obs_config,
            rho=cs.rho if cs.rho is not None else rho_measured.rho,
            rho_N=cs.rho_N if cs.rho_N is not None else rho_measured.rho_N,
            delta=delta,
            delta_bar=delta_bar,
            mu=cs.mu,
            varrho=cs.varrho,
            D2=cs.D2,
            window_n=window_n,
            k_init_error=k_init_error,
        )

    _, errs = trace.per_instant_errors()
    fitted = None
    try:
        fitted = fit_linear_rate(errs)
    except InsufficientDataError:
        fitted = None

    verdicts = [_finite_verdict(errs)]
    if rho_measured is not None:
        verdicts.append(
            Verdict(
                "lemma3_contraction",
                rho_measured.contraction_ok,
                f"measured rho = {rho_measured.rho:.6g}",
            )
        )
    if conditions is not None:
        verdicts.append(
            Verdict(
                "theorem_conditions",
                conditions.all_pass,
                "conditions (i)-(v) with the configured rates",
            )
        )
        if conditions.all_pass and fitted is not None:
            verdicts.append(
                Verdict(
                    "rate_consistency",
                    fitted.mu_hat >= conditions.mu * 0.95,
                    f"fitted mu {fitted.mu_hat:.6g} vs guaranteed {conditions.mu:.6g}",
                )
            )

    result = ExperimentResult(
        config=config,
        estimates=tuple(estimates),
        trace=trace,
        constants=constants,
        rho_measured=rho_measured,
        conditions=conditions,
        fitted=fitted,
        verdicts=tuple(verdicts),
    )
    if out:
        write_result(out, result, config.formats)
    return result


def _finite_verdict(errs):
    ok = all(math.isfinite(e) for e in errs)
    return Verdict("errors_finite", ok, f"{len(errs)} per-instant errors")


# ---------------------------------------------------------------------------
# persistence


def write_result(out_dir, result, formats=("csv", "json")):
    os.makedirs(out_dir, exist_ok=True)
    if "csv" in formats:
        _write_text(os.path.join(out_dir, "trace.csv"), result.trace.to_csv_text())
    if "json" in formats:
        _write_text(
            os.path.join(out_dir, "result.json"),
            json.dumps(result.to_json_dict(), indent=2) + "\n",
        )


def _flush_divergence(out_dir, config, constants, err):
    os.makedirs(out_dir, exist_ok=True)
    if err.partial_trace is not None and "csv" in config.formats:
        _write_text(os.path.join(out_dir, "trace.csv"), err.partial_trace.to_csv_text())
    if "json" in config.formats:
        doc = {
            "system": config.system_id,
            "observer_kind": config.observer.kind,
            "seed": config.seed,
            "horizon": config.horizon,
            "constants": constants.to_json_dict(),
            "rho_measured": None,
            "conditions": None,
            "fitted_mu": None,
            "fit_r_squared": None,
            "fit_points": None,
            "verdicts": [],
            "all_pass": False,
            "divergence": {"k": err.k, "i": err.i, "message": str(err)},
        }
        _write_text(os.path.join(out_dir, "result.json"), json.dumps(doc, indent=2) + "\n")


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_trajectory(out_dir, trajectory, formats=("csv", "json")):
    """Persist a simulated truth trajectory."""
    os.makedirs(out_dir, exist_ok=True)
    n = len(trajectory.states[0])
    p = len(trajectory.outputs[0])
    if "csv" in formats:
        header = ",".join(
            ["k"] + [f"x{j}" for j in range(n)] + [f"y{j}" for j in range(p)]
        )
        lines = [header]
        for k, (x, y) in enumerate(zip(trajectory.states, trajectory.outputs)):
            cells = [str(k)] + [repr(float(v)) for v in x] + [repr(float(v)) for v in y]
            lines.append(",".join(cells))
        _write_text(os.path.join(out_dir, "trajectory.csv"), "\n".join(lines) + "\n")
    if "json" in formats:
        doc = {
            "states": [[float(v) for v in x] for x in trajectory.states],
            "outputs": [[float(v) for v in y] for y in trajectory.outputs],
        }
        _write_text(
            os.path.join(out_dir, "trajectory.json"), json.dumps(doc, indent=2) + "\n"
        )


# ---------------------------------------------------------------------------
# sweeps and aggregation


def _set_dotted(doc, dotted, value):
    parts = dotted.split(".")
    node = doc
    for part in parts[:-1]:
        if part not in node or not isinstance(node[part], dict):
            node[part] = {}
        node = node[part]
    node[parts[-1]] = value


def expand_sweep(doc):
    """Cartesian product over the ``sweep`` section of a raw config dict.

    Yields (label, raw-dict) pairs in deterministic order.
    """
    import copy
    import itertools

    sweep = doc.get("sweep") or {}
    if not sweep:
        base = copy.deepcopy(doc)
        base.pop("sweep", None)
        yield "run_0000", base
        return
    keys = sorted(sweep)
    grids = [list(sweep[k]) for k in keys]
    for idx, combo in enumerate(itertools.product(*grids)):
        variant = copy.deepcopy(doc)
        variant.pop("sweep", None)
        for key, value in zip(keys, combo):
            _set_dotted(variant, key, value)
        yield f"run_{idx:04d}", variant


def aggregate_reports(root):
    """Collect result.json documents below ``root`` into one summary."""
    rows = {}
    for dirpath, _dirnames, filenames in sorted(os.walk(root)):
        if "result.json" in filenames:
            with open(os.path.join(dirpath, "result.json"), "r", encoding="utf-8") as fh:
                doc = json.load(fh)
            rel = os.path.relpath(dirpath, root)
            rows[rel] = {
                "system": doc.get("system"),
                "observer_kind": doc.get("observer_kind"),
                "all_pass": doc.get("all_pass"),
                "fitted_mu": doc.get("fitted_mu"),
                "diverged": doc.get("divergence") is not None,
                "failed_verdicts": [
                    v["name"] for v in doc.get("verdicts", []) if not v["passed"]
                ],
            }
    return {"runs": rows, "all_pass": bool(rows) and all(r["all_pass"] for r in rows.values())}
