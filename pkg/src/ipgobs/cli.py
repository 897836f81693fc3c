"""Command-line interface.

Verbs: simulate, run, sweep, audit, report.  Exit codes: 0 all verdicts
pass, 1 verdict failures, 2 configuration error, 3 numerical divergence.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from .benchmarks import builtin_system, default_window_n
from .conditions import check_theorem_conditions
from .constants import estimate_constants
from .errors import ConfigurationError, DivergenceError, IpgObsError
from .harness import (
    _build_alpha,
    aggregate_reports,
    config_from_dict,
    expand_sweep,
    load_config,
    run_experiment,
    write_trajectory,
)
from .ipg import IpgConfig
from .systems import simulate

EXIT_OK = 0
EXIT_VERDICT_FAIL = 1
EXIT_CONFIG = 2
EXIT_DIVERGED = 3


def _add_common(parser):
    parser.add_argument("--config", required=True, help="path to a YAML experiment config")
    parser.add_argument("--out", default=None, help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument(
        "--format",
        choices=["csv", "json"],
        action="append",
        default=None,
        help="restrict output formats (repeatable)",
    )


def _load(args):
    config = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
        overrides["region"] = dataclasses.replace(config.region, seed=args.seed)
    if args.format:
        overrides["formats"] = tuple(args.format)
    if args.out is not None:
        overrides["outputs"] = args.out
    return dataclasses.replace(config, **overrides) if overrides else config


def _cmd_simulate(args):
    config = _load(args)
    system = builtin_system(config.system_id, config.system_params)
    truth = simulate(system, config.truth_x0, steps=config.horizon)
    out = config.outputs or "."
    write_trajectory(out, truth, config.formats)
    print(f"simulated {config.horizon + 1} states of {config.system_id} -> {out}")
    return EXIT_OK


def _cmd_run(args):
    config = _load(args)
    result = run_experiment(config)
    for v in result.verdicts:
        status = "pass" if v.passed else "FAIL"
        print(f"[{status}] {v.name}: {v.detail}")
    if result.fitted is not None:
        print(
            f"fitted rate mu_hat = {result.fitted.mu_hat:.6g} "
            f"(r^2 = {result.fitted.r_squared:.4f}, {result.fitted.points} points)"
        )
    return EXIT_OK if result.all_pass else EXIT_VERDICT_FAIL


def _cmd_sweep(args):
    config = _load(args)  # validates the base document
    import copy

    with open(args.config, "r", encoding="utf-8") as fh:
        import yaml

        doc = yaml.safe_load(fh)
    if args.seed is not None:
        doc["seed"] = args.seed
    out_root = args.out or config.outputs or "sweep_out"
    any_fail = False
    any_diverged = False
    for label, variant in expand_sweep(copy.deepcopy(doc)):
        variant_config = config_from_dict(variant)
        if args.format:
            variant_config = dataclasses.replace(variant_config, formats=tuple(args.format))
        run_out = f"{out_root}/{label}"
        try:
            result = run_experiment(variant_config, out_dir=run_out)
        except DivergenceError as err:
            any_diverged = True
            print(f"[DIVERGED] {label}: {err}")
            continue
        status = "pass" if result.all_pass else "FAIL"
        any_fail = any_fail or not result.all_pass
        print(f"[{status}] {label}")
    summary = aggregate_reports(out_root)
    with open(f"{out_root}/summary.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    if any_diverged:
        return EXIT_DIVERGED
    return EXIT_OK if not any_fail else EXIT_VERDICT_FAIL


def _cmd_audit(args):
    """Constants + condition report for a config without running the observer.

    delta_bar is a run-produced quantity; provide conditions.delta_bar in
    the config (two-pass workflow) or the dependent conditions are marked
    unauditable.
    """
    config = _load(args)
    system = builtin_system(config.system_id, config.system_params)
    window_n = default_window_n(system)
    truth = simulate(system, config.truth_x0, steps=config.horizon)
    constants = estimate_constants(system, window_n, config.region, trajectory=truth)
    doc = {"constants": constants.to_json_dict(), "conditions": None}
    exit_code = EXIT_OK
    if config.conditions is not None and config.observer.kind != "newton":
        from .harness import _resolve_k_init, _resolve_w_init
        from .observability import ObservabilityWindow

        cs = config.conditions
        if cs.rho is None or cs.rho_N is None:
            raise ConfigurationError(
                "audit needs conditions.rho and conditions.rho_N (no run to measure them)"
            )
        first_window = ObservabilityWindow(system, window_n)
        w0 = _resolve_w_init(config.observer, truth, system.n)
        k0 = _resolve_k_init(config.observer, first_window, truth, system.n)
        obs_config = IpgConfig(
            d=config.observer.d,
            alpha_schedule=_build_alpha(config.observer.alpha),
            w_init=w0,
            K_init=k0,
            delta_step=config.observer.delta_step,
            beta=config.observer.beta or 0.0,
        )
        report = check_theorem_conditions(
            constants,
            obs_config,
            rho=cs.rho,
            rho_N=cs.rho_N,
            delta=float(np.linalg.norm(w0 - truth.states[0])),
            delta_bar=cs.delta_bar,
            mu=cs.mu,
            varrho=cs.varrho,
            D2=cs.D2,
            window_n=window_n,
            k_init_error=float(
                np.linalg.norm(k0 - np.linalg.inv(first_window.jacobian(truth.states[0])), 2)
            ),
        )
        doc["conditions"] = report.to_json_dict()
        exit_code = EXIT_OK if report.all_pass else EXIT_VERDICT_FAIL
    text = json.dumps(doc, indent=2)
    if config.outputs:
        import os

        os.makedirs(config.outputs, exist_ok=True)
        with open(f"{config.outputs}/audit.json", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
    print(text)
    return exit_code


def _cmd_report(args):
    summary = aggregate_reports(args.indir)
    text = json.dumps(summary, indent=2)
    if args.out:
        import os

        os.makedirs(args.out, exist_ok=True)
        with open(f"{args.out}/report.json", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK if summary["all_pass"] else EXIT_VERDICT_FAIL


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ipgobs",
        description="Preconditioned gradient-descent observer experiments",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_sim = sub.add_parser("simulate", help="simulate the truth trajectory only")
    _add_common(p_sim)
    p_sim.set_defaults(func=_cmd_simulate)

    p_run = sub.add_parser("run", help="run a single experiment")
    _add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="grid over the config's sweep section")
    _add_common(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_audit = sub.add_parser(
        "audit", help="constants + condition report for a config without running"
    )
    _add_common(p_audit)
    p_audit.set_defaults(func=_cmd_audit)

    p_report = sub.add_parser("report", help="aggregate result.json files")
    p_report.add_argument("--in", dest="indir", required=True, help="directory of run outputs")
    p_report.add_argument("--out", default=None, help="directory for report.json")
    p_report.set_defaults(func=_cmd_report)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as err:
        print(f"numerical divergence: {err}", file=sys.stderr)
        return EXIT_DIVERGED
    except IpgObsError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
