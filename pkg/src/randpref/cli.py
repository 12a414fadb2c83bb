"""Command-line interface.

Exit codes: 0 success, 1 data not rationalizable where a rationalizable
dataset is required, 2 invalid input or configuration, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

import numpy as np

from . import __version__
from .axioms import Axiom, check_axiom
from .budgets import (
    DEFAULT_EPSILON,
    DEFAULT_TIE_TOLERANCE,
    Budget,
    NormalizedBudget,
    TiePolicy,
    compute_patch_partition,
    normalize_budgets,
)
from .cone import FEAS_TOL
from .datafiles import (
    parse_number_list,
    read_budgets_csv,
    read_observations_csv,
    read_series_csv,
    read_vector_csv,
    write_observations_csv,
)
from .errors import (
    ColumnCapExceeded,
    ConfigurationError,
    NotRationalizable,
    RandPrefError,
    SolverError,
    ValidationError,
)
from .rational_types import DEFAULT_COLUMN_CAP, enumerate_types, read_gamma_csv
from .simulation import PowerStudyConfig, monte_carlo_power, simulate_population
from .stochastic_test import (
    bonferroni,
    bootstrap_test,
    estimate_rho,
    pairwise_rationality_test,
)
from .welfare import (
    counterfactual_expectation_bounds,
    counterfactual_patch_probability_bounds,
    counterfactual_setup,
    expenditure_share_coefficients,
    welfare_bounds,
)

EXIT_OK = 0
EXIT_NOT_RATIONALIZABLE = 1
EXIT_INVALID = 2
EXIT_SOLVER = 3


def _emit(payload, out: Optional[str]) -> None:
    text = json.dumps(payload, indent=2, default=_jsonable)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    cfg["version"] = __version__
    return cfg


def _partition_report(labels, partition) -> dict:
    return {
        "periods": list(labels),
        "normalized_prices": [b.normalized_prices.tolist() for b in partition.budgets],
        "patch_counts": partition.block_sizes,
        "patches": [
            {
                "period": labels[p.owner_budget],
                "budget_index": p.owner_budget,
                "local_index": p.local_index,
                "signs": {labels[s]: ("below" if sd.letter == "B" else "above") for s, sd in p.sign_vector},
                "label": p.label,
            }
            for p in partition.global_row_order
        ],
        "global_row_order": [[t, lbl] for t, lbl in partition.row_keys()],
    }


def partition_from_report(report: dict):
    """Rebuild a partition from the ``patches`` command's JSON output."""
    budgets = [NormalizedBudget(np.array(p), t) for t, p in enumerate(report["normalized_prices"])]
    eps = report.get("config", {}).get("epsilon", DEFAULT_EPSILON)
    return compute_patch_partition(budgets, eps)


def _load(args):
    labels, budgets = read_budgets_csv(args.budgets)
    partition = compute_patch_partition(budgets, args.epsilon)
    return labels, budgets, partition


def _rho(args, labels, partition):
    obs = read_observations_csv(args.observations, labels)
    return estimate_rho(obs, partition, TiePolicy(args.tie_policy), args.tie_tolerance)


def _period_index(labels, label: str, flag: str) -> int:
    if label not in labels:
        raise ValidationError(f"--{flag}: unknown period {label!r}")
    return labels.index(label)


def cmd_patches(args) -> int:
    labels, _, partition = _load(args)
    report = _partition_report(labels, partition)
    report["config"] = _config(args)
    _emit(report, args.out)
    return EXIT_OK


def cmd_axioms(args) -> int:
    series = read_series_csv(args.series)
    rep = check_axiom(series, args.axiom, tol=args.tol)
    _emit(
        {
            "axiom": rep.axiom.value,
            "holds": rep.holds,
            "witness": list(rep.witness) if rep.witness else None,
            "weak": rep.relations.weak.astype(int),
            "strict": rep.relations.strict.astype(int),
            "config": _config(args),
        },
        args.out,
    )
    return EXIT_OK


def cmd_test(args) -> int:
    labels, _, partition = _load(args)
    rho = _rho(args, labels, partition)
    gamma = enumerate_types(partition, args.axiom, cap=args.cap)
    rep = bootstrap_test(
        gamma, rho, R=args.bootstrap, seed=args.seed, axiom=args.axiom,
        feas_tol=args.feas_tol, n_jobs=args.n_jobs,
    )
    payload = rep.to_dict()
    payload.pop("bootstrap_stats")
    payload["d_rho"], payload["H"] = rep.gamma_dims
    payload["rho_hat"] = rho.values
    payload["dropped_observations"] = rho.dropped
    if args.bonferroni:
        payload["p_value_bonferroni"] = bonferroni(rep, args.bonferroni)
    payload["config"] = _config(args)
    _emit(payload, args.out)
    return EXIT_OK


def cmd_pairwise(args) -> int:
    labels, _, partition = _load(args)
    rho = _rho(args, labels, partition)
    results = pairwise_rationality_test(rho, partition, args.feas_tol)
    _emit(
        {
            "pairs": [
                {
                    "t": labels[r.t],
                    "s": labels[r.s],
                    "feasible": r.feasible,
                    "u": r.u,
                    "rho_ts": r.rho_ts,
                    "groups": [list(k) for k in r.system.group_keys],
                }
                for r in results
            ],
            "config": _config(args),
        },
        args.out,
    )
    return EXIT_OK


def cmd_welfare(args) -> int:
    labels, _, partition = _load(args)
    rho = _rho(args, labels, partition)
    gamma = enumerate_types(partition, args.axiom, cap=args.cap)
    t = _period_index(labels, args.t, "t")
    s = _period_index(labels, args.s, "s")
    wb = welfare_bounds(gamma, partition, rho, t, s, args.feas_tol)
    _emit(
        {
            "t": args.t,
            "s": args.s,
            "gamma_lower": wb.gamma_lower,
            "gamma_upper": wb.gamma_upper,
            "beta_lower": wb.beta_lower,
            "revealed_interval": wb.revealed_interval,
            "better_off_interval": wb.better_off_interval,
            "config": _config(args),
        },
        args.out,
    )
    return EXIT_OK


def cmd_counterfactual(args) -> int:
    labels, budgets, partition = _load(args)
    rho = _rho(args, labels, partition)
    p0 = np.array(parse_number_list(args.price, "price"))
    if p0.size != partition.dim:
        raise ValidationError(f"--price needs {partition.dim} values")
    setup = counterfactual_setup(budgets, rho, p0, args.wealth, args.axiom, args.epsilon, args.cap)
    payload = {
        "counterfactual_patches": [p.label for p in setup.counterfactual_patches],
        "H": setup.types.n_types,
    }
    if args.patch is not None:
        payload["patch"] = args.patch
        payload["bounds"] = counterfactual_patch_probability_bounds(setup, args.patch, args.feas_tol)
    else:
        if args.share is not None:
            z0 = expenditure_share_coefficients(p0, args.wealth, args.share - 1)
        elif args.h is not None:
            z0 = np.array(parse_number_list(args.h, "h"))
        else:
            raise ValidationError("one of --h, --share or --patch is required")
        payload["coefficients"] = z0
        payload["bounds"] = counterfactual_expectation_bounds(setup, z0, args.feas_tol)
    payload["config"] = _config(args)
    _emit(payload, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    labels, budgets = read_budgets_csv(args.budgets)
    try:
        alpha = float(args.alpha)
    except ValueError:
        alpha = args.alpha
    obs = simulate_population(budgets, args.n, alpha, args.seed)
    write_observations_csv(obs, args.out, labels)
    return EXIT_OK


def cmd_power(args) -> int:
    gamma = read_gamma_csv(args.gamma)
    rho = read_vector_csv(args.rho_true)
    if rho.size != gamma.d_rho:
        raise ValidationError(f"rho_true has {rho.size} entries, Gamma has {gamma.d_rho} rows")
    cfg = PowerStudyConfig(
        gamma=gamma.entries,
        rho_true=rho,
        sample_sizes=tuple(int(v) for v in parse_number_list(args.sizes, "sizes")),
        simulations=args.sims,
        bootstrap=args.bootstrap,
        levels=tuple(parse_number_list(args.levels, "levels")),
        seed=args.seed,
        n_jobs=args.n_jobs,
    )
    table = monte_carlo_power(cfg).to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(table)
    else:
        sys.stdout.write(table)
    return EXIT_OK


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="randpref",
        description="Stochastic revealed-preference tests and bounds.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    geo = argparse.ArgumentParser(add_help=False)
    geo.add_argument("--budgets", required=True, help="CSV: period,p1..pL,expenditure")
    geo.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="strict-slack tolerance")
    geo.add_argument("--out", help="output path (default: stdout)")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--observations", required=True, help="CSV: period,household_id,q1..qL")
    data.add_argument("--tie-policy", choices=[p.value for p in TiePolicy], default="error")
    data.add_argument("--tie-tolerance", type=float, default=DEFAULT_TIE_TOLERANCE)
    data.add_argument("--feas-tol", type=float, default=FEAS_TOL)

    typ = argparse.ArgumentParser(add_help=False)
    typ.add_argument("--axiom", choices=["warp", "sarp"], default="warp")
    typ.add_argument("--cap", type=_positive_int, default=DEFAULT_COLUMN_CAP, help="column cap")

    p = sub.add_parser("patches", parents=[geo], help="patch partition report")
    p.set_defaults(func=cmd_patches)

    p = sub.add_parser("axioms", help="WARP/WGARP/SARP on one consumer's series")
    p.add_argument("--series", required=True, help="CSV: period,p1..pL,q1..qL")
    p.add_argument("--axiom", choices=[a.value for a in Axiom], default="warp")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out")
    p.set_defaults(func=cmd_axioms)

    p = sub.add_parser("test", parents=[geo, data, typ], help="bootstrap rationalizability test")
    p.add_argument("--bootstrap", type=_positive_int, default=1000, help="replications R")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bonferroni", type=_positive_int, help="number of tests for adjustment")
    p.add_argument("--n-jobs", type=_positive_int, default=1)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("pairwise-test", parents=[geo, data], help="two-budget systems")
    p.set_defaults(func=cmd_pairwise)

    p = sub.add_parser("welfare", parents=[geo, data, typ], help="welfare bounds for budget t vs s")
    p.add_argument("--t", required=True, help="period label of the first budget")
    p.add_argument("--s", required=True, help="period label of the second budget")
    p.set_defaults(func=cmd_welfare)

    p = sub.add_parser("counterfactual", parents=[geo, data, typ], help="counterfactual demand bounds")
    p.add_argument("--price", required=True, help="comma-separated counterfactual prices")
    p.add_argument("--wealth", type=float, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--h", help="comma-separated coefficients of a linear functional")
    g.add_argument("--patch", type=int, help="counterfactual patch index")
    g.add_argument("--share", type=int, help="expenditure share of good k (1-based)")
    p.set_defaults(func=cmd_counterfactual)

    p = sub.add_parser("simulate", help="simulate a Shafer population")
    p.add_argument("--budgets", required=True)
    p.add_argument("--alpha", default="uniform", help="'uniform' or a fixed value in (0,1)")
    p.add_argument("--n", type=_positive_int, required=True, help="households per period")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="observations CSV to write")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("power", help="Monte Carlo rejection frequencies")
    p.add_argument("--gamma", required=True, help="type matrix CSV")
    p.add_argument("--rho-true", required=True, help="vector CSV")
    p.add_argument("--sizes", default="100,200,500,1000,2500")
    p.add_argument("--sims", type=_positive_int, default=99)
    p.add_argument("--bootstrap", type=_positive_int, default=200)
    p.add_argument("--levels", default="0.05,0.01")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-jobs", type=_positive_int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_power)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NotRationalizable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_RATIONALIZABLE
    except (ValidationError, ConfigurationError, ColumnCapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except RandPrefError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_RATIONALIZABLE


if __name__ == "__main__":
    sys.exit(main())
