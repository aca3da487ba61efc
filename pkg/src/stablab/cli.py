"""Command-line front end.

Subcommands: distance, cz, construct, redecompose, dual, verify, report.
Results are emitted as JSON (single computations) or CSV (campaign reports);
all outputs are deterministic for a fixed config and seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .cz import cz_decompose
from .distance import dist_l1_to_lp_ball, dist_linf_to_lp_ball
from .dual_search import make_instance, min_constant
from .grid import DyadicInterval, GridFunction, GridSet
from .harness import (
    ExperimentConfig,
    SUPPORT_LEFT_HALF,
    default_config,
    freeze_or_check,
    generate_corpus,
    golden_dir,
    make_operator,
    run_theorem1,
    run_theorem2,
    verify_all,
)
from .operators import apply
from .stability import bourgain_construct, kclosed_redecompose

def _common_flags(sub: argparse.ArgumentParser):
    sub.add_argument("--config", help="path to a JSON experiment config")
    sub.add_argument("--seed", type=int, help="override the config seed")
    sub.add_argument("--n", type=int, help="override the grid size")
    sub.add_argument("--p", type=float, help="override the ball exponent")
    sub.add_argument("--s", type=float, help="ball radius")
    sub.add_argument(
        "--operator",
        choices=["hilbert", "haar_transform", "identity_minus_mean"],
        help="operator kind",
    )
    sub.add_argument("--support", help=f"'{SUPPORT_LEFT_HALF}' or a path to a JSON 0/1 mask")
    sub.add_argument("--out", help="output path (.json or .csv); default stdout")
    sub.add_argument("--input", help="path to a JSON array holding the grid function")


def _load_config(args) -> ExperimentConfig:
    if args.config:
        with open(args.config) as fh:
            cfg = ExperimentConfig.from_json(fh.read())
    else:
        cfg = default_config()
    overrides = {}
    for key in ("seed", "n", "p"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "support", None):
        overrides["support"] = args.support if args.support == SUPPORT_LEFT_HALF else None
    if overrides:
        from dataclasses import replace

        cfg = replace(cfg, **overrides)
    return cfg


def _load_function(args, cfg: ExperimentConfig, support: GridSet | None = None) -> GridFunction:
    if args.input:
        with open(args.input) as fh:
            return GridFunction.from_json(fh.read())
    return generate_corpus(cfg, support)[0][1]


def _load_support(args, cfg: ExperimentConfig) -> GridSet | None:
    if not getattr(args, "support", None):
        return None
    if args.support == SUPPORT_LEFT_HALF:
        return GridSet.from_interval(DyadicInterval(1, 0), cfg.n)
    with open(args.support) as fh:
        return GridSet.from_json(fh.read())


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _cmd_distance(args) -> int:
    cfg = _load_config(args)
    f = _load_function(args, cfg)
    s = args.s if args.s is not None else 1.0
    solver = dist_linf_to_lp_ball if args.ambient == "inf" else dist_l1_to_lp_ball
    _emit(args, solver(f, s, cfg.p).to_json())
    return 0


def _cmd_cz(args) -> int:
    cfg = _load_config(args)
    f = _load_function(args, cfg)
    level = args.level if args.level is not None else (args.s if args.s is not None else 1.0)
    _emit(args, cz_decompose(f, level, args.dilation).to_json())
    return 0


def _cmd_construct(args) -> int:
    cfg = _load_config(args)
    f = _load_function(args, cfg)
    T = make_operator(args.operator or cfg.operators[0], cfg.n, cfg.seed)
    s = args.s if args.s is not None else 1.0
    _, report = bourgain_construct(f, T, s, cfg.p)
    _emit(args, report.to_json())
    return 0


def _cmd_redecompose(args) -> int:
    cfg = _load_config(args)
    f = _load_function(args, cfg)
    T = make_operator(args.operator or cfg.operators[0], cfg.n, cfg.seed)
    s = args.s if args.s is not None else 1.0
    u1 = dist_l1_to_lp_ball(f, s, cfg.p).minimizer
    Tf = apply(T, f)
    v1 = dist_l1_to_lp_ball(Tf, s, cfg.p).minimizer
    _, _, report = kclosed_redecompose(f, T, (f - u1, Tf - v1, u1, v1), cfg.p)
    payload = {
        "a": report.a, "b": report.b, "c": report.c, "lam": report.lam,
        "ratio_h": report.ratio_h, "ratio_w_p": report.ratio_w_p,
        "ratio_Tw_p": report.ratio_Tw_p, "ratio_Th": report.ratio_Th,
        "holder_lhs": report.holder_lhs, "holder_rhs": report.holder_rhs,
        "degenerate": report.degenerate,
    }
    _emit(args, json.dumps(payload, sort_keys=True))
    return 0


def _cmd_dual(args) -> int:
    cfg = _load_config(args)
    support = _load_support(args, cfg)
    f = _load_function(args, cfg, support)
    if support is not None and args.input:
        # user-supplied functions are masked and renormalized onto the set
        masked = np.where(support.membership, f.values, 0.0)
        total = np.abs(masked).mean()
        f = GridFunction(masked / total if total > 0 else masked)
    T = make_operator(args.operator or cfg.dual_operators[0], cfg.n, cfg.seed)
    s = args.s if args.s is not None else 1.0
    inst = make_instance(f, T, s, cfg.p, support)
    _emit(args, min_constant(inst, tol=args.tol).to_json())
    return 0


def _cmd_verify(args) -> int:
    cfg = _load_config(args)
    summary = verify_all(cfg, corrupt_adjoint=(args.inject_fault == "adjoint"))
    _emit(args, json.dumps(summary, sort_keys=True) + "\n")
    return 0 if summary["ok"] else 1


def _cmd_report(args) -> int:
    cfg = _load_config(args)
    os.makedirs(args.outdir, exist_ok=True)
    csv1, summary1 = run_theorem1(cfg)
    csv2, summary2 = run_theorem2(cfg)
    with open(os.path.join(args.outdir, "theorem1.csv"), "w") as fh:
        fh.write(csv1)
    with open(os.path.join(args.outdir, "theorem2.csv"), "w") as fh:
        fh.write(csv2)
    directory = golden_dir()
    frozen = {}
    if directory is not None:
        for name, value in (
            ("theorem1_max_ratio_T", summary1["max_ratio_T"]),
            ("theorem2_max_c_star", summary2["max_c_star"]),
        ):
            frozen_value, created = freeze_or_check(name, value, directory, bump=args.bump_golden)
            frozen[name] = {"frozen": frozen_value}
            if created:
                print(f"froze {name} = {frozen_value!r}", file=sys.stderr)
    summary = {"theorem1": summary1, "theorem2": summary2, "golden": frozen}
    text = json.dumps(summary, sort_keys=True) + "\n"
    with open(os.path.join(args.outdir, "summary.json"), "w") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stablab", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("distance", help="distance from f to an L^p ball")
    _common_flags(sub)
    sub.add_argument("--ambient", choices=["1", "inf"], default="1")
    sub.set_defaults(func=_cmd_distance)

    sub = subs.add_parser("cz", help="stopping-time decomposition of f")
    _common_flags(sub)
    sub.add_argument("--level", type=float, help="decomposition level")
    sub.add_argument("--dilation", type=float, default=10.0)
    sub.set_defaults(func=_cmd_cz)

    sub = subs.add_parser("construct", help="stable near-minimizer construction")
    _common_flags(sub)
    sub.set_defaults(func=_cmd_construct)

    sub = subs.add_parser("redecompose", help="graph redecomposition of an ambient split")
    _common_flags(sub)
    sub.set_defaults(func=_cmd_redecompose)

    sub = subs.add_parser("dual", help="smallest workable constant by convex feasibility")
    _common_flags(sub)
    sub.add_argument("--tol", type=float, default=1e-2)
    sub.set_defaults(func=_cmd_dual)

    sub = subs.add_parser("verify", help="run every module's invariant suite")
    _common_flags(sub)
    sub.add_argument("--inject-fault", choices=["adjoint"], help="test fixture: corrupt an identity")
    sub.set_defaults(func=_cmd_verify)

    sub = subs.add_parser("report", help="run both campaigns and write CSV reports")
    _common_flags(sub)
    sub.add_argument("--outdir", default="reports")
    sub.add_argument("--bump-golden", action="store_true", help="overwrite frozen constants")
    sub.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
