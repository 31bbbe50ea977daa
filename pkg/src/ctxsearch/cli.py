"""Command-line interface for the experiment harness.

Exit codes: 0 success, 2 configuration error, 3 runtime/budget error,
4 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .errors import BudgetExhaustedError, CtxSearchError
from .harness import ExperimentConfig, run_with_timing

_DEFAULTS = {
    "convergence": dict(
        d="2,5,10", budgets="1000,3162,10000,31623,100000", trials=50, rho=""
    ),
    "dims": dict(d="3,6,12", budgets="30000", trials=50, rho=""),
    "ratio": dict(d="2", budgets="10000", trials=50, rho="0,0.5,1,2,4"),
    "single": dict(d="2", budgets="10000", trials=1, rho=""),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctxsearch",
        description=(
            "Synthetic benchmarks for active learning in contextual search "
            "with binary feedback"
        ),
    )
    sub = parser.add_subparsers(dest="study", required=True)
    for study in _DEFAULTS:
        p = sub.add_parser(study, help=f"run the {study} study")
        p.add_argument("--d", help="comma-separated dimensions")
        p.add_argument("--budgets", help="comma-separated label budgets")
        p.add_argument("--trials", type=int, help="trials per cell")
        p.add_argument("--seed", type=int, help="experiment seed")
        p.add_argument("--preset", choices=["paper-sec5", "theorem1"])
        p.add_argument("--rho", help="comma-separated unlabeled/labeled ratios")
        p.add_argument("--out", help="output CSV path")
        p.add_argument("--workers", type=int, help="parallel worker processes")
        p.add_argument("--config", help="key=value file mirroring the flags")
    return parser


def _parse_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def _resolve(args: argparse.Namespace) -> ExperimentConfig:
    study = args.study
    file_vals: dict[str, str] = {}
    if args.config:
        file_vals = _parse_config_file(args.config)
        unknown = set(file_vals) - {
            "d", "budgets", "trials", "seed", "preset", "rho", "out", "workers"
        }
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")

    def pick(flag, default, cast=str):
        cli_val = getattr(args, flag)
        if cli_val is not None:
            return cli_val
        if flag in file_vals:
            return cast(file_vals[flag])
        return default

    defaults = _DEFAULTS[study]
    d_list = tuple(int(round(float(v))) for v in str(pick("d", defaults["d"])).split(","))
    budgets = tuple(
        int(round(float(v))) for v in str(pick("budgets", defaults["budgets"])).split(",")
    )
    rho_raw = str(pick("rho", defaults["rho"]))
    rho_list = tuple(float(v) for v in rho_raw.split(",") if v != "")
    return ExperimentConfig(
        study=study,
        d_list=d_list,
        label_budgets=budgets,
        trials=int(pick("trials", defaults["trials"], int)),
        seed=int(pick("seed", 20240, int)),
        preset=pick("preset", "paper-sec5"),
        rho_list=rho_list,
        out_path=pick("out", f"{study}.csv"),
        workers=int(pick("workers", 1, int)),
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
    except (ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        run_with_timing(cfg)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except (BudgetExhaustedError, CtxSearchError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
