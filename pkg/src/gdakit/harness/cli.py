"""Command-line front end: gdakit {run,compare,pselect,check} CONFIG.json.

Exit codes: 0 success, 1 runtime failure (divergence, failed checks),
2 malformed configuration, 3 step-size constraint violation. The output
directory resolves as --out, then the config's out_dir, then $GDAKIT_OUT,
then ./runs.
"""

from __future__ import annotations

import argparse
import os
import sys

from gdakit.core import ConstraintError, GdakitError
from gdakit.harness.commands import cmd_check, cmd_compare, cmd_pselect, cmd_run
from gdakit.harness.config import ConfigError, load_config

OUT_ENV_VAR = "GDAKIT_OUT"


def _parse_seeds_flag(raw: str | None) -> list[int] | None:
    if raw is None:
        return None
    try:
        seeds = [int(s) for s in raw.split(",") if s.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"--seeds must be comma-separated integers: {exc}") from exc
    if not seeds:
        raise ConfigError("--seeds must name at least one seed")
    return seeds


def _resolve_out(flag: str | None, cfg: dict) -> str:
    if flag:
        return flag
    if cfg.get("out_dir"):
        return str(cfg["out_dir"])
    return os.environ.get(OUT_ENV_VAR, "runs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gdakit",
        description="Stochastic smoothed-gradient min-max solvers and checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = [
        ("run", "seeded optimizer runs with per-seed trace CSVs"),
        ("compare", "align several optimizers at equal gradient-eval budgets"),
        ("pselect", "pick the update probability for a horizon grid"),
        ("check", "audit a problem's oracle and certificate bounds"),
    ]
    for name, help_text in specs:
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("config", help="path to a JSON config file")
        sp.add_argument(
            "--out",
            default=None,
            help=f"output directory (default: config out_dir, then ${OUT_ENV_VAR}, then ./runs)",
        )
        if name in ("run", "compare"):
            sp.add_argument(
                "--seeds",
                default=None,
                help="comma-separated seeds overriding the config's list",
            )
            sp.add_argument(
                "--waive-constraints",
                action="store_true",
                help="skip step-size feasibility validation for this run",
            )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        out_dir = _resolve_out(args.out, cfg)
        # CLI overrides fold into the config before hashing so every output
        # is stamped with the settings that actually produced it.
        seeds = _parse_seeds_flag(getattr(args, "seeds", None))
        if seeds is not None:
            cfg = {**cfg, "seeds": seeds}
        if getattr(args, "waive_constraints", False):
            cfg = {**cfg, "waive_constraints": True}

        if args.command == "run":
            summary = cmd_run(cfg, out_dir)
            print(f"run: wrote {len(summary['seeds'])} trace(s) to {out_dir}")
        elif args.command == "compare":
            summary = cmd_compare(cfg, out_dir)
            print(
                f"compare: {len(summary['series'])} series x "
                f"{len(summary['seeds'])} seed(s), "
                f"{summary['rows']} aligned rows, budget "
                f"{summary['eval_budget']} evals -> {out_dir}"
            )
        elif args.command == "pselect":
            summary = cmd_pselect(cfg, out_dir)
            ada = summary["ada_schedule"]
            print(
                f"pselect: delta={summary['delta']:.6g}, schedule "
                f"p0={ada['p0']:.6g} n1={ada['n1']} n2={ada['n2']} -> {out_dir}"
            )
        else:
            report = cmd_check(cfg, out_dir)
            if not report["passed"]:
                failed = [
                    k
                    for k in ("oracle", "contraction", "descent")
                    if k in report and not report[k]["passed"]
                ]
                print(
                    f"check: FAILED ({', '.join(failed)}); see {out_dir}/check.json",
                    file=sys.stderr,
                )
                return 1
            print(f"check: all checks passed -> {out_dir}/check.json")
    except ConfigError as exc:
        print(f"gdakit: config error: {exc}", file=sys.stderr)
        return 2
    except ConstraintError as exc:
        print(f"gdakit: constraint violation: {exc}", file=sys.stderr)
        return 3
    except GdakitError as exc:
        print(f"gdakit: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
