"""Command-line interface.

Subcommands:
  run      execute an experiment config and persist regret traces as CSV
  ntk      NTK diagnostics report (effective dimension, min eigenvalue, width)
  presets  list the built-in experiment presets

Exit codes: 0 success, 2 configuration error, 1 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from combandit.config import apply_overrides, load_config, preset, preset_names
from combandit.environments import gen_contexts
from combandit.errors import ConfigurationError
from combandit.harness import run_experiment, summarize, write_traces
from combandit.ntk import NTK_CONTEXT_CAP, effective_dimension, ntk_matrix, width_report


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="combandit",
        description="Combinatorial neural bandit experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment and write trace CSV")
    run_p.add_argument("--config", required=True, help="flat key=value config file")
    run_p.add_argument(
        "--override", action="append", default=[], metavar="KEY=VALUE",
        help="override a config key (repeatable)",
    )
    run_p.add_argument("--out", required=True, help="output directory for the CSV")

    ntk_p = sub.add_parser("ntk", help="NTK diagnostics for a config")
    ntk_p.add_argument("--config", required=True)
    ntk_p.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    ntk_p.add_argument("--cap", type=int, default=NTK_CONTEXT_CAP,
                       help="max contexts used for the NTK matrix")
    ntk_p.add_argument("--h-csv", default="", help="optional path to dump H as CSV")

    sub.add_parser("presets", help="list built-in presets")
    return parser


def _cmd_run(args) -> int:
    config = apply_overrides(load_config(args.config), args.override).validate()
    traces = run_experiment(config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / config.output
    write_traces(out_path, traces, config)
    stats = summarize(traces)
    print(f"wrote {out_path}")
    print(f"final_mean_cumulative_regret={stats.final_mean_regret:.6g}")
    print(f"first_quarter_avg={stats.first_quarter_avg:.6g}")
    print(f"last_quarter_avg={stats.last_quarter_avg:.6g}")
    return 0


def _cmd_ntk(args) -> int:
    config = apply_overrides(load_config(args.config), args.override).validate()
    total = config.T * config.N
    n_ctx = min(total, max(1, args.cap))
    rng = np.random.default_rng(config.base_seed)
    contexts = gen_contexts(config.d, n_ctx, config.pairing, rng)
    H = ntk_matrix(contexts, config.L)
    eigs = np.linalg.eigvalsh(H)
    report = effective_dimension(H, config.lam, config.T, config.N)
    width = width_report(
        config.T, config.N, config.K, config.L, config.lam,
        max(float(eigs.min()), 1e-12), config.delta, config.m,
    )
    print(f"contexts_used={n_ctx}")
    print(f"subsampled={'true' if n_ctx < total else 'false'}")
    print(f"effective_dimension={report.d_eff:.12g}")
    print(f"log_det={report.log_det:.12g}")
    print(f"lambda_min_H={eigs.min():.12g}")
    for clause in width.clauses:
        print(f"width_{clause.name}={'pass' if clause.satisfied else 'fail'}")
        print(f"width_{clause.name}_required_m={clause.required_m:.6g}")
    print(f"width_binding={width.binding}")
    print(f"width_all_pass={'true' if width.all_satisfied else 'false'}")
    if args.h_csv:
        np.savetxt(args.h_csv, H, delimiter=",")
        print(f"wrote {args.h_csv}")
    return 0


def _cmd_presets() -> int:
    for name in preset_names():
        cfg = preset(name)
        fields = ("d", "N", "K", "T", "score_fn", "m", "L", "runs",
                  "train_every", "epochs", "eta", "noise_sd")
        rendered = " ".join(f"{f}={getattr(cfg, f)}" for f in fields)
        print(f"{name}: {rendered}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors
        return int(exc.code or 0)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "ntk":
            return _cmd_ntk(args)
        return _cmd_presets()
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
