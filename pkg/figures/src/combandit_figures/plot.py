"""Cumulative-regret figure from harness trace CSVs.

Each input series is one CSV in the trace schema (a `#` metadata line, a
`run_id,t,instant_regret,cum_regret` header, then rows).  The figure shows
the per-round mean cumulative regret per series with a shaded +/- one
population-std band, plus an optional theory-envelope overlay given as a
two-column `t,value` CSV.

Invocation:

    plot --out FILE --series LABEL=PATH [--series ...] [--envelope PATH]

Exit codes: 0 success, 1 schema mismatch (reports the offending line), 2
usage errors.
"""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

CSV_HEADER = "run_id,t,instant_regret,cum_regret"


class SchemaError(Exception):
    """Trace CSV does not match the harness schema."""

    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")
        self.lineno = lineno


def read_series(path):
    """Parse one trace CSV into a runs x T matrix of cumulative regret."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    idx = 0
    while idx < len(lines) and lines[idx].startswith("#"):
        idx += 1
    if idx >= len(lines) or lines[idx] != CSV_HEADER:
        raise SchemaError(path, idx + 1, f"expected header {CSV_HEADER!r}")
    per_run: dict[int, list[float]] = {}
    for lineno, line in enumerate(lines[idx + 1 :], start=idx + 2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise SchemaError(path, lineno, f"expected 4 fields, got {len(parts)}")
        try:
            run_id, t = int(parts[0]), int(parts[1])
            cum = float(parts[3])
        except ValueError as exc:
            raise SchemaError(path, lineno, str(exc)) from exc
        rows = per_run.setdefault(run_id, [])
        if t != len(rows) + 1:
            raise SchemaError(path, lineno, f"round {t} out of order for run {run_id}")
        rows.append(cum)
    if not per_run:
        raise SchemaError(path, idx + 2, "no data rows")
    lengths = {len(rows) for rows in per_run.values()}
    if len(lengths) != 1:
        raise SchemaError(path, len(lines), f"runs have ragged lengths {sorted(lengths)}")
    return np.array([per_run[r] for r in sorted(per_run)])


def series_stats(path):
    """(rounds, mean, std) of cumulative regret across runs; population std."""
    cum = read_series(path)
    t = np.arange(1, cum.shape[1] + 1)
    return t, cum.mean(axis=0), cum.std(axis=0)


def read_envelope(path):
    """Two-column `t,value` CSV for the theory overlay."""
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise SchemaError(path, 1, f"envelope needs 2 columns, got {data.shape[1]}")
    return data[:, 0], data[:, 1]


def build_figure(series, envelope=None, title=""):
    """Render the mean +/- std figure; series is [(label, path), ...]."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5), dpi=150)
    for label, path in series:
        t, mean, std = series_stats(path)
        ax.plot(t, mean, label=label, linewidth=1.6)
        ax.fill_between(t, mean - std, mean + std, alpha=0.2, linewidth=0)
    if envelope is not None:
        t_env, v_env = read_envelope(envelope)
        ax.plot(t_env, v_env, label="theory envelope", linestyle="--",
                color="black", linewidth=1.2)
    ax.set_xlabel("round")
    ax.set_ylabel("cumulative regret")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    return fig


def _parse_series(values):
    series = []
    for value in values:
        if "=" not in value:
            raise argparse.ArgumentTypeError(f"series {value!r} is not LABEL=PATH")
        label, path = value.split("=", 1)
        series.append((label, path))
    return series


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot", description="Cumulative-regret figure from trace CSVs"
    )
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--series", action="append", required=True,
                        metavar="LABEL=PATH", help="one labeled trace CSV (repeatable)")
    parser.add_argument("--envelope", default="", help="optional t,value overlay CSV")
    parser.add_argument("--title", default="", help="figure title")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        series = _parse_series(args.series)
    except argparse.ArgumentTypeError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    try:
        fig = build_figure(series, envelope=args.envelope or None, title=args.title)
        fig.savefig(args.out)
        plt.close(fig)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
