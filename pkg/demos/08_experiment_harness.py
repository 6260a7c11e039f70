"""The experiment harness: presets, seeded runs, CSV traces, summaries.

Runs a shortened desk-h2 comparison (T=120 instead of 500) so the demo
finishes in under a minute.  The full acceptance-scale presets are listed by
`combandit presets`.

Run: python demos/08_experiment_harness.py
"""

import tempfile
from pathlib import Path

from combandit.config import preset, preset_names
from combandit.harness import parse_csv, run_experiment, summarize, write_traces

print("built-in presets:", ", ".join(preset_names()), "\n")

results = {}
for algo in ("cnucb", "cnts", "comblinucb", "comblints"):
    cfg = preset("desk-h2")
    cfg.algorithm = algo
    cfg.T = 120  # shortened for the demo
    cfg.runs = 3
    cfg.base_seed = 7
    traces = run_experiment(cfg)
    stats = summarize(traces)
    results[algo] = stats
    print(f"{algo:11s} mean final regret {stats.final_mean_regret:7.2f}   "
          f"first-quarter {stats.first_quarter_avg:.3f} -> "
          f"last-quarter {stats.last_quarter_avg:.3f} per round")

out = Path(tempfile.mkdtemp()) / "demo-traces.csv"
cfg = preset("desk-h2")
cfg.algorithm = "cnucb"
cfg.T, cfg.runs, cfg.base_seed = 120, 3, 7
traces = run_experiment(cfg)
write_traces(out, traces, cfg)
meta, back = parse_csv(out.read_text())
print(f"\nwrote {out} ({len(back)} runs); metadata starts: {meta[:60]}...")
print("CSV parse round-trips exactly:", back == traces)
