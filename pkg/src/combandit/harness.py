"""Experiment runner: wires policies to environments and records regret.

Each run is an independent unit of work with its own seed, derived as
base_seed XOR run_id; runs may execute concurrently (COMBANDIT_WORKERS or the
`workers` config key set the pool size) and traces are always ordered by
run_id.  Traces persist as CSV with a `#`-prefixed metadata line holding the
resolved config and floats printed at 17 significant digits so parsing is
exact.
"""

from __future__ import annotations

import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from combandit.baselines import CombLinTsPolicy, CombLinUcbPolicy
from combandit.config import ExperimentConfig, config_to_pairs
from combandit.doubling import DoublingPolicy, EpochSchedule
from combandit.environments import Environment, FeedbackModel, ScoreFunctionSpec
from combandit.errors import DataError
from combandit.network import NetworkShape
from combandit.oracles import alpha_wrap, assignment_oracle, top_k
from combandit.policies import CnTsPolicy, CnUcbPolicy, TrainConfig, TsConfig, UcbConfig

CSV_HEADER = "run_id,t,instant_regret,cum_regret"


@dataclass
class RegretTrace:
    """Per-round instantaneous expected regret of one run."""

    run_id: int
    instant: np.ndarray

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.instant)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RegretTrace)
            and self.run_id == other.run_id
            and np.array_equal(self.instant, other.instant)
        )


def _build_environment(config: ExperimentConfig, rng) -> Environment:
    spec = ScoreFunctionSpec.random(config.score_fn, config.d, rng)
    kind = config.feedback_model
    if kind == "position_based":
        feedback = FeedbackModel(kind, chi=np.array(config.chi_values()))
    elif kind == "cascade":
        feedback = FeedbackModel(kind, psi=np.array(config.psi_values()))
    else:
        feedback = FeedbackModel(kind)
    return Environment(
        d=config.d,
        n_arms=config.N,
        k=config.K,
        score_spec=spec,
        noise_sd=config.noise_sd,
        feedback=feedback,
        pairing=config.pairing,
        renormalize=config.renormalize,
        rng=rng,
    )


def _train_config(config: ExperimentConfig) -> TrainConfig:
    return TrainConfig(
        lam=config.lam,
        eta=config.eta,
        epochs=config.epochs,
        train_every=config.train_every,
        batch_groups=config.batch_super_arms,
        mode=config.train_mode,
        full_steps=config.full_steps,
        warm_start=config.warm_start,
    )


def _build_policy(config: ExperimentConfig, policy_dim: int, init_seed: int, rng):
    algo = config.algorithm
    if config.doubling and algo in ("cnucb", "cnts"):
        algo = algo + "-d"
    if algo in ("comblinucb", "comblints"):
        if algo == "comblinucb":
            return CombLinUcbPolicy(policy_dim, config.K, config.alpha_lin, config.lam)
        return CombLinTsPolicy(policy_dim, config.K, config.nu, config.lam, rng)

    shape = NetworkShape(policy_dim, config.m, config.L)
    train_cfg = _train_config(config)
    ucb_cfg = UcbConfig(
        mode=config.explore_mode, gamma_const=config.gamma, lam=config.lam,
        s_norm=config.s_norm, sigma_sub=config.sigma_sub, delta=config.delta,
    )
    n_samples = 1 if algo in ("cnts1",) else config.M
    ts_cfg = TsConfig(
        mode=config.explore_mode, nu=config.nu, n_samples=n_samples,
        epsilon=config.epsilon, lam=config.lam,
    )
    if algo == "cnucb":
        return CnUcbPolicy(shape, config.K, ucb_cfg, train_cfg, init_seed, rng)
    if algo in ("cnts", "cnts1"):
        return CnTsPolicy(shape, config.K, ts_cfg, train_cfg, init_seed, rng)
    schedule = EpochSchedule(
        t0=config.epoch_t0, m0=config.m, width_schedule=config.width_schedule,
        m_max=config.m_max,
    )
    kind = "cnucb" if algo == "cnucb-d" else "cnts"
    explore = ucb_cfg if kind == "cnucb" else ts_cfg
    return DoublingPolicy(
        kind, policy_dim, config.L, config.K, explore, train_cfg, schedule,
        init_seed, rng,
    )


def _cascade_order(chosen, adjusted) -> tuple:
    """Rank the chosen arms into display slots by adjusted score."""
    chosen = list(chosen)
    vals = np.asarray([adjusted[a] for a in chosen])
    order = np.argsort(-vals, kind="stable")
    return tuple(chosen[i] for i in order)


def run_single(config: ExperimentConfig, run_id: int) -> RegretTrace:
    """Execute one seeded run of the configured policy/environment pair."""
    seed = config.base_seed ^ run_id
    env_ss, policy_ss, init_ss = np.random.SeedSequence(seed).spawn(3)
    env = _build_environment(config, np.random.default_rng(env_ss))
    init_seed = int(init_ss.generate_state(1)[0])
    policy = _build_policy(
        config, env.policy_dim, init_seed, np.random.default_rng(policy_ss)
    )
    oracle = alpha_wrap(top_k, config.alpha_oracle)  # delegates to top_k at alpha = 1
    position_mode = config.feedback_model == "position_based"
    cascade_mode = config.feedback_model == "cascade"

    instant = np.empty(config.T)
    for t in range(config.T):
        env.new_round()
        scores, offset = policy.adjusted_scores(env.policy_contexts())
        adjusted = scores + offset
        if position_mode:
            selection = assignment_oracle(adjusted.reshape(config.N, config.K))
            display = None
        else:
            selection = oracle(adjusted, config.K)
            display = _cascade_order(selection, adjusted) if cascade_mode else None
        outcome = env.observe_round(selection, display_order=display)
        instant[t] = env.expected_regret_increment(selection, alpha=config.alpha_oracle)
        policy.observe(outcome.contexts, outcome.scores)
    return RegretTrace(run_id=run_id, instant=instant)


def _worker_count(config: ExperimentConfig) -> int:
    env_value = os.environ.get("COMBANDIT_WORKERS", "").strip()
    if env_value:
        workers = int(env_value)
    elif config.workers > 0:
        workers = config.workers
    else:
        workers = min(config.runs, os.cpu_count() or 1)
    return max(1, workers)


def run_experiment(config: ExperimentConfig) -> list[RegretTrace]:
    """Run all seeded runs, concurrently when workers allow, ordered by run_id."""
    config.validate()
    workers = _worker_count(config)
    run_ids = list(range(config.runs))
    if workers == 1 or config.runs == 1:
        return [run_single(config, r) for r in run_ids]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(run_single, [config] * len(run_ids), run_ids))
    return sorted(results, key=lambda tr: tr.run_id)


@dataclass
class Summary:
    """Pointwise statistics across runs plus the sublinearity quarters."""

    mean_instant: np.ndarray
    std_instant: np.ndarray
    mean_cumulative: np.ndarray
    std_cumulative: np.ndarray
    first_quarter_avg: float
    last_quarter_avg: float

    @property
    def final_mean_regret(self) -> float:
        return float(self.mean_cumulative[-1])


def summarize(traces) -> Summary:
    """Pointwise mean and population std, plus quarter per-round averages."""
    if not traces:
        raise DataError("need at least one trace")
    lengths = {tr.instant.size for tr in traces}
    if len(lengths) != 1:
        raise DataError(f"ragged traces: lengths {sorted(lengths)}")
    inst = np.stack([tr.instant for tr in traces])
    cum = np.cumsum(inst, axis=1)
    horizon = inst.shape[1]
    quarter = max(1, horizon // 4)
    mean_inst = inst.mean(axis=0)
    return Summary(
        mean_instant=mean_inst,
        std_instant=inst.std(axis=0),
        mean_cumulative=cum.mean(axis=0),
        std_cumulative=cum.std(axis=0),
        first_quarter_avg=float(mean_inst[:quarter].mean()),
        last_quarter_avg=float(mean_inst[horizon - quarter :].mean()),
    )


def traces_to_csv(traces, config: ExperimentConfig) -> str:
    """Render traces with a resolved-config metadata line; exact round-trip."""
    out = io.StringIO()
    out.write(f"# {config_to_pairs(config)}\n")
    out.write(CSV_HEADER + "\n")
    for trace in traces:
        cum = 0.0
        for t, value in enumerate(trace.instant, start=1):
            cum += value
            out.write(f"{trace.run_id},{t},{value:.17g},{cum:.17g}\n")
    return out.getvalue()


def parse_csv(text: str) -> tuple[str, list[RegretTrace]]:
    """Parse the harness CSV; returns (metadata line, traces by run_id)."""
    meta = ""
    per_run: dict[int, list[float]] = {}
    lines = text.splitlines()
    idx = 0
    while idx < len(lines) and lines[idx].startswith("#"):
        meta = lines[idx][1:].strip()
        idx += 1
    if idx >= len(lines) or lines[idx] != CSV_HEADER:
        raise DataError(f"line {idx + 1}: expected header {CSV_HEADER!r}")
    for lineno, line in enumerate(lines[idx + 1 :], start=idx + 2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise DataError(f"line {lineno}: expected 4 fields, got {len(parts)}")
        run_id, t, instant, _cum = int(parts[0]), int(parts[1]), float(parts[2]), parts[3]
        rows = per_run.setdefault(run_id, [])
        if t != len(rows) + 1:
            raise DataError(f"line {lineno}: round {t} out of order for run {run_id}")
        rows.append(instant)
    return meta, [
        RegretTrace(run_id=r, instant=np.array(vals)) for r, vals in sorted(per_run.items())
    ]


def write_traces(path, traces, config: ExperimentConfig) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(traces_to_csv(traces, config))
