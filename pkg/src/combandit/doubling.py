"""Horizon-free variants: epoch doubling with full-history replay.

The doubling wrapper runs an inner CN-UCB or CN-TS policy as usual until the
round counter reaches the current epoch period.  At the boundary the period
doubles, the network is rebuilt at the scheduled width with a fresh
initialization (same seed, so a constant-width schedule reproduces the same
initial parameters), the gram state resets, and the entire stored history is
replayed round by round: gradients are recomputed at the replayed parameters,
the rank-one updates reapplied, and training rerun on the live cadence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from combandit.errors import ConfigurationError, ContractError
from combandit.network import NetworkShape
from combandit.policies import CnTsPolicy, CnUcbPolicy, TrainConfig, TsConfig, UcbConfig


@dataclass
class EpochSchedule:
    """Doubling epochs: period T' = t0 * 2^epoch with a width schedule."""

    t0: int
    m0: int
    width_schedule: str = "constant"  # or "geometric"
    m_max: int = 1024
    epoch: int = 0

    def __post_init__(self):
        if self.t0 < 1:
            raise ConfigurationError("initial epoch period must be >= 1")
        if self.width_schedule not in ("constant", "geometric"):
            raise ConfigurationError(f"unknown width schedule {self.width_schedule!r}")

    @property
    def period(self) -> int:
        return self.t0 * 2**self.epoch

    def width(self) -> int:
        if self.width_schedule == "constant":
            return self.m0
        grown = self.m0 * 2 ** ((self.epoch + 1) // 2)
        return min(grown, self.m_max)


class DoublingPolicy:
    """CN-UCB-D / CN-TS-D: a neural policy that restarts at epoch boundaries."""

    def __init__(
        self,
        kind: str,
        d: int,
        depth: int,
        k: int,
        explore_cfg,
        train_cfg: TrainConfig,
        schedule: EpochSchedule,
        init_seed: int,
        rng: np.random.Generator | None = None,
    ):
        if kind not in ("cnucb", "cnts"):
            raise ConfigurationError(f"doubling supports cnucb/cnts, got {kind!r}")
        self.kind = kind
        self.d = d
        self.depth = depth
        self.k = k
        self.explore_cfg = explore_cfg
        self.train_cfg = train_cfg
        self.schedule = schedule
        self.init_seed = init_seed
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.inner = self._build()

    def _build(self):
        shape = NetworkShape(self.d, self.schedule.width(), self.depth)
        if self.kind == "cnucb":
            if not isinstance(self.explore_cfg, UcbConfig):
                raise ContractError("cnucb doubling needs a UcbConfig")
            return CnUcbPolicy(shape, self.k, self.explore_cfg, self.train_cfg,
                               self.init_seed, self.rng)
        if not isinstance(self.explore_cfg, TsConfig):
            raise ContractError("cnts doubling needs a TsConfig")
        return CnTsPolicy(shape, self.k, self.explore_cfg, self.train_cfg,
                          self.init_seed, self.rng)

    @property
    def t(self) -> int:
        return self.inner.t

    @property
    def history(self):
        return self.inner.history

    def adjusted_scores(self, contexts):
        return self.inner.adjusted_scores(contexts)

    def select(self, contexts, oracle=None):
        if oracle is None:
            return self.inner.select(contexts)
        return self.inner.select(contexts, oracle)

    def observe(self, contexts, scores) -> None:
        """Per-round update, then an epoch advance when t reaches the period."""
        self.inner.observe(contexts, scores)
        self.maybe_advance_epoch()

    def maybe_advance_epoch(self) -> bool:
        """Double the period and replay history when the boundary is hit."""
        if self.inner.t < self.schedule.period:
            return False
        history = self.inner.history
        self.schedule.epoch += 1
        replayed = self._build()
        for contexts, scores in history:
            replayed.observe(contexts, scores)
        self.inner = replayed
        return True
