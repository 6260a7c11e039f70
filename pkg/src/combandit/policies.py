"""CN-UCB and CN-TS policies.

Both policies score arms with the neural network at the previous round's
parameters, add exploration (a weighted-norm bonus for UCB, optimistic
Gaussian sampling for TS), pass the adjusted scores plus a scalar offset to a
combinatorial oracle, then absorb the observed feedback: K rank-one design
updates with gradients at the round-start parameters, followed by network
training on the stored history per the training schedule.

Practical mode uses the flat settings gamma = const, offset = 0 (UCB) and a
fixed sampling variance (TS).  Theory mode evaluates the full exploration
schedule with configurable constants, all defaulting to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from combandit.design import DesignState
from combandit.errors import ConfigurationError, ContractError
from combandit.network import (
    NetworkShape,
    TrainingBatch,
    forward_many,
    gradient_many,
    init_params,
    train,
)
from combandit.oracles import top_k

OPTIMISM_PROB = 1.0 / (4.0 * math.e * math.sqrt(math.pi))


def theory_sample_count(k: int) -> int:
    """Optimistic sample count: smallest M with (1 - p)^M <= 1/K, at least 1.

    p = 1/(4 e sqrt(pi)) is the per-sample optimism probability floor; K = 4
    gives 27.
    """
    if k < 1:
        raise ConfigurationError(f"super-arm size K={k} must be >= 1")
    if k == 1:
        return 1
    return max(1, math.ceil(math.log(k) / -math.log1p(-OPTIMISM_PROB)))


def select_super_arm(adjusted_scores, k: int, oracle=top_k):
    """Delegate the adjusted scores to the combinatorial oracle."""
    return oracle(adjusted_scores, k)


@dataclass
class TrainConfig:
    """Network training schedule shared by both policies."""

    lam: float = 1.0
    eta: float = 0.01
    epochs: int = 100  # minibatch passes over the stored history per call
    train_every: int = 10  # rounds between training calls (0 = never)
    batch_groups: int = 100  # super-arm groups per SGD step
    mode: str = "minibatch"  # or "full"
    full_steps: int = 100  # gradient steps per call in full mode (theory J)
    warm_start: bool = True  # resume from theta_{t-1}; False restarts at theta_0


@dataclass
class UcbConfig:
    """CN-UCB exploration settings."""

    mode: str = "practical"  # or "theory"
    gamma_const: float = 1.0
    lam: float = 1.0
    s_norm: float = 1.0
    sigma_sub: float = 1.0
    delta: float = 0.1
    c_gamma1: float = 1.0
    c_gamma2: float = 1.0
    c_gamma3: float = 1.0
    c_1: float = 1.0
    c_3: float = 1.0
    c_4: float = 1.0

    def __post_init__(self):
        if self.lam <= 0:
            raise ConfigurationError("lambda must be positive")
        if not 0.0 < self.delta < 1.0:
            raise ConfigurationError("delta must be in (0, 1)")
        if self.gamma_const < 0:
            raise ConfigurationError("gamma must be nonnegative")


@dataclass
class TsConfig:
    """CN-TS exploration settings."""

    mode: str = "practical"
    nu: float = 1.0
    n_samples: int = 10  # M optimistic samples per arm
    epsilon: float = 0.0  # score offset passed to the oracle
    lam: float = 1.0

    def __post_init__(self):
        if self.nu < 0:
            raise ConfigurationError("nu must be nonnegative")
        if self.n_samples < 1:
            raise ConfigurationError("sample count M must be >= 1")
        if self.lam <= 0:
            raise ConfigurationError("lambda must be positive")


class _NeuralPolicy:
    """State shared by CN-UCB and CN-TS: network, design matrix, history."""

    def __init__(
        self,
        shape: NetworkShape,
        k: int,
        lam: float,
        train_cfg: TrainConfig,
        init_seed: int,
        rng: np.random.Generator | None = None,
    ):
        self.shape = shape
        self.k = k
        self.train_cfg = train_cfg
        self.params_0 = init_params(shape, init_seed)
        self.params = self.params_0.copy()
        self.design = DesignState(shape.p, lam)
        self.history: list[tuple[np.ndarray, np.ndarray]] = []
        self.t = 0  # completed rounds
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self._sqrt_m = math.sqrt(shape.m)

    def predict(self, contexts) -> np.ndarray:
        """f(x; theta_{t-1}) per context row."""
        return forward_many(self.shape, self.params, contexts)

    def _scaled_gradients(self, contexts) -> np.ndarray:
        """g(x; theta_{t-1}) / sqrt(m), one row per context."""
        return gradient_many(self.shape, self.params, contexts) / self._sqrt_m

    def exploration_widths(self, contexts) -> np.ndarray:
        """Round-start weighted norms ||g / sqrt(m)||_{Z^{-1}} per context."""
        return self.design.weighted_norms(self._scaled_gradients(contexts))

    def observe(self, contexts, scores) -> None:
        """Absorb one round of feedback for the observed arms.

        contexts holds the observed arms' context rows (K of them under
        semi-bandit feedback, possibly fewer for cascade prefixes); gradients
        are taken at the round-start parameters, all rank-one updates use the
        round-start inverse for the diagnostic norms, and training follows the
        configured cadence.
        """
        contexts = np.atleast_2d(np.asarray(contexts, dtype=np.float64))
        scores = np.asarray(scores, dtype=np.float64).ravel()
        if contexts.shape[0] != scores.size:
            raise ContractError("one score per observed context required")
        U = self._scaled_gradients(contexts)
        norms = self.design.weighted_norms(U)
        self.design.record_group_norms(norms**2)
        self.design.update_many(U)
        self.history.append((contexts.copy(), scores.copy()))
        self.t += 1
        self._train_if_due()

    def _train_if_due(self) -> None:
        cfg = self.train_cfg
        if cfg.train_every <= 0 or self.t % cfg.train_every != 0:
            return
        batch = TrainingBatch.from_groups(self.history)
        if cfg.mode == "full":
            steps = cfg.full_steps
        else:
            passes = max(1, math.ceil(batch.n_groups / cfg.batch_groups))
            steps = cfg.epochs * passes
        start = self.params if cfg.warm_start else self.params_0
        self.params = train(
            self.shape,
            self.params_0,
            start,
            batch,
            lam=cfg.lam,
            eta=cfg.eta,
            steps=steps,
            mode=cfg.mode,
            batch_groups=cfg.batch_groups,
            rng=self.rng,
        )


class CnUcbPolicy(_NeuralPolicy):
    """Combinatorial neural UCB."""

    def __init__(self, shape, k, config: UcbConfig, train_cfg: TrainConfig,
                 init_seed: int, rng=None):
        super().__init__(shape, k, config.lam, train_cfg, init_seed, rng)
        self.config = config

    def _gamma(self) -> float:
        """Exploration factor gamma_{t-1} from the end-of-previous-round state."""
        cfg = self.config
        if cfg.mode == "practical":
            return cfg.gamma_const
        t = self.t  # completed rounds: the schedule index of gamma
        k, L = self.k, self.shape.L
        m, lam = self.shape.m, cfg.lam
        sqrt_log_m = math.sqrt(math.log(m))
        g1 = math.sqrt(
            1.0 + cfg.c_gamma1 * t ** (7 / 6) * k ** (7 / 6) * L**4 * lam ** (-7 / 6)
            * m ** (-1 / 6) * sqrt_log_m
        )
        g2 = cfg.c_gamma2 * t ** (5 / 3) * k ** (5 / 3) * L**4 * lam ** (-1 / 6) \
            * m ** (-1 / 6) * sqrt_log_m
        g3 = cfg.c_gamma3 * t ** (7 / 6) * k ** (7 / 6) * L ** 3.5 * lam ** (-7 / 6) \
            * m ** (-1 / 6) * sqrt_log_m * (1.0 + math.sqrt(t * k / lam))
        inner = self.design.log_det_ratio() + g2 - 2.0 * math.log(cfg.delta)
        head = g1 * (cfg.sigma_sub * math.sqrt(inner) + math.sqrt(lam) * cfg.s_norm)
        decay_base = max(0.0, 1.0 - self.train_cfg.eta * m * lam)
        # the optimization-error term assumes full-batch descent; under the
        # mini-batch schedule the pass count stands in for the step count
        if self.train_cfg.mode == "full":
            steps = self.train_cfg.full_steps
        else:
            steps = self.train_cfg.epochs
        tail = (lam + cfg.c_1 * t * k * L) * (
            decay_base ** (steps / 2.0) * math.sqrt(t * k / lam) + g3
        )
        return head + tail

    def _offset(self, gamma: float) -> float:
        """Round offset e_t ensuring surrogate optimism (0 in practical mode)."""
        cfg = self.config
        if cfg.mode == "practical":
            return 0.0
        t = self.t + 1  # current round index
        k, L = self.k, self.shape.L
        m, lam = self.shape.m, cfg.lam
        sqrt_log_m = math.sqrt(math.log(m))
        first = cfg.c_3 * gamma * t ** (1 / 6) * k ** (1 / 6) * L ** 3.5 \
            * lam ** (-2 / 3) * m ** (-1 / 6) * sqrt_log_m
        second = cfg.c_4 * t ** (2 / 3) * k ** (2 / 3) * lam ** (-2 / 3) \
            * m ** (-1 / 6) * sqrt_log_m
        return first + second

    def arm_scores(self, contexts) -> tuple[np.ndarray, float]:
        """Upper confidence scores u_{t,i} and the round offset e_t."""
        gamma = self._gamma()
        u = self.predict(contexts) + gamma * self.exploration_widths(contexts)
        return u, self._offset(gamma)

    adjusted_scores = arm_scores

    def select(self, contexts, oracle=top_k):
        u, offset = self.arm_scores(contexts)
        return select_super_arm(u + offset, self.k, oracle)


class CnTsPolicy(_NeuralPolicy):
    """Combinatorial neural Thompson sampling with optimistic multi-sampling."""

    def __init__(self, shape, k, config: TsConfig, train_cfg: TrainConfig,
                 init_seed: int, rng=None):
        super().__init__(shape, k, config.lam, train_cfg, init_seed, rng)
        self.config = config

    def sampled_scores(self, contexts) -> tuple[np.ndarray, float]:
        """Optimistic samples: max of M draws from N(f, nu^2 sigma^2) per arm."""
        cfg = self.config
        f = self.predict(contexts)
        sigma = np.sqrt(cfg.lam) * self.exploration_widths(contexts)
        draws = self.rng.standard_normal((f.size, cfg.n_samples))
        sampled = f[:, None] + cfg.nu * sigma[:, None] * draws
        return sampled.max(axis=1), cfg.epsilon

    adjusted_scores = sampled_scores

    def select(self, contexts, oracle=top_k):
        v, offset = self.sampled_scores(contexts)
        return select_super_arm(v + offset, self.k, oracle)
