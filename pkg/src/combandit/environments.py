"""Synthetic semi-bandit environments.

Each round the environment draws N unit-norm contexts, scores arms with a
hidden function h (linear, quadratic, or cosine in a fixed hidden direction),
adds Gaussian noise, and emits feedback according to the configured model:

- semi_bandit / document_based: all K chosen scores are observed;
- position_based: the score of an arm depends on its slot through a position
  quality chi(k), and the policy scores (arm, position) pairs on contexts
  augmented with a one-hot position encoding;
- cascade: a simulated user scans the ranked slots and stops at the first
  click, so only a prefix of discounted scores is observed.

Expected regret is accounted against the offline optimal super arm under the
hidden expected scores.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from combandit.errors import ConfigurationError, ContractError
from combandit.oracles import assignment_oracle, top_k

SCORE_KINDS = ("h1_linear", "h2_quadratic", "h3_cosine")
FEEDBACK_KINDS = ("semi_bandit", "document_based", "position_based", "cascade")


def sum_reward(super_arm, scores) -> float:
    """Default super-arm reward: sum of the chosen arms' scores."""
    scores = np.asarray(scores, dtype=np.float64)
    return float(scores[list(super_arm)].sum())


def probe_monotonicity(reward_fn, n_arms: int, k: int, trials: int, rng) -> bool:
    """Check that raising any single score never lowers the reward."""
    for _ in range(trials):
        v = rng.uniform(-1.0, 1.0, n_arms)
        arm = tuple(sorted(rng.choice(n_arms, size=k, replace=False).tolist()))
        i = int(rng.integers(n_arms))
        v2 = v.copy()
        v2[i] += float(rng.uniform(0.0, 1.0))
        if reward_fn(arm, v2) < reward_fn(arm, v) - 1e-12:
            return False
    return True


def probe_lipschitz(reward_fn, c0: float, n_arms: int, k: int, trials: int, rng) -> bool:
    """Check |R(S, v) - R(S, v')| <= c0 * l2 distance on the chosen arms.

    Perturbs one chosen-arm score per trial, mirroring the monotonicity
    probe's raise-one-score style (the sum reward then needs only c0 = 1).
    """
    for _ in range(trials):
        v = rng.uniform(-1.0, 1.0, n_arms)
        arm = tuple(sorted(rng.choice(n_arms, size=k, replace=False).tolist()))
        i = arm[int(rng.integers(k))]
        v2 = v.copy()
        v2[i] += float(rng.normal(0.0, 0.5))
        gap = abs(reward_fn(arm, v2) - reward_fn(arm, v))
        dist = float(np.sqrt(np.sum((v2[list(arm)] - v[list(arm)]) ** 2)))
        if gap > c0 * dist + 1e-9:
            return False
    return True


def gen_contexts(d: int, n_arms: int, pairing: bool, rng) -> np.ndarray:
    """Sample unit-sphere contexts; with pairing, both halves coincide."""
    if pairing:
        if d % 2 != 0:
            raise ConfigurationError(f"pairing requires even d, got {d}")
        z = rng.standard_normal((n_arms, d // 2))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        return np.concatenate([z, z], axis=1) / np.sqrt(2.0)
    x = rng.standard_normal((n_arms, d))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x


@dataclass(frozen=True)
class ScoreFunctionSpec:
    """Hidden score function: kind plus the fixed unit direction a."""

    kind: str
    a: np.ndarray

    def __post_init__(self):
        if self.kind not in SCORE_KINDS:
            raise ConfigurationError(f"unknown score function {self.kind!r}")
        a = np.asarray(self.a, dtype=np.float64)
        if abs(np.linalg.norm(a) - 1.0) > 1e-9:
            raise ConfigurationError("hidden direction a must be unit-norm")
        object.__setattr__(self, "a", a)

    @classmethod
    def random(cls, kind: str, d: int, rng) -> "ScoreFunctionSpec":
        a = rng.standard_normal(d)
        a /= np.linalg.norm(a)
        return cls(kind, a)


def true_scores(spec: ScoreFunctionSpec, X) -> np.ndarray:
    """Evaluate the hidden score function on rows of X."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != spec.a.size:
        raise ContractError(f"context dim {X.shape[1]} != hidden dim {spec.a.size}")
    proj = X @ spec.a
    if spec.kind == "h1_linear":
        return proj
    if spec.kind == "h2_quadratic":
        return proj**2
    return np.cos(np.pi * proj)


def true_score(spec: ScoreFunctionSpec, x) -> float:
    return float(true_scores(spec, np.asarray(x, dtype=np.float64)[None, :])[0])


@dataclass(frozen=True)
class FeedbackModel:
    """Feedback kind plus its position parameters (quality chi, discounts psi)."""

    kind: str = "semi_bandit"
    chi: np.ndarray | None = None  # position quality, position_based
    psi: np.ndarray | None = None  # position discounts, cascade

    def __post_init__(self):
        if self.kind not in FEEDBACK_KINDS:
            raise ConfigurationError(f"unknown feedback model {self.kind!r}")
        for name in ("chi", "psi"):
            val = getattr(self, name)
            if val is not None:
                val = np.asarray(val, dtype=np.float64)
                if val.min() < 0.0 or val.max() > 1.0:
                    raise ConfigurationError(f"{name} values must lie in [0, 1]")
                object.__setattr__(self, name, val)
        if self.kind == "position_based" and self.chi is None:
            raise ConfigurationError("position_based feedback needs chi")
        if self.kind == "cascade" and self.psi is None:
            raise ConfigurationError("cascade feedback needs psi")


def position_augmented_dim(d: int, k: int) -> int:
    """Input dim after appending a one-hot position code (padded to even)."""
    dim = d + k
    return dim + (dim % 2)


def augment_with_positions(contexts: np.ndarray, k: int) -> np.ndarray:
    """(N, d) contexts -> (N*K, d_aug) rows ordered arm-major by position.

    Row arm * K + pos is [x_arm, onehot(pos), (pad)] / sqrt(2), unit-norm.
    """
    contexts = np.atleast_2d(contexts)
    n, d = contexts.shape
    dim = position_augmented_dim(d, k)
    out = np.zeros((n * k, dim))
    for pos in range(k):
        rows = np.arange(n) * k + pos
        out[rows, :d] = contexts
        out[rows, d + pos] = 1.0
    return out / np.sqrt(2.0)


@dataclass
class RoundOutcome:
    """Feedback of one played round plus hidden bookkeeping for regret."""

    arms: tuple  # arms in display order (possibly a prefix for cascade)
    positions: tuple  # slot of each observed arm
    contexts: np.ndarray  # the context rows the policy should learn from
    scores: np.ndarray  # observed (noisy, possibly discounted) scores
    f_count: int  # number of observed slots
    realized_reward: float
    expected_scores: np.ndarray = field(repr=False)  # hidden v* for this round


class Environment:
    """Stateful round generator; owns its RNG stream."""

    def __init__(
        self,
        d: int,
        n_arms: int,
        k: int,
        score_spec: ScoreFunctionSpec,
        noise_sd: float = 0.1,
        feedback: FeedbackModel | None = None,
        pairing: bool = True,
        renormalize: bool = False,
        reward_fn=None,
        rng=None,
    ):
        if not 1 <= k <= n_arms:
            raise ConfigurationError(f"need 1 <= K <= N, got K={k}, N={n_arms}")
        if noise_sd < 0:
            raise ConfigurationError("noise_sd must be nonnegative")
        self.d = d
        self.n_arms = n_arms
        self.k = k
        self.score_spec = score_spec
        self.noise_sd = float(noise_sd)
        self.feedback = feedback or FeedbackModel("semi_bandit")
        self.pairing = pairing
        self.renormalize = renormalize
        self.reward_fn = reward_fn or sum_reward
        self.rng = rng if rng is not None else np.random.default_rng(0)
        if self.feedback.kind == "position_based" and self.feedback.chi.size != k:
            raise ConfigurationError("chi must have one entry per position")
        if self.feedback.kind == "cascade" and self.feedback.psi.size != k:
            raise ConfigurationError("psi must have one entry per position")
        self.contexts: np.ndarray | None = None
        self._base_scores: np.ndarray | None = None  # h(x) per arm, this round

    def _hidden(self, X) -> np.ndarray:
        h = true_scores(self.score_spec, X)
        if self.renormalize:
            h = (h + 1.0) / 2.0
        return h

    def new_round(self) -> np.ndarray:
        """Draw this round's contexts and cache the hidden expected scores."""
        self.contexts = gen_contexts(self.d, self.n_arms, self.pairing, self.rng)
        self._base_scores = self._hidden(self.contexts)
        return self.contexts

    @property
    def policy_dim(self) -> int:
        """Input dim the policy network must use for this feedback model."""
        if self.feedback.kind == "position_based":
            return position_augmented_dim(self.d, self.k)
        return self.d

    def policy_contexts(self) -> np.ndarray:
        """Context rows to score: (N, d), or (N*K, d_aug) for position_based."""
        if self.contexts is None:
            raise ContractError("call new_round() first")
        if self.feedback.kind == "position_based":
            return augment_with_positions(self.contexts, self.k)
        return self.contexts

    def expected_score_matrix(self) -> np.ndarray:
        """Hidden expected scores: (N,) vector or (N, K) position matrix."""
        if self._base_scores is None:
            raise ContractError("call new_round() first")
        if self.feedback.kind == "position_based":
            return np.outer(self._base_scores, self.feedback.chi)
        return self._base_scores

    def _check_super_arm(self, arms) -> list[int]:
        arms = [int(a) for a in arms]
        if len(arms) != self.k or len(set(arms)) != self.k:
            raise ContractError(f"super arm must hold {self.k} distinct arms")
        if min(arms) < 0 or max(arms) >= self.n_arms:
            raise ContractError("arm index out of range")
        return arms

    def observe_round(self, chosen, display_order=None) -> RoundOutcome:
        """Play a super arm (or assignment) and emit feedback.

        chosen is an ascending super arm for set feedback models, or an
        assignment ((arm, position), ...) for position_based.  display_order,
        when given, ranks the chosen arms into slots (cascade cares).
        """
        if self._base_scores is None:
            raise ContractError("call new_round() first")
        kind = self.feedback.kind

        if kind == "position_based":
            arms = tuple(int(a) for a, _ in chosen)
            positions = tuple(int(p) for _, p in chosen)
            if sorted(positions) != list(range(self.k)) or len(set(arms)) != self.k:
                raise ContractError("invalid assignment")
            base = self._base_scores[list(arms)]
            noise = self.rng.normal(0.0, self.noise_sd, self.k)
            scores = base * self.feedback.chi[list(positions)] + noise
            ctx = augment_with_positions(self.contexts, self.k)
            rows = [arm * self.k + pos for arm, pos in zip(arms, positions)]
            return RoundOutcome(
                arms=arms,
                positions=positions,
                contexts=ctx[rows],
                scores=scores,
                f_count=self.k,
                realized_reward=float(scores.sum()),
                expected_scores=self.expected_score_matrix(),
            )

        arms = self._check_super_arm(display_order if display_order is not None else chosen)
        base = self._base_scores[arms]
        noise = self.rng.normal(0.0, self.noise_sd, self.k)

        if kind == "cascade":
            psi = self.feedback.psi
            attract = np.clip(base * psi, 0.0, 1.0)
            clicks = self.rng.uniform(size=self.k) < attract
            f_count = int(np.argmax(clicks)) + 1 if clicks.any() else self.k
            scores = psi[:f_count] * (base[:f_count] + noise[:f_count])
            observed = arms[:f_count]
            return RoundOutcome(
                arms=tuple(observed),
                positions=tuple(range(f_count)),
                contexts=self.contexts[observed],
                scores=scores,
                f_count=f_count,
                realized_reward=float(scores.sum()),
                expected_scores=self._base_scores.copy(),
            )

        # semi_bandit and document_based: every chosen score is observed
        scores = base + noise
        return RoundOutcome(
            arms=tuple(arms),
            positions=tuple(range(self.k)),
            contexts=self.contexts[arms],
            scores=scores,
            f_count=self.k,
            realized_reward=self.reward_fn(tuple(range(self.k)), scores),
            expected_scores=self._base_scores.copy(),
        )

    def optimal_selection(self):
        """Offline optimal super arm (or assignment) under expected scores."""
        if self.feedback.kind == "position_based":
            return assignment_oracle(self.expected_score_matrix())
        return top_k(self._base_scores, self.k)

    def _selection_value(self, chosen) -> float:
        if self.feedback.kind == "position_based":
            matrix = self.expected_score_matrix()
            return float(sum(matrix[arm, pos] for arm, pos in chosen))
        return self.reward_fn(tuple(chosen), self._base_scores)

    def expected_regret_increment(self, chosen, alpha: float = 1.0) -> float:
        """alpha * R(S*, v*) - R(S_t, v*) for the current round."""
        if self._base_scores is None:
            raise ContractError("call new_round() first")
        best = self._selection_value(self.optimal_selection())
        return alpha * best - self._selection_value(chosen)
