"""Linear-model combinatorial baselines: CombLinUCB and CombLinTS.

Both maintain a ridge regression over all observed (context, score) pairs:
V = lam*I + sum x x^T, b = sum v x, theta_hat = V^{-1} b.  CombLinUCB scores
arms by x^T theta_hat + alpha * ||x||_{V^{-1}}; CombLinTS samples one
theta ~ N(theta_hat, nu^2 V^{-1}) per round and scores by x^T theta.
"""

from __future__ import annotations

import numpy as np

from combandit.errors import ConfigurationError, ContractError

_REFRESH_EVERY = 1000


class LinearState:
    """Ridge design state with Sherman-Morrison inverse maintenance."""

    def __init__(self, d: int, lam: float = 1.0):
        if lam <= 0:
            raise ConfigurationError(f"lambda={lam} must be positive")
        self.d = int(d)
        self.lam = float(lam)
        self.V = np.eye(d) * lam
        self.V_inv = np.eye(d) / lam
        self.b = np.zeros(d)
        self.theta_hat = np.zeros(d)
        self.updates_applied = 0

    def _refresh(self) -> None:
        self.V = 0.5 * (self.V + self.V.T)
        self.V_inv = np.linalg.solve(self.V, np.eye(self.d))
        self.V_inv = 0.5 * (self.V_inv + self.V_inv.T)

    def observe(self, contexts, scores) -> None:
        """Absorb observed (context, score) pairs, one rank-one update each."""
        contexts = np.atleast_2d(np.asarray(contexts, dtype=np.float64))
        scores = np.asarray(scores, dtype=np.float64).ravel()
        if contexts.shape[0] != scores.size:
            raise ContractError("one score per context required")
        if contexts.shape[1] != self.d:
            raise ContractError(f"context dim {contexts.shape[1]} != d={self.d}")
        for x, v in zip(contexts, scores):
            w = self.V_inv @ x
            self.V_inv -= np.outer(w, w) / (1.0 + float(x @ w))
            self.V += np.outer(x, x)
            self.b += v * x
            self.updates_applied += 1
            if self.updates_applied % _REFRESH_EVERY == 0:
                self._refresh()
        self.theta_hat = self.V_inv @ self.b

    def widths(self, contexts) -> np.ndarray:
        """||x||_{V^{-1}} per context row."""
        X = np.atleast_2d(np.asarray(contexts, dtype=np.float64))
        quad = np.einsum("ij,ij->i", X @ self.V_inv, X)
        return np.sqrt(np.maximum(quad, 0.0))


def comblinucb_scores(state: LinearState, contexts, alpha: float) -> np.ndarray:
    """Ridge prediction plus alpha times the confidence width."""
    if alpha < 0:
        raise ConfigurationError("alpha must be nonnegative")
    X = np.atleast_2d(np.asarray(contexts, dtype=np.float64))
    return X @ state.theta_hat + alpha * state.widths(X)


def comblints_scores(state: LinearState, contexts, nu: float, rng) -> np.ndarray:
    """Scores under one shared draw theta ~ N(theta_hat, nu^2 V^{-1})."""
    if nu < 0:
        raise ConfigurationError("nu must be nonnegative")
    X = np.atleast_2d(np.asarray(contexts, dtype=np.float64))
    theta = sample_theta(state, nu, rng)
    return X @ theta


def sample_theta(state: LinearState, nu: float, rng) -> np.ndarray:
    """One posterior-style parameter draw."""
    cov = 0.5 * (state.V_inv + state.V_inv.T)
    chol = np.linalg.cholesky(cov)
    return state.theta_hat + nu * (chol @ rng.standard_normal(state.d))


def linear_observe(state: LinearState, contexts, scores) -> None:
    """Ridge update for the chosen arms' observed scores."""
    state.observe(contexts, scores)


class CombLinUcbPolicy:
    """Harness-facing wrapper with the shared select/observe protocol."""

    def __init__(self, d: int, k: int, alpha: float = 1.0, lam: float = 1.0, rng=None):
        self.state = LinearState(d, lam)
        self.k = k
        self.alpha = float(alpha)
        self.t = 0

    def adjusted_scores(self, contexts) -> tuple[np.ndarray, float]:
        return comblinucb_scores(self.state, contexts, self.alpha), 0.0

    def observe(self, contexts, scores) -> None:
        self.state.observe(contexts, scores)
        self.t += 1


class CombLinTsPolicy:
    """Linear Thompson sampling with one shared parameter draw per round."""

    def __init__(self, d: int, k: int, nu: float = 1.0, lam: float = 1.0, rng=None):
        self.state = LinearState(d, lam)
        self.k = k
        self.nu = float(nu)
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.t = 0

    def adjusted_scores(self, contexts) -> tuple[np.ndarray, float]:
        return comblints_scores(self.state, contexts, self.nu, self.rng), 0.0

    def observe(self, contexts, scores) -> None:
        self.state.observe(contexts, scores)
        self.t += 1
