"""Width-m depth-L ReLU score network with symmetric random initialization.

The network is f(x) = sqrt(m) * W_L relu(W_{L-1} relu(... W_1 x)) with a flat
parameter vector theta of length p = d*m + m^2*(L-2) + m.  Initialization
uses the paired block construction: hidden layers are block-diagonal
(W, 0; 0, W) and the output layer is (w, -w), so inputs whose two halves
coincide map to exactly zero at initialization.

Training minimizes the squared loss plus an l2 pull toward the *initial*
parameters, 0.5 * sum_k (f(x_k) - v_k)^2 + (m * lam / 2) * ||theta - theta_0||^2,
by plain gradient descent (full-batch mode) or by mini-batch SGD over stored
super-arm groups (practical mode).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from combandit.errors import ConfigurationError, ContractError, DataError

_UNIT_NORM_TOL = 1e-9


@dataclass(frozen=True)
class NetworkShape:
    """Architecture triple (input dim d, hidden width m, depth L)."""

    d: int
    m: int
    L: int

    def __post_init__(self):
        if self.d <= 0 or self.d % 2 != 0:
            raise ConfigurationError(f"input dim d={self.d} must be a positive even integer")
        if self.m <= 0 or self.m % 2 != 0:
            raise ConfigurationError(
                f"width m={self.m} must be a positive even integer (block init splits m in half)"
            )
        if self.L < 2:
            raise ConfigurationError(f"depth L={self.L} must be at least 2")

    @property
    def p(self) -> int:
        """Flat parameter count d*m + m^2*(L-2) + m."""
        return self.d * self.m + self.m * self.m * (self.L - 2) + self.m


class NetworkParams:
    """Flat parameter vector with zero-copy per-layer matrix views."""

    def __init__(self, shape: NetworkShape, theta: np.ndarray):
        theta = np.ascontiguousarray(theta, dtype=np.float64)
        if theta.shape != (shape.p,):
            raise ContractError(f"theta has length {theta.size}, expected p={shape.p}")
        if not np.isfinite(theta).all():
            raise DataError("theta contains non-finite entries")
        self.shape = shape
        self.theta = theta

    def weights(self) -> list[np.ndarray]:
        """Per-layer weight matrices as views into the flat vector."""
        d, m, L = self.shape.d, self.shape.m, self.shape.L
        mats = []
        off = 0
        mats.append(self.theta[off : off + m * d].reshape(m, d))
        off += m * d
        for _ in range(L - 2):
            mats.append(self.theta[off : off + m * m].reshape(m, m))
            off += m * m
        mats.append(self.theta[off : off + m].reshape(1, m))
        return mats

    def copy(self) -> "NetworkParams":
        return NetworkParams(self.shape, self.theta.copy())


def init_params(shape: NetworkShape, seed: int) -> NetworkParams:
    """Symmetric random initialization, deterministic for a fixed seed.

    Hidden layers W_l = (W, 0; 0, W) with W entries iid Normal(0, 4/m);
    output layer W_L = (w, -w) with w entries iid Normal(0, 2/m).
    """
    rng = np.random.default_rng(seed)
    d, m, L = shape.d, shape.m, shape.L
    half = m // 2
    params = NetworkParams(shape, np.zeros(shape.p))
    mats = params.weights()
    in_dim = d
    for layer in range(L - 1):
        block = rng.normal(0.0, np.sqrt(4.0 / m), size=(half, in_dim // 2))
        W = mats[layer]
        W[:half, : in_dim // 2] = block
        W[half:, in_dim // 2 :] = block
        in_dim = m
    w = rng.normal(0.0, np.sqrt(2.0 / m), size=half)
    mats[L - 1][0, :half] = w
    mats[L - 1][0, half:] = -w
    return params


def _check_contexts(shape: NetworkShape, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != shape.d:
        raise ContractError(f"context dim {X.shape[1]} != network input dim {shape.d}")
    return X


def _forward_stash(params: NetworkParams, X: np.ndarray):
    """Forward pass returning per-layer post-activations and ReLU masks."""
    mats = params.weights()
    L = params.shape.L
    acts = [X]  # acts[l] = post-activation input to layer l+1
    masks = []
    h = X @ mats[0].T
    for layer in range(1, L):
        mask = h > 0.0
        a = np.where(mask, h, 0.0)
        masks.append(mask)
        acts.append(a)
        h = a @ mats[layer].T
    out = np.sqrt(params.shape.m) * h[:, 0]
    return out, acts, masks


def forward_many(shape: NetworkShape, params: NetworkParams, X) -> np.ndarray:
    """Scores f(x; theta) for a batch of contexts, one per row."""
    X = _check_contexts(shape, X)
    out, _, _ = _forward_stash(params, X)
    return out


def forward(shape: NetworkShape, params: NetworkParams, x) -> float:
    """Score f(x; theta) for a single context vector."""
    return float(forward_many(shape, params, np.asarray(x, dtype=np.float64)[None, :])[0])


def gradient_many(shape: NetworkShape, params: NetworkParams, X) -> np.ndarray:
    """Backprop gradients d f / d theta, one length-p row per context.

    ReLU subgradient at exactly 0 is taken as 0.
    """
    X = _check_contexts(shape, X)
    n = X.shape[0]
    m, L, p = shape.m, shape.L, shape.p
    mats = params.weights()
    _, acts, masks = _forward_stash(params, X)

    G = np.empty((n, p))
    sqrt_m = np.sqrt(m)
    # output layer: d f / d W_L = sqrt(m) * a_{L-1}
    G[:, p - m :] = sqrt_m * acts[L - 1]
    delta = (sqrt_m * mats[L - 1][0])[None, :] * masks[L - 2]
    off = p - m
    for layer in range(L - 2, 0, -1):
        off -= m * m
        G[:, off : off + m * m] = np.einsum("ni,nj->nij", delta, acts[layer]).reshape(n, m * m)
        delta = (delta @ mats[layer]) * masks[layer - 1]
    G[:, : shape.d * m] = np.einsum("ni,nj->nij", delta, X).reshape(n, shape.d * m)
    return G


def gradient(shape: NetworkShape, params: NetworkParams, x) -> np.ndarray:
    """Backprop gradient for a single context."""
    return gradient_many(shape, params, np.asarray(x, dtype=np.float64)[None, :])[0]


def _loss_gradient(params: NetworkParams, X: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Gradient of the data term 0.5 * sum (f - v)^2 (summed over the batch)."""
    shape = params.shape
    m, L, p = shape.m, shape.L, shape.p
    mats = params.weights()
    out, acts, masks = _forward_stash(params, X)
    r = out - v

    grad = np.empty(p)
    sqrt_m = np.sqrt(m)
    grad[p - m :] = sqrt_m * (r @ acts[L - 1])
    delta = (r[:, None] * (sqrt_m * mats[L - 1][0])[None, :]) * masks[L - 2]
    off = p - m
    for layer in range(L - 2, 0, -1):
        off -= m * m
        grad[off : off + m * m] = (delta.T @ acts[layer]).ravel()
        delta = (delta @ mats[layer]) * masks[layer - 1]
    grad[: shape.d * m] = (delta.T @ X).ravel()
    return grad


@dataclass
class TrainingBatch:
    """Unit-norm contexts with observed scores, optionally grouped by round.

    group_sizes partitions the rows into super-arm groups (one stored round
    each); mini-batch training samples whole groups.
    """

    contexts: np.ndarray
    scores: np.ndarray
    group_sizes: np.ndarray | None = None

    def __post_init__(self):
        self.contexts = np.atleast_2d(np.asarray(self.contexts, dtype=np.float64))
        self.scores = np.asarray(self.scores, dtype=np.float64).ravel()
        if self.contexts.shape[0] != self.scores.size:
            raise ContractError("contexts and scores length mismatch")
        if self.scores.size:
            norms = np.linalg.norm(self.contexts, axis=1)
            if np.abs(norms - 1.0).max() > _UNIT_NORM_TOL:
                raise ContractError("training contexts must be unit-norm")
        if self.group_sizes is not None:
            self.group_sizes = np.asarray(self.group_sizes, dtype=np.int64)
            if self.group_sizes.sum() != self.scores.size:
                raise ContractError("group sizes do not partition the batch")

    @classmethod
    def from_groups(cls, groups) -> "TrainingBatch":
        """Build a batch from (contexts, scores) pairs, one per stored round."""
        if not groups:
            return cls(np.zeros((0, 1)), np.zeros(0), np.zeros(0, dtype=np.int64))
        ctx = np.concatenate([np.atleast_2d(c) for c, _ in groups], axis=0)
        sc = np.concatenate([np.asarray(s, dtype=np.float64).ravel() for _, s in groups])
        sizes = np.array([np.atleast_2d(c).shape[0] for c, _ in groups], dtype=np.int64)
        return cls(ctx, sc, sizes)

    @property
    def n_groups(self) -> int:
        if self.group_sizes is None:
            return self.scores.size
        return int(self.group_sizes.size)


def train(
    shape: NetworkShape,
    params_0: NetworkParams,
    current: NetworkParams,
    batch: TrainingBatch,
    lam: float,
    eta: float,
    steps: int,
    mode: str = "full",
    batch_groups: int = 100,
    rng: np.random.Generator | None = None,
) -> NetworkParams:
    """Gradient descent on the regularized squared loss.

    full mode: each step uses the exact gradient of
        0.5 * sum_k (f(x_k) - v_k)^2 + (m * lam / 2) * ||theta - theta_0||^2.

    minibatch mode: SGD on that same objective scaled by 1/n_total; each step
    uses the per-sample mean over a sampled batch of super-arm groups plus
    (m * lam / n_total) * (theta - theta_0).  Groups are drawn without
    replacement from a reshuffled stream, so ceil(G / batch_groups)
    consecutive steps cover the stored history exactly once.

    The regularization always pulls toward the initial theta_0, never toward
    the current parameters.
    """
    if lam <= 0:
        raise ConfigurationError(f"lambda={lam} must be positive")
    if eta <= 0:
        raise ConfigurationError(f"eta={eta} must be positive")
    if steps < 0:
        raise ConfigurationError(f"steps={steps} must be nonnegative")
    if mode not in ("full", "minibatch"):
        raise ConfigurationError(f"unknown training mode {mode!r}")
    if steps == 0:
        return current.copy()

    theta = current.theta.copy()
    theta0 = params_0.theta
    m = shape.m
    n_total = batch.scores.size
    work = NetworkParams(shape, theta)

    if mode == "full" or n_total == 0:
        for _ in range(steps):
            grad = m * lam * (theta - theta0)
            if n_total:
                grad += _loss_gradient(work, batch.contexts, batch.scores)
            theta -= eta * grad
        return work

    if batch.group_sizes is None:
        raise ContractError("minibatch mode requires a grouped TrainingBatch")
    if rng is None:
        rng = np.random.default_rng(0)
    if batch_groups < 1:
        raise ConfigurationError(f"batch_groups={batch_groups} must be >= 1")

    offsets = np.concatenate([[0], np.cumsum(batch.group_sizes)])
    n_groups = batch.n_groups
    stream: list[np.ndarray] = []
    for _ in range(steps):
        if not stream:
            if batch_groups >= n_groups:
                # the whole history fits one batch: keep natural order and
                # consume no randomness, so replays are bit-reproducible
                stream = [np.arange(n_groups)]
            else:
                perm = rng.permutation(n_groups)
                stream = [
                    perm[i : i + batch_groups] for i in range(0, n_groups, batch_groups)
                ][::-1]
        chosen = stream.pop()
        rows = np.concatenate([np.arange(offsets[g], offsets[g + 1]) for g in chosen])
        n_batch = rows.size
        grad = _loss_gradient(work, batch.contexts[rows], batch.scores[rows]) / n_batch
        grad += (m * lam / n_total) * (theta - theta0)
        theta -= eta * grad
    return work


_HEADER = struct.Struct("<3q")


def params_to_bytes(params: NetworkParams) -> bytes:
    """Serialize as little-endian float64 prefixed by (d, m, L)."""
    shape = params.shape
    vec = params.theta.astype("<f8", copy=False)
    return _HEADER.pack(shape.d, shape.m, shape.L) + vec.tobytes()


def params_from_bytes(buf: bytes) -> NetworkParams:
    """Inverse of params_to_bytes."""
    d, m, L = _HEADER.unpack_from(buf)
    shape = NetworkShape(d, m, L)
    theta = np.frombuffer(buf, dtype="<f8", offset=_HEADER.size)
    if theta.size != shape.p:
        raise DataError(f"payload has {theta.size} floats, expected p={shape.p}")
    return NetworkParams(shape, theta.astype(np.float64))
