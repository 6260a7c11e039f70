"""Maximization oracles over super arms.

A super arm is a size-K subset of the N base arms, canonically represented
as an ascending tuple of arm indices.  Oracles are pure functions of a score
vector (or, for ranked selection, an N x K score matrix): the reward
function itself stays hidden from the caller.
"""

from __future__ import annotations

import math

import numpy as np

from combandit.errors import ConfigurationError, ContractError

SuperArm = tuple[int, ...]
Assignment = tuple[tuple[int, int], ...]  # ((arm, position), ...) ordered by position


def top_k(scores, k: int) -> SuperArm:
    """Return the k arms with the largest scores, ties broken by lower index.

    Maximizes sum(scores[i] for i in S) over all size-k subsets.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 1:
        raise ContractError(f"expected a score vector, got shape {scores.shape}")
    n = scores.size
    if not 1 <= k <= n:
        raise ConfigurationError(f"k={k} must satisfy 1 <= k <= {n}")
    # stable sort on negated scores keeps the lowest index first among ties
    order = np.argsort(-scores, kind="stable")
    return tuple(sorted(int(i) for i in order[:k]))


class AlphaApproxOracle:
    """Adapter exposing an alpha-approximate super-arm oracle.

    At alpha = 1 it is behaviorally identical to the wrapped exact oracle.
    For alpha < 1 it deliberately degrades: the first ceil(alpha * k) slots
    are filled by score order and the remainder by ascending arm index.  For
    nonnegative scores the returned set achieves at least alpha times the
    optimal sum, which is all the alpha-regret accounting needs.
    """

    def __init__(self, inner, alpha: float):
        if not 0.0 < alpha <= 1.0:
            raise ConfigurationError(f"alpha={alpha} must be in (0, 1]")
        self.inner = inner
        self.alpha = float(alpha)

    def __call__(self, scores, k: int) -> SuperArm:
        if self.alpha == 1.0:
            return self.inner(scores, k)
        scores = np.asarray(scores, dtype=float)
        n = scores.size
        if not 1 <= k <= n:
            raise ConfigurationError(f"k={k} must satisfy 1 <= k <= {n}")
        n_greedy = math.ceil(self.alpha * k)
        order = np.argsort(-scores, kind="stable")
        chosen = [int(i) for i in order[:n_greedy]]
        taken = set(chosen)
        for i in range(n):
            if len(chosen) == k:
                break
            if i not in taken:
                chosen.append(i)
                taken.add(i)
        return tuple(sorted(chosen))


def alpha_wrap(inner_oracle, alpha: float) -> AlphaApproxOracle:
    """Wrap an exact oracle into an alpha-approximation oracle."""
    return AlphaApproxOracle(inner_oracle, alpha)


def _lapjv_min(cost: np.ndarray) -> list[int]:
    """Shortest-augmenting-path assignment for a rectangular cost matrix.

    Rows are assigned to distinct columns minimizing total cost; requires
    n_rows <= n_cols.  Returns col index per row.  O(n_rows^2 * n_cols).
    """
    n, m = cost.shape
    INF = math.inf
    # 1-indexed with a virtual 0 row/column, classic Jonker-Volgenant layout
    u = [0.0] * (n + 1)
    v = [0.0] * (m + 1)
    p = [0] * (m + 1)  # p[j] = row matched to column j (0 = free)
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [INF] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = INF
            j1 = -1
            for j in range(1, m + 1):
                if used[j]:
                    continue
                cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0 != 0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    row_to_col = [-1] * n
    for j in range(1, m + 1):
        if p[j] != 0:
            row_to_col[p[j] - 1] = j - 1
    return row_to_col


def _assignment_value(score_matrix: np.ndarray) -> float:
    """Maximum total score of assigning each position to a distinct arm."""
    n, k = score_matrix.shape
    # rows = positions (k of them), columns = arms; maximize => negate
    cols = _lapjv_min(-score_matrix.T.copy())
    return float(sum(score_matrix[cols[pos], pos] for pos in range(k)))


def assignment_oracle(score_matrix) -> Assignment:
    """Maximize sum_k score[arm(k), k] over one-arm-per-position assignments.

    Exact (augmenting-path) solution; ties resolved to the lexicographically
    smallest arm sequence (arm at position 0 first, then position 1, ...).
    """
    scores = np.asarray(score_matrix, dtype=float)
    if scores.ndim != 2:
        raise ContractError(f"expected an N x K score matrix, got shape {scores.shape}")
    n, k = scores.shape
    if n < k:
        raise ConfigurationError(f"need at least as many arms as positions, got N={n} < K={k}")
    if not np.isfinite(scores).all():
        raise ContractError("score matrix contains non-finite entries")

    best = _assignment_value(scores)
    tol = 1e-9 * max(1.0, abs(best))

    chosen: list[int] = []
    free_arms = list(range(n))
    fixed_value = 0.0
    for pos in range(k):
        for arm in free_arms:
            candidate = fixed_value + scores[arm, pos]
            remaining_arms = [a for a in free_arms if a != arm]
            if pos + 1 < k:
                sub = scores[np.ix_(remaining_arms, range(pos + 1, k))]
                candidate += _assignment_value(sub)
            if candidate >= best - tol:
                chosen.append(arm)
                free_arms.remove(arm)
                fixed_value += scores[arm, pos]
                break
        else:  # pragma: no cover - fix-and-verify always finds an optimal arm
            raise AssertionError("no arm preserves the optimal assignment value")
    return tuple((arm, pos) for pos, arm in enumerate(chosen))
