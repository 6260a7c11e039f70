"""Regularized gram matrix Z = lam*I + sum u u^T with maintained inverse.

Rank-one updates keep the inverse current via Sherman-Morrison and the
log-determinant via the matrix-determinant lemma; a full Cholesky refresh
every `refresh_every` updates bounds floating-point drift.  A super-arm
round applies its K updates sequentially (no block Woodbury).

The hot loop is memory-bound at the experiment scales, so internally only
the lower triangle of the inverse is kept current (BLAS dsyr/dsymv/dsymm
kernels) and raw update vectors are buffered and folded into Z at refresh
time.  The public Z and Z_inv attributes materialize full symmetric
snapshots on access.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg.blas import dsymm, dsymv, dsyr

from combandit.errors import ConfigurationError, ContractError, DataError

DEFAULT_REFRESH_EVERY = 1000


def _symmetrize_lower(a: np.ndarray) -> np.ndarray:
    """Full symmetric matrix from a lower-triangle-current buffer."""
    lower = np.tril(a)
    return lower + np.tril(a, -1).T


class DesignState:
    """p x p design matrix state owned by a single policy instance."""

    def __init__(self, p: int, lam: float, refresh_every: int = DEFAULT_REFRESH_EVERY):
        if p < 1:
            raise ConfigurationError(f"dimension p={p} must be >= 1")
        if lam <= 0:
            raise ConfigurationError(f"lambda={lam} must be positive")
        self.p = int(p)
        self.lam = float(lam)
        self.refresh_every = int(refresh_every)
        self._z_folded = np.asfortranarray(np.eye(p) * lam)
        self._pending: list[np.ndarray] = []  # update rows not yet folded into Z
        self._zinv = np.asfortranarray(np.eye(p) / lam)  # lower triangle current
        self.log_det = p * np.log(lam)
        self.updates_applied = 0
        self._refreshes_done = 0
        # running sum of round-start ||u||^2_{Z^-1} over all chosen arms,
        # the grouped diagnostic quantity used by the log-det accounting
        self.grouped_norm_sq_sum = 0.0

    @property
    def Z(self) -> np.ndarray:
        """Current gram matrix (materialized snapshot)."""
        if not self._pending:
            return self._z_folded.copy()
        U = np.vstack(self._pending)
        return self._z_folded + U.T @ U

    @property
    def Z_inv(self) -> np.ndarray:
        """Current maintained inverse (materialized symmetric snapshot)."""
        return _symmetrize_lower(self._zinv)

    def _check_vec(self, v) -> np.ndarray:
        v = np.ascontiguousarray(v, dtype=np.float64).ravel()
        if v.size != self.p:
            raise ContractError(f"vector length {v.size} != p={self.p}")
        return v

    def _sm_inverse_update(self, u: np.ndarray) -> None:
        """Sherman-Morrison step on the inverse plus the determinant lemma."""
        w = dsymv(1.0, self._zinv, u, lower=1)
        denom = 1.0 + float(u @ w)
        self._zinv = dsyr(-1.0 / denom, w, a=self._zinv, lower=1, overwrite_a=1)
        self.log_det += np.log(denom)
        self.updates_applied += 1

    def _maybe_refresh(self) -> None:
        if self.refresh_every <= 0:
            return
        if self.updates_applied // self.refresh_every > self._refreshes_done:
            self.refresh()
            self._refreshes_done = self.updates_applied // self.refresh_every

    def rank_one_update(self, u) -> None:
        """Apply Z += u u^T, updating the inverse and log-determinant."""
        u = self._check_vec(u)
        if not np.isfinite(u).all():
            raise DataError("update vector contains non-finite entries")
        self._sm_inverse_update(u)
        self._pending.append(u)
        self._maybe_refresh()

    def update_many(self, U) -> None:
        """Apply one rank-one update per row of U, in row order."""
        U = np.atleast_2d(np.ascontiguousarray(U, dtype=np.float64))
        if U.shape[1] != self.p:
            raise ContractError(f"vector length {U.shape[1]} != p={self.p}")
        if not np.isfinite(U).all():
            raise DataError("update vectors contain non-finite entries")
        for u in U:
            self._sm_inverse_update(u)
            self._pending.append(u)
        self._maybe_refresh()

    def _fold_pending(self) -> None:
        if self._pending:
            U = np.vstack(self._pending)
            self._z_folded += U.T @ U
            self._pending = []

    def refresh(self) -> None:
        """Recompute the inverse and log-determinant from a fresh Cholesky."""
        self._fold_pending()
        self._z_folded = np.asfortranarray(0.5 * (self._z_folded + self._z_folded.T))
        chol = np.linalg.cholesky(self._z_folded)
        inv = np.linalg.solve(self._z_folded, np.eye(self.p))
        self._zinv = np.asfortranarray(0.5 * (inv + inv.T))
        self.log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))

    def weighted_norm(self, v) -> float:
        """sqrt(v^T Z^-1 v), the exploration-width norm."""
        v = self._check_vec(v)
        w = dsymv(1.0, self._zinv, v, lower=1)
        return float(np.sqrt(max(v @ w, 0.0)))

    def weighted_norms(self, V) -> np.ndarray:
        """Row-wise weighted norms for a stack of vectors."""
        V = np.atleast_2d(np.asarray(V, dtype=np.float64))
        if V.shape[1] != self.p:
            raise ContractError(f"vector length {V.shape[1]} != p={self.p}")
        W = dsymm(1.0, self._zinv, np.asfortranarray(V), side=1, lower=1)
        quad = np.einsum("ij,ij->i", W, V)
        return np.sqrt(np.maximum(quad, 0.0))

    def log_det_ratio(self) -> float:
        """log det(Z) - log det(lam * I) >= 0."""
        return self.log_det - self.p * np.log(self.lam)

    def record_group_norms(self, norms_sq) -> None:
        """Accumulate a round's sum of squared round-start weighted norms."""
        self.grouped_norm_sq_sum += float(np.sum(norms_sq))
