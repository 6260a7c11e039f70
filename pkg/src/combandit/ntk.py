"""Neural-tangent-kernel diagnostics.

Computes the depth-L NTK matrix over a context collection with the closed
arc-cosine forms of the ReLU Gaussian expectations, the effective dimension
log det(I + H/lam) / log(1 + T*N/lam), an advisory width report, and the
theoretical regret envelopes used as plot overlays.  The width report never
gates execution: practical widths are far below the analysis requirement by
design.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from combandit.errors import ConfigurationError, ContractError, DataError

NTK_CONTEXT_CAP = 2000


def _relu_cross_moments(S: np.ndarray):
    """Closed forms of the layer expectations for correlation matrix S.

    Returns (2 E[relu(y) relu(z)], 2 E[relu'(y) relu'(z)]) for
    (y, z) ~ N(0, [[a, c], [c, b]]) elementwise over S with a, b on the
    diagonal and c = S_ij.
    """
    diag = np.sqrt(np.clip(np.diag(S), 0.0, None))
    norm = np.outer(diag, diag)
    with np.errstate(invalid="ignore", divide="ignore"):
        rho = np.where(norm > 0.0, S / norm, 0.0)
    rho = np.clip(rho, -1.0, 1.0)
    angle = np.arccos(rho)
    second = (norm / np.pi) * (np.sqrt(1.0 - rho**2) + (np.pi - angle) * rho)
    derivative = (np.pi - angle) / np.pi
    return second, derivative


def ntk_matrix(contexts, depth: int) -> np.ndarray:
    """NTK matrix H over the given unit-norm contexts for a depth-L network."""
    X = np.atleast_2d(np.asarray(contexts, dtype=np.float64))
    if depth < 2:
        raise ConfigurationError(f"depth L={depth} must be >= 2")
    norms = np.linalg.norm(X, axis=1)
    if np.abs(norms - 1.0).max() > 1e-6:
        raise ContractError("NTK contexts must be unit-norm")
    S = X @ X.T
    H_tilde = S.copy()
    for _ in range(depth - 1):
        S_next, deriv = _relu_cross_moments(S)
        H_tilde = H_tilde * deriv + S_next
        S = S_next
    H = (H_tilde + S) / 2.0
    return 0.5 * (H + H.T)


@dataclass(frozen=True)
class EffDimReport:
    """Effective dimension with its inputs and the raw log-determinant."""

    d_eff: float
    lam: float
    horizon: int
    n_arms: int
    log_det: float


def effective_dimension(H, lam: float, horizon: int, n_arms: int) -> EffDimReport:
    """log det(I + H/lam) / log(1 + T*N/lam)."""
    if lam <= 0:
        raise ConfigurationError(f"lambda={lam} must be positive")
    if horizon * n_arms < 1:
        raise ConfigurationError("T * N must be at least 1")
    H = np.atleast_2d(np.asarray(H, dtype=np.float64))
    H = 0.5 * (H + H.T)
    eigs = np.linalg.eigvalsh(H)
    if eigs.min() < -1e-8:
        raise DataError(f"NTK matrix is not PSD (min eigenvalue {eigs.min():.3e})")
    log_det = float(np.sum(np.log1p(np.clip(eigs, 0.0, None) / lam)))
    d_eff = log_det / math.log1p(horizon * n_arms / lam)
    return EffDimReport(d_eff, lam, horizon, n_arms, log_det)


@dataclass(frozen=True)
class WidthClause:
    name: str
    required_m: float
    satisfied: bool


@dataclass(frozen=True)
class WidthReport:
    """Advisory report on the polynomial width requirement (unit constants)."""

    m: int
    clauses: tuple
    binding: str

    @property
    def all_satisfied(self) -> bool:
        return all(c.satisfied for c in self.clauses)


def _composite_required_m(rhs: float) -> float:
    """Smallest m in the monotone region with m / (ln m)^3 >= rhs."""
    lo, hi = 21.0, 1e60
    if lo / math.log(lo) ** 3 >= rhs:
        return lo
    if hi / math.log(hi) ** 3 < rhs:
        return math.inf
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if mid / math.log(mid) ** 3 >= rhs:
            hi = mid
        else:
            lo = mid
    return hi


def width_report(
    horizon: int,
    n_arms: int,
    k: int,
    depth: int,
    lam: float,
    lam0: float,
    delta: float,
    m: int,
) -> WidthReport:
    """Evaluate each width clause with unit constants; advisory only."""
    for name, val in (("T", horizon), ("N", n_arms), ("K", k), ("L", depth),
                      ("lambda", lam), ("lambda0", lam0), ("delta", delta), ("m", m)):
        if val <= 0:
            raise ConfigurationError(f"{name} must be positive, got {val}")
    T, N, L = float(horizon), float(n_arms), float(depth)

    req_a = L ** -1.5 * k ** -0.5 * lam**0.5 * math.log(T * N * L * L / delta) ** 1.5
    req_b = T**6 * N**6 * L**6 * math.log(T * T * N * N * L / delta) * max(lam0**-4, 1.0)
    rhs_c = (
        T**4 * k**4 * L**21 * lam**-4 * (1.0 + math.sqrt(T / lam)) ** 6
        + T * k * L**12 / lam
        + T**4 * k**4 * L**18 * lam**-10 * (lam + T * L) ** 6
    )
    composite_value = m / math.log(m) ** 3 if m > 1 else 0.0
    clauses = (
        WidthClause("poly-log", req_a, m >= req_a),
        WidthClause("poly-horizon", req_b, m >= req_b),
        WidthClause("log-cubed-composite", _composite_required_m(rhs_c), composite_value >= rhs_c),
    )
    binding = max(clauses, key=lambda c: c.required_m).name
    return WidthReport(m=m, clauses=clauses, binding=binding)


def regret_envelope(kind: str, d_eff: float, horizon: int, k: int, c: float = 1.0) -> np.ndarray:
    """Theoretical cumulative-regret envelope at t = 0..horizon.

    cnucb: c * sqrt(d_eff * t * max(d_eff, k)); cnts: c * d_eff * sqrt(t * k).
    For overlay plotting only.
    """
    if d_eff <= 0:
        raise ConfigurationError(f"d_eff={d_eff} must be positive")
    t = np.arange(horizon + 1, dtype=np.float64)
    if kind == "cnucb":
        return c * np.sqrt(d_eff * t * max(d_eff, float(k)))
    if kind == "cnts":
        return c * d_eff * np.sqrt(t * k)
    raise ConfigurationError(f"unknown envelope kind {kind!r}")
