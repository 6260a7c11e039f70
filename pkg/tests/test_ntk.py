"""NTK diagnostics tests, including the Monte-Carlo kernel oracle."""

import numpy as np
import pytest

from combandit.environments import gen_contexts
from combandit.errors import ConfigurationError, DataError
from combandit.ntk import (
    effective_dimension,
    ntk_matrix,
    regret_envelope,
    width_report,
)


class TestClosedForm:
    def test_diagonal_recursion(self):
        # unit contexts keep Sigma_ii = 1; H_ii = (L + 1) / 2
        rng = np.random.default_rng(0)
        X = gen_contexts(6, 4, True, rng)
        for depth in (2, 3, 4):
            H = ntk_matrix(X, depth)
            np.testing.assert_allclose(np.diag(H), (depth + 1) / 2.0, atol=1e-12)

    def test_orthogonal_pair_first_layer_value(self):
        # rho = 0 gives 2 E[relu(y) relu(z)] = 1 / pi
        X = np.eye(2)
        H = ntk_matrix(X, 2)
        # H_12 = (H~_12 + Sigma_12) / 2 with H~_12 = 1*0.5 + 1/pi, Sigma = 1/pi
        expected = (0.0 * 0.5 + 1.0 / np.pi + 1.0 / np.pi) / 2.0
        assert H[0, 1] == pytest.approx(expected, abs=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        X = gen_contexts(8, 6, True, rng)
        H = ntk_matrix(X, 3)
        np.testing.assert_array_equal(H, H.T)

    def test_non_unit_contexts_rejected(self):
        from combandit.errors import ContractError

        with pytest.raises(ContractError):
            ntk_matrix(np.ones((2, 3)), 2)


def mc_ntk_entry(x1, x2, depth, samples, rng):
    """Monte-Carlo oracle for one off-diagonal NTK entry."""
    S = np.array([[1.0, x1 @ x2], [x2 @ x1, 1.0]])
    H_tilde = S.copy()
    for _ in range(depth - 1):
        chol = np.linalg.cholesky(S + 1e-12 * np.eye(2))
        draws = chol @ rng.standard_normal((2, samples))
        relu = np.maximum(draws, 0.0)
        act = (draws > 0.0).astype(float)
        S_next = np.array(
            [
                [2 * np.mean(relu[0] ** 2), 2 * np.mean(relu[0] * relu[1])],
                [2 * np.mean(relu[1] * relu[0]), 2 * np.mean(relu[1] ** 2)],
            ]
        )
        deriv = np.array(
            [
                [2 * np.mean(act[0] ** 2), 2 * np.mean(act[0] * act[1])],
                [2 * np.mean(act[1] * act[0]), 2 * np.mean(act[1] ** 2)],
            ]
        )
        H_tilde = H_tilde * deriv + S_next  # deriv is already 2 E[s'(y) s'(z)]
        S = S_next
    H = (H_tilde + S) / 2.0
    return H[0, 1]


class TestMonteCarloOracle:
    def test_closed_form_matches_monte_carlo(self):
        rng = np.random.default_rng(2)
        X = gen_contexts(6, 2, True, rng)
        for depth in (2, 3):
            H = ntk_matrix(X, depth)
            mc = mc_ntk_entry(X[0], X[1], depth, 400_000, rng)
            assert abs(H[0, 1] - mc) / abs(H[0, 1]) < 1e-2


class TestEffectiveDimension:
    def test_single_context_identity(self):
        T, N = 10, 4
        rep = effective_dimension(np.array([[float(T * N)]]), 0.7, T, N)
        assert rep.d_eff == pytest.approx(1.0, abs=1e-12)

    def test_scaled_identity(self):
        n, c, lam, T, N = 5, 3.0, 2.0, 7, 3
        rep = effective_dimension(c * np.eye(n), lam, T, N)
        expected = n * np.log1p(c / lam) / np.log1p(T * N / lam)
        assert rep.d_eff == pytest.approx(expected, abs=1e-12)

    def test_matches_direct_determinant(self):
        rng = np.random.default_rng(3)
        A = rng.standard_normal((3, 3))
        H = A @ A.T
        lam = 1.3
        rep = effective_dimension(H, lam, 5, 2)
        sign, direct = np.linalg.slogdet(np.eye(3) + H / lam)
        assert sign > 0
        assert rep.log_det == pytest.approx(direct, abs=1e-9)

    def test_nonincreasing_in_lambda(self):
        rng = np.random.default_rng(4)
        X = gen_contexts(6, 12, True, rng)
        H = ntk_matrix(X, 2)
        vals = [effective_dimension(H, lam, 100, 12).d_eff for lam in (0.1, 0.5, 1.0, 5.0, 20.0)]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))

    def test_non_psd_rejected(self):
        with pytest.raises(DataError):
            effective_dimension(np.array([[1.0, 0.0], [0.0, -1.0]]), 1.0, 2, 2)


class TestWidthReport:
    def test_huge_width_passes_everything(self):
        rep = width_report(1, 1, 1, 2, 1.0, 1.0, 0.1, m=10**30)
        assert rep.all_satisfied

    def test_practical_width_flags_clauses(self):
        rep = width_report(2000, 20, 4, 2, 1.0, 0.5, 0.1, m=100)
        assert not rep.all_satisfied
        failing = [c.name for c in rep.clauses if not c.satisfied]
        assert "poly-horizon" in failing

    def test_monotone_in_m(self):
        passed_before = False
        for m in (10, 10**6, 10**12, 10**20, 10**40):
            rep = width_report(5, 3, 2, 2, 1.0, 1.0, 0.1, m=m)
            if passed_before:
                assert rep.all_satisfied
            passed_before = passed_before or rep.all_satisfied
        assert passed_before  # the largest width does satisfy everything

    def test_binding_clause_reported(self):
        rep = width_report(2000, 20, 4, 2, 1.0, 0.5, 0.1, m=100)
        assert rep.binding in {c.name for c in rep.clauses}


class TestRegretEnvelope:
    def test_zero_at_zero(self):
        for kind in ("cnucb", "cnts"):
            env = regret_envelope(kind, 3.0, 10, 4)
            assert env[0] == 0.0

    def test_cnucb_small_k_branch(self):
        d_eff, T = 5.0, 20
        env = regret_envelope("cnucb", d_eff, T, k=2)
        t = np.arange(T + 1)
        np.testing.assert_allclose(env, d_eff * np.sqrt(t), atol=1e-12)

    def test_concave_nondecreasing(self):
        env = regret_envelope("cnts", 2.0, 50, 3)
        diffs = np.diff(env)
        assert np.all(diffs >= 0)
        assert np.all(np.diff(diffs) <= 1e-12)

    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError):
            regret_envelope("linear", 1.0, 5, 2)
