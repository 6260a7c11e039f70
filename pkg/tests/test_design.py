"""Design-state tests against direct factorization oracles."""

import numpy as np
import pytest

from combandit.design import DesignState
from combandit.errors import ConfigurationError, ContractError, DataError


def direct_state(updates, p, lam):
    """Independent oracle: rebuild Z from scratch and factor it directly."""
    Z = np.eye(p) * lam
    for u in updates:
        Z += np.outer(u, u)
    sign, log_det = np.linalg.slogdet(Z)
    assert sign > 0
    return np.linalg.inv(Z), log_det


class TestConstruction:
    def test_fresh_state_values(self):
        st = DesignState(3, 2.0)
        np.testing.assert_allclose(st.Z_inv, np.eye(3) * 0.5)
        assert st.log_det == pytest.approx(3 * np.log(2.0), abs=1e-12)
        assert st.log_det_ratio() == pytest.approx(0.0, abs=1e-12)

    def test_scalar_state(self):
        st = DesignState(1, 1.0)
        assert st.Z[0, 0] == 1.0
        assert st.log_det == pytest.approx(0.0, abs=1e-15)

    def test_nonpositive_lambda_rejected(self):
        with pytest.raises(ConfigurationError):
            DesignState(2, 0.0)
        with pytest.raises(ConfigurationError):
            DesignState(2, -1.0)


class TestRankOneUpdate:
    def test_zero_vector_is_noop(self):
        st = DesignState(4, 1.0)
        before_inv = st.Z_inv.copy()
        before_ld = st.log_det
        st.rank_one_update(np.zeros(4))
        np.testing.assert_array_equal(st.Z_inv, before_inv)
        assert st.log_det == before_ld

    def test_inverse_matches_direct_inversion(self):
        rng = np.random.default_rng(0)
        p = 50
        st = DesignState(p, 1.0)
        updates = [rng.standard_normal(p) / np.sqrt(p) for _ in range(100)]
        for u in updates:
            st.rank_one_update(u)
        inv, log_det = direct_state(updates, p, 1.0)
        assert np.linalg.norm(st.Z_inv - inv, "fro") < 1e-8
        assert abs(st.log_det - log_det) < 1e-8

    def test_per_update_determinant_identity(self):
        rng = np.random.default_rng(1)
        p = 30
        st = DesignState(p, 0.5)
        for _ in range(50):
            u = rng.standard_normal(p) * 0.3
            quad = float(u @ st.Z_inv @ u)
            before = st.log_det
            st.rank_one_update(u)
            assert st.log_det - before == pytest.approx(np.log1p(quad), abs=1e-9)

    def test_refresh_keeps_consistency(self):
        rng = np.random.default_rng(2)
        p = 20
        st = DesignState(p, 1.0, refresh_every=7)
        for _ in range(40):
            st.rank_one_update(rng.standard_normal(p))
        assert np.linalg.norm(st.Z @ st.Z_inv - np.eye(p), "fro") < 1e-6

    def test_nonfinite_rejected(self):
        st = DesignState(2, 1.0)
        with pytest.raises(DataError):
            st.rank_one_update([np.nan, 0.0])

    def test_dimension_mismatch(self):
        st = DesignState(3, 1.0)
        with pytest.raises(ContractError):
            st.rank_one_update(np.ones(4))


class TestWeightedNorm:
    def test_fresh_unit_vector(self):
        st = DesignState(5, 1.0)
        v = np.zeros(5)
        v[2] = 1.0
        assert st.weighted_norm(v) == pytest.approx(1.0, abs=1e-12)

    def test_hand_computed_after_e1_update(self):
        # (I + e1 e1^T)^-1 has (1,1) entry 1/2 -> norm 1/sqrt(2)
        st = DesignState(3, 1.0)
        e1 = np.array([1.0, 0.0, 0.0])
        st.rank_one_update(e1)
        assert st.weighted_norm(e1) == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-12)

    def test_norm_never_increases_under_updates(self):
        rng = np.random.default_rng(3)
        p = 15
        st = DesignState(p, 1.0)
        v = rng.standard_normal(p)
        prev = st.weighted_norm(v)
        for _ in range(60):
            st.rank_one_update(rng.standard_normal(p) * 0.5)
            cur = st.weighted_norm(v)
            assert cur <= prev + 1e-12
            prev = cur

    def test_eigenvalue_floor_bound(self):
        rng = np.random.default_rng(4)
        p = 10
        lam = 2.5
        st = DesignState(p, lam)
        for _ in range(30):
            st.rank_one_update(rng.standard_normal(p))
        for _ in range(20):
            v = rng.standard_normal(p)
            assert st.weighted_norm(v) ** 2 <= (v @ v) / lam + 1e-12

    def test_batched_norms_match_single(self):
        rng = np.random.default_rng(5)
        st = DesignState(8, 1.0)
        for _ in range(10):
            st.rank_one_update(rng.standard_normal(8))
        V = rng.standard_normal((6, 8))
        batch = st.weighted_norms(V)
        singles = [st.weighted_norm(v) for v in V]
        np.testing.assert_allclose(batch, singles, atol=1e-12)


class TestLogDetRatio:
    def test_single_unit_update(self):
        st = DesignState(4, 1.0)
        u = np.array([0.5, 0.5, 0.5, 0.5])  # ||u||^2 = 1
        st.rank_one_update(u)
        assert st.log_det_ratio() == pytest.approx(np.log(2.0), abs=1e-12)

    def test_nondecreasing_over_run(self):
        rng = np.random.default_rng(6)
        st = DesignState(6, 3.0)
        prev = st.log_det_ratio()
        assert prev == pytest.approx(0.0, abs=1e-12)
        for _ in range(50):
            st.rank_one_update(rng.standard_normal(6) * 0.2)
            cur = st.log_det_ratio()
            assert cur >= prev - 1e-12
            prev = cur

    def test_grouped_diagnostic_accumulates(self):
        st = DesignState(3, 1.0)
        st.record_group_norms([0.5, 0.25])
        st.record_group_norms(np.array([0.25]))
        assert st.grouped_norm_sq_sum == pytest.approx(1.0, abs=1e-15)


class TestLongSequenceDrift:
    def test_inverse_consistency_across_refreshes(self):
        # thousands of updates with periodic refreshes keep Z Z_inv near I
        rng = np.random.default_rng(7)
        p = 200
        st = DesignState(p, 1.0, refresh_every=1000)
        for _ in range(2500):
            st.rank_one_update(rng.standard_normal(p) * 0.2)
        err = np.linalg.norm(st.Z @ st.Z_inv - np.eye(p), "fro")
        assert err < 1e-6
