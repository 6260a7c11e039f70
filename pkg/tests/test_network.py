"""Tests for the ReLU score network: init structure, forward, backprop, training."""

import numpy as np
import pytest

from combandit.errors import ConfigurationError, ContractError
from combandit.network import (
    NetworkParams,
    NetworkShape,
    TrainingBatch,
    forward,
    forward_many,
    gradient,
    gradient_many,
    init_params,
    params_from_bytes,
    params_to_bytes,
    train,
)


def paired_unit_context(rng, d):
    z = rng.standard_normal(d // 2)
    z /= np.linalg.norm(z)
    return np.concatenate([z, z]) / np.sqrt(2.0)


def finite_difference_gradient(shape, params, x, step=1e-5):
    """Independent oracle: central differences on the flat parameter vector."""
    theta = params.theta
    grad = np.zeros_like(theta)
    for j in range(theta.size):
        up = theta.copy()
        up[j] += step
        dn = theta.copy()
        dn[j] -= step
        grad[j] = (
            forward(shape, NetworkParams(shape, up), x)
            - forward(shape, NetworkParams(shape, dn), x)
        ) / (2 * step)
    return grad


class TestShape:
    def test_parameter_count(self):
        assert NetworkShape(4, 4, 2).p == 4 * 4 + 4
        assert NetworkShape(4, 4, 3).p == 4 * 4 + 16 + 4
        assert NetworkShape(20, 50, 2).p == 20 * 50 + 50
        assert NetworkShape(80, 100, 2).p == 80 * 100 + 100

    def test_invalid_shapes_rejected(self):
        with pytest.raises(ConfigurationError):
            NetworkShape(3, 4, 2)  # odd d
        with pytest.raises(ConfigurationError):
            NetworkShape(4, 5, 2)  # odd m
        with pytest.raises(ConfigurationError):
            NetworkShape(4, 4, 1)  # too shallow


class TestInit:
    def test_block_structure(self):
        shape = NetworkShape(4, 4, 2)
        mats = init_params(shape, 0).weights()
        W1, WL = mats
        assert np.all(W1[:2, 2:] == 0.0)
        assert np.all(W1[2:, :2] == 0.0)
        np.testing.assert_array_equal(WL[0, 2:], -WL[0, :2])

    def test_middle_layers_block_diagonal(self):
        shape = NetworkShape(4, 8, 4)
        mats = init_params(shape, 3).weights()
        for W in mats[1:-1]:
            assert np.all(W[:4, 4:] == 0.0)
            assert np.all(W[4:, :4] == 0.0)
            np.testing.assert_array_equal(W[:4, :4], W[4:, 4:])

    def test_deterministic_for_fixed_seed(self):
        shape = NetworkShape(4, 4, 2)
        a = init_params(shape, 42)
        b = init_params(shape, 42)
        np.testing.assert_array_equal(a.theta, b.theta)
        c = init_params(shape, 43)
        assert not np.array_equal(a.theta, c.theta)

    def test_entry_variance_matches_law(self):
        # hidden-block entries ~ Normal(0, 4/m), output ~ Normal(0, 2/m)
        shape = NetworkShape(8, 1000, 2)
        mats = init_params(shape, 7).weights()
        block = mats[0][:500, :4].ravel()
        assert np.var(block) == pytest.approx(4.0 / 1000, rel=0.2)
        w = mats[1][0, :500]
        assert np.var(w) == pytest.approx(2.0 / 1000, rel=0.2)


class TestForward:
    def test_init_zero_on_paired_contexts(self):
        rng = np.random.default_rng(1)
        for d, m, L in [(4, 4, 2), (8, 8, 3), (20, 50, 2)]:
            shape = NetworkShape(d, m, L)
            params = init_params(shape, int(rng.integers(1 << 30)))
            for _ in range(20):
                x = paired_unit_context(rng, d)
                assert abs(forward(shape, params, x)) < 1e-6

    def test_hand_evaluated_two_layer(self):
        # W_1 = I, W_L = (1, 1), x = (0.6, 0.8) -> sqrt(2) * 1.4
        shape = NetworkShape(2, 2, 2)
        theta = np.concatenate([np.eye(2).ravel(), [1.0, 1.0]])
        params = NetworkParams(shape, theta)
        got = forward(shape, params, np.array([0.6, 0.8]))
        assert got == pytest.approx(np.sqrt(2.0) * 1.4, abs=1e-12)

    def test_linear_in_last_layer(self):
        shape = NetworkShape(4, 4, 3)
        rng = np.random.default_rng(5)
        params = init_params(shape, 11)
        theta2 = params.theta.copy()
        theta2[-shape.m :] *= 2.0
        doubled = NetworkParams(shape, theta2)
        x = paired_unit_context(rng, 4)
        # break the init symmetry so the output is nonzero
        bumped = params.copy()
        bumped.theta[: shape.d * shape.m] += rng.normal(0, 0.1, shape.d * shape.m)
        bumped2 = NetworkParams(shape, bumped.theta.copy())
        bumped2.theta[-shape.m :] *= 2.0
        f1 = forward(shape, bumped, x)
        f2 = forward(shape, bumped2, x)
        assert f2 == pytest.approx(2.0 * f1, rel=1e-12)

    def test_dimension_mismatch(self):
        shape = NetworkShape(4, 4, 2)
        params = init_params(shape, 0)
        with pytest.raises(ContractError):
            forward(shape, params, np.ones(3))

    def test_forward_many_matches_forward(self):
        shape = NetworkShape(6, 8, 3)
        params = init_params(shape, 2)
        params.theta[:] += np.random.default_rng(0).normal(0, 0.05, shape.p)
        X = np.random.default_rng(1).standard_normal((5, 6))
        batch = forward_many(shape, params, X)
        singles = [forward(shape, params, x) for x in X]
        np.testing.assert_allclose(batch, singles, atol=1e-12)


class TestGradient:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(9)
        shape = NetworkShape(4, 4, 3)  # p = 16 + 16 + 4 = 36
        for trial in range(5):
            params = init_params(shape, trial)
            params.theta[:] += rng.normal(0, 0.2, shape.p)
            x = rng.standard_normal(4)
            x /= np.linalg.norm(x)
            g = gradient(shape, params, x)
            fd = finite_difference_gradient(shape, params, x)
            denom = max(np.abs(fd).max(), 1e-8)
            assert np.abs(g - fd).max() / denom < 1e-4

    def test_dead_unit_has_zero_incoming_gradient(self):
        shape = NetworkShape(2, 2, 2)
        # W_1 row 0 gives negative pre-activation for x = (1, 0)
        theta = np.concatenate([np.array([[-1.0, 0.0], [1.0, 0.0]]).ravel(), [1.0, 1.0]])
        params = NetworkParams(shape, theta)
        g = gradient(shape, params, np.array([1.0, 0.0]))
        W1_grad = g[:4].reshape(2, 2)
        assert np.all(W1_grad[0] == 0.0)
        assert W1_grad[1, 0] != 0.0

    def test_gradient_norm_scaling(self):
        # ||g(x; theta_0)|| / sqrt(m * L) stays bounded across widths
        rng = np.random.default_rng(21)
        ratios = []
        for m in (16, 64, 256):
            shape = NetworkShape(8, m, 2)
            params = init_params(shape, m)
            X = np.stack([paired_unit_context(rng, 8) for _ in range(100)])
            G = gradient_many(shape, params, X)
            norms = np.linalg.norm(G, axis=1)
            ratios.append(norms.max() / np.sqrt(m * 2))
        assert max(ratios) < 3.0

    def test_gradient_many_matches_single(self):
        shape = NetworkShape(4, 6, 3)
        params = init_params(shape, 3)
        params.theta[:] += np.random.default_rng(4).normal(0, 0.1, shape.p)
        X = np.random.default_rng(5).standard_normal((4, 4))
        G = gradient_many(shape, params, X)
        for i, x in enumerate(X):
            np.testing.assert_allclose(G[i], gradient(shape, params, x), atol=1e-12)


class TestTrain:
    def test_zero_steps_is_identity(self):
        shape = NetworkShape(4, 4, 2)
        p0 = init_params(shape, 0)
        cur = p0.copy()
        cur.theta[:] += 0.1
        rng = np.random.default_rng(0)
        x = paired_unit_context(rng, 4)
        batch = TrainingBatch(x[None, :], [0.5])
        out = train(shape, p0, cur, batch, lam=1.0, eta=0.01, steps=0)
        np.testing.assert_array_equal(out.theta, cur.theta)

    def test_loss_decreases_on_single_point(self):
        shape = NetworkShape(4, 8, 2)
        p0 = init_params(shape, 1)
        rng = np.random.default_rng(2)
        x = paired_unit_context(rng, 4)
        target = 0.7
        batch = TrainingBatch(x[None, :], [target])

        def loss(params):
            resid = forward(shape, params, x) - target
            reg = shape.m * 1.0 / 2.0 * np.sum((params.theta - p0.theta) ** 2)
            return 0.5 * resid**2 + reg

        cur = p0.copy()
        losses = [loss(cur)]
        for _ in range(10):
            cur = train(shape, p0, cur, batch, lam=1.0, eta=1e-3, steps=1)
            losses.append(loss(cur))
        assert all(b < a for a, b in zip(losses, losses[1:]))

    def test_stationary_at_init_with_matching_targets(self):
        shape = NetworkShape(4, 4, 2)
        p0 = init_params(shape, 5)
        rng = np.random.default_rng(3)
        X = np.stack([paired_unit_context(rng, 4) for _ in range(3)])
        targets = forward_many(shape, p0, X)
        batch = TrainingBatch(X, targets)
        out = train(shape, p0, p0.copy(), batch, lam=1.0, eta=0.01, steps=20)
        np.testing.assert_allclose(out.theta, p0.theta, atol=1e-12)

    def test_empty_batch_pulls_toward_init(self):
        shape = NetworkShape(4, 4, 2)
        p0 = init_params(shape, 6)
        cur = p0.copy()
        cur.theta[:] += 1.0
        batch = TrainingBatch.from_groups([])
        out = train(shape, p0, cur, batch, lam=1.0, eta=0.01, steps=5)
        assert np.linalg.norm(out.theta - p0.theta) < np.linalg.norm(cur.theta - p0.theta)

    def test_larger_lambda_stays_closer_to_init(self):
        shape = NetworkShape(4, 8, 2)
        p0 = init_params(shape, 7)
        rng = np.random.default_rng(8)
        X = np.stack([paired_unit_context(rng, 4) for _ in range(5)])
        batch = TrainingBatch(X, rng.uniform(0, 1, 5))
        dists = []
        for lam in (0.1, 1.0, 10.0, 100.0):
            out = train(shape, p0, p0.copy(), batch, lam=lam, eta=1e-4, steps=200)
            dists.append(np.linalg.norm(out.theta - p0.theta))
        assert all(b < a for a, b in zip(dists, dists[1:]))

    def test_training_is_deterministic(self):
        shape = NetworkShape(4, 8, 2)
        p0 = init_params(shape, 9)
        rng = np.random.default_rng(10)
        groups = []
        for _ in range(7):
            X = np.stack([paired_unit_context(rng, 4) for _ in range(3)])
            groups.append((X, rng.uniform(0, 1, 3)))
        batch = TrainingBatch.from_groups(groups)
        outs = []
        for _ in range(2):
            out = train(
                shape, p0, p0.copy(), batch, lam=1.0, eta=0.01, steps=12,
                mode="minibatch", batch_groups=2, rng=np.random.default_rng(99),
            )
            outs.append(out.theta)
        np.testing.assert_array_equal(outs[0], outs[1])

    def test_minibatch_epoch_covers_history(self):
        # with batch_groups >= n_groups each step is full-batch over the data
        shape = NetworkShape(4, 4, 2)
        p0 = init_params(shape, 12)
        rng = np.random.default_rng(13)
        X = np.stack([paired_unit_context(rng, 4) for _ in range(4)])
        batch = TrainingBatch.from_groups([(X[:2], [0.1, 0.2]), (X[2:], [0.3, 0.4])])
        out = train(
            shape, p0, p0.copy(), batch, lam=1.0, eta=0.01, steps=3,
            mode="minibatch", batch_groups=5, rng=np.random.default_rng(0),
        )
        assert np.isfinite(out.theta).all()


class TestSerialization:
    def test_round_trip(self):
        shape = NetworkShape(6, 8, 3)
        params = init_params(shape, 77)
        buf = params_to_bytes(params)
        back = params_from_bytes(buf)
        assert back.shape == shape
        np.testing.assert_array_equal(back.theta, params.theta)
