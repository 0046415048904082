"""Hat-block construction and evaluation against direct piecewise oracles."""

import numpy as np
import pytest

from hatnet.autodiff import input_jacobian
from hatnet.blocks import (
    NodeTriple,
    eval_block,
    make_block,
    params_per_block,
    relu_hat_block,
    tanh_hat_block,
)


def hat_function(node, x):
    """Direct piecewise-linear nodal basis function (the oracle)."""
    x = np.asarray(x, dtype=float)
    left = node.center - node.h_left
    right = node.center + node.h_right
    rising = (x - left) / node.h_left
    falling = (right - x) / node.h_right
    return np.where(
        (x >= left) & (x < node.center),
        rising,
        np.where((x >= node.center) & (x < right), falling, 0.0),
    )


class TestNodeTriple:
    @pytest.mark.parametrize("hl,hr", [(0.0, 1.0), (1.0, 0.0), (-0.5, 1.0)])
    def test_nonpositive_intervals_rejected(self, hl, hr):
        with pytest.raises(ValueError):
            NodeTriple(0.5, hl, hr)


class TestReluBlock:
    def test_unit_value_at_node(self):
        block = relu_hat_block(NodeTriple(0.5, 0.5, 0.5))
        assert eval_block(block, 0.5) == pytest.approx(1.0, abs=1e-14)

    def test_vanishes_at_neighbors(self):
        block = relu_hat_block(NodeTriple(0.5, 0.5, 0.5))
        assert eval_block(block, 0.0) == pytest.approx(0.0, abs=1e-14)
        assert eval_block(block, 1.0) == pytest.approx(0.0, abs=1e-14)

    def test_halfway_value(self):
        block = relu_hat_block(NodeTriple(0.5, 0.5, 0.5))
        assert eval_block(block, 0.75) == pytest.approx(0.5, abs=1e-14)

    def test_matches_hat_function_on_grid(self):
        node = NodeTriple(0.3, 0.1, 0.2)
        block = relu_hat_block(node)
        x = np.linspace(0.0, 1.0, 100)
        np.testing.assert_allclose(eval_block(block, x), hat_function(node, x), rtol=0, atol=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_exact_representation_random_nodes(self, seed):
        rng = np.random.default_rng(seed)
        node = NodeTriple(rng.uniform(-2, 2), rng.uniform(0.01, 1.5), rng.uniform(0.01, 1.5))
        block = relu_hat_block(node)
        x = np.linspace(node.center - 3, node.center + 3, 1000)
        np.testing.assert_allclose(eval_block(block, x), hat_function(node, x), rtol=0, atol=1e-12)

    def test_slope_reconstruction(self):
        """Collapsing the square-root split recovers the single-layer slopes."""
        node = NodeTriple(0.3, 0.1, 0.2)
        block = relu_hat_block(node)
        target = [1.0 / 0.1, 0.5 * (1.0 / 0.1 + 1.0 / 0.2), 1.0 / 0.2]
        np.testing.assert_allclose(block.w2_diag * block.w1, target, rtol=1e-14)

    def test_structure(self):
        block = relu_hat_block(NodeTriple(0.0, 1.0, 1.0))
        assert block.width == 3
        assert len(block.w2_diag) == len(block.w1)
        np.testing.assert_array_equal(block.w_out, [1.0, -2.0, 1.0])
        np.testing.assert_array_equal(block.b2, np.zeros(3))
        assert block.b_out == 0.0


class TestTanhBlock:
    def test_value_at_symmetric_node(self):
        block = tanh_hat_block(NodeTriple(0.0, 1.0, 1.0))
        assert eval_block(block, 0.0) == pytest.approx(0.7615941559557649, abs=1e-14)

    def test_even_symmetry_for_equal_intervals(self):
        block = tanh_hat_block(NodeTriple(0.0, 1.0, 1.0))
        x = np.linspace(0.0, 3.0, 50)
        np.testing.assert_allclose(eval_block(block, x), eval_block(block, -x), rtol=0, atol=1e-14)

    def test_saturation_decay(self):
        block = tanh_hat_block(NodeTriple(0.2, 0.05, 0.05))
        assert eval_block(block, 0.2) > 0.76
        assert abs(eval_block(block, 0.2 + 0.5)) < 1e-8
        assert abs(eval_block(block, 0.2 - 0.5)) < 1e-8

    def test_cancels_at_saturation(self):
        block = tanh_hat_block(NodeTriple(0.0, 1.0, 1.0))
        assert abs(eval_block(block, 100.0)) <= 1e-12

    def test_peak_error_vs_hat(self):
        """At the node the tanh block misses the unit peak by 1 - tanh(1)."""
        rng = np.random.default_rng(2)
        for _ in range(10):
            node = NodeTriple(rng.uniform(-1, 1), rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0))
            block = tanh_hat_block(node)
            gap = abs(eval_block(block, node.center) - 1.0)
            assert gap <= abs(np.tanh(1.0) - 1.0) + 1e-14

    def test_monotone_decay_outside_support(self):
        node = NodeTriple(0.0, 0.3, 0.3)
        block = tanh_hat_block(node)
        x = np.linspace(node.center + node.h_right, node.center + node.h_right + 3.0, 400)
        vals = np.abs(eval_block(block, x))
        assert np.all(np.diff(vals) <= 1e-15)
        assert vals[-1] < 1e-8

    def test_derivative_matches_finite_differences(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            node = NodeTriple(rng.uniform(-1, 1), rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0))
            block = tanh_hat_block(node)
            (deriv,) = input_jacobian(lambda x: eval_block(block, x), [node.center])
            h = 1e-6
            fd = (eval_block(block, node.center + h) - eval_block(block, node.center - h)) / (2 * h)
            assert abs(deriv - fd) <= 1e-6

    def test_structure(self):
        block = tanh_hat_block(NodeTriple(0.0, 1.0, 1.0))
        assert block.width == 2
        np.testing.assert_array_equal(block.w_out, [0.5, -0.5])


class TestScaleCovariance:
    @pytest.mark.parametrize("activation", ["relu", "tanh"])
    def test_rescaled_node_matches(self, activation):
        rng = np.random.default_rng(6)
        for _ in range(10):
            xj, hl, hr = rng.uniform(-1, 1), rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0)
            a = rng.uniform(0.1, 5.0)
            base = make_block(NodeTriple(xj, hl, hr), activation)
            scaled = make_block(NodeTriple(a * xj, a * hl, a * hr), activation)
            x = rng.uniform(xj - 2 * hl, xj + 2 * hr, size=50)
            np.testing.assert_allclose(
                eval_block(scaled, a * x), eval_block(base, x), rtol=0, atol=1e-12
            )


def test_params_per_block():
    assert params_per_block("tanh") == 11
    assert params_per_block("relu") == 16
