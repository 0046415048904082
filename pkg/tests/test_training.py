"""Sampling, the residual objective, the optimizer, and the training loop."""

import numpy as np
import pytest

from hatnet.autodiff import grad_params
from hatnet.errors import ConfigurationError, TrainingDivergedError
from hatnet.network import build_network, uniform_nodes
from hatnet.problems import burgers, fitting_singular, get_problem, poisson_one_peak
from hatnet.training import (
    AdamState,
    TrainingConfig,
    adam_step,
    assemble,
    learning_rate,
    loss_and_grad,
    pinn_loss,
    sample,
    train,
    _interior_chunks,
)


class ExactNet:
    """Stands in for a trained network that matches a target exactly."""

    def __init__(self, fn, input_dim):
        self.fn = fn
        self.input_dim = input_dim
        self.supports_second_order = True

    def evaluate(self, X, view=None, need_first=(), need_second=()):
        u = self.fn(np.asarray(X, dtype=float))
        return u, {i: None for i in need_first}, {i: None for i in need_second}


class TestSampling:
    def test_interval_counts_and_range(self):
        p = fitting_singular()
        s = sample(p, 2000, seed=0)
        assert s.interior.shape == (2000, 1)
        assert np.all((s.interior > 0) & (s.interior < 1))
        assert len(s.boundary) == 0

    def test_square_edges_get_equal_shares(self):
        p = poisson_one_peak()
        s = sample(p, 100, n_boundary=400, seed=0)
        assert len(s.boundary) == 400
        counts = {name: s.boundary_labels.count(name) for name in set(s.boundary_labels)}
        assert sorted(counts.values()) == [100, 100, 100, 100]

    def test_boundary_points_satisfy_predicate(self):
        p = poisson_one_peak()
        s = sample(p, 10, seed=3)
        assert np.max(np.min(np.abs(np.abs(s.boundary) - 1.0), axis=1)) <= 1e-12

    def test_same_seed_reproduces(self):
        p = poisson_one_peak()
        a = sample(p, 500, seed=42)
        b = sample(p, 500, seed=42)
        np.testing.assert_array_equal(a.interior, b.interior)
        np.testing.assert_array_equal(a.boundary, b.boundary)

    def test_burgers_component_counts(self):
        s = sample(burgers(), 100, seed=0)
        counts = {name: s.boundary_labels.count(name) for name in set(s.boundary_labels)}
        assert counts == {"x_lo": 200, "x_hi": 200, "initial": 100}

    def test_needs_interior_points(self):
        with pytest.raises(ValueError):
            sample(fitting_singular(), 0, seed=0)


class TestLoss:
    def test_exact_solution_has_zero_loss(self):
        p = fitting_singular()
        s = sample(p, 50, seed=1)
        loss = pinn_loss(ExactNet(p.u_star, 1), p, s, beta=1000.0)
        assert loss <= 1e-20

    def test_beta_zero_drops_boundary_term(self):
        p = poisson_one_peak()
        s = sample(p, 50, n_boundary=8, seed=1)
        net = build_network([uniform_nodes(3, -1, 1)] * 2, "tanh", 2, seed=0)
        from hatnet.training import loss_terms

        interior, boundary = loss_terms(net, assemble(p, s))
        assert boundary > 0
        assert pinn_loss(net, p, s, beta=0.0) == pytest.approx(interior, rel=1e-15)

    def test_zero_net_matches_direct_summation(self):
        p = fitting_singular()
        s = sample(p, 500, seed=2)
        loss = pinn_loss(ExactNet(lambda X: np.zeros(len(X)), 1), p, s, beta=0.0)
        oracle = float(np.mean(p.u_star(s.interior) ** 2))
        assert loss == pytest.approx(oracle, abs=1e-12)

    def test_relu_rejected_for_second_order_operators(self):
        p = poisson_one_peak()
        s = sample(p, 20, n_boundary=8, seed=0)
        net = build_network([uniform_nodes(3, -1, 1)] * 2, "relu", 2, seed=0)
        with pytest.raises(ConfigurationError):
            pinn_loss(net, p, s, beta=1.0)

    @pytest.mark.parametrize("problem_name,n", [("fitting-singular", 10), ("poisson-one-peak", 12), ("burgers", 12)])
    def test_gradient_matches_finite_differences(self, problem_name, n):
        p = get_problem(problem_name)
        s = sample(p, n, n_boundary=8 if p.boundary_components else None, seed=3)
        blocks = [uniform_nodes(3, lo, hi) for lo, hi in p.bounds]
        net = build_network(blocks, "tanh", 1 if p.input_dim == 2 else 0, seed=5)
        store = net.parameter_store()

        loss_fn = lambda view: pinn_loss(net, p, s, beta=7.0, view=view)
        g = grad_params(loss_fn, store)

        base = store.flatten()
        fd = np.zeros_like(base)
        step = 1e-5
        for k in range(base.size):
            for sign in (+1, -1):
                vec = base.copy()
                vec[k] += sign * step
                store.write_flat(vec)
                fd[k] += sign * pinn_loss(net, p, s, beta=7.0)
        store.write_flat(base)
        fd /= 2 * step
        rel = np.max(np.abs(g - fd) / np.maximum(1.0, np.abs(g)))
        assert rel <= 1e-5

    def test_chunked_gradient_equals_direct(self):
        p = poisson_one_peak()
        s = sample(p, 300, n_boundary=16, seed=4)
        net = build_network([uniform_nodes(4, -1, 1)] * 2, "tanh", 2, seed=6)
        store = net.parameter_store()
        data = assemble(p, s)
        _, _, _, chunked = loss_and_grad(net, store, data, 1000.0, _interior_chunks(data, 64))
        direct = grad_params(lambda v: pinn_loss(net, p, s, 1000.0, view=v), store)
        np.testing.assert_allclose(chunked, direct, rtol=1e-12, atol=1e-12)


class TestAdam:
    def test_learning_rate_staircase(self):
        cfg = TrainingConfig(epochs=0)
        assert learning_rate(cfg, 0) == pytest.approx(5e-3)
        assert learning_rate(cfg, 2499) == pytest.approx(5e-3)
        assert learning_rate(cfg, 2500) == pytest.approx(4.5e-3)
        assert learning_rate(cfg, 25000) == pytest.approx(5e-3 * 0.9 ** 10)

    def test_zero_gradient_is_fixed_point(self):
        net = build_network([uniform_nodes(4)], "tanh", 0, seed=0)
        store = net.parameter_store()
        before = store.flatten()
        adam_step(store, np.zeros(store.total_count), AdamState.zeros(store.total_count), 0, TrainingConfig(epochs=0))
        np.testing.assert_array_equal(store.flatten(), before)

    def test_nonfinite_gradient_names_group(self):
        net = build_network([uniform_nodes(4)], "tanh", 0, seed=0)
        store = net.parameter_store()
        bad = np.zeros(store.total_count)
        bad[-1] = np.nan
        with pytest.raises(TrainingDivergedError, match="f0/"):
            adam_step(store, bad, AdamState.zeros(store.total_count), 0, TrainingConfig(epochs=0))

    def test_frozen_parameters_unchanged(self):
        net = build_network([uniform_nodes(4)], "tanh", 0, seed=0, frozen=True)
        store = net.parameter_store()
        before = store.flatten()
        adam_step(
            store,
            np.ones(store.total_count),
            AdamState.zeros(store.total_count),
            0,
            TrainingConfig(epochs=0),
        )
        after = store.flatten()
        mask = store.trainable_mask()
        np.testing.assert_array_equal(after[~mask], before[~mask])
        assert np.all(after[mask] != before[mask])


class TestTrain:
    def test_zero_epochs_is_identity(self):
        p = fitting_singular()
        s = sample(p, 50, seed=0)
        net = build_network([uniform_nodes(4)], "tanh", 0, seed=1)
        before = net.parameter_store().flatten()
        net, trace = train(net, p, s, TrainingConfig(epochs=0))
        assert len(trace) == 0
        np.testing.assert_array_equal(net.parameter_store().flatten(), before)

    def test_descent_on_toy_fit(self):
        p = fitting_singular()
        s = sample(p, 200, seed=0)
        net = build_network([uniform_nodes(2)], "tanh", 0, seed=1)
        net, trace = train(net, p, s, TrainingConfig(beta=0.0, epochs=200, seed=0))
        assert trace.loss[-1] < trace.loss[0]

    def test_frozen_blocks_bit_identical(self):
        p = fitting_singular()
        s = sample(p, 100, seed=0)
        net = build_network([uniform_nodes(5)], "tanh", 0, seed=1, frozen=True)
        block_groups = {
            g.name: g.value.copy() for g in net.parameter_store() if g.name.startswith("x")
        }
        final_before = net.layers[0].w[(0, 0)].value.copy()
        net, _ = train(net, p, s, TrainingConfig(beta=0.0, epochs=50, seed=0))
        for g in net.parameter_store():
            if g.name.startswith("x"):
                np.testing.assert_array_equal(g.value, block_groups[g.name])
        assert np.any(net.layers[0].w[(0, 0)].value != final_before)

    def test_trace_is_deterministic(self):
        p = fitting_singular()
        s = sample(p, 200, seed=0)
        results = []
        for _ in range(2):
            net = build_network([uniform_nodes(4)], "tanh", 0, seed=1)
            _, trace = train(net, p, s, TrainingConfig(beta=0.0, epochs=100, seed=0))
            results.append(trace)
        np.testing.assert_array_equal(results[0].loss, results[1].loss)
        np.testing.assert_array_equal(results[0].interior_term, results[1].interior_term)

    def test_loss_decomposition_recorded(self):
        p = poisson_one_peak()
        s = sample(p, 64, n_boundary=16, seed=0)
        net = build_network([uniform_nodes(3, -1, 1)] * 2, "tanh", 2, seed=1)
        cfg = TrainingConfig(beta=1000.0, epochs=20, seed=0)
        net, trace = train(net, p, s, cfg)
        for i in range(len(trace)):
            combined = trace.interior_term[i] + cfg.beta * trace.boundary_term[i]
            assert trace.loss[i] == pytest.approx(combined, rel=1e-12)
            assert trace.lr[i] == pytest.approx(learning_rate(cfg, trace.epochs[i]))

    def test_divergence_aborts_with_partial_trace(self):
        p = fitting_singular()
        s = sample(p, 50, seed=0)
        net = build_network([uniform_nodes(3)], "relu", 0, seed=1)
        with pytest.raises(TrainingDivergedError) as info:
            train(net, p, s, TrainingConfig(beta=0.0, epochs=200, lr0=1e60, seed=0))
        assert info.value.trace is not None and len(info.value.trace) > 0
        assert np.all(np.isfinite(net.parameter_store().flatten()))

    def test_float32_mode_trains_and_restores_dtype(self):
        p = fitting_singular()
        s = sample(p, 200, seed=0)
        net = build_network([uniform_nodes(4)], "tanh", 0, seed=1)
        net, trace = train(net, p, s, TrainingConfig(beta=0.0, epochs=50, seed=0, dtype="float32"))
        assert trace.loss[-1] < trace.loss[0]
        assert net.parameter_store().flatten().dtype == np.float64
