"""Differentiation engine checks against finite-difference oracles."""

import numpy as np
import pytest

from hatnet.autodiff import (
    Group,
    ParameterStore,
    Var,
    grad_params,
    input_jacobian,
    input_laplacian,
)
from hatnet.autodiff import tape
from hatnet.errors import UnsupportedOperationError


class _ArrayView:
    """Duck-typed LeafView that hands back plain arrays (for FD oracles)."""

    def __init__(self, store):
        self._store = store

    def get(self, name):
        return self._store.group(name).value


def _fd_gradient(loss_fn, store, step=1e-5):
    """Central finite differences on the flat parameter vector."""
    base = store.flatten()
    out = np.zeros_like(base)
    for k in range(base.size):
        for sign in (+1, -1):
            vec = base.copy()
            vec[k] += sign * step
            store.write_flat(vec)
            val = loss_fn(_ArrayView(store))
            out[k] += sign * val
    store.write_flat(base)
    return out / (2 * step)


def _composite_loss(view):
    """Exercises +, -, *, /, powers, tanh, relu, exp, sin, cos, matmul."""
    w = view.get("w")
    m = view.get("m")
    b = view.get("b")
    x = np.linspace(-1.0, 1.0, 7)
    h = tape.tanh(tape.reshape(x, (-1, 1)) * w + 0.3)
    z = h @ m.T + b
    y = tape.relu(z) + tape.sin(z) * 0.25 + tape.exp(z * -0.5) / 3.0 - tape.cos(z)
    return tape.vmean(y ** 2)


def _make_store(rng):
    return ParameterStore(
        [
            Group("w", rng.normal(size=4)),
            Group("m", rng.normal(size=(3, 4))),
            Group("b", rng.normal(size=3)),
        ]
    )


class TestGradParams:
    def test_quadratic(self):
        store = ParameterStore([Group("t", np.array([3.0]))])
        g = grad_params(lambda v: tape.vsum(v.get("t") ** 2), store)
        np.testing.assert_array_equal(g, [6.0])

    def test_sum_has_unit_gradient(self):
        rng = np.random.default_rng(0)
        store = ParameterStore([Group("a", rng.normal(size=5)), Group("b", rng.normal(size=(2, 3)))])
        g = grad_params(lambda v: tape.vsum(v.get("a")) + tape.vsum(v.get("b")), store)
        np.testing.assert_array_equal(g, np.ones(11))

    def test_untouched_parameters_get_zero(self):
        store = ParameterStore([Group("a", np.array([1.0, 2.0])), Group("b", np.array([5.0]))])
        g = grad_params(lambda v: tape.vsum(v.get("b") * 2.0), store)
        np.testing.assert_array_equal(g, [0.0, 0.0, 2.0])

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_matches_central_differences(self, seed):
        rng = np.random.default_rng(seed)
        store = _make_store(rng)
        g = grad_params(_composite_loss, store)
        fd = _fd_gradient(_composite_loss, store)
        scale = np.maximum(1.0, np.abs(g))
        assert np.max(np.abs(g - fd) / scale) <= 1e-5

    def test_deterministic_bitwise(self):
        rng = np.random.default_rng(7)
        store = _make_store(rng)
        g1 = grad_params(_composite_loss, store)
        g2 = grad_params(_composite_loss, store)
        np.testing.assert_array_equal(g1, g2)

    def test_linearity(self):
        rng = np.random.default_rng(11)
        store = _make_store(rng)

        def f(view):
            return tape.vmean(tape.tanh(view.get("w")) * view.get("w"))

        def g(view):
            return tape.vmean(tape.sin(view.get("w")) ** 2)

        gf = grad_params(f, store)
        gg = grad_params(g, store)
        combo = grad_params(lambda v: 2.5 * f(v) - 0.75 * g(v), store)
        np.testing.assert_allclose(combo, 2.5 * gf - 0.75 * gg, rtol=0, atol=1e-15)

    def test_empty_store_rejected(self):
        with pytest.raises(ValueError):
            grad_params(lambda v: 0.0, ParameterStore([]))


class TestInputDerivatives:
    def test_square(self):
        jac = input_jacobian(lambda x: x ** 2, [2.0])
        np.testing.assert_allclose(jac, [4.0])

    def test_additive(self):
        jac = input_jacobian(lambda x, y: x + y, [0.3, -5.0])
        np.testing.assert_array_equal(jac, [1.0, 1.0])

    def test_constant_has_zero_derivative(self):
        jac = input_jacobian(lambda x, y: 7.5, [1.0, 2.0])
        np.testing.assert_array_equal(jac, [0.0, 0.0])

    def test_jacobian_matches_finite_differences(self):
        def f(x, y):
            return tape.tanh(x * y) + tape.sin(x) * tape.exp(-(y ** 2)) + x / (2.0 + tape.cos(y))

        rng = np.random.default_rng(3)
        for _ in range(20):
            p = rng.uniform(-2, 2, size=2)
            jac = input_jacobian(f, p)
            h = 1e-6
            for i in range(2):
                e = np.zeros(2)
                e[i] = h
                fd = (f(*(p + e)) - f(*(p - e))) / (2 * h)
                assert abs(jac[i] - fd) <= 1e-8 * max(1.0, abs(fd))

    def test_laplacian_of_constant(self):
        assert input_laplacian(lambda x: 42.0, [0.1]) == 0.0

    def test_laplacian_of_affine_is_exactly_zero(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            a, b, c = rng.normal(size=3)
            val = input_laplacian(lambda x, y: a * x + b * y + c, rng.uniform(-1, 1, 2))
            assert val == 0.0

    def test_laplacian_of_paraboloid(self):
        val = input_laplacian(lambda x, y: x ** 2 + y ** 2, [0.3, -0.7])
        np.testing.assert_allclose(val, 4.0, rtol=0, atol=1e-14)

    def test_laplacian_matches_five_point_stencil(self):
        def f(x, y):
            return tape.exp(tape.sin(x) * y) + tape.tanh(x - 0.5 * y) ** 3

        rng = np.random.default_rng(9)
        h = 1e-3
        for _ in range(20):
            x, y = rng.uniform(-1, 1, size=2)
            lap = input_laplacian(f, [x, y])
            stencil = (
                f(x + h, y) + f(x - h, y) + f(x, y + h) + f(x, y - h) - 4.0 * f(x, y)
            ) / h ** 2
            assert abs(lap - stencil) <= 1e-4


class TestNestedConsistency:
    """First/second input derivatives agree with analytic polynomial calculus."""

    @pytest.mark.parametrize("seed", range(5))
    def test_random_polynomials_up_to_degree_4(self, seed):
        rng = np.random.default_rng(seed)
        coeffs = {(i, j): rng.normal() for i in range(5) for j in range(5) if i + j <= 4}

        def p(x, y):
            total = 0.0
            for (i, j), c in coeffs.items():
                total = total + c * x ** i * y ** j
            return total

        def d2(axis, x, y):
            total = 0.0
            for (i, j), c in coeffs.items():
                if axis == 0 and i >= 2:
                    total += c * i * (i - 1) * x ** (i - 2) * y ** j
                if axis == 1 and j >= 2:
                    total += c * j * (j - 1) * x ** i * y ** (j - 2)
            return total

        def d1(axis, x, y):
            total = 0.0
            for (i, j), c in coeffs.items():
                if axis == 0 and i >= 1:
                    total += c * i * x ** (i - 1) * y ** j
                if axis == 1 and j >= 1:
                    total += c * j * x ** i * y ** (j - 1)
            return total

        for _ in range(5):
            x, y = rng.uniform(-1.5, 1.5, size=2)
            jac = input_jacobian(p, [x, y])
            np.testing.assert_allclose(jac, [d1(0, x, y), d1(1, x, y)], rtol=1e-12, atol=1e-12)
            lap = input_laplacian(p, [x, y])
            np.testing.assert_allclose(lap, d2(0, x, y) + d2(1, x, y), rtol=1e-12, atol=1e-12)


class TestClosureAndErrors:
    def test_arithmetic_closure(self):
        v = Var(np.array([1.0, 2.0]))
        w = v + 1.0
        w = 2.0 * w - v / 3.0
        w = tape.tanh(w) * tape.relu(v) + tape.exp(-w) - tape.sin(v) * tape.cos(v)
        w = w ** 2
        assert isinstance(w, Var)

    def test_numpy_ufunc_routing(self):
        v = Var(np.array([0.5, -0.5]))
        out = np.tanh(v)
        assert isinstance(out, Var)
        np.testing.assert_array_equal(out.value, np.tanh(v.value))

    def test_unsupported_ufunc_raises(self):
        v = Var(np.array([1.0]))
        with pytest.raises(UnsupportedOperationError):
            np.log(v)

    def test_variable_exponent_rejected(self):
        v = Var(np.array([2.0]))
        with pytest.raises(UnsupportedOperationError):
            v ** v

    def test_backward_requires_scalar(self):
        v = Var(np.array([1.0, 2.0]))
        with pytest.raises(UnsupportedOperationError):
            (v * 2).backward()

    def test_relu_derivative_at_zero_is_zero(self):
        g = grad_params(
            lambda view: tape.vsum(tape.relu(view.get("t"))),
            ParameterStore([Group("t", np.array([0.0, -1.0, 2.0]))]),
        )
        np.testing.assert_array_equal(g, [0.0, 0.0, 1.0])


class TestStore:
    def test_flat_roundtrip(self):
        rng = np.random.default_rng(13)
        store = _make_store(rng)
        flat = store.flatten()
        assert flat.size == store.total_count == 4 + 12 + 3
        store.write_flat(flat * 2.0)
        np.testing.assert_array_equal(store.flatten(), flat * 2.0)

    def test_frozen_mask(self):
        store = ParameterStore(
            [Group("a", np.zeros(2), frozen=True), Group("b", np.zeros(3))]
        )
        np.testing.assert_array_equal(
            store.trainable_mask(), [False, False, True, True, True]
        )

    def test_group_at_index(self):
        store = ParameterStore([Group("a", np.zeros(2)), Group("b", np.zeros(3))])
        assert store.group_at_index(0) == "a"
        assert store.group_at_index(2) == "b"
        assert store.group_at_index(4) == "b"
