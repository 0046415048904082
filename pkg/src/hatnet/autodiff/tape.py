"""Reverse-mode differentiation over scalar- and array-valued nodes.

A `Var` wraps a numpy value and records how it was produced; calling
`backward` on a scalar output accumulates d(output)/d(leaf) into every
reachable leaf.  Values may be plain floats, numpy scalars, or arrays of
any shape; broadcasting in the forward pass is undone in the backward
pass by summing over the broadcast axes.  The graph is rebuilt on every
evaluation (define-by-run), and all operations are plain numpy, so a
fixed input always produces a bit-identical gradient.
"""

from __future__ import annotations

import numpy as np

from ..errors import UnsupportedOperationError


def _unbroadcast(grad, shape):
    """Sum `grad` down to `shape`, inverting numpy broadcasting."""
    gshape = np.shape(grad)
    if gshape == shape:
        return grad
    if shape == ():
        return np.sum(grad)
    # Remove leading axes added by broadcasting, then collapse size-1 axes.
    extra = len(gshape) - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and np.shape(grad)[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


def _accumulate(var, g):
    g = _unbroadcast(g, np.shape(var.value))
    if var.grad is None:
        # may alias the child's buffer; safe because each node's own
        # backward has already consumed its grad by the time parents
        # accumulate, but we must not mutate it in place
        var.grad = g
        var._grad_owned = False
    elif (
        var._grad_owned
        and isinstance(var.grad, np.ndarray)
        and var.grad.shape == np.shape(g)
    ):
        var.grad += g
    else:
        var.grad = var.grad + g
        var._grad_owned = True


def _is_dual(x):
    return getattr(x, "_forward_mode", False)


class Var:
    """A differentiable value: closed under +, -, *, /, powers, matmul,
    tanh, relu, exp, sin, cos, and the shape/reduction ops below."""

    __slots__ = ("value", "grad", "_grad_owned", "_parents", "_vjp")

    def __init__(self, value, _parents=(), _vjp=None):
        self.value = value
        self.grad = None
        self._grad_owned = False
        self._parents = _parents
        self._vjp = _vjp

    def __repr__(self):
        return f"Var({self.value!r})"

    # numpy must not apply ufuncs elementwise over Var objects; route the
    # few supported ufuncs back through our rules and reject the rest.
    def __array_ufunc__(self, ufunc, method, *inputs, **kwargs):
        if method != "__call__" or kwargs:
            raise UnsupportedOperationError(
                f"numpy ufunc {ufunc.__name__}.{method} is not a supported primitive"
            )
        handler = _UFUNC_ROUTES.get(ufunc)
        if handler is None:
            raise UnsupportedOperationError(
                f"numpy ufunc {ufunc.__name__} is not a supported primitive"
            )
        return handler(*inputs)

    # ------------------------------------------------------------------
    # arithmetic
    # ------------------------------------------------------------------
    def __add__(self, other):
        if _is_dual(other):
            return NotImplemented
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        if _is_dual(other):
            return NotImplemented
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        if _is_dual(other):
            return NotImplemented
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        if _is_dual(other):
            return NotImplemented
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        return powc(self, exponent)

    def __matmul__(self, other):
        if _is_dual(other):
            return NotImplemented
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)

    def __getitem__(self, idx):
        return take(self, idx)

    @property
    def T(self):
        return transpose(self)

    @property
    def shape(self):
        return np.shape(self.value)

    # ------------------------------------------------------------------
    # backward pass
    # ------------------------------------------------------------------
    def backward(self, seed=1.0):
        """Accumulate gradients of this (scalar) value into all leaves."""
        if np.size(self.value) != 1:
            raise UnsupportedOperationError(
                "backward requires a scalar output; reduce with vsum/vmean first"
            )
        topo = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in visited:
                    stack.append((parent, False))
        self.grad = seed
        for node in reversed(topo):
            if node._vjp is not None and node.grad is not None:
                node._vjp(node.grad)


def value_of(x):
    return x.value if isinstance(x, Var) else x


def _binary(a, b, value, vjp_a, vjp_b):
    parents = []
    if isinstance(a, Var):
        parents.append(a)
    if isinstance(b, Var):
        parents.append(b)

    def vjp(g):
        if isinstance(a, Var):
            _accumulate(a, vjp_a(g))
        if isinstance(b, Var):
            _accumulate(b, vjp_b(g))

    return Var(value, tuple(parents), vjp)


def add(a, b):
    return _binary(a, b, value_of(a) + value_of(b), lambda g: g, lambda g: g)


def sub(a, b):
    return _binary(a, b, value_of(a) - value_of(b), lambda g: g, lambda g: -g)


def mul(a, b):
    av, bv = value_of(a), value_of(b)
    return _binary(a, b, av * bv, lambda g: g * bv, lambda g: g * av)


def div(a, b):
    av, bv = value_of(a), value_of(b)
    out = av / bv
    return _binary(a, b, out, lambda g: g / bv, lambda g: -g * out / bv)


def neg(a):
    return Var(-a.value, (a,), lambda g: _accumulate(a, -g))


def powc(a, exponent):
    if isinstance(exponent, Var) or _is_dual(exponent):
        raise UnsupportedOperationError("only constant exponents are supported")
    av = a.value
    out = av ** exponent
    return Var(out, (a,), lambda g: _accumulate(a, g * exponent * av ** (exponent - 1)))


def matmul(a, b):
    av, bv = value_of(a), value_of(b)
    out = av @ bv

    def vjp(g):
        if isinstance(a, Var):
            _accumulate(a, g @ np.swapaxes(bv, -1, -2) if np.ndim(bv) > 1 else np.outer(g, bv))
        if isinstance(b, Var):
            if np.ndim(av) == 1:
                _accumulate(b, np.outer(av, g))
            else:
                _accumulate(b, np.swapaxes(av, -1, -2) @ g)

    parents = tuple(x for x in (a, b) if isinstance(x, Var))
    return Var(out, parents, vjp)


def transpose(a):
    return Var(a.value.T, (a,), lambda g: _accumulate(a, np.transpose(g)))


def reshape(a, shape):
    if not isinstance(a, Var):
        return np.reshape(a, shape)
    old = np.shape(a.value)
    return Var(np.reshape(a.value, shape), (a,), lambda g: _accumulate(a, np.reshape(g, old)))


def take(a, idx):
    if not isinstance(a, Var):
        return a[idx]

    def vjp(g):
        buf = np.zeros_like(a.value)
        np.add.at(buf, idx, g)
        _accumulate(a, buf)

    return Var(a.value[idx], (a,), vjp)


def scatter_into(shape, rows, cols, v):
    """Dense (rows x cols) matrix with `v` placed at the given index
    pairs (which must be distinct) and exact zeros elsewhere."""
    vv = value_of(v)
    buf = np.zeros(shape, dtype=np.asarray(vv).dtype)
    buf[rows, cols] = vv
    if not isinstance(v, Var):
        return buf
    return Var(buf, (v,), lambda g: _accumulate(v, g[rows, cols]))


def concat(parts, axis=0):
    if not any(isinstance(p, Var) for p in parts):
        return np.concatenate(parts, axis=axis)
    values = [value_of(p) for p in parts]
    sizes = [np.shape(v)[axis] for v in values]
    offsets = np.cumsum([0] + sizes)

    def vjp(g):
        for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            if isinstance(p, Var):
                sl = [slice(None)] * g.ndim
                sl[axis] = slice(lo, hi)
                _accumulate(p, g[tuple(sl)])

    parents = tuple(p for p in parts if isinstance(p, Var))
    return Var(np.concatenate(values, axis=axis), parents, vjp)


def vsum(a, axis=None, keepdims=False):
    if not isinstance(a, Var):
        return np.sum(a, axis=axis, keepdims=keepdims)
    shape = np.shape(a.value)

    def vjp(g):
        if axis is None:
            _accumulate(a, np.broadcast_to(g, shape))
        else:
            ge = g if keepdims else np.expand_dims(g, axis)
            _accumulate(a, np.broadcast_to(ge, shape))

    return Var(np.sum(a.value, axis=axis, keepdims=keepdims), (a,), vjp)


def vmean(a, axis=None):
    n = np.size(value_of(a)) if axis is None else np.shape(value_of(a))[axis]
    return vsum(a, axis=axis) * (1.0 / n)


def _unary(a, out, local):
    return Var(out, (a,), lambda g: _accumulate(a, g * local))


def tanh(a):
    if not isinstance(a, Var):
        return np.tanh(a)
    t = np.tanh(a.value)
    return _unary(a, t, 1.0 - t * t)


def relu(a):
    if not isinstance(a, Var):
        return np.maximum(a, 0.0)
    v = a.value
    # derivative at 0 is defined as 0, hence the strict inequality
    return _unary(a, np.maximum(v, 0.0), np.greater(v, 0.0).astype(v.dtype if hasattr(v, "dtype") else float))


def exp(a):
    if not isinstance(a, Var):
        return np.exp(a)
    e = np.exp(a.value)
    return _unary(a, e, e)


def sin(a):
    if not isinstance(a, Var):
        return np.sin(a)
    return _unary(a, np.sin(a.value), np.cos(a.value))


def cos(a):
    if not isinstance(a, Var):
        return np.cos(a)
    return _unary(a, np.cos(a.value), -np.sin(a.value))


_UFUNC_ROUTES = {
    np.add: add,
    np.subtract: sub,
    np.multiply: mul,
    np.true_divide: div,
    np.negative: lambda a: neg(a) if isinstance(a, Var) else -a,
    np.matmul: matmul,
    np.tanh: tanh,
    np.exp: exp,
    np.sin: sin,
    np.cos: cos,
}


def grad(output, leaves):
    """Return d(output)/d(leaf) for every leaf, zeros where unreached."""
    output.backward()
    out = []
    for leaf in leaves:
        if leaf.grad is None:
            out.append(np.zeros_like(leaf.value))
        else:
            out.append(np.asarray(leaf.grad))
    return out
