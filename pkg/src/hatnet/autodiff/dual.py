"""Forward-mode differentiation layered over the reverse-mode tape.

A `Dual` carries a primal value plus, per network input dimension, an
optional first- and second-derivative component (no mixed partials; the
implemented operators never need them).  `None` marks a structurally
zero derivative and is skipped everywhere, so e.g. the second derivative
of an affine expression stays exactly zero.  Components may themselves
be tape `Var`s, which is how input derivatives remain differentiable
with respect to the parameters.
"""

from __future__ import annotations

import numpy as np

from ..errors import UnsupportedOperationError
from . import tape
from .tape import Var, value_of


def _sadd(x, y):
    if x is None:
        return y
    if y is None:
        return x
    return x + y


def _smul(x, y):
    # product where either side may be structurally zero
    if x is None or y is None:
        return None
    return x * y


class Dual:
    """Primal value plus per-dimension first/second derivative slots."""

    _forward_mode = True
    __slots__ = ("re", "d1", "d2")

    def __init__(self, re, d1, d2):
        self.re = re
        self.d1 = tuple(d1)
        self.d2 = tuple(d2)

    def __repr__(self):
        return f"Dual({self.re!r}, d1={self.d1!r}, d2={self.d2!r})"

    @property
    def ndims(self):
        return len(self.d1)

    def _coerce(self, other):
        if isinstance(other, Dual):
            return other
        none = (None,) * self.ndims
        return Dual(other, none, none)

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
        o = self._coerce(other)
        return Dual(
            self.re + o.re,
            tuple(_sadd(a, b) for a, b in zip(self.d1, o.d1)),
            tuple(_sadd(a, b) for a, b in zip(self.d2, o.d2)),
        )

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Dual(
            -self.re,
            tuple(None if a is None else -a for a in self.d1),
            tuple(None if a is None else -a for a in self.d2),
        )

    def __mul__(self, other):
        o = self._coerce(other)
        d1 = tuple(
            _sadd(_smul(a1, o.re), _smul(b1, self.re))
            for a1, b1 in zip(self.d1, o.d1)
        )
        d2 = []
        for a1, a2, b1, b2 in zip(self.d1, self.d2, o.d1, o.d2):
            term = _sadd(_smul(a2, o.re), _smul(b2, self.re))
            cross = _smul(a1, b1)
            if cross is not None:
                term = _sadd(term, 2.0 * cross)
            d2.append(term)
        return Dual(self.re * o.re, d1, tuple(d2))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        q = self.re / o.re
        inv = 1.0 / o.re
        d1 = []
        for a1, b1 in zip(self.d1, o.d1):
            num = _sadd(a1, None if b1 is None else -(q * b1))
            d1.append(None if num is None else num * inv)
        d2 = []
        for q1, a2, b1, b2 in zip(d1, self.d2, o.d1, o.d2):
            num = _sadd(a2, None if b2 is None else -(q * b2))
            cross = _smul(q1, b1)
            if cross is not None:
                num = _sadd(num, -(2.0 * cross))
            d2.append(None if num is None else num * inv)
        return Dual(q, tuple(d1), tuple(d2))

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, exponent):
        if isinstance(exponent, (Dual, Var)):
            raise UnsupportedOperationError("only constant exponents are supported")
        f = self.re ** exponent
        f1 = None if exponent == 0 else exponent * self.re ** (exponent - 1)
        f2 = None if exponent in (0, 1) else exponent * (exponent - 1) * self.re ** (exponent - 2)
        return self._chain(f, f1, f2)

    def __matmul__(self, other):
        if isinstance(other, Dual):
            d1 = tuple(
                _sadd(_smul_mat(a1, other.re), _smul_mat(self.re, b1))
                for a1, b1 in zip(self.d1, other.d1)
            )
            d2 = []
            for a1, a2, b1, b2 in zip(self.d1, self.d2, other.d1, other.d2):
                term = _sadd(_smul_mat(a2, other.re), _smul_mat(self.re, b2))
                cross = _smul_mat(a1, b1)
                if cross is not None:
                    term = _sadd(term, 2.0 * cross)
                d2.append(term)
            return Dual(self.re @ other.re, d1, tuple(d2))
        return Dual(
            self.re @ other,
            tuple(None if a is None else a @ other for a in self.d1),
            tuple(None if a is None else a @ other for a in self.d2),
        )

    def __rmatmul__(self, other):
        none = (None,) * self.ndims
        return Dual(other, none, none) @ self

    # ------------------------------------------------------------------
    # chain rule for unary elementwise functions
    # ------------------------------------------------------------------
    def _chain(self, f, f1, f2):
        d1 = tuple(_smul(f1, a) for a in self.d1)
        d2 = []
        for a1, a2 in zip(self.d1, self.d2):
            term = _smul(f1, a2)
            if a1 is not None and f2 is not None:
                term = _sadd(term, _smul(f2, a1 * a1))
            d2.append(term)
        return Dual(f, d1, tuple(d2))

    def tanh(self):
        t = tape.tanh(self.re)
        t1 = 1.0 - t * t
        return self._chain(t, t1, -2.0 * t * t1)

    def relu(self):
        gate = np.greater(value_of(self.re), 0.0).astype(float)
        # second derivative of relu is defined as 0 everywhere
        return Dual(
            tape.relu(self.re),
            tuple(_smul(gate, a) for a in self.d1),
            tuple(_smul(gate, a) for a in self.d2),
        )

    def exp(self):
        e = tape.exp(self.re)
        return self._chain(e, e, e)

    def sin(self):
        s = tape.sin(self.re)
        c = tape.cos(self.re)
        return self._chain(s, c, -s)

    def cos(self):
        s = tape.sin(self.re)
        c = tape.cos(self.re)
        return self._chain(c, -s, -c)

    def reshape(self, shape):
        f = lambda z: tape.reshape(z, shape)
        return self.map_components(f)

    def map_components(self, f):
        return Dual(
            f(self.re),
            tuple(None if a is None else f(a) for a in self.d1),
            tuple(None if a is None else f(a) for a in self.d2),
        )


def _smul_mat(a, b):
    if a is None or b is None:
        return None
    return a @ b


_UFUNC_ROUTES = {
    np.add: lambda a, b: (b + a) if isinstance(b, Dual) else (a + b),
    np.subtract: lambda a, b: b.__rsub__(a) if isinstance(b, Dual) else a - b,
    np.multiply: lambda a, b: (b * a) if isinstance(b, Dual) else (a * b),
    np.true_divide: lambda a, b: b.__rtruediv__(a) if isinstance(b, Dual) else a / b,
    np.matmul: lambda a, b: b.__rmatmul__(a) if isinstance(b, Dual) else a @ b,
    np.negative: lambda a: -a,
    np.tanh: lambda a: a.tanh(),
    np.exp: lambda a: a.exp(),
    np.sin: lambda a: a.sin(),
    np.cos: lambda a: a.cos(),
}


def seed_point(xs, first=None, second=None):
    """Wrap a d-dimensional point so derivatives are tracked per dimension.

    `first[i]` / `second[i]` select which dimensions carry first/second
    derivative slots; tracking a second derivative implies the first.
    """
    d = len(xs)
    first = [True] * d if first is None else list(first)
    second = [False] * d if second is None else list(second)
    out = []
    for i, x in enumerate(xs):
        if not (first[i] or second[i]):
            out.append(x)
            continue
        d1 = [None] * d
        d1[i] = 1.0
        out.append(Dual(x, d1, (None,) * d))
    return out


def _component(x, i, kind):
    if not isinstance(x, Dual):
        return 0.0
    c = (x.d1 if kind == 1 else x.d2)[i]
    return 0.0 if c is None else value_of(c)


def input_jacobian(f, x):
    """First derivatives of `f` with respect to each of its d inputs."""
    xs = [float(v) for v in np.atleast_1d(x)]
    out = f(*seed_point(xs))
    return np.array([_component(out, i, 1) for i in range(len(xs))])


def input_laplacian(f, x):
    """Sum of unmixed second derivatives of `f` at the point `x`."""
    xs = [float(v) for v in np.atleast_1d(x)]
    out = f(*seed_point(xs, second=[True] * len(xs)))
    return float(sum(_component(out, i, 2) for i in range(len(xs))))
