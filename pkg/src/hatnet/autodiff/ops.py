"""Type-dispatching wrappers so the same network code runs on plain
arrays, tape variables, and forward-mode duals."""

from __future__ import annotations

import numpy as np

from . import tape
from .dual import Dual


def tanh(x):
    return x.tanh() if isinstance(x, Dual) else tape.tanh(x)


def relu(x):
    return x.relu() if isinstance(x, Dual) else tape.relu(x)


def exp(x):
    return x.exp() if isinstance(x, Dual) else tape.exp(x)


def sin(x):
    return x.sin() if isinstance(x, Dual) else tape.sin(x)


def cos(x):
    return x.cos() if isinstance(x, Dual) else tape.cos(x)


_ACTIVATIONS = {"tanh": tanh, "relu": relu, "identity": lambda x: x}


def activate(name, x):
    return _ACTIVATIONS[name](x)


def reshape(x, shape):
    if isinstance(x, Dual):
        return x.reshape(shape)
    return tape.reshape(x, shape)


def sum_last(x):
    if isinstance(x, Dual):
        return x.map_components(lambda z: tape.vsum(z, axis=-1))
    return tape.vsum(x, axis=-1)


def primal(x):
    """Plain numpy value of any scalar-like (Dual re-part, Var value)."""
    if isinstance(x, Dual):
        x = x.re
    return tape.value_of(x)


def ndim(x):
    return np.ndim(primal(x))


def as_column(x):
    """Promote a batch of scalars (N,) to (N, 1); leave scalars alone."""
    if ndim(x) == 1:
        return reshape(x, (-1, 1))
    return x
