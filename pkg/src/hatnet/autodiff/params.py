"""Named parameter groups with a stable flat ordering.

The flat vector view (used by the optimizer and by gradient checks) is
the concatenation of every group's raveled array, in store order.  That
order is append-only across network surgery: existing groups keep their
position, new groups slot in where their owner inserts them, and no
existing value ever moves within its group.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tape
from .tape import Var


@dataclass
class Group:
    """One named block of parameters (a vector or matrix)."""

    name: str
    value: np.ndarray
    frozen: bool = False

    def __post_init__(self):
        self.value = np.asarray(self.value, dtype=float)

    @property
    def size(self):
        return self.value.size


class LeafView:
    """Tape-leaf wrappers for every group, keyed by group name."""

    def __init__(self, groups):
        self._vars = {g.name: Var(g.value) for g in groups}

    def get(self, name):
        return self._vars[name]


class ParameterStore:
    """Ordered collection of parameter groups."""

    def __init__(self, groups):
        self._groups = list(groups)
        names = [g.name for g in self._groups]
        if len(set(names)) != len(names):
            raise ValueError("duplicate parameter group names")
        self._by_name = {g.name: g for g in self._groups}

    def __iter__(self):
        return iter(self._groups)

    def __len__(self):
        return len(self._groups)

    def group(self, name):
        return self._by_name[name]

    @property
    def names(self):
        return [g.name for g in self._groups]

    @property
    def total_count(self):
        return sum(g.size for g in self._groups)

    def flatten(self):
        return np.concatenate([g.value.ravel() for g in self._groups])

    def write_flat(self, vec):
        if vec.size != self.total_count:
            raise ValueError(
                f"flat vector has {vec.size} entries, store holds {self.total_count}"
            )
        pos = 0
        for g in self._groups:
            g.value[...] = vec[pos : pos + g.size].reshape(g.value.shape)
            pos += g.size

    def trainable_mask(self):
        parts = [np.full(g.size, not g.frozen) for g in self._groups]
        return np.concatenate(parts) if parts else np.zeros(0, dtype=bool)

    def leaves(self):
        return LeafView(self._groups)

    def group_at_index(self, flat_index):
        """Name of the group owning a flat-vector index (for diagnostics)."""
        pos = 0
        for g in self._groups:
            if flat_index < pos + g.size:
                return g.name
            pos += g.size
        raise IndexError(flat_index)


def grad_params(loss_fn, store):
    """Gradient of a scalar loss with respect to every stored parameter.

    `loss_fn` receives a `LeafView` and must build its result from the
    supported differentiable primitives.  Returns a flat vector aligned
    with `store.flatten()`; parameters the loss never touches get 0.
    """
    if store.total_count == 0:
        raise ValueError("parameter store is empty")
    view = store.leaves()
    loss = loss_fn(view)
    if not isinstance(loss, Var):
        return np.zeros(store.total_count)
    grads = tape.grad(loss, [view.get(name) for name in store.names])
    return np.concatenate([np.asarray(g, dtype=float).ravel() for g in grads])
