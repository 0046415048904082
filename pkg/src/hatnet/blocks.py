"""Hat-basis blocks: small 3-layer sub-networks initialized so that each
one reproduces the piecewise-linear nodal basis ("hat") function of a
1D mesh node -- exactly with relu, approximately with tanh.

A node is described by its coordinate and the two adjacent interval
lengths.  The first layer has one neuron per kink of the construction
(3 for relu, 2 for tanh); the second layer is a trainable diagonal
scaling of the same width, storing the square-root split of the slope
so that narrow basis functions do not force huge single-layer weights;
the third layer combines the activations into the scalar block output.
All three layers carry biases (the diagonal-layer and output biases
start at zero, so the initial block value is unchanged by them).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import ops


@dataclass(frozen=True)
class NodeTriple:
    """A node coordinate with its left/right neighbor distances."""

    center: float
    h_left: float
    h_right: float

    def __post_init__(self):
        if not (self.h_left > 0 and self.h_right > 0):
            raise ValueError(
                f"interval lengths must be positive, got ({self.h_left}, {self.h_right})"
            )


@dataclass
class HatBlock:
    """One basis block: activation kind plus its three parameter groups."""

    activation: str
    w1: np.ndarray
    b1: np.ndarray
    w2_diag: np.ndarray
    b2: np.ndarray
    w_out: np.ndarray
    b_out: float = 0.0
    frozen: bool = False

    @property
    def width(self):
        return len(self.w1)


def relu_hat_block(node: NodeTriple) -> HatBlock:
    """Block that equals the hat function at `node` exactly.

    Width 3: one neuron per kink, slopes split as square roots between
    the first layer and the diagonal layer.
    """
    hl, hr, xj = node.h_left, node.h_right, node.center
    roots = np.sqrt([1.0 / hl, 0.5 * (1.0 / hl + 1.0 / hr), 1.0 / hr])
    kinks = np.array([xj - hl, xj, xj + hr])
    return HatBlock(
        activation="relu",
        w1=roots.copy(),
        b1=-roots * kinks,
        w2_diag=roots.copy(),
        b2=np.zeros(3),
        w_out=np.array([1.0, -2.0, 1.0]),
    )


def tanh_hat_block(node: NodeTriple) -> HatBlock:
    """Block approximating the hat function at `node` with tanh ramps.

    Width 2: one saturating ramp per interval midpoint; the difference
    of the two ramps peaks at the node and decays to zero away from it.
    """
    hl, hr, xj = node.h_left, node.h_right, node.center
    roots = np.sqrt([2.0 / hl, 2.0 / hr])
    midpoints = np.array([xj - 0.5 * hl, xj + 0.5 * hr])
    return HatBlock(
        activation="tanh",
        w1=roots.copy(),
        b1=-roots * midpoints,
        w2_diag=roots.copy(),
        b2=np.zeros(2),
        w_out=np.array([0.5, -0.5]),
    )


def make_block(node: NodeTriple, activation: str) -> HatBlock:
    if activation == "relu":
        return relu_hat_block(node)
    if activation == "tanh":
        return tanh_hat_block(node)
    raise ValueError(f"unknown block activation {activation!r}")


def eval_block(block: HatBlock, x):
    """Evaluate a block at `x` (scalar-like or a batch of shape (N,))."""
    xs = ops.as_column(x)
    z = block.w2_diag * (block.w1 * xs + block.b1) + block.b2
    a = ops.activate(block.activation, z)
    return ops.sum_last(a * block.w_out) + block.b_out


def block_widths(activation: str) -> int:
    """First-layer width of one block for the given activation."""
    return 3 if activation == "relu" else 2


def params_per_block(activation: str) -> int:
    """Trainable scalars per block: two width-k layers with biases plus
    the width-k output weights and output bias."""
    k = block_widths(activation)
    return 5 * k + 1
