"""Networks of per-dimension hat-block stacks feeding a dense subnetwork.

Each input coordinate passes through its own stack of hat blocks; the
concatenated block outputs feed a fully connected subnetwork whose
hidden widths track the total block count, ending in a single linear
output.  Growth ("enhance") appends blocks to the stacks and widens the
hidden layers, with every parameter that touches a new neuron set to
zero so the map the network computes is unchanged -- exactly, not just
to rounding.  To make that guarantee robust, parameters are stored in
append-only generation segments and dense layers evaluate segment by
segment in a fixed order: the floating-point operations computing the
old pathways are bit-identical before and after surgery.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .autodiff import ops
from .autodiff import tape
from .autodiff.params import Group, ParameterStore
from .blocks import NodeTriple, block_widths, make_block, params_per_block
from .errors import CheckpointError

CHECKPOINT_FORMAT = "hatnet-checkpoint-v1"


@dataclass
class BlockGen:
    """One append-only batch of blocks within a stack."""

    nodes: list
    w1: Group
    b1: Group
    w2_diag: Group
    b2: Group
    w_out: Group
    b_out: Group

    @property
    def count(self):
        return len(self.nodes)

    def groups(self):
        return [self.w1, self.b1, self.w2_diag, self.b2, self.w_out, self.b_out]


@dataclass
class BlockStack:
    """All hat blocks reading one input dimension."""

    dim: int
    activation: str
    gens: list = field(default_factory=list)

    @property
    def dtype(self):
        return self.stacks[0].gens[0].w1.value.dtype

    @property
    def n_blocks(self):
        return sum(g.count for g in self.gens)


@dataclass
class DenseLayer:
    """A dense layer stored as a grid of (row segment x col segment) blocks.

    Weight convention is (out x in) per block; evaluation accumulates
    column segments in index order, so appending zero segments never
    perturbs the existing arithmetic.
    """

    activation: str
    row_sizes: list
    col_sizes: list
    w: dict  # (ri, ci) -> Group
    b: list  # per row segment -> Group

    @property
    def n_rows(self):
        return sum(self.row_sizes)

    @property
    def n_cols(self):
        return sum(self.col_sizes)

    def groups(self):
        out = []
        for ri in range(len(self.row_sizes)):
            for ci in range(len(self.col_sizes)):
                out.append(self.w[(ri, ci)])
            out.append(self.b[ri])
        return out


class HatNet:
    """A block-stack network with growth support.

    The structure string lists layer widths in the reporting convention
    used throughout: a literal leading "1", the two block layers (block
    width times block count), the block-output layer, any hidden layers,
    and the final scalar output.  The true input dimension is carried
    separately in `input_dim`.
    """

    def __init__(self, input_dim, activation, stacks, layers, layer0_segments, frozen=False, seed=0):
        self.input_dim = input_dim
        self.activation = activation
        self.stacks = stacks
        self.layers = layers
        # ordered (dim, gen_index) pairs aligned with layer 0 column segments
        self.layer0_segments = layer0_segments
        self.frozen = frozen
        self.seed = seed

    # ------------------------------------------------------------------
    # structure
    # ------------------------------------------------------------------
    @property
    def dtype(self):
        return self.stacks[0].gens[0].w1.value.dtype

    @property
    def n_blocks(self):
        return sum(s.n_blocks for s in self.stacks)

    @property
    def blocks_per_dim(self):
        return [s.n_blocks for s in self.stacks]

    @property
    def hidden_layers(self):
        return len(self.layers) - 1

    @property
    def supports_second_order(self):
        return self.activation != "relu"

    def structure(self):
        k = block_widths(self.activation)
        b = self.n_blocks
        widths = [k * b, k * b, b] + [b] * self.hidden_layers
        return "1-" + "-".join(str(w) for w in widths) + "-1"

    def describe(self):
        return {
            "structure": self.structure(),
            "activation": self.activation,
            "input_dim": self.input_dim,
            "blocks_per_dim": self.blocks_per_dim,
            "hidden_layers": self.hidden_layers,
            "frozen": self.frozen,
        }

    def parameter_store(self):
        groups = []
        for stack in self.stacks:
            for gen in stack.gens:
                groups.extend(gen.groups())
        for layer in self.layers:
            groups.extend(layer.groups())
        return ParameterStore(groups)

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------
    def _stack_outputs(self, stack, x, view):
        """Per-generation block outputs for one input dimension."""
        k = block_widths(self.activation)
        xs = ops.as_column(x)
        outs = []
        for gen in stack.gens:
            w1 = _fetch(gen.w1, view)
            b1 = _fetch(gen.b1, view)
            w2 = _fetch(gen.w2_diag, view)
            b2 = _fetch(gen.b2, view)
            w_out = _fetch(gen.w_out, view)
            b_out = _fetch(gen.b_out, view)
            z = w2 * (xs * w1 + b1) + b2
            a = ops.activate(self.activation, z)
            shape = (-1, gen.count, k) if ops.ndim(a) == 2 else (gen.count, k)
            outs.append(ops.sum_last(ops.reshape(a, shape) * w_out) + b_out)
        return outs

    def _forward(self, xs, view=None):
        if len(xs) != self.input_dim:
            raise ValueError(f"expected {self.input_dim} inputs, got {len(xs)}")
        per_stack = [self._stack_outputs(s, x, view) for s, x in zip(self.stacks, xs)]
        acts = [per_stack[dim][gen] for dim, gen in self.layer0_segments]
        for layer in self.layers:
            outs = []
            for ri in range(len(layer.row_sizes)):
                z = _fetch(layer.b[ri], view)
                for ci, a in enumerate(acts):
                    z = z + a @ _fetch(layer.w[(ri, ci)], view).T
                outs.append(ops.activate(layer.activation, z))
            acts = outs
        out = acts[0]
        return ops.reshape(out, (-1,)) if ops.ndim(out) == 2 else ops.reshape(out, ())

    def forward(self, xs, view=None):
        """Evaluate at one point given as a sequence of scalar-likes."""
        return self._forward(list(xs), view)

    def predict(self, X):
        """Plain numpy evaluation on a batch of points of shape (N, d)."""
        X = np.asarray(X, dtype=self.dtype)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        u, _, _ = self._forward_batch(X, None, (), ())
        return np.asarray(u)

    def evaluate(self, X, view=None, need_first=(), need_second=()):
        """Batch evaluation with per-dimension input derivatives.

        Returns (u, first, second) where `first[i]` / `second[i]` hold
        du/dx_i and d2u/dx_i2 for the requested dimensions (None entries
        mean the derivative is structurally zero).
        """
        X = np.asarray(X, dtype=self.dtype)
        return self._forward_batch(X, view, tuple(need_first), tuple(need_second))

    def _stack_batch(self, stack, x, view, want_d1, want_d2):
        """Per-generation (value, d/dx, d2/dx2) block outputs, batched.

        The per-block output weights are scattered into a dense
        (block-width x blocks) matrix so the combination runs as one
        matmul; off-block entries are exact zeros.
        """
        k = block_widths(self.activation)
        xs = ops.reshape(x, (-1, 1))
        outs = []
        for gen in stack.gens:
            nb = gen.count
            w1 = _fetch(gen.w1, view)
            w2 = _fetch(gen.w2_diag, view)
            z = w2 * (xs * w1 + _fetch(gen.b1, view)) + _fetch(gen.b2, view)
            scatter = tape.scatter_into(
                (k * nb, nb),
                np.arange(k * nb),
                np.repeat(np.arange(nb), k),
                tape.reshape(_fetch(gen.w_out, view), (-1,)),
            )
            d1 = d2 = None
            if self.activation == "tanh":
                t = tape.tanh(z)
                if want_d1 or want_d2:
                    slope = w2 * w1
                    t1 = 1.0 - t * t
                    d1 = (t1 * slope) @ scatter
                    if want_d2:
                        d2 = ((-2.0 * t * t1) * (slope * slope)) @ scatter
            else:
                # relu: gate on the pre-activation; second derivative is 0
                t = tape.relu(z)
                if want_d1 or want_d2:
                    zv = np.asarray(tape.value_of(z))
                    gate = np.greater(zv, 0.0).astype(zv.dtype)
                    d1 = (gate * (w2 * w1)) @ scatter
            re = t @ scatter + _fetch(gen.b_out, view)
            outs.append((re, d1, d2))
        return outs

    @staticmethod
    def _slot_array(component, slot, m, n, c, dtype):
        """(m, n, c) array holding `component` in row `slot`, zeros elsewhere."""
        if m == 0:
            return None
        parts = []
        for s in range(m):
            if s == slot and component is not None:
                parts.append(tape.reshape(component, (1, n, c)))
            else:
                parts.append(np.zeros((1, n, c), dtype=dtype))
        if len(parts) == 1:
            return parts[0]
        return tape.concat(parts, axis=0)

    def _forward_batch(self, X, view, need_first, need_second):
        """Evaluate on (N, d) points, threading per-dimension first and
        second derivative slots alongside the values.

        Derivative slots live in arrays of shape (m, N, width) so each
        dense layer applies to all slots with a single matmul; segments
        (generations and, in layer 0, stacks) are accumulated in a fixed
        order so network surgery leaves old arithmetic bit-identical.
        """
        if X.ndim != 2 or X.shape[1] != self.input_dim:
            raise ValueError(f"expected points of shape (N, {self.input_dim})")
        n = X.shape[0]
        d1_dims = sorted(set(need_first) | set(need_second))
        d2_dims = sorted(need_second)
        if d2_dims != d1_dims[: len(d2_dims)]:
            raise ValueError("second-derivative dims must lead the first-derivative dims")
        m1 = len(d1_dims)
        m2 = len(d2_dims) if self.activation == "tanh" else 0

        per_stack = {}
        for stack in self.stacks:
            per_stack[stack.dim] = self._stack_batch(
                stack,
                X[:, stack.dim],
                view,
                stack.dim in d1_dims,
                stack.dim in d2_dims,
            )
        segs = []
        for dim, gen_idx in self.layer0_segments:
            re, d1, d2 = per_stack[dim][gen_idx]
            c = np.shape(tape.value_of(re))[-1]
            slot1 = d1_dims.index(dim) if dim in d1_dims else -1
            slot2 = d2_dims.index(dim) if dim in d2_dims else -1
            dtype = np.asarray(tape.value_of(re)).dtype
            segs.append(
                (
                    re,
                    self._slot_array(d1, slot1, m1, n, c, dtype),
                    self._slot_array(d2, slot2, m2, n, c, dtype),
                )
            )

        for layer in self.layers:
            new_segs = []
            for ri, rsize in enumerate(layer.row_sizes):
                z = _fetch(layer.b[ri], view)
                z1 = z2 = None
                for ci, (re_c, d1_c, d2_c) in enumerate(segs):
                    wt = _fetch(layer.w[(ri, ci)], view).T
                    z = z + re_c @ wt
                    if m1:
                        part = _matmul_slots(d1_c, wt, m1, n, rsize)
                        z1 = part if z1 is None else z1 + part
                    if m2:
                        part = _matmul_slots(d2_c, wt, m2, n, rsize)
                        z2 = part if z2 is None else z2 + part
                if layer.activation == "tanh":
                    t = tape.tanh(z) if isinstance(z, tape.Var) else np.tanh(z)
                    if m1:
                        t1 = 1.0 - t * t
                        new_z1 = t1 * z1
                        if m2:
                            t2 = -2.0 * t * t1
                            lead = z1 if m2 == m1 else tape.take(z1, (slice(0, m2),))
                            z2 = t2 * (lead * lead) + t1 * z2
                        z1 = new_z1
                    z = t
                elif layer.activation == "relu":
                    zv = np.asarray(tape.value_of(z))
                    gate = np.greater(zv, 0.0).astype(zv.dtype)
                    z = tape.relu(z)
                    if m1:
                        z1 = gate * z1
                    if m2:
                        z2 = gate * z2
                new_segs.append((z, z1, z2))
            segs = new_segs

        re, z1, z2 = segs[0]
        u = ops.reshape(re, (-1,))
        first = {}
        for i in need_first:
            if m1 and i in d1_dims:
                first[i] = ops.reshape(tape.take(z1, (d1_dims.index(i),)), (-1,))
            else:
                first[i] = None
        second = {}
        for i in need_second:
            if m2 and i in d2_dims:
                second[i] = ops.reshape(tape.take(z2, (d2_dims.index(i),)), (-1,))
            else:
                second[i] = None
        return u, first, second

    def as_function(self):
        """The network as a plain d-argument scalar function."""
        return lambda *xs: self._forward(list(xs))


def _fetch(group, view):
    return view.get(group.name) if view is not None else group.value


def _matmul_slots(slots, wt, m, n, rsize):
    """Apply a weight matrix to every derivative slot with one matmul."""
    flat = tape.reshape(slots, (m * n, -1))
    return tape.reshape(flat @ wt, (m, n, rsize))


# ----------------------------------------------------------------------
# construction
# ----------------------------------------------------------------------
def _pack_blocks(dim, gen_index, nodes, activation, frozen):
    blocks = [make_block(n, activation) for n in nodes]
    prefix = f"x{dim}/g{gen_index}"
    return BlockGen(
        nodes=list(nodes),
        w1=Group(f"{prefix}/w1", np.concatenate([b.w1 for b in blocks]), frozen),
        b1=Group(f"{prefix}/b1", np.concatenate([b.b1 for b in blocks]), frozen),
        w2_diag=Group(f"{prefix}/w2", np.concatenate([b.w2_diag for b in blocks]), frozen),
        b2=Group(f"{prefix}/b2", np.concatenate([b.b2 for b in blocks]), frozen),
        w_out=Group(f"{prefix}/wout", np.stack([b.w_out for b in blocks]), frozen),
        b_out=Group(f"{prefix}/bout", np.array([b.b_out for b in blocks]), frozen),
    )


def _xavier(rng, rows, cols):
    bound = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-bound, bound, size=(rows, cols))


def build_network(nodes_per_dim, activation, hidden_layers=0, seed=0, frozen=False):
    """Build a block network from per-dimension node lists.

    Block parameters come from the nodal initialization; subnetwork
    weights are Xavier-uniform draws from `seed` with zero biases.
    Hidden widths equal the total block count.
    """
    if not nodes_per_dim or any(len(nodes) == 0 for nodes in nodes_per_dim):
        raise ValueError("every dimension needs at least one node")
    if hidden_layers < 0:
        raise ValueError("hidden_layers must be >= 0")
    d = len(nodes_per_dim)
    stacks = []
    for dim, nodes in enumerate(nodes_per_dim):
        stacks.append(
            BlockStack(dim, activation, [_pack_blocks(dim, 0, nodes, activation, frozen)])
        )
    layer0_segments = [(dim, 0) for dim in range(d)]
    seg_sizes = [len(nodes) for nodes in nodes_per_dim]
    b_total = sum(seg_sizes)

    rng = np.random.default_rng(seed)
    layers = []
    col_sizes = seg_sizes
    for li in range(hidden_layers):
        full = _xavier(rng, b_total, sum(col_sizes))
        layers.append(_layer_from_matrix(f"f{li}", activation, full, col_sizes))
        col_sizes = [b_total]
    final = _xavier(rng, 1, sum(col_sizes))
    layers.append(_layer_from_matrix(f"f{hidden_layers}", "identity", final, col_sizes))
    return HatNet(d, activation, stacks, layers, layer0_segments, frozen=frozen, seed=seed)


def _layer_from_matrix(prefix, activation, matrix, col_sizes):
    rows = matrix.shape[0]
    w = {}
    offsets = np.cumsum([0] + list(col_sizes))
    for ci, (lo, hi) in enumerate(zip(offsets[:-1], offsets[1:])):
        w[(0, ci)] = Group(f"{prefix}/w/r0c{ci}", matrix[:, lo:hi].copy())
    b = [Group(f"{prefix}/b/r0", np.zeros(rows))]
    return DenseLayer(activation, [rows], list(col_sizes), w, b)


def uniform_nodes(count, lo=0.0, hi=1.0):
    """`count` equally spaced nodes spanning [lo, hi], endpoints included."""
    if count < 1:
        raise ValueError("need at least one node")
    if count == 1:
        h = (hi - lo) / 2.0
        return [NodeTriple((lo + hi) / 2.0, h, h)]
    h = (hi - lo) / (count - 1)
    return [NodeTriple(lo + i * h, h, h) for i in range(count)]


def network_from_description(desc, seed=None, bounds=None):
    """Rebuild an equivalently sized network from a `describe()` dict."""
    seed = desc.get("seed", 0) if seed is None else seed
    d = desc["input_dim"]
    bounds = bounds or [(0.0, 1.0)] * d
    nodes = [
        uniform_nodes(n, lo, hi)
        for n, (lo, hi) in zip(desc["blocks_per_dim"], bounds)
    ]
    return build_network(
        nodes, desc["activation"], desc["hidden_layers"], seed=seed, frozen=desc.get("frozen", False)
    )


def count_params(net):
    """Every trainable scalar, counting the diagonal layer as a vector."""
    return net.parameter_store().total_count


# ----------------------------------------------------------------------
# growth
# ----------------------------------------------------------------------
def enhance(net, new_nodes_per_dim):
    """Append blocks and widen hidden layers, preserving the function.

    New block parameters come from their node triples; every dense
    entry that touches a new neuron (new rows, new columns, and the
    connections leaving new block outputs) starts at zero, so the
    returned network evaluates to exactly the same values as `net`.
    """
    if len(new_nodes_per_dim) != net.input_dim:
        raise ValueError("new_nodes_per_dim must list one node list per dimension")
    added = sum(len(nodes) for nodes in new_nodes_per_dim)
    if added == 0:
        raise ValueError("at least one new node is required")

    out = _clone(net)
    new_segments = []
    for dim, nodes in enumerate(new_nodes_per_dim):
        if not nodes:
            continue
        stack = out.stacks[dim]
        gen_index = len(stack.gens)
        stack.gens.append(_pack_blocks(dim, gen_index, nodes, out.activation, out.frozen))
        new_segments.append(((dim, gen_index), len(nodes)))
    out.layer0_segments = out.layer0_segments + [seg for seg, _ in new_segments]

    grow_cols = [size for _, size in new_segments]
    n_hidden = out.hidden_layers
    for li, layer in enumerate(out.layers):
        is_final = li == n_hidden
        new_rows = 0 if is_final else added
        _grow_layer(layer, f"f{li}", grow_cols, new_rows)
        grow_cols = [added] if not is_final else []
    return out


def _grow_layer(layer, prefix, new_col_sizes, new_rows):
    old_nrows = len(layer.row_sizes)
    old_ncols = len(layer.col_sizes)
    for ci, size in enumerate(new_col_sizes, start=old_ncols):
        layer.col_sizes.append(size)
        for ri, rsize in enumerate(layer.row_sizes):
            layer.w[(ri, ci)] = Group(f"{prefix}/w/r{ri}c{ci}", np.zeros((rsize, size)))
    if new_rows:
        ri = old_nrows
        layer.row_sizes.append(new_rows)
        for ci, csize in enumerate(layer.col_sizes):
            layer.w[(ri, ci)] = Group(f"{prefix}/w/r{ri}c{ci}", np.zeros((new_rows, csize)))
        layer.b.append(Group(f"{prefix}/b/r{ri}", np.zeros(new_rows)))


def _clone(net):
    stacks = []
    for stack in net.stacks:
        gens = []
        for gen in stack.gens:
            gens.append(
                BlockGen(
                    nodes=list(gen.nodes),
                    **{
                        name: Group(g.name, g.value.copy(), g.frozen)
                        for name, g in zip(
                            ("w1", "b1", "w2_diag", "b2", "w_out", "b_out"), gen.groups()
                        )
                    },
                )
            )
        stacks.append(BlockStack(stack.dim, stack.activation, gens))
    layers = []
    for layer in net.layers:
        w = {key: Group(g.name, g.value.copy(), g.frozen) for key, g in layer.w.items()}
        b = [Group(g.name, g.value.copy(), g.frozen) for g in layer.b]
        layers.append(DenseLayer(layer.activation, list(layer.row_sizes), list(layer.col_sizes), w, b))
    return HatNet(
        net.input_dim,
        net.activation,
        stacks,
        layers,
        list(net.layer0_segments),
        frozen=net.frozen,
        seed=net.seed,
    )


# ----------------------------------------------------------------------
# checkpoints
# ----------------------------------------------------------------------
def save_checkpoint(net, path):
    """Write a self-describing JSON checkpoint (bit-exact round trip)."""
    doc = {
        "format": CHECKPOINT_FORMAT,
        "structure": net.structure(),
        "input_dim": net.input_dim,
        "activation": net.activation,
        "frozen": net.frozen,
        "seed": net.seed,
        "layer0_segments": [list(seg) for seg in net.layer0_segments],
        "stacks": [
            [
                {
                    "nodes": [[n.center, n.h_left, n.h_right] for n in gen.nodes],
                    "params": {
                        key: g.value.tolist()
                        for key, g in zip(
                            ("w1", "b1", "w2", "b2", "wout", "bout"), gen.groups()
                        )
                    },
                }
                for gen in stack.gens
            ]
            for stack in net.stacks
        ],
        "layers": [
            {
                "activation": layer.activation,
                "row_sizes": layer.row_sizes,
                "col_sizes": layer.col_sizes,
                "w": {f"{ri},{ci}": g.value.tolist() for (ri, ci), g in sorted(layer.w.items())},
                "b": [g.value.tolist() for g in layer.b],
            }
            for layer in net.layers
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def _require(doc, key, context):
    if key not in doc:
        raise CheckpointError(f"checkpoint missing field {key!r} in {context}")
    return doc[key]


def load_checkpoint(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as err:
        raise CheckpointError(f"checkpoint is not valid JSON: {err}") from err
    if _require(doc, "format", "root") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"unrecognized checkpoint format {doc.get('format')!r}")
    activation = _require(doc, "activation", "root")
    frozen = _require(doc, "frozen", "root")
    stacks = []
    for dim, gens_doc in enumerate(_require(doc, "stacks", "root")):
        gens = []
        for gi, gen_doc in enumerate(gens_doc):
            nodes = [NodeTriple(*triple) for triple in _require(gen_doc, "nodes", f"stack {dim}")]
            params = _require(gen_doc, "params", f"stack {dim} gen {gi}")
            prefix = f"x{dim}/g{gi}"
            names = {"w1": "w1", "b1": "b1", "w2": "w2", "b2": "b2", "wout": "wout", "bout": "bout"}
            arrays = {}
            for key in names:
                arrays[key] = np.array(_require(params, key, f"stack {dim} gen {gi} params"))
            gens.append(
                BlockGen(
                    nodes=nodes,
                    w1=Group(f"{prefix}/w1", arrays["w1"], frozen),
                    b1=Group(f"{prefix}/b1", arrays["b1"], frozen),
                    w2_diag=Group(f"{prefix}/w2", arrays["w2"], frozen),
                    b2=Group(f"{prefix}/b2", arrays["b2"], frozen),
                    w_out=Group(f"{prefix}/wout", arrays["wout"], frozen),
                    b_out=Group(f"{prefix}/bout", arrays["bout"], frozen),
                )
            )
        stacks.append(BlockStack(dim, activation, gens))
    layers = []
    for li, layer_doc in enumerate(_require(doc, "layers", "root")):
        row_sizes = _require(layer_doc, "row_sizes", f"layer {li}")
        col_sizes = _require(layer_doc, "col_sizes", f"layer {li}")
        w = {}
        for key, mat in _require(layer_doc, "w", f"layer {li}").items():
            ri, ci = (int(v) for v in key.split(","))
            w[(ri, ci)] = Group(f"f{li}/w/r{ri}c{ci}", np.array(mat))
        b = [
            Group(f"f{li}/b/r{ri}", np.array(vec))
            for ri, vec in enumerate(_require(layer_doc, "b", f"layer {li}"))
        ]
        layers.append(DenseLayer(_require(layer_doc, "activation", f"layer {li}"), row_sizes, col_sizes, w, b))
    net = HatNet(
        _require(doc, "input_dim", "root"),
        activation,
        stacks,
        layers,
        [tuple(seg) for seg in _require(doc, "layer0_segments", "root")],
        frozen=frozen,
        seed=_require(doc, "seed", "root"),
    )
    declared = _require(doc, "structure", "root")
    if net.structure() != declared:
        raise CheckpointError(
            f"checkpoint structure {declared!r} does not match its arrays ({net.structure()!r})"
        )
    return net


def params_for_structure(structure, activation="tanh", input_dim=1, kind="blocks"):
    """Parameter count implied by a structure string.

    `kind="blocks"` interprets the string by the block-network layout
    convention; `kind="dense"` treats it as a plain fully connected
    network whose true input width is `input_dim` (the printed leading
    "1" is the conventional placeholder).
    """
    widths = [int(w) for w in structure.split("-")]
    if kind == "dense":
        sizes = [input_dim] + widths[1:]
        return sum(sizes[i] * sizes[i - 1] + sizes[i] for i in range(1, len(sizes)))
    if kind != "blocks":
        raise ValueError(f"unknown structure kind {kind!r}")
    if len(widths) < 5:
        raise ValueError(f"not a block-network structure: {structure!r}")
    k = block_widths(activation)
    b = widths[3]
    if widths[1] != k * b or widths[2] != k * b or widths[-1] != 1:
        raise ValueError(f"structure {structure!r} does not match a {activation} block layout")
    hidden = widths[4:-1]
    total = b * params_per_block(activation)
    prev = b
    for w in hidden:
        total += w * prev + w
        prev = w
    total += prev + 1
    return total
