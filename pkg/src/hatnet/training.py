"""Residual-based training: collocation sampling, the weighted interior
plus boundary objective, and full-batch Adam with a staircase learning
rate.

One epoch is one full-batch update on a fixed sample set; the learning
rate at step s is lr0 * decay_base ** (s // decay_every).  Everything is
deterministic given the seeds: reruns produce bit-identical traces.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .autodiff import tape
from .autodiff.ops import primal
from .errors import ConfigurationError, TrainingDivergedError
from .problems import Problem

TRACE_COLUMNS = ("epoch", "loss", "interior_term", "boundary_term", "lr", "wall_ms")


@dataclass
class TrainingConfig:
    beta: float = 1000.0
    lr0: float = 5e-3
    decay_base: float = 0.9
    decay_every: int = 2500
    epochs: int = 10000
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    # interior points are processed in slices of at most this many rows;
    # the accumulated gradient is the exact full-batch gradient up to
    # summation order (the value is part of the run's numerical identity)
    # and peak memory stays bounded on large sample sets.
    chunk_rows: int = 10000
    # float32 roughly halves the wall time of large 2D runs on
    # bandwidth-bound hosts; keep float64 wherever tight tolerances or
    # reference-grade gradients matter.
    dtype: str = "float64"

    def __post_init__(self):
        if self.lr0 <= 0:
            raise ConfigurationError("lr0 must be positive")
        if not (0 < self.decay_base <= 1):
            raise ConfigurationError("decay_base must lie in (0, 1]")
        if self.decay_every < 1:
            raise ConfigurationError("decay_every must be >= 1")
        if self.epochs < 0:
            raise ConfigurationError("epochs must be >= 0")
        if self.chunk_rows < 1:
            raise ConfigurationError("chunk_rows must be >= 1")
        if self.dtype not in ("float64", "float32"):
            raise ConfigurationError("dtype must be 'float64' or 'float32'")


@dataclass
class SampleSet:
    """Fixed collocation points: interior plus labeled boundary points."""

    interior: np.ndarray
    boundary: np.ndarray
    boundary_labels: list
    seed: int


@dataclass
class TrainingTrace:
    epochs: list = field(default_factory=list)
    loss: list = field(default_factory=list)
    interior_term: list = field(default_factory=list)
    boundary_term: list = field(default_factory=list)
    lr: list = field(default_factory=list)
    wall_ms: list = field(default_factory=list)

    def append(self, epoch, loss, interior, boundary, lr, wall_ms):
        self.epochs.append(epoch)
        self.loss.append(loss)
        self.interior_term.append(interior)
        self.boundary_term.append(boundary)
        self.lr.append(lr)
        self.wall_ms.append(wall_ms)

    def __len__(self):
        return len(self.epochs)

    def rows(self):
        for i in range(len(self.epochs)):
            yield (
                self.epochs[i],
                self.loss[i],
                self.interior_term[i],
                self.boundary_term[i],
                self.lr[i],
                self.wall_ms[i],
            )


def sample(problem: Problem, n_interior=None, n_boundary=None, seed=0):
    """Draw the training collocation points for a problem.

    Interior points are i.i.d. uniform over the domain; boundary points
    are spread over the data-carrying boundary components (scaled
    proportionally when `n_boundary` differs from the problem default).
    """
    n_interior = problem.n_interior if n_interior is None else int(n_interior)
    if n_interior < 1:
        raise ValueError("need at least one interior point")
    rng = np.random.default_rng(seed)
    interior = problem.sample_interior(n_interior, rng)
    parts, labels = [], []
    components = problem.boundary_components
    if components and (n_boundary is None or n_boundary > 0):
        counts = [c.count for c in components]
        if n_boundary is not None and n_boundary != sum(counts):
            from .problems import proportional_counts

            counts = proportional_counts(counts, int(n_boundary))
        for component, count in zip(components, counts):
            if count == 0:
                continue
            pts = component.sampler(count, rng)
            parts.append(pts)
            labels.extend([component.name] * count)
    boundary = np.concatenate(parts) if parts else np.zeros((0, problem.input_dim))
    return SampleSet(np.asarray(interior), boundary, labels, seed)


@dataclass
class ResidualData:
    """Precomputed constants for the loss on a fixed sample set."""

    operator: str
    x_interior: np.ndarray
    f_interior: np.ndarray
    x_boundary: np.ndarray
    g_boundary: np.ndarray
    viscosity: float = 0.0


def assemble(problem: Problem, samples: SampleSet):
    has_boundary = len(samples.boundary) > 0
    return ResidualData(
        operator=problem.operator,
        x_interior=samples.interior,
        f_interior=problem.rhs(samples.interior),
        x_boundary=samples.boundary,
        g_boundary=problem.boundary_value(samples.boundary)
        if has_boundary and problem.boundary_value is not None
        else np.zeros(len(samples.boundary)),
        viscosity=problem.viscosity,
    )


def _check_operator_support(net, operator):
    from .problems import OPERATORS

    if OPERATORS[operator] and not net.supports_second_order:
        raise ConfigurationError(
            "relu networks have zero second derivatives almost everywhere and "
            "cannot be trained against a second-order operator; use tanh blocks"
        )


def interior_residual(net, data: ResidualData, view=None):
    """Pointwise operator residual L(u) - f on the interior samples."""
    X = data.x_interior
    d = net.input_dim
    if data.operator == "identity":
        u, _, _ = net.evaluate(X, view)
        return u - data.f_interior
    if data.operator == "neg_laplacian":
        _, _, second = net.evaluate(X, view, need_second=range(d))
        lap = None
        for i in range(d):
            if second[i] is not None:
                lap = second[i] if lap is None else lap + second[i]
        if lap is None:
            return -data.f_interior
        return -lap - data.f_interior
    if data.operator == "burgers":
        u, first, second = net.evaluate(
            X, view, need_first=(0, 1), need_second=(0,)
        )
        return u * first[0] + first[1] - data.viscosity * second[0] - data.f_interior
    raise ConfigurationError(f"unknown operator {data.operator!r}")


def loss_terms(net, data: ResidualData, view=None):
    """(interior, boundary) mean-square residual terms."""
    _check_operator_support(net, data.operator)
    r = interior_residual(net, data, view)
    interior = tape.vmean(r ** 2)
    if len(data.x_boundary) == 0:
        return interior, 0.0
    ub, _, _ = net.evaluate(data.x_boundary, view)
    boundary = tape.vmean((ub - data.g_boundary) ** 2)
    return interior, boundary


def pinn_loss(net, problem: Problem, samples: SampleSet, beta, view=None):
    """Weighted objective: interior term + beta * boundary term."""
    interior, boundary = loss_terms(net, assemble(problem, samples), view)
    return interior + beta * boundary


# ----------------------------------------------------------------------
# optimizer
# ----------------------------------------------------------------------
@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray

    @classmethod
    def zeros(cls, n, dtype=np.float64):
        return cls(np.zeros(n, dtype=dtype), np.zeros(n, dtype=dtype))


def learning_rate(config: TrainingConfig, step):
    return config.lr0 * config.decay_base ** (step // config.decay_every)


def adam_step(store, grad, state: AdamState, step, config: TrainingConfig):
    """One masked Adam update, written back into the store in place."""
    if not np.all(np.isfinite(grad)):
        bad = int(np.argmax(~np.isfinite(grad)))
        raise TrainingDivergedError(
            f"non-finite gradient in parameter group {store.group_at_index(bad)!r}"
        )
    mask = store.trainable_mask()
    g = np.where(mask, grad, 0.0)
    b1, b2 = config.adam_beta1, config.adam_beta2
    state.m = b1 * state.m + (1 - b1) * g
    state.v = b2 * state.v + (1 - b2) * g * g
    m_hat = state.m / (1 - b1 ** (step + 1))
    v_hat = state.v / (1 - b2 ** (step + 1))
    update = learning_rate(config, step) * m_hat / (np.sqrt(v_hat) + config.adam_eps)
    store.write_flat(store.flatten() - np.where(mask, update, 0.0))
    return state


def _flat_grad(loss, view, order):
    grads = tape.grad(loss, [view.get(name) for name in order])
    return np.concatenate([np.asarray(g, dtype=float).ravel() for g in grads])


def _interior_chunks(data: ResidualData, chunk_rows):
    n = len(data.x_interior)
    out = []
    for lo in range(0, n, chunk_rows):
        hi = min(lo + chunk_rows, n)
        chunk = ResidualData(
            operator=data.operator,
            x_interior=data.x_interior[lo:hi],
            f_interior=data.f_interior[lo:hi],
            x_boundary=data.x_boundary[:0],
            g_boundary=data.g_boundary[:0],
            viscosity=data.viscosity,
        )
        out.append((chunk, (hi - lo) / n))
    return out


def loss_and_grad(net, store, data: ResidualData, beta, chunks=None):
    """(loss, interior, boundary, gradient) for one full-batch step.

    The interior term is accumulated over row chunks (weighted by chunk
    size) so large sample sets stay cache-friendly; a single chunk
    reproduces the direct computation exactly.
    """
    order = store.names
    interior = 0.0
    grad_total = np.zeros(store.total_count)
    for chunk, weight in chunks or [(data, 1.0)]:
        view = store.leaves()
        r = interior_residual(net, chunk, view)
        chunk_loss = tape.vmean(r ** 2)
        interior += weight * float(primal(chunk_loss))
        if isinstance(chunk_loss, tape.Var):
            grad_total += weight * _flat_grad(chunk_loss, view, order)
    boundary = 0.0
    if len(data.x_boundary) > 0:
        view = store.leaves()
        ub, _, _ = net.evaluate(data.x_boundary, view)
        bterm = tape.vmean((ub - data.g_boundary) ** 2)
        boundary = float(primal(bterm))
        if isinstance(bterm, tape.Var):
            grad_total += beta * _flat_grad(bterm, view, order)
    return interior + beta * boundary, interior, boundary, grad_total


def train(net, problem: Problem, samples: SampleSet, config: TrainingConfig):
    """Full-batch training on a fixed sample set.

    Returns the trained network (updated in place) and its trace.  On a
    non-finite loss the last finite parameters are restored and a
    `TrainingDivergedError` carrying the partial trace is raised.
    """
    return train_on_data(net, assemble(problem, samples), config)


def train_on_data(net, data: ResidualData, config: TrainingConfig):
    """Like `train`, but on pre-assembled residual data (e.g. raw
    point/value pairs for plain regression)."""
    _check_operator_support(net, data.operator)
    store = net.parameter_store()
    trace = TrainingTrace()
    dtype = np.dtype(config.dtype)
    restore64 = dtype == np.float32
    if restore64:
        _cast_groups(store, dtype)
        data = _cast_data(data, dtype)
    try:
        state = AdamState.zeros(store.total_count, dtype)
        chunks = _interior_chunks(data, config.chunk_rows)
        last_good = None
        for epoch in range(config.epochs):
            t0 = time.perf_counter()
            snapshot = store.flatten()
            total, li, lb, flat_grad = loss_and_grad(net, store, data, config.beta, chunks)
            if not np.isfinite(total):
                if last_good is not None:
                    store.write_flat(last_good)
                raise TrainingDivergedError(
                    f"loss became non-finite at epoch {epoch}", epoch=epoch, trace=trace
                )
            last_good = snapshot
            adam_step(store, flat_grad, state, epoch, config)
            trace.append(
                epoch,
                total,
                li,
                lb,
                learning_rate(config, epoch),
                (time.perf_counter() - t0) * 1e3,
            )
    finally:
        if restore64:
            _cast_groups(store, np.float64)
    return net, trace


def _cast_groups(store, dtype):
    for group in store:
        group.value = group.value.astype(dtype)


def _cast_data(data: ResidualData, dtype):
    return ResidualData(
        operator=data.operator,
        x_interior=data.x_interior.astype(dtype),
        f_interior=data.f_interior.astype(dtype),
        x_boundary=data.x_boundary.astype(dtype),
        g_boundary=data.g_boundary.astype(dtype),
        viscosity=data.viscosity,
    )
