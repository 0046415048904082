"""The grow loop: train, estimate pointwise errors, mark the worst
points, cluster them, and insert new blocks at cluster centroids.

Marking keeps every point whose indicator strictly exceeds `gamma`
times the maximum.  Clustering is density-based with the Chebyshev
metric and an inclusive eps-neighborhood; with min_pts=1 the clusters
are exactly the connected components of the eps-neighborhood graph and
no point is ever labeled noise.  Each cluster contributes one new block
per input dimension, centered at the cluster centroid with half-width
`scale * radius` (floored so singleton clusters still get a usable
block).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.cluster import DBSCAN

from .blocks import NodeTriple
from .errors import ConfigurationError
from .network import count_params, enhance
from .problems import Problem
from .training import (
    ResidualData,
    SampleSet,
    TrainingConfig,
    assemble,
    interior_residual,
)


@dataclass
class IndicatorField:
    """Pointwise error indicators over a sample set."""

    points: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.eta = np.asarray(self.eta, dtype=float)
        if len(self.points) != len(self.eta):
            raise ValueError("points and eta must have equal length")
        if np.any(self.eta < 0):
            raise ValueError("indicators must be nonnegative")


@dataclass
class Cluster:
    members: np.ndarray
    centroid: np.ndarray
    radius: float


@dataclass
class AdaptiveConfig:
    eta_tol: float
    gamma: float = 0.5
    eps: float = 0.1
    min_pts: int = 1
    scale: float = 2.0
    max_iters: int = 10
    min_radius: float = None  # defaults to eps / 2

    def __post_init__(self):
        if not (0 < self.gamma < 1):
            raise ConfigurationError("gamma must lie in (0, 1)")
        if self.eps <= 0:
            raise ConfigurationError("eps must be positive")
        if self.min_pts < 1:
            raise ConfigurationError("min_pts must be >= 1")
        if self.scale <= 0:
            raise ConfigurationError("scale must be positive")
        if self.max_iters < 1:
            raise ConfigurationError("max_iters must be >= 1")
        if not (self.eta_tol > 0):
            raise ConfigurationError("eta_tol must be positive")
        if self.min_radius is None:
            self.min_radius = self.eps / 2.0
        elif self.min_radius <= 0:
            raise ConfigurationError("min_radius must be positive")


def estimate(net, problem: Problem, points) -> IndicatorField:
    """Pointwise absolute operator residual at the given points.

    For fitting problems the operator is the identity, so the indicator
    reduces to the absolute mismatch against the target values.
    """
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        raise ValueError("need at least one point")
    return estimate_on_data(
        net,
        ResidualData(
            operator=problem.operator,
            x_interior=points,
            f_interior=problem.rhs(points),
            x_boundary=points[:0],
            g_boundary=np.zeros(0),
            viscosity=problem.viscosity,
        ),
    )


def estimate_on_data(net, data: ResidualData) -> IndicatorField:
    residual = interior_residual(net, data)
    return IndicatorField(data.x_interior, np.abs(np.asarray(residual)))


def total_indicator(field: IndicatorField) -> float:
    """Root mean square of the pointwise indicators."""
    return float(np.sqrt(np.mean(field.eta ** 2)))


def mark(field: IndicatorField, gamma) -> np.ndarray:
    """Indices whose indicator strictly exceeds gamma times the maximum."""
    if not (0 < gamma < 1):
        raise ConfigurationError("gamma must lie in (0, 1)")
    if len(field.eta) == 0:
        return np.zeros(0, dtype=int)
    return np.flatnonzero(field.eta > gamma * np.max(field.eta))


def dbscan_clusters(points, eps, min_pts=1) -> list:
    """Density-based clusters under the Chebyshev (L-infinity) metric.

    Neighborhoods are inclusive (distance <= eps).  Points labeled noise
    (possible only for min_pts > 1) belong to no cluster.  Clusters are
    sorted by centroid so downstream block insertion is reproducible.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    if len(points) == 0:
        return []
    if eps <= 0:
        raise ConfigurationError("eps must be positive")
    if min_pts < 1:
        raise ConfigurationError("min_pts must be >= 1")
    labels = DBSCAN(eps=eps, min_samples=min_pts, metric="chebyshev").fit_predict(points)
    clusters = []
    for label in np.unique(labels):
        if label < 0:
            continue
        members = np.flatnonzero(labels == label)
        centroid = points[members].mean(axis=0)
        radius = float(np.max(np.abs(points[members] - centroid))) if len(members) else 0.0
        clusters.append(Cluster(members, centroid, radius))
    clusters.sort(key=lambda c: tuple(c.centroid))
    return clusters


def clusters_to_nodes(clusters, scale, min_radius, input_dim) -> list:
    """One new node per (cluster, dimension) at the centroid coordinate.

    The node half-width is `scale * radius`, floored at `min_radius` so
    singleton clusters (radius 0) still produce a usable block.
    """
    if scale <= 0:
        raise ConfigurationError("scale must be positive")
    nodes = [[] for _ in range(input_dim)]
    for cluster in clusters:
        h = max(scale * cluster.radius, min_radius)
        for dim in range(input_dim):
            nodes[dim].append(NodeTriple(float(cluster.centroid[dim]), h, h))
    return nodes


@dataclass
class IterationRecord:
    iteration: int
    structure: str
    params: int
    eta: float
    marked_count: int
    cluster_count: int
    test_error: float


@dataclass
class AdaptiveReport:
    rows: list = field(default_factory=list)
    traces: list = field(default_factory=list)
    stopped_by: str = ""


def run_adaptive(
    net,
    problem: Problem,
    samples: SampleSet,
    tconfig: TrainingConfig,
    aconfig: AdaptiveConfig,
    test_error_fn=None,
):
    """Train, then repeatedly mark/cluster/enhance/retrain until the
    total indicator reaches `eta_tol` or `max_iters` enhancements ran.

    Returns the final network and a per-iteration report; the indicator
    is evaluated on the interior training points.  Each retraining phase
    restarts the optimizer and the learning-rate schedule.
    """
    if test_error_fn is None:
        from .report import make_test_grid, relative_l2

        grid = make_test_grid(problem)
        test_error_fn = lambda model: relative_l2(model, problem.u_star, grid)
    return run_adaptive_on_data(
        net, assemble(problem, samples), tconfig, aconfig, test_error_fn
    )


def run_adaptive_on_data(net, data: ResidualData, tconfig, aconfig, test_error_fn):
    """The grow loop on pre-assembled residual data; the indicator is
    evaluated on the interior points of `data`."""
    from .training import train_on_data

    report = AdaptiveReport()

    def run_phase(model, iteration, marked_count, cluster_count):
        model, trace = train_on_data(model, data, tconfig)
        field = estimate_on_data(model, data)
        eta = total_indicator(field)
        report.traces.append(trace)
        report.rows.append(
            IterationRecord(
                iteration,
                model.structure(),
                count_params(model),
                eta,
                marked_count,
                cluster_count,
                float(test_error_fn(model)),
            )
        )
        return model, field, eta

    net, field, eta = run_phase(net, 0, 0, 0)
    iteration = 0
    while eta > aconfig.eta_tol and iteration < aconfig.max_iters:
        marked = mark(field, aconfig.gamma)
        if len(marked) == 0:
            report.stopped_by = "no marked points"
            break
        clusters = dbscan_clusters(field.points[marked], aconfig.eps, aconfig.min_pts)
        if not clusters:
            report.stopped_by = "no clusters"
            break
        nodes = clusters_to_nodes(
            clusters, aconfig.scale, aconfig.min_radius, net.input_dim
        )
        net = enhance(net, nodes)
        iteration += 1
        net, field, eta = run_phase(net, iteration, len(marked), len(clusters))
    if not report.stopped_by:
        report.stopped_by = "eta_tol" if eta <= aconfig.eta_tol else "max_iters"
    return net, report
