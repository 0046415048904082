"""The benchmark problems: domains, target solutions, manufactured data.

Each problem bundles a domain (with interior and boundary samplers), a
differential operator tag, the exact or reference solution used for
test-error reporting, the manufactured right-hand side, and boundary
data.  All callables take points as arrays of shape (N, d) and return
arrays of shape (N,); everything is a pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

# operator tags and whether they need second input derivatives
OPERATORS = {"identity": False, "neg_laplacian": True, "burgers": True}

BURGERS_VISCOSITY = 0.01 / np.pi

SECTOR_ANGLE = 1.5 * np.pi


@dataclass
class BoundaryComponent:
    """One boundary piece with its own sampler and default point count."""

    name: str
    length: float
    count: int
    sampler: Callable


@dataclass
class GridSpec:
    """Uniform test lattice: per-dimension point counts and bounds."""

    shape: tuple
    bounds: tuple
    mask: Optional[Callable] = None  # keep only lattice points inside the domain


@dataclass
class Problem:
    name: str
    domain_kind: str
    input_dim: int
    operator: str
    bounds: tuple
    u_star: Callable
    rhs: Callable
    boundary_value: Optional[Callable]
    contains: Callable
    sample_interior: Callable
    boundary_components: list
    n_interior: int
    grid: GridSpec
    eta_tol: float
    epochs_fixed: int
    epochs_adaptive: int
    viscosity: float = 0.0

    @property
    def needs_second_order(self):
        return OPERATORS[self.operator]

    @property
    def n_boundary(self):
        return sum(c.count for c in self.boundary_components)


# ----------------------------------------------------------------------
# samplers
# ----------------------------------------------------------------------
def _box_interior(bounds):
    los = np.array([lo for lo, _ in bounds])
    his = np.array([hi for _, hi in bounds])

    def sampler(n, rng):
        return rng.uniform(los, his, size=(n, len(bounds)))

    return sampler


def _edge_sampler(axis, value, other_lo, other_hi):
    """Points on a rectangle edge with one coordinate pinned exactly."""

    def sampler(n, rng):
        pts = np.empty((n, 2))
        pts[:, axis] = value
        pts[:, 1 - axis] = rng.uniform(other_lo, other_hi, size=n)
        return pts

    return sampler


def _square_edges(lo, hi, per_edge):
    return [
        BoundaryComponent("x0_lo", hi - lo, per_edge, _edge_sampler(0, lo, lo, hi)),
        BoundaryComponent("x0_hi", hi - lo, per_edge, _edge_sampler(0, hi, lo, hi)),
        BoundaryComponent("x1_lo", hi - lo, per_edge, _edge_sampler(1, lo, lo, hi)),
        BoundaryComponent("x1_hi", hi - lo, per_edge, _edge_sampler(1, hi, lo, hi)),
    ]


def _sector_polar(X):
    r = np.hypot(X[:, 0], X[:, 1])
    theta = np.arctan2(X[:, 1], X[:, 0])
    theta = np.where(theta < 0, theta + 2 * np.pi, theta)
    return r, theta


def _sector_contains(X):
    r, theta = _sector_polar(np.asarray(X, dtype=float))
    return (r > 0) & (r < 1) & (theta > 0) & (theta < SECTOR_ANGLE)


def _sector_interior(n, rng):
    out = []
    have = 0
    while have < n:
        cand = rng.uniform(-1.0, 1.0, size=(2 * (n - have) + 16, 2))
        keep = cand[_sector_contains(cand)]
        out.append(keep)
        have += len(keep)
    return np.concatenate(out)[:n]


def _sector_edge(angle):
    direction = np.array([math.cos(angle), math.sin(angle)])

    def sampler(n, rng):
        return rng.uniform(0.0, 1.0, size=(n, 1)) * direction

    return sampler


def _sector_arc(n, rng):
    theta = rng.uniform(0.0, SECTOR_ANGLE, size=n)
    return np.column_stack([np.cos(theta), np.sin(theta)])


def proportional_counts(lengths, total):
    """Split `total` over components proportionally to `lengths`
    (largest-remainder rounding, ties broken by index)."""
    lengths = np.asarray(lengths, dtype=float)
    raw = lengths / lengths.sum() * total
    counts = np.floor(raw).astype(int)
    remainder = total - counts.sum()
    order = np.argsort(-(raw - counts), kind="stable")
    for i in order[:remainder]:
        counts[i] += 1
    return counts.tolist()


# ----------------------------------------------------------------------
# function-fitting targets
# ----------------------------------------------------------------------
def _singular_target(X):
    x = np.asarray(X, dtype=float).reshape(-1)
    return np.where(
        x < 0.2,
        25.0 * x ** 2,
        np.where(x < 0.4, 25.0 * (0.4 - x) ** 2, 0.0),
    )


def _highfreq_target(X):
    x = np.asarray(X, dtype=float).reshape(-1)
    return sum(np.sin(2 ** i * np.pi * x) for i in range(6))


def _fitting_problem(name, target, eta_tol):
    return Problem(
        name=name,
        domain_kind="interval",
        input_dim=1,
        operator="identity",
        bounds=((0.0, 1.0),),
        u_star=lambda X: target(X),
        rhs=lambda X: target(X),
        boundary_value=None,
        contains=lambda X: (np.asarray(X).reshape(-1) > 0) & (np.asarray(X).reshape(-1) < 1),
        sample_interior=_box_interior([(0.0, 1.0)]),
        boundary_components=[],
        n_interior=2000,
        grid=GridSpec((500,), ((0.0, 1.0),)),
        eta_tol=eta_tol,
        epochs_fixed=50000,
        epochs_adaptive=10000,
    )


def fitting_singular():
    """Piecewise-quadratic target with a cusp at x = 0.2."""
    return _fitting_problem("fitting-singular", _singular_target, 2e-4)


def fitting_highfreq():
    """Sum of six sines with dyadically increasing frequencies."""
    return _fitting_problem("fitting-highfreq", _highfreq_target, 1.5e-2)


# ----------------------------------------------------------------------
# Poisson problems on the square
# ----------------------------------------------------------------------
def _peak(X, cx, cy):
    X = np.asarray(X, dtype=float)
    return np.exp(-1000.0 * ((X[:, 0] - cx) ** 2 + (X[:, 1] - cy) ** 2))


def _peak_neg_laplacian(X, cx, cy):
    X = np.asarray(X, dtype=float)
    rho2 = (X[:, 0] - cx) ** 2 + (X[:, 1] - cy) ** 2
    return (4000.0 - 4.0e6 * rho2) * np.exp(-1000.0 * rho2)


def _square_problem(name, u_star, rhs, eta_tol):
    bounds = ((-1.0, 1.0), (-1.0, 1.0))

    def contains(X):
        X = np.asarray(X, dtype=float)
        return np.all((X > -1.0) & (X < 1.0), axis=-1)

    return Problem(
        name=name,
        domain_kind="rectangle",
        input_dim=2,
        operator="neg_laplacian",
        bounds=bounds,
        u_star=u_star,
        rhs=rhs,
        boundary_value=u_star,
        contains=contains,
        sample_interior=_box_interior(bounds),
        boundary_components=_square_edges(-1.0, 1.0, 100),
        n_interior=40000,
        grid=GridSpec((200, 200), bounds),
        eta_tol=eta_tol,
        epochs_fixed=45000,
        epochs_adaptive=15000,
    )


def poisson_one_peak():
    """Dirichlet Poisson problem whose solution is a sharp Gaussian at the origin."""
    return _square_problem(
        "poisson-one-peak",
        lambda X: _peak(X, 0.0, 0.0),
        lambda X: _peak_neg_laplacian(X, 0.0, 0.0),
        7e-2,
    )


def poisson_two_peaks():
    """Dirichlet Poisson problem with Gaussian peaks at (0, +-0.5)."""
    return _square_problem(
        "poisson-two-peaks",
        lambda X: _peak(X, 0.0, 0.5) + _peak(X, 0.0, -0.5),
        lambda X: _peak_neg_laplacian(X, 0.0, 0.5) + _peak_neg_laplacian(X, 0.0, -0.5),
        1e-1,
    )


# ----------------------------------------------------------------------
# Poisson problem on the three-quarter disk (re-entrant corner)
# ----------------------------------------------------------------------
def _lshape_u(X):
    r, theta = _sector_polar(np.asarray(X, dtype=float))
    return r ** (2.0 / 3.0) * np.sin(2.0 * theta / 3.0) + np.sin(2.0 * np.pi * r ** 2)


def _lshape_rhs(X):
    # the r^(2/3) sin(2 theta / 3) term is harmonic, so only the radial
    # sine contributes: -lap sin(2 pi r^2) = -8 pi cos(2 pi r^2) + 16 pi^2 r^2 sin(2 pi r^2)
    X = np.asarray(X, dtype=float)
    r2 = X[:, 0] ** 2 + X[:, 1] ** 2
    return -8.0 * np.pi * np.cos(2.0 * np.pi * r2) + 16.0 * np.pi ** 2 * r2 * np.sin(
        2.0 * np.pi * r2
    )


def poisson_lshape():
    """Poisson problem on a 3/4 disk with a corner singularity at the origin."""
    lengths = [1.0, 1.0, SECTOR_ANGLE]
    counts = proportional_counts(lengths, 400)
    components = [
        BoundaryComponent("edge_theta0", 1.0, counts[0], _sector_edge(0.0)),
        BoundaryComponent("edge_theta_end", 1.0, counts[1], _sector_edge(SECTOR_ANGLE)),
        BoundaryComponent("arc", SECTOR_ANGLE, counts[2], _sector_arc),
    ]
    bounds = ((-1.0, 1.0), (-1.0, 1.0))

    def grid_mask(X):
        r, theta = _sector_polar(np.asarray(X, dtype=float))
        return (r <= 1.0) & (theta <= SECTOR_ANGLE)

    return Problem(
        name="poisson-lshape",
        domain_kind="circular-sector",
        input_dim=2,
        operator="neg_laplacian",
        bounds=bounds,
        u_star=_lshape_u,
        rhs=_lshape_rhs,
        boundary_value=_lshape_u,
        contains=_sector_contains,
        sample_interior=_sector_interior,
        boundary_components=components,
        n_interior=40000,
        grid=GridSpec((200, 200), bounds, mask=grid_mask),
        eta_tol=2e-1,
        epochs_fixed=45000,
        epochs_adaptive=15000,
    )


# ----------------------------------------------------------------------
# viscous Burgers equation in space-time
# ----------------------------------------------------------------------
@lru_cache(maxsize=4)
def _hermgauss(n):
    # scipy's recurrence stays finite for large n where the numpy
    # implementation overflows
    from scipy.special import roots_hermite

    return roots_hermite(n)


def burgers_reference(t, x, n_nodes=200):
    """Reference solution of the viscous Burgers problem via the
    heat-equation (Cole-Hopf) integral representation, evaluated with
    Gauss-Hermite quadrature.

    Accepts scalars or broadcastable arrays; `t` must be nonnegative.
    For t below 1e-4 the initial profile -sin(pi x) is returned (the
    quadrature kernel degenerates as t -> 0).
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be nonnegative")
    t, x = np.broadcast_arrays(t, x)
    out = np.empty(t.shape)
    early = t < 1e-4
    out[early] = -np.sin(np.pi * x[early])
    late = ~early
    if np.any(late):
        nu = BURGERS_VISCOSITY
        z, w = _hermgauss(n_nodes)
        eta = 2.0 * np.sqrt(nu * t[late])[..., None] * z
        y = x[late][..., None] - eta
        kernel = np.exp(-np.cos(np.pi * y) / (2.0 * np.pi * nu))
        numer = -np.sum(w * np.sin(np.pi * y) * kernel, axis=-1)
        denom = np.sum(w * kernel, axis=-1)
        out[late] = numer / denom
    if out.ndim == 0:
        return float(out)
    return out


def burgers():
    """Viscous Burgers equation with time as the second coordinate.

    Points are (x, t) with x in [-1, 1], t in [0, 1]; the initial
    profile is imposed as the t = 0 boundary component.
    """
    bounds = ((-1.0, 1.0), (0.0, 1.0))

    def u_star(X):
        X = np.asarray(X, dtype=float)
        return burgers_reference(X[:, 1], X[:, 0])

    def boundary_value(X):
        X = np.asarray(X, dtype=float)
        vals = np.zeros(len(X))
        initial = X[:, 1] == 0.0
        vals[initial] = -np.sin(np.pi * X[initial, 0])
        return vals

    def contains(X):
        X = np.asarray(X, dtype=float)
        return (
            (X[:, 0] > -1.0) & (X[:, 0] < 1.0) & (X[:, 1] > 0.0) & (X[:, 1] < 1.0)
        )

    components = [
        BoundaryComponent("x_lo", 1.0, 200, _edge_sampler(0, -1.0, 0.0, 1.0)),
        BoundaryComponent("x_hi", 1.0, 200, _edge_sampler(0, 1.0, 0.0, 1.0)),
        BoundaryComponent("initial", 2.0, 100, _edge_sampler(1, 0.0, -1.0, 1.0)),
    ]
    return Problem(
        name="burgers",
        domain_kind="space-time-rectangle",
        input_dim=2,
        operator="burgers",
        bounds=bounds,
        u_star=u_star,
        rhs=lambda X: np.zeros(len(np.asarray(X))),
        boundary_value=boundary_value,
        contains=contains,
        sample_interior=_box_interior(bounds),
        boundary_components=components,
        n_interior=40000,
        grid=GridSpec((256, 100), bounds),
        eta_tol=5e-3,
        epochs_fixed=45000,
        epochs_adaptive=15000,
        viscosity=BURGERS_VISCOSITY,
    )


PROBLEMS = {
    "fitting-singular": fitting_singular,
    "fitting-highfreq": fitting_highfreq,
    "poisson-one-peak": poisson_one_peak,
    "poisson-two-peaks": poisson_two_peaks,
    "poisson-lshape": poisson_lshape,
    "burgers": burgers,
}


def get_problem(name):
    try:
        return PROBLEMS[name]()
    except KeyError:
        raise KeyError(
            f"unknown problem {name!r}; available: {', '.join(sorted(PROBLEMS))}"
        ) from None
