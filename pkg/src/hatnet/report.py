"""Accuracy metrics on uniform test grids and run artifacts on disk.

A run directory contains report.json (the full run record), table.csv
(one row per model in the run: model, structure, params, error),
trace.csv (per-epoch loss records), error_field.csv (pointwise absolute
errors over the test grid), and, for adaptive runs, adaptive.csv with
the per-iteration loop statistics.  All floats are written in shortest
round-trip form; rerunning an identical configuration reproduces every
file byte for byte except the wall-time fields.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import asdict, dataclass

import numpy as np

from .problems import Problem

TABLE_COLUMNS = ("model", "structure", "params", "error")
ADAPTIVE_COLUMNS = (
    "iteration",
    "structure",
    "params",
    "eta",
    "marked_count",
    "cluster_count",
    "test_error",
)
TRACE_CSV_COLUMNS = ("iteration", "epoch", "loss", "interior_term", "boundary_term", "lr", "wall_ms")


@dataclass
class TestGrid:
    """Uniformly spaced evaluation points with their layout descriptor."""

    __test__ = False  # not a pytest class, despite the name

    points: np.ndarray
    shape: tuple
    bounds: tuple

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.shape = tuple(int(s) for s in self.shape)
        self.bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)


def make_test_grid(problem_or_spec) -> TestGrid:
    """The problem's declared test lattice, row-major in the first
    coordinate; lattice points outside the domain are dropped."""
    spec = problem_or_spec.grid if isinstance(problem_or_spec, Problem) else problem_or_spec
    axes = [
        np.linspace(lo, hi, count)
        for (lo, hi), count in zip(spec.bounds, spec.shape)
    ]
    if len(axes) == 1:
        points = axes[0].reshape(-1, 1)
    else:
        mesh = np.meshgrid(*axes, indexing="ij")
        points = np.column_stack([m.ravel() for m in mesh])
    if spec.mask is not None:
        points = points[spec.mask(points)]
    return TestGrid(points, spec.shape, spec.bounds)


def _values_on(obj, grid: TestGrid):
    if hasattr(obj, "predict"):
        return np.asarray(obj.predict(grid.points), dtype=float)
    if callable(obj):
        return np.asarray(obj(grid.points), dtype=float)
    values = np.asarray(obj, dtype=float)
    if values.shape != (len(grid.points),):
        raise ValueError("precomputed field does not match the grid")
    return values


def relative_l2(approx, u_star, grid: TestGrid) -> float:
    """sqrt(sum |approx - u*|^2) / sqrt(sum |u*|^2) over the grid."""
    got = _values_on(approx, grid)
    want = _values_on(u_star, grid)
    denom = np.sqrt(np.sum(want ** 2))
    if denom == 0:
        raise ValueError("reference function is identically zero on the grid")
    return float(np.sqrt(np.sum((got - want) ** 2)) / denom)


def pointwise_error_field(approx, u_star, grid: TestGrid) -> np.ndarray:
    """|approx - u*| at every grid point, in grid order."""
    return np.abs(_values_on(approx, grid) - _values_on(u_star, grid))


@dataclass
class RunReport:
    """Everything needed to reproduce and tabulate one run."""

    problem: str
    mode: str
    model: dict
    seeds: dict
    config: dict
    table: list
    adaptive_rows: list
    final_error: float
    traces: list
    stopped_by: str = ""

    def to_json(self):
        return json.dumps(asdict(self), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        return cls(**doc)


def fixed_run_report(problem, mode, net, config_echo, seeds, error, trace, model_label):
    from .network import count_params

    return RunReport(
        problem=problem.name,
        mode=mode,
        model=net.describe(),
        seeds=dict(seeds),
        config=dict(config_echo),
        table=[
            {
                "model": model_label,
                "structure": net.structure(),
                "params": count_params(net),
                "error": error,
            }
        ],
        adaptive_rows=[],
        final_error=error,
        traces=[_trace_columns(trace)],
    )


def adaptive_run_report(problem, net, config_echo, seeds, adaptive_report, model_label):
    rows = adaptive_report.rows
    table = [
        {
            "model": f"{model_label}(iter={r.iteration})",
            "structure": r.structure,
            "params": r.params,
            "error": r.test_error,
        }
        for r in rows
    ]
    return RunReport(
        problem=problem.name,
        mode="adapt",
        model=net.describe(),
        seeds=dict(seeds),
        config=dict(config_echo),
        table=table,
        adaptive_rows=[
            {
                "iteration": r.iteration,
                "structure": r.structure,
                "params": r.params,
                "eta": r.eta,
                "marked_count": r.marked_count,
                "cluster_count": r.cluster_count,
                "test_error": r.test_error,
            }
            for r in rows
        ],
        final_error=rows[-1].test_error if rows else float("nan"),
        traces=[_trace_columns(t) for t in adaptive_report.traces],
        stopped_by=adaptive_report.stopped_by,
    )


def _trace_columns(trace):
    return {
        "epoch": list(trace.epochs),
        "loss": list(trace.loss),
        "interior_term": list(trace.interior_term),
        "boundary_term": list(trace.boundary_term),
        "lr": list(trace.lr),
        "wall_ms": list(trace.wall_ms),
    }


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_report(report: RunReport, out_dir, net=None, error_field=None, grid=None):
    """Write the run artifacts; returns the list of file paths written."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    path = os.path.join(out_dir, "report.json")
    with open(path, "w") as fh:
        fh.write(report.to_json())
    written.append(path)

    path = os.path.join(out_dir, "table.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TABLE_COLUMNS)
        for row in report.table:
            writer.writerow([_fmt(row[c]) for c in TABLE_COLUMNS])
    written.append(path)

    path = os.path.join(out_dir, "trace.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_CSV_COLUMNS)
        for it, tr in enumerate(report.traces):
            for i in range(len(tr["epoch"])):
                writer.writerow(
                    [
                        it,
                        tr["epoch"][i],
                        _fmt(tr["loss"][i]),
                        _fmt(tr["interior_term"][i]),
                        _fmt(tr["boundary_term"][i]),
                        _fmt(tr["lr"][i]),
                        _fmt(tr["wall_ms"][i]),
                    ]
                )
    written.append(path)

    if report.adaptive_rows:
        path = os.path.join(out_dir, "adaptive.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(ADAPTIVE_COLUMNS)
            for row in report.adaptive_rows:
                writer.writerow([_fmt(row[c]) for c in ADAPTIVE_COLUMNS])
        written.append(path)

    if error_field is not None and grid is not None:
        path = os.path.join(out_dir, "error_field.csv")
        d = grid.points.shape[1]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"x{i + 1}" for i in range(d)] + ["abs_error"])
            for point, err in zip(grid.points, error_field):
                writer.writerow([_fmt(float(c)) for c in point] + [_fmt(float(err))])
        written.append(path)

    if net is not None:
        from .network import save_checkpoint

        path = os.path.join(out_dir, "model.json")
        save_checkpoint(net, path)
        written.append(path)
    return written


def load_report(out_dir) -> RunReport:
    with open(os.path.join(out_dir, "report.json")) as fh:
        return RunReport.from_json(fh.read())
