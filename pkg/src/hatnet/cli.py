"""Command-line entry point for reproducible runs driven by config files.

A run is described by a TOML file with nested sections; every value has
a default mirroring the experiment setup (loss weight 1000, initial
learning rate 5e-3 decayed by 0.9 every 2500 steps, marking fraction
0.5, clustering radius 0.1 with min_pts 1, block scale 2, at most 10
growth iterations), and command-line flags override file values.

Subcommands: run, validate, problems, describe-model.  Exit codes:
0 success, 1 configuration problem, 2 numeric failure (diverged run).
"""

from __future__ import annotations

import argparse
import os
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .adaptive import AdaptiveConfig, run_adaptive
from .errors import ConfigurationError, TrainingDivergedError
from .network import build_network, count_params, params_for_structure, uniform_nodes
from .problems import PROBLEMS, get_problem
from .report import (
    adaptive_run_report,
    emit_report,
    fixed_run_report,
    make_test_grid,
    pointwise_error_field,
    relative_l2,
)
from .training import TrainingConfig, sample, train

MODES = ("fit", "solve", "adapt")

MODEL_KEYS = {"activation", "blocks", "hidden_layers", "frozen"}
TRAINING_KEYS = {
    "beta",
    "lr0",
    "decay_base",
    "decay_every",
    "epochs",
    "n_interior",
    "n_boundary",
    "chunk_rows",
    "dtype",
}
ADAPTIVE_KEYS = {"eta_tol", "gamma", "eps", "min_pts", "scale", "max_iters", "min_radius"}
TOP_KEYS = {"mode", "problem", "seed", "out_dir", "model", "training", "adaptive"}


def load_config(path):
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def validate_config(doc):
    """Schema and invariant check; returns a list of violations."""
    issues = []
    if not isinstance(doc, dict):
        return ["config must be a table of keys and sections"]
    for key in doc:
        if key not in TOP_KEYS:
            issues.append(f"unknown key {key!r}; valid keys: {', '.join(sorted(TOP_KEYS))}")
    mode = doc.get("mode", "fit")
    if mode not in MODES:
        issues.append(f"mode must be one of {', '.join(MODES)}, got {mode!r}")
    problem_name = doc.get("problem")
    problem = None
    if problem_name is None:
        issues.append("problem is required; see the 'problems' subcommand")
    elif problem_name not in PROBLEMS:
        issues.append(
            f"unknown problem {problem_name!r}; valid: {', '.join(sorted(PROBLEMS))}"
        )
    else:
        problem = get_problem(problem_name)
        if mode == "fit" and problem.operator != "identity":
            issues.append(f"mode 'fit' requires a fitting problem, {problem_name!r} is a PDE")
        if mode == "solve" and problem.operator == "identity":
            issues.append(f"mode 'solve' requires a PDE problem, use mode 'fit' for {problem_name!r}")

    model = doc.get("model", {})
    for key in model:
        if key not in MODEL_KEYS:
            issues.append(f"unknown model key {key!r}; valid: {', '.join(sorted(MODEL_KEYS))}")
    activation = model.get("activation", "tanh")
    if activation not in ("tanh", "relu"):
        issues.append(f"model.activation must be 'tanh' or 'relu', got {activation!r}")
    elif activation == "relu" and problem is not None and problem.needs_second_order:
        issues.append("model.activation 'relu' cannot be trained against a second-order operator")
    blocks = model.get("blocks", 10)
    if isinstance(blocks, list):
        if problem is not None and len(blocks) != problem.input_dim:
            issues.append(
                f"model.blocks lists {len(blocks)} dimensions, problem has {problem.input_dim}"
            )
        bad = [b for b in blocks if not isinstance(b, int) or b < 1]
        if bad:
            issues.append("model.blocks entries must be integers >= 1")
    elif not isinstance(blocks, int) or blocks < 1:
        issues.append("model.blocks must be an integer >= 1 or a per-dimension list")
    hidden = model.get("hidden_layers")
    if hidden is not None and (not isinstance(hidden, int) or hidden < 0):
        issues.append("model.hidden_layers must be an integer >= 0")

    training = doc.get("training", {})
    for key in training:
        if key not in TRAINING_KEYS:
            issues.append(f"unknown training key {key!r}; valid: {', '.join(sorted(TRAINING_KEYS))}")
    if "lr0" in training and not training["lr0"] > 0:
        issues.append("training.lr0 must be positive")
    if "decay_base" in training and not (0 < training["decay_base"] <= 1):
        issues.append("training.decay_base must lie in (0, 1]")
    if "decay_every" in training and training["decay_every"] < 1:
        issues.append("training.decay_every must be >= 1")
    if "epochs" in training and training["epochs"] < 0:
        issues.append("training.epochs must be >= 0")
    if "dtype" in training and training["dtype"] not in ("float64", "float32"):
        issues.append("training.dtype must be 'float64' or 'float32'")

    adaptive = doc.get("adaptive", {})
    for key in adaptive:
        if key not in ADAPTIVE_KEYS:
            issues.append(f"unknown adaptive key {key!r}; valid: {', '.join(sorted(ADAPTIVE_KEYS))}")
    if mode == "adapt" and "eta_tol" not in adaptive:
        issues.append("adaptive.eta_tol is required in adapt mode")
    if "eta_tol" in adaptive and not adaptive["eta_tol"] > 0:
        issues.append("adaptive.eta_tol must be positive")
    if "gamma" in adaptive and not (0 < adaptive["gamma"] < 1):
        issues.append("adaptive.gamma must lie in (0, 1)")
    if "eps" in adaptive and not adaptive["eps"] > 0:
        issues.append("adaptive.eps must be positive")
    if "min_pts" in adaptive and (not isinstance(adaptive["min_pts"], int) or adaptive["min_pts"] < 1):
        issues.append("adaptive.min_pts must be an integer >= 1")
    if "scale" in adaptive and not adaptive["scale"] > 0:
        issues.append("adaptive.scale must be positive")
    if "max_iters" in adaptive and (not isinstance(adaptive["max_iters"], int) or adaptive["max_iters"] < 1):
        issues.append("adaptive.max_iters must be >= 1")

    seed = doc.get("seed", 0)
    if not isinstance(seed, int):
        issues.append("seed must be an integer")
    return issues


def resolve_config(doc):
    """Fill every default so a run is fully described by the echo."""
    problem = get_problem(doc["problem"])
    mode = doc.get("mode", "fit")
    model = dict(doc.get("model", {}))
    blocks = model.get("blocks", 10)
    if not isinstance(blocks, list):
        blocks = [int(blocks)] * problem.input_dim
    model_resolved = {
        "activation": model.get("activation", "tanh"),
        "blocks": blocks,
        "hidden_layers": model.get(
            "hidden_layers", 0 if problem.input_dim == 1 else 2
        ),
        "frozen": bool(model.get("frozen", False)),
    }
    training = dict(doc.get("training", {}))
    default_epochs = problem.epochs_adaptive if mode == "adapt" else problem.epochs_fixed
    training_resolved = {
        "beta": float(training.get("beta", 1000.0)),
        "lr0": float(training.get("lr0", 5e-3)),
        "decay_base": float(training.get("decay_base", 0.9)),
        "decay_every": int(training.get("decay_every", 2500)),
        "epochs": int(training.get("epochs", default_epochs)),
        "n_interior": int(training.get("n_interior", problem.n_interior)),
        "n_boundary": int(training.get("n_boundary", problem.n_boundary)),
        "chunk_rows": int(training.get("chunk_rows", 10000)),
        "dtype": training.get("dtype", "float64"),
    }
    adaptive = dict(doc.get("adaptive", {}))
    adaptive_resolved = None
    if mode == "adapt":
        adaptive_resolved = {
            "eta_tol": float(adaptive["eta_tol"]),
            "gamma": float(adaptive.get("gamma", 0.5)),
            "eps": float(adaptive.get("eps", 0.1)),
            "min_pts": int(adaptive.get("min_pts", 1)),
            "scale": float(adaptive.get("scale", 2.0)),
            "max_iters": int(adaptive.get("max_iters", 10)),
            "min_radius": float(adaptive.get("min_radius", adaptive.get("eps", 0.1) / 2.0)),
        }
    return {
        "mode": mode,
        "problem": doc["problem"],
        "seed": int(doc.get("seed", 0)),
        "out_dir": doc.get("out_dir"),
        "model": model_resolved,
        "training": training_resolved,
        "adaptive": adaptive_resolved,
    }


def _apply_overrides(doc, args):
    def setdefault_section(name):
        section = dict(doc.get(name, {}))
        doc[name] = section
        return section

    if args.seed is not None:
        doc["seed"] = args.seed
    if args.out_dir is not None:
        doc["out_dir"] = args.out_dir
    training = setdefault_section("training")
    for key in ("beta", "epochs"):
        value = getattr(args, key)
        if value is not None:
            training[key] = value
    adaptive = setdefault_section("adaptive")
    for flag, key in (
        ("gamma", "gamma"),
        ("eps", "eps"),
        ("min_pts", "min_pts"),
        ("scale", "scale"),
        ("eta_tol", "eta_tol"),
        ("max_iters", "max_iters"),
    ):
        value = getattr(args, flag)
        if value is not None:
            adaptive[key] = value
    if not doc["adaptive"]:
        del doc["adaptive"]
    if not doc["training"]:
        del doc["training"]
    return doc


def _default_out_dir(resolved):
    root = os.environ.get("HATNET_OUT_ROOT", "runs")
    return os.path.join(
        root, f"{resolved['problem']}-{resolved['mode']}-seed{resolved['seed']}"
    )


def execute_run(resolved):
    """Run a resolved config; returns (exit_code, out_dir)."""
    problem = get_problem(resolved["problem"])
    model = resolved["model"]
    tcfg = resolved["training"]
    nodes = [
        uniform_nodes(b, lo, hi)
        for b, (lo, hi) in zip(model["blocks"], problem.bounds)
    ]
    net = build_network(
        nodes,
        model["activation"],
        model["hidden_layers"],
        seed=resolved["seed"] + 1,
        frozen=model["frozen"],
    )
    samples = sample(
        problem, tcfg["n_interior"], tcfg["n_boundary"], seed=resolved["seed"]
    )
    config = TrainingConfig(
        beta=tcfg["beta"],
        lr0=tcfg["lr0"],
        decay_base=tcfg["decay_base"],
        decay_every=tcfg["decay_every"],
        epochs=tcfg["epochs"],
        seed=resolved["seed"],
        chunk_rows=tcfg["chunk_rows"],
        dtype=tcfg["dtype"],
    )
    seeds = {"sample": resolved["seed"], "init": resolved["seed"] + 1}
    out_dir = resolved["out_dir"] or _default_out_dir(resolved)
    grid = make_test_grid(problem)
    label = f"hatnet(b={model['blocks']})"

    if resolved["mode"] == "adapt":
        acfg = AdaptiveConfig(**resolved["adaptive"])
        grid_error = lambda m: relative_l2(m, problem.u_star, grid)
        try:
            net, adaptive_report = run_adaptive(
                net, problem, samples, config, acfg, test_error_fn=grid_error
            )
        except TrainingDivergedError as err:
            print(f"error: {err}", file=sys.stderr)
            return 2, out_dir
        report = adaptive_run_report(
            problem, net, resolved, seeds, adaptive_report, f"adaptive-{label}"
        )
    else:
        try:
            net, trace = train(net, problem, samples, config)
        except TrainingDivergedError as err:
            print(f"error: {err}", file=sys.stderr)
            return 2, out_dir
        error = relative_l2(net, problem.u_star, grid)
        report = fixed_run_report(
            problem, resolved["mode"], net, resolved, seeds, error, trace, label
        )
    field = pointwise_error_field(net, problem.u_star, grid)
    emit_report(report, out_dir, net=net, error_field=field, grid=grid)
    print(f"wrote {out_dir} (final relative L2 error {report.final_error:.6g})")
    return 0, out_dir


def cmd_run(args):
    try:
        doc = load_config(args.config)
    except (OSError, tomllib.TOMLDecodeError) as err:
        print(f"error: cannot read config: {err}", file=sys.stderr)
        return 1
    doc = _apply_overrides(doc, args)
    issues = validate_config(doc)
    if issues:
        for issue in issues:
            print(f"config error: {issue}", file=sys.stderr)
        return 1
    try:
        code, _ = execute_run(resolve_config(doc))
    except ConfigurationError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    return code


def cmd_validate(args):
    try:
        doc = load_config(args.config)
    except (OSError, tomllib.TOMLDecodeError) as err:
        print(f"error: cannot read config: {err}", file=sys.stderr)
        return 1
    issues = validate_config(doc)
    if issues:
        for issue in issues:
            print(f"violation: {issue}")
        return 1
    print("ok")
    return 0


def cmd_problems(args):
    for name in sorted(PROBLEMS):
        p = get_problem(name)
        print(
            f"{name}: {p.domain_kind}, d={p.input_dim}, operator={p.operator}, "
            f"defaults: N_r={p.n_interior}, N_b={p.n_boundary}, "
            f"epochs={p.epochs_fixed}/{p.epochs_adaptive} (fixed/adaptive), "
            f"eta_tol={p.eta_tol}"
        )
    return 0


def cmd_describe_model(args):
    blocks = [int(b) for b in args.blocks.split(",")]
    hidden = args.hidden_layers if args.hidden_layers is not None else (0 if len(blocks) == 1 else 2)
    nodes = [uniform_nodes(b) for b in blocks]
    net = build_network(nodes, args.activation, hidden, seed=0)
    structure = net.structure()
    print(f"structure: {structure}")
    print(f"parameters: {count_params(net)}")
    print(f"input dimension: {len(blocks)}; hidden layers: {hidden}; activation: {args.activation}")
    assert count_params(net) == params_for_structure(structure, args.activation)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hatnet",
        description="Block networks with adaptive growth for fitting and PDE solving",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a run described by a TOML config")
    run.add_argument("config", help="path to the run config file")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out-dir", default=None)
    run.add_argument("--beta", type=float, default=None, help="boundary loss weight")
    run.add_argument("--epochs", type=int, default=None)
    run.add_argument("--gamma", type=float, default=None, help="marking fraction in (0,1)")
    run.add_argument("--eps", type=float, default=None, help="clustering radius")
    run.add_argument("--min-pts", dest="min_pts", type=int, default=None)
    run.add_argument("--scale", type=float, default=None, help="block half-width per cluster radius")
    run.add_argument("--eta-tol", dest="eta_tol", type=float, default=None)
    run.add_argument("--max-iters", dest="max_iters", type=int, default=None)
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="check a config without running")
    val.add_argument("config")
    val.set_defaults(func=cmd_validate)

    probs = sub.add_parser("problems", help="list available problems")
    probs.set_defaults(func=cmd_problems)

    desc = sub.add_parser("describe-model", help="print structure string and parameter count")
    desc.add_argument("--activation", choices=("tanh", "relu"), default="tanh")
    desc.add_argument("--blocks", required=True, help="blocks per dimension, comma separated")
    desc.add_argument("--hidden-layers", dest="hidden_layers", type=int, default=None)
    desc.set_defaults(func=cmd_describe_model)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
