"""Configuration parsing, experiment dispatch, report files and plots.

Configs are JSON documents::

    {"schema_version": 1, "experiment_id": "run_conservation",
     "equation": {"dim": 4, "p": 0.9, "mu": 1}, "seed": 0}

Everything omitted is filled from the defaults below.  A top-level ``grid``
section replaces the grid of every default sweep that does not set its own.
"""

from __future__ import annotations

import argparse
import copy
import csv
import datetime as _dt
import json
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .experiments import EXPERIMENTS, DecayFit, ExperimentReport
from .nls_solver import BlowUpError, DivergenceError, EquationParams, GuardError

SCHEMA_VERSION = 1

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

DEFAULT_EQUATION = {"dim": 4, "p": 0.9, "mu": 1}
DEFAULT_GRID = {"node_count": 4096, "radius_max": 64.0}

DEFAULT_TOLERANCES = {
    "guard": 1e-6,
    "t_slope_linear": 0.1,
    "t_slope_localized": 0.15,
    "n_slope": 0.2,
    "mismatch_slope": 0.3,
    "bounded_ratio": 10.0,
    "bounded_trend": 0.1,
    "w_slope": 0.3,
    "w_constant": 1.25,
    "embedding_spread": 0.02,
    "mass_drift": 1e-8,
    "energy_drift": 1e-4,
    "energy_order": 1.8,
    "picard": 1e-3,
}


def _half_dyadic(lo_exp: int, hi_exp: int) -> list:
    return [2.0 ** (k / 2) for k in range(2 * lo_exp, 2 * hi_exp + 1)]


DEFAULT_SWEEPS = {
    "run_linear_decay": {
        "parts": ["dispersive", "localized", "inner"],
        "dispersive": {
            "node_count": 8192,
            "radius_max": 1000.0,
            "bump_radius": 3.0,
            "times": [2.0 ** (k / 2) for k in range(0, 10)],
            "r_values": [4.0],
        },
        "localized": {
            "node_count": 9216,
            "radius_max": 600.0,
            "N_values": [8.0, 16.0, 32.0],
            "times": _half_dyadic(0, 2),
            "carrier": 1.25,
            "window": [0.5, 9.0],
            "r": 4.0,
            "s": 0.0,
            "N_slope_time": 4.0,
            "N_slope_values": _half_dyadic(3, 5),
        },
        "inner": {
            "radius_max": 640.0,
            "M_values": [8.0, 16.0, 32.0],
            "K_values": [2, 3, 4],
            "time_factors": [1.0, 1.1, 1.2, 1.3],
            "bands": [2.0**k for k in range(8)],
            "r": 4.0,
            "freq_margin": 8.0,
        },
    },
    "run_weighted_strichartz": {
        "weighted": {
            "triple": [2.0, 4.0, 0.0],
            "node_count": 4096,
            "radius_max": 320.0,
            "horizon": 3.0,
            "time_points": 161,
            "first_time": 1e-4,
            "bands": [1.0, 2.0, 4.0, 8.0, 16.0],
            "N0": 1.0,
            "N_count": 4,
            "amplitude": 0.5,
            "delta0": 2.0,
            "time_cutoff": 1.0,
            "dt": 2e-3,
            "M_min": 2.0,
            "M_max": 16.0,
            "alpha": [1.0, 2.0],
            "beta": [0.05, 0.1, 0.2],
        },
    },
    "run_mismatch": {
        "mismatch": {
            "node_count": 2048,
            "radius_max": 256.0,
            "inner_radius": 1.0,
            "separations": [4.0, 8.0, 16.0, 32.0],
            "M": 1.0,
            "q": 2.0,
            "sigma": [1.0],
        },
    },
    "run_embedding": {
        "embedding": {
            "tuples": [[-0.5, 4.0, 2.0, 1.5], [0.0, 4.0, 2.0, 1.0], [-0.5, 2.0, 2.0, 0.5]],
            "node_count": 4096,
            "radius_max": 64.0,
            "scales": [0.25, 1.0, 4.0],
        },
    },
    "run_global_decomposition": {
        "global": {
            "node_count": 4096,
            "radius_max": 256.0,
            "horizon": 10.0,
            "time_points": 101,
            "amplitude": 0.5,
            "bands": [1.0, 2.0, 4.0, 8.0, 16.0],
            "delta0": 2.0,
            "N0": 4.0,
            "N_count": 4,
            "dt": 2e-3,
            "time_cutoff": 1.0,
            "guard": None,
        },
    },
    "run_conservation": {
        "conservation": {
            "node_count": 1024,
            "radius_max": 64.0,
            "amplitude": 1.0,
            "horizon": 10.0,
            "snapshots": 21,
            "dt": 1e-3,
            "guard": None,
            "picard_amplitude": 0.1,
            "picard_horizon": 0.5,
            "picard_iterations": 8,
            "picard_time_points": 401,
            "picard_dt": 1e-4,
        },
    },
}

DESCRIPTIONS = {
    "run_linear_decay": "free-flow decay: dispersive, localized high-frequency and inner-region rates",
    "run_weighted_strichartz": "weighted Strichartz ratios (linear) and X(alpha, beta) norms of v (nonlinear)",
    "run_mismatch": "decay of low-frequency projections away from the data support",
    "run_embedding": "scale invariance of the weighted radial Sobolev embedding ratio",
    "run_global_decomposition": "v/w split of rough data: w mass bound, N-scaling and growth of u",
    "run_conservation": "mass and energy drift of the split-step solver, Picard cross-check",
}

_TOP_KEYS = {"schema_version", "experiment_id", "equation", "grid", "sweeps", "tolerances", "seed", "output_dir"}


class ConfigError(ValueError):
    """Malformed or invalid configuration document."""


@dataclass(frozen=True)
class RunConfig:
    experiment_id: str
    equation: EquationParams
    grid: dict
    sweeps: dict
    tolerances: dict
    seed: int = 0
    output_dir: str = "runs"


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _expect_dict(doc: dict, key: str) -> dict:
    val = doc.get(key, {})
    if not isinstance(val, dict):
        raise ConfigError(f"field '{key}' must be an object, got {type(val).__name__}")
    return val


def _check_numbers(value, path: str) -> None:
    """Reject booleans, strings and empty lists where numbers are expected."""
    if isinstance(value, dict):
        for k, v in value.items():
            _check_numbers(v, f"{path}.{k}")
    elif isinstance(value, list):
        if not value:
            raise ConfigError(f"field '{path}' is an empty list")
        for i, v in enumerate(value):
            _check_numbers(v, f"{path}[{i}]")
    elif isinstance(value, bool) or not (value is None or isinstance(value, (int, float, str))):
        raise ConfigError(f"field '{path}' has unsupported value {value!r}")


def parse_config(text: str) -> RunConfig:
    """Parse a JSON config document into a validated :class:`RunConfig`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"malformed document at line {err.lineno}, column {err.colno}: {err.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    unknown = sorted(set(doc) - _TOP_KEYS)
    if unknown:
        raise ConfigError(f"unknown field(s) {', '.join(unknown)}; allowed: {', '.join(sorted(_TOP_KEYS))}")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"field 'schema_version' is {version!r}; this build reads version {SCHEMA_VERSION}")

    exp_id = doc.get("experiment_id")
    if exp_id is None:
        raise ConfigError("field 'experiment_id' is required")
    if exp_id not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment_id {exp_id!r}; valid ids: {', '.join(EXPERIMENTS)}")

    eq_doc = _merge(DEFAULT_EQUATION, _expect_dict(doc, "equation"))
    extra = sorted(set(eq_doc) - set(DEFAULT_EQUATION))
    if extra:
        raise ConfigError(f"unknown equation field(s) {', '.join(extra)}")
    try:
        equation = EquationParams(dim=eq_doc["dim"], p=eq_doc["p"], mu=eq_doc["mu"])
    except (TypeError, ValueError) as err:
        raise ConfigError(f"field 'equation': {err}") from None

    user_grid = _expect_dict(doc, "grid")
    grid = _merge(DEFAULT_GRID, user_grid)
    extra = sorted(set(grid) - set(DEFAULT_GRID))
    if extra:
        raise ConfigError(f"unknown grid field(s) {', '.join(extra)}")
    _check_numbers(grid, "grid")

    defaults = copy.deepcopy(DEFAULT_SWEEPS[exp_id])
    for sweep in defaults.values():
        if isinstance(sweep, dict):
            for key in ("node_count", "radius_max"):
                if key in user_grid and key in sweep:
                    sweep[key] = user_grid[key]
    user_sweeps = _expect_dict(doc, "sweeps")
    for name, val in user_sweeps.items():
        if name not in defaults:
            raise ConfigError(f"unknown sweep '{name}' for {exp_id}; expected one of {', '.join(defaults)}")
        if val is None or val == {} or val == []:
            raise ConfigError(f"missing required sweep '{name}' (empty or null)")
    sweeps = _merge(defaults, user_sweeps)
    _check_numbers(sweeps, "sweeps")

    tolerances = _merge(DEFAULT_TOLERANCES, _expect_dict(doc, "tolerances"))
    for key, val in tolerances.items():
        if key not in DEFAULT_TOLERANCES:
            raise ConfigError(f"unknown tolerance '{key}'")
        if isinstance(val, bool) or not isinstance(val, (int, float)) or not val > 0:
            raise ConfigError(f"tolerance '{key}' must be a positive number, got {val!r}")

    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"field 'seed' must be a non-negative integer, got {seed!r}")
    out_dir = doc.get("output_dir", "runs")
    if not isinstance(out_dir, str) or not out_dir:
        raise ConfigError("field 'output_dir' must be a non-empty path string")
    return RunConfig(exp_id, equation, grid, sweeps, tolerances, seed, out_dir)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err.strerror}") from None
    return parse_config(text)


def serialize_config(cfg: RunConfig) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "experiment_id": cfg.experiment_id,
        "equation": {"dim": cfg.equation.dim, "p": cfg.equation.p, "mu": cfg.equation.mu},
        "grid": cfg.grid,
        "sweeps": cfg.sweeps,
        "tolerances": cfg.tolerances,
        "seed": cfg.seed,
        "output_dir": cfg.output_dir,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def execute(cfg: RunConfig) -> ExperimentReport:
    """Run the configured suite; errors are re-raised with the config context."""
    context = f"{cfg.experiment_id} (seed {cfg.seed})"
    try:
        report = EXPERIMENTS[cfg.experiment_id](cfg)
    except (GuardError, BlowUpError, DivergenceError) as err:
        raise type(err)(f"{context}: {err}") from err
    except (KeyError, TypeError, ValueError) as err:
        raise ConfigError(f"{context}: {err}") from err
    report.params["seed"] = cfg.seed
    return report


# report files


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, numpy scalars become floats."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def record_bytes(report: ExperimentReport) -> bytes:
    """Canonical serialized record; contains no timestamps."""
    payload = {"schema_version": SCHEMA_VERSION, **report.to_record()}
    return (json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n").encode()


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9.]+", "_", label).strip("_")


def _fresh_dir(base: Path, stem: str) -> Path:
    stamp = _dt.datetime.now().strftime("%Y%m%dT%H%M%S")
    candidate = base / f"{stem}-{stamp}"
    k = 1
    while candidate.exists():
        candidate = base / f"{stem}-{stamp}-{k}"
        k += 1
    candidate.mkdir(parents=True)
    return candidate


def summary_text(report: ExperimentReport) -> str:
    lines = [f"experiment {report.experiment_id}: {'PASS' if report.passed else 'FAIL'}"]
    if not report.fits:
        lines.append("no fits")
    for f in report.fits:
        lines.append(
            f"  fit   {f.label}: slope {f.fitted_slope:.4f} vs {f.theory_slope:.4f} "
            f"({f.mode}, tol {f.tolerance:g}), R^2 {f.r_squared:.4f} -> {'pass' if f.verdict else 'fail'}"
        )
    for c in report.checks:
        lines.append(f"  check {c.name}: {c.value:.6g} {c.relation} {c.threshold:g} -> {'pass' if c.passed else 'fail'}")
    return "\n".join(lines) + "\n"


def write_report(report: ExperimentReport, directory, *, plots: bool = True) -> Path:
    """Write record, per-fit tables, plots and summary into a new timestamped subdirectory."""
    out = _fresh_dir(Path(directory), report.experiment_id)
    (out / "record.json").write_bytes(record_bytes(report))
    for i, f in enumerate(report.fits):
        stem = f"fit{i:02d}_{_slug(f.label)}"
        with open(out / f"{stem}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["abscissa", "value", "log_abscissa", "log_value"])
            for a, v in f.samples:
                w.writerow([repr(a), repr(v), repr(math.log(a)), repr(math.log(v))])
        if plots:
            render_plot(f, out / f"{stem}.svg")
    (out / "summary.txt").write_text(summary_text(report))
    return out


def render_plot(fit: DecayFit, path) -> Path:
    """Log-log scatter, fitted line and theory line as SVG; byte-stable for equal input."""
    if len(fit.samples) < 4:
        raise ValueError(f"a plot needs at least 4 samples, fit '{fit.label}' has {len(fit.samples)}")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    pts = np.asarray(fit.samples, dtype=float)
    x = pts[:, 0]
    xs = np.geomspace(x.min(), x.max(), 50)
    fitted = np.exp(fit.intercept) * xs**fit.fitted_slope
    # theory line through the geometric mean of the data
    anchor_x, anchor_y = np.exp(np.mean(np.log(x))), np.exp(np.mean(np.log(pts[:, 1])))
    theory = anchor_y * (xs / anchor_x) ** fit.theory_slope
    colour = "tab:green" if fit.verdict else "tab:red"
    with matplotlib.rc_context({"svg.hashsalt": "nlslab", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(6, 4.5))
        ax.loglog(x, pts[:, 1], "o", color="black", label="measured")
        ax.loglog(xs, fitted, "-", color=colour, label=f"fit slope {fit.fitted_slope:.3f} (R^2 {fit.r_squared:.3f})")
        ax.loglog(xs, theory, "--", color="tab:blue", label=f"theory slope {fit.theory_slope:.3f}")
        ax.set_xlabel(fit.abscissa_name)
        ax.set_ylabel(f"norm  [{fit.paper_ref}]", fontsize=7)
        ax.set_title(fit.label, fontsize=9)
        ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return Path(path)


# command line


def _cmd_list(_args) -> int:
    for exp_id in EXPERIMENTS:
        print(f"{exp_id:26s} {DESCRIPTIONS[exp_id]}")
    return EXIT_PASS


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    print(f"ok: {cfg.experiment_id} (d={cfg.equation.dim}, p={cfg.equation.p:g}, s_c={cfg.equation.s_c:.4f})")
    return EXIT_PASS


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = RunConfig(cfg.experiment_id, cfg.equation, cfg.grid, cfg.sweeps, cfg.tolerances, args.seed, cfg.output_dir)
    report = execute(cfg)
    out = write_report(report, args.out or cfg.output_dir)
    sys.stdout.write(summary_text(report))
    print(f"report written to {out}")
    return EXIT_PASS if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nls-lab", description="radial NLS decay and decomposition experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment config and write a report")
    run.add_argument("config")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", default=None, help="output directory (default: the config's output_dir)")
    run.set_defaults(func=_cmd_run)
    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("config")
    val.set_defaults(func=_cmd_validate)
    lst = sub.add_parser("list-experiments", help="list experiment ids")
    lst.set_defaults(func=_cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (RuntimeError, OSError, FloatingPointError) as err:
        print(f"runtime error: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
