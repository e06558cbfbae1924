"""
Command-line experiment runner: parameter sweeps over the steady-state
pipelines and trajectory dumps, with CSV output and a JSON sidecar that
records the full resolved configuration.

Configuration comes from a single JSON document (``--config``, file or
``-`` for stdin); command-line flags override file values.  Exit codes:
0 success, 2 configuration error, 3 numerical failure on every grid point.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .engine import ModelError
from .measures import GaussianState, log_negativity, occupation
from .optomech import (
    OptomechParams,
    SwapConfig,
    coupling_for_cooperativity,
    full_model,
    squeezed_noise,
)
from .protocols import (
    CrossingError,
    conditional_occupation,
    cooling_point,
    optimize_phi,
    optimize_sigma,
    swap_point,
    teleport_point,
)
from .solvers import SolverError, is_hurwitz, solve_lyapunov
from .trajectories import simulate_conditional

EXPERIMENTS = ("phase-diagram", "cool", "teleport", "swap", "trajectory")

# Axes each experiment accepts, and its CSV schema.
VALID_AXES = {
    "phase-diagram": ("delta", "g"),
    "cool": ("delta", "g", "kappa", "eta"),
    "teleport": ("C",),
    "swap": ("C",),
    "trajectory": (),
}
CSV_COLUMNS = {
    "phase-diagram": ["delta", "g", "C", "stable", "n_ss", "EN", "cond_n"],
    "cool": ["delta", "g", "kappa", "eta", "stable", "n_ss", "phi_opt", "effort"],
    "teleport": ["C", "g", "zeta_db", "var_min", "var_max"],
    "swap": ["C", "g", "stable", "EN", "epr", "sigma_opt"],
}

DEFAULT_PARAMS = {
    "kappa": 0.5,
    "delta": 0.0,
    "g": 0.1,
    "Q": 5e6,
    "nbar": 3.5e5,
    "eta": 1.0,
    "phi": np.pi / 2,
    "hm": 100.0,
    "N": 0.56,
    "upsilon": 0.75,
    "sigma": 1.0,
    "optimize_phi": False,
    "optimize_sigma": False,
    "epsilon_override": None,
    "T": 100.0,
    "dt": 1e-3,
    "store_every": 10,
}

DEFAULT_AXES = {
    "phase-diagram": [
        {"name": "delta", "min": -2.0, "max": 2.0, "count": 41, "scale": "linear"},
        {"name": "g", "min": 0.01, "max": 0.3, "count": 25, "scale": "log"},
    ],
    "cool": [{"name": "delta", "min": -2.0, "max": 2.0, "count": 41, "scale": "linear"}],
    "teleport": [{"name": "C", "min": 0.1, "max": 1000.0, "count": 25, "scale": "log"}],
    "swap": [{"name": "C", "min": 0.1, "max": 100.0, "count": 25, "scale": "log"}],
    "trajectory": [],
}


class ConfigError(ValueError):
    """Raised for invalid sweep configuration."""


def _axis_values(axis: dict) -> np.ndarray:
    try:
        name = axis["name"]
        lo, hi = float(axis["min"]), float(axis["max"])
        count = int(axis["count"])
        scale = axis.get("scale", "linear")
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed axis definition {axis!r}: {exc}") from exc
    if count < 2:
        raise ConfigError(f"axis '{name}' needs count >= 2, got {count}")
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise ConfigError(f"axis '{name}' range must be finite")
    if scale == "log":
        if lo <= 0 or hi <= 0:
            raise ConfigError(f"log axis '{name}' needs positive endpoints")
        return np.geomspace(lo, hi, count)
    if scale != "linear":
        raise ConfigError(f"axis '{name}' scale must be 'linear' or 'log'")
    return np.linspace(lo, hi, count)


def _base_params(cfg: dict) -> OptomechParams:
    p = cfg["params"]
    try:
        return OptomechParams(
            delta=float(p["delta"]),
            g=float(p["g"]),
            kappa=float(p["kappa"]),
            gamma=1.0 / float(p["Q"]),
            nbar=float(p["nbar"]),
            eta=float(p["eta"]),
            phi=float(p["phi"]),
        )
    except (ModelError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"invalid physical parameters: {exc}") from exc


def _eval_phase_diagram(cfg: dict, point: dict) -> dict:
    params = _base_params(cfg).replace(delta=point["delta"], g=point["g"])
    from .optomech import cooperativity

    row = {"delta": point["delta"], "g": point["g"], "C": cooperativity(params)}
    model = full_model(params)
    stable = is_hurwitz(model.F)
    row["stable"] = stable
    if stable:
        sigma = solve_lyapunov(model.F, model.N).sigma
        row["n_ss"] = occupation(GaussianState(np.zeros(4), sigma), 0)
        row["EN"] = log_negativity(sigma)
    else:
        row["n_ss"] = np.nan
        row["EN"] = np.nan
    try:
        row["cond_n"] = conditional_occupation(params)
    except SolverError:
        row["cond_n"] = np.nan
    return row


def _eval_cool(cfg: dict, point: dict) -> dict:
    params = _base_params(cfg)
    for name, val in point.items():
        params = params.replace(**{name: val})
    h_m = float(cfg["params"]["hm"])
    if cfg["params"]["optimize_phi"]:
        res = optimize_phi(params, h_m)
    else:
        res = cooling_point(params, h_m)
    return {
        "delta": params.delta,
        "g": params.g,
        "kappa": params.kappa,
        "eta": params.eta,
        "stable": res.stable,
        "n_ss": res.n_ss,
        "phi_opt": res.phi_opt,
        "effort": res.effort,
    }


def _eval_teleport(cfg: dict, point: dict) -> dict:
    params = _base_params(cfg)
    C = point["C"]
    params = params.replace(g=coupling_for_cooperativity(C, params), delta=params.omega_m)
    N = float(cfg["params"]["N"])
    noise = squeezed_noise(N, -np.sqrt(N * (N + 1.0)))
    eps = cfg["params"]["epsilon_override"]
    try:
        zeta, sigma = teleport_point(params, noise, epsilon=eps)
        evals = np.linalg.eigvalsh(sigma)
        return {
            "C": C,
            "g": params.g,
            "zeta_db": zeta,
            "var_min": float(evals[0]),
            "var_max": float(evals[-1]),
        }
    except SolverError:
        return {"C": C, "g": params.g, "zeta_db": np.nan,
                "var_min": np.nan, "var_max": np.nan}


def _eval_swap(cfg: dict, point: dict) -> dict:
    params = _base_params(cfg)
    C = point["C"]
    params = params.replace(g=coupling_for_cooperativity(C, params), delta=params.omega_m)
    eps = cfg["params"]["epsilon_override"]
    upsilon = float(cfg["params"]["upsilon"])
    try:
        if cfg["params"]["optimize_sigma"]:
            res = optimize_sigma(params, upsilon=upsilon, epsilon=eps)
        else:
            res = swap_point(
                params, SwapConfig(upsilon, float(cfg["params"]["sigma"])), epsilon=eps
            )
    except (CrossingError, SolverError):
        return {"C": C, "g": params.g, "stable": False,
                "EN": np.nan, "epr": np.nan, "sigma_opt": np.nan}
    return {
        "C": C,
        "g": params.g,
        "stable": res.stable,
        "EN": res.EN,
        "epr": res.epr,
        "sigma_opt": res.sigma_opt,
    }


_EVALUATORS = {
    "phase-diagram": _eval_phase_diagram,
    "cool": _eval_cool,
    "teleport": _eval_teleport,
    "swap": _eval_swap,
}


def _eval_row(args: tuple) -> dict:
    experiment, cfg, point = args
    try:
        return _EVALUATORS[experiment](cfg, point)
    except (SolverError, ModelError, CrossingError, np.linalg.LinAlgError) as exc:
        row = {name: np.nan for name in CSV_COLUMNS[experiment]}
        row.update(point)
        row["stable"] = False
        row["error"] = str(exc)
        return row


def _grid_points(cfg: dict) -> list[dict]:
    axes = cfg["axes"]
    grids = [_axis_values(ax) for ax in axes]
    names = [ax["name"] for ax in axes]
    points: list[dict] = []
    if not grids:
        return [{}]
    mesh = np.meshgrid(*grids, indexing="ij")
    flat = [m.reshape(-1) for m in mesh]
    for k in range(flat[0].size):
        points.append({name: float(col[k]) for name, col in zip(names, flat)})
    return points


def _format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_format_value(row.get(c, np.nan)) for c in columns) + "\n")


def _write_sidecar(path: Path, cfg: dict, wallclock: float, n_rows: int) -> None:
    meta = {
        "config": cfg,
        "version": __version__,
        "wallclock_s": wallclock,
        "rows": n_rows,
    }
    with open(Path(str(path) + ".meta.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def run_sweep(cfg: dict) -> int:
    """Run one sweep experiment; returns the process exit code."""
    experiment = cfg["experiment"]
    points = _grid_points(cfg)
    start = time.monotonic()
    jobs = int(cfg.get("jobs", 1))
    tasks = [(experiment, cfg, pt) for pt in points]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_eval_row, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        rows = [_eval_row(t) for t in tasks]
    out = Path(cfg["out"])
    _write_csv(out, CSV_COLUMNS[experiment], rows)
    _write_sidecar(out, cfg, time.monotonic() - start, len(rows))
    failed = sum(1 for r in rows if r.get("error"))
    if failed:
        print(f"{failed}/{len(rows)} grid points failed", file=sys.stderr)
    return 3 if failed == len(rows) else 0


def run_trajectory(cfg: dict) -> int:
    """Simulate one conditional trajectory of the full model and dump it."""
    params = _base_params(cfg)
    p = cfg["params"]
    model = full_model(params)
    start = time.monotonic()
    paths = simulate_conditional(
        model,
        T=float(p["T"]),
        dt=float(p["dt"]),
        seed=int(cfg.get("seed", 0)),
        store_every=int(p["store_every"]),
    )
    path = paths[0]
    dim = model.dim
    m_out = model.n_outputs
    columns = (
        ["t"]
        + [f"mean_{i}" for i in range(dim)]
        + [f"var_{i}" for i in range(dim)]
        + [f"current_{j}" for j in range(m_out)]
    )
    rows = []
    for k, t in enumerate(path.times):
        row = {"t": float(t)}
        for i in range(dim):
            row[f"mean_{i}"] = float(path.means[k, i])
            row[f"var_{i}"] = float(path.covs[k, i, i])
        for j in range(m_out):
            row[f"current_{j}"] = float(path.currents[k, j])
        rows.append(row)
    out = Path(cfg["out"])
    _write_csv(out, columns, rows)
    _write_sidecar(out, cfg, time.monotonic() - start, len(rows))
    return 0


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        cfg = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config document must be a JSON object")
    return cfg


def _resolve(args: argparse.Namespace) -> dict:
    file_cfg = _load_config(args.config)
    experiment = args.experiment
    cfg = {
        "experiment": experiment,
        "params": dict(DEFAULT_PARAMS),
        "axes": DEFAULT_AXES[experiment],
        "out": f"{experiment}.csv",
        "seed": 0,
        "jobs": 1,
    }
    cfg["params"].update(file_cfg.get("params", {}))
    for key in ("axes", "out", "seed", "jobs"):
        if key in file_cfg:
            cfg[key] = file_cfg[key]
    flag_params = {
        name: getattr(args, name)
        for name in (
            "kappa", "delta", "g", "nbar", "Q", "eta", "phi", "hm", "N",
            "upsilon", "sigma", "epsilon_override", "T", "dt", "store_every",
        )
        if getattr(args, name, None) is not None
    }
    cfg["params"].update(flag_params)
    if args.optimize_phi:
        cfg["params"]["optimize_phi"] = True
    if args.optimize_sigma:
        cfg["params"]["optimize_sigma"] = True
    if args.out is not None:
        cfg["out"] = args.out
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.jobs is not None:
        cfg["jobs"] = args.jobs

    if not isinstance(cfg["axes"], list):
        raise ConfigError("axes must be a list of axis objects")
    valid = VALID_AXES[experiment]
    for ax in cfg["axes"]:
        if not isinstance(ax, dict) or ax.get("name") not in valid:
            raise ConfigError(
                f"axis {ax!r} is not valid for '{experiment}' "
                f"(allowed: {', '.join(valid) or 'none'})"
            )
    if experiment == "phase-diagram" and [ax["name"] for ax in cfg["axes"]] != ["delta", "g"]:
        raise ConfigError("phase-diagram needs exactly the axes (delta, g)")
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="omcontrol",
        description="Steady-state sweeps and trajectories of measured "
        "optomechanical systems",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON config file ('-' for stdin)")
        sp.add_argument("--out", help="output CSV path")
        sp.add_argument("--jobs", type=int, help="worker pool size")
        sp.add_argument("--seed", type=int, help="master RNG seed")
        for flag, typ in (
            ("--kappa", float), ("--delta", float), ("--g", float),
            ("--nbar", float), ("--Q", float), ("--eta", float),
            ("--phi", float), ("--hm", float), ("--N", float),
            ("--upsilon", float), ("--sigma", float),
            ("--epsilon-override", float), ("--T", float), ("--dt", float),
            ("--store-every", int),
        ):
            sp.add_argument(flag, type=typ, dest=flag[2:].replace("-", "_"))
        sp.add_argument("--optimize-phi", action="store_true")
        sp.add_argument("--optimize-sigma", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        if cfg["experiment"] == "trajectory":
            return run_trajectory(cfg)
        return run_sweep(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
