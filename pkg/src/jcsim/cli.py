"""Experiment runner: config ingestion, task orchestration, data and figures.

An experiment is one YAML (or JSON) document selecting a model and a task,
for example::

    model: jc_full
    task: sweep
    params: {g: 500, kappa: 0.5, eps_d_over_g: 0.05, fock_cutoff: 15}
    sweep:
      detuning_over_g: {start: -0.60, stop: -0.56, num: 17}
    output: {directory: out, formats: [csv, svg]}

All rates in a config are dimensionless ratios over the atomic rate gamma
(gamma = 1 by convention); the Kerr model uses ratios over chi instead.
Every run writes a `manifest.json` recording the resolved configuration,
seeds, produced files (with SHA-256) and wall time; feeding a manifest
back to `run` reproduces the data files bit-identically. CSV output is
long format, one row per (grid point, quantity), floats at 17 significant
digits so values reload exactly.

Command line: ``jcsim run CONFIG [--out DIR] [--format csv,json,svg]
[--seed S] [--threads K]``; exit code 0 on success, 2 on a configuration
error, 3 on a computation failure. The environment variable
``JCSIM_OUTPUT_DIR`` supplies the default output directory.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
import traceback
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__, dressed, hilbert, liouville, qsd, render, wigner
from . import kerr as kerr_mod
from .errors import ConfigError, JcsimError

MODELS = ("jc_full", "jc_dressed2", "jc_dressed3", "kerr", "qsd")
TASKS = ("sweep", "steady_wigner", "transient_wigner", "g2", "origin_trace",
         "trajectories", "saturation")
FORMATS = ("csv", "json", "svg")
OUTPUT_DIR_ENV = "JCSIM_OUTPUT_DIR"

TASKS_BY_MODEL = {
    "jc_full": {"sweep", "steady_wigner", "g2"},
    "jc_dressed2": {"g2", "origin_trace"},
    "jc_dressed3": {"steady_wigner", "transient_wigner", "g2",
                    "origin_trace", "saturation"},
    "kerr": {"steady_wigner"},
    "qsd": {"trajectories"},
}


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

def _get(d, key, path, kind, required=True, default=None):
    if key not in d:
        if required:
            raise ConfigError("missing required field", field=f"{path}.{key}")
        return default
    v = d[key]
    try:
        if kind is float:
            if isinstance(v, bool):
                raise TypeError
            return float(v)
        if kind is int:
            if isinstance(v, bool) or int(v) != v:
                raise TypeError
            return int(v)
        if kind is str:
            if not isinstance(v, str):
                raise TypeError
            return v
        if kind is dict:
            if not isinstance(v, dict):
                raise TypeError
            return v
        if kind is list:
            if not isinstance(v, (list, tuple)):
                raise TypeError
            return list(v)
    except (TypeError, ValueError):
        raise ConfigError(f"expected {kind.__name__}, got {v!r}",
                          field=f"{path}.{key}") from None
    raise AssertionError(kind)


def _linspace_block(d, key, path):
    blk = _get(d, key, path, dict)
    sub = f"{path}.{key}"
    start = _get(blk, "start", sub, float)
    stop = _get(blk, "stop", sub, float)
    num = _get(blk, "num", sub, int)
    if num < 1:
        raise ConfigError("num must be >= 1", field=f"{sub}.num")
    if num > 1 and stop <= start:
        raise ConfigError("stop must exceed start", field=f"{sub}.stop")
    return np.linspace(start, stop, num)


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully resolved experiment description."""

    model: str
    task: str
    params: dict
    options: dict
    out_dir: Path
    formats: tuple
    seed: int
    threads: int
    resolved: dict = field(repr=False, default_factory=dict)


def load_config_file(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file {p} does not exist", field="config")
    try:
        doc = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config: {exc}", field="config")
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a mapping", field="config")
    # a manifest is accepted in place of a config and reruns identically
    if doc.get("tool") == "jcsim" and isinstance(doc.get("config"), dict):
        doc = doc["config"]
    return doc


def _resolve_drive(params, path):
    """eps_d in units of gamma from one of the accepted drive keys."""
    g = _get(params, "g", path, float)
    keys = [k for k in ("eps_d", "eps_d_over_g", "omega_over_gamma",
                        "p_excited") if k in params]
    if len(keys) != 1:
        raise ConfigError(
            "specify the drive through exactly one of eps_d, eps_d_over_g, "
            "omega_over_gamma, p_excited", field=f"{path}.eps_d")
    key = keys[0]
    if key == "eps_d":
        return _get(params, key, path, float)
    if key == "eps_d_over_g":
        return _get(params, key, path, float) * g
    if key == "omega_over_gamma":
        om = _get(params, key, path, float)
        return (om * g * g / dressed.OMEGA3_COEFF) ** (1.0 / 3.0)
    p_exc = _get(params, key, path, float)
    try:
        om = dressed.omega_for_p5(p_exc, 1.0)
    except ValueError as exc:
        raise ConfigError(str(exc), field=f"{path}.p_excited")
    return (om * g * g / dressed.OMEGA3_COEFF) ** (1.0 / 3.0)


def _resolve_drive_2photon(params, path):
    g = _get(params, "g", path, float)
    keys = [k for k in ("eps_d", "eps_d_over_g", "omega_over_gamma",
                        "p_excited") if k in params]
    if len(keys) != 1:
        raise ConfigError(
            "specify the drive through exactly one of eps_d, eps_d_over_g, "
            "omega_over_gamma, p_excited", field=f"{path}.eps_d")
    key = keys[0]
    if key == "eps_d":
        return _get(params, key, path, float)
    if key == "eps_d_over_g":
        return _get(params, key, path, float) * g
    if key == "omega_over_gamma":
        om = _get(params, key, path, float)
        return math.sqrt(om * g / (2.0 * math.sqrt(2.0)))
    p_exc = _get(params, key, path, float)
    try:
        om = dressed.omega_prime_for_p3(p_exc, 1.0)
    except ValueError as exc:
        raise ConfigError(str(exc), field=f"{path}.p_excited")
    return math.sqrt(om * g / (2.0 * math.sqrt(2.0)))


def _resolve_detuning(params, path, g, eps_d, required=True):
    keys = [k for k in ("detuning", "detuning_over_g") if k in params]
    if not keys:
        if not required:
            return None
        raise ConfigError("missing drive detuning (detuning, "
                          "detuning_over_g: number, 'three_photon' or "
                          "'two_photon')", field=f"{path}.detuning")
    if len(keys) > 1:
        raise ConfigError("give only one detuning key", field=f"{path}.detuning")
    key = keys[0]
    v = params[key]
    if isinstance(v, str):
        if v == "three_photon":
            return dressed.resonance_detuning(3, eps_d, g)
        if v == "two_photon":
            return dressed.resonance_detuning(2, eps_d, g)
        raise ConfigError(f"unknown detuning preset {v!r}",
                          field=f"{path}.{key}")
    val = _get(params, key, path, float)
    return val * g if key == "detuning_over_g" else val


def _jc_system_params(params, path, require_detuning=True):
    g = _get(params, "g", path, float)
    kappa = _get(params, "kappa", path, float)
    eps_d = _resolve_drive(params, path)
    delta = _resolve_detuning(params, path, g, eps_d, required=require_detuning)
    try:
        return liouville.SystemParams(g=g, kappa=kappa, gamma=1.0,
                                      eps_d=eps_d,
                                      delta_omega_d=0.0 if delta is None else delta)
    except ValueError as exc:
        raise ConfigError(str(exc), field=path)


def _dressed_params(params, path, n_photon):
    g = _get(params, "g", path, float)
    kappa = _get(params, "kappa", path, float, required=False, default=0.5)
    resolve = _resolve_drive if n_photon == 3 else _resolve_drive_2photon
    eps_d = resolve(params, path)
    try:
        return dressed.DressedParams(g=g, kappa=kappa, gamma=1.0, eps_d=eps_d)
    except ValueError as exc:
        raise ConfigError(str(exc), field=path)


def _kerr_params(params, path):
    delta = _get(params, "delta_over_chi", path, float)
    kap = _get(params, "kappa_over_chi", path, float)
    eps = params.get("eps_over_chi")
    if isinstance(eps, (list, tuple)) and len(eps) == 2:
        eps_c = complex(float(eps[0]), float(eps[1]))
    elif isinstance(eps, (int, float)):
        eps_c = complex(eps)
    else:
        raise ConfigError("eps_over_chi must be a number or [re, im]",
                          field=f"{path}.eps_over_chi")
    cutoff = _get(params, "fock_cutoff", path, int, required=False,
                  default=kerr_mod.KERR_FOCK_CUTOFF)
    try:
        return kerr_mod.KerrParams(chi=1.0, delta_omega_dK=delta,
                                   eps_dK=eps_c, kappa_K=kap,
                                   fock_cutoff=cutoff)
    except ValueError as exc:
        raise ConfigError(str(exc), field=path)


def _phase_grid(options, path):
    blk = options.get("grid")
    if blk is None:
        return wigner.DEFAULT_GRID
    sub = f"{path}.grid"
    if not isinstance(blk, dict):
        raise ConfigError("grid must be a mapping", field=sub)
    kw = {}
    for key, kind in (("x_min", float), ("x_max", float), ("y_min", float),
                      ("y_max", float), ("nx", int), ("ny", int)):
        if key in blk:
            kw[key] = _get(blk, key, sub, kind)
    try:
        return wigner.PhaseSpaceGrid(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc), field=sub)


def parse_config(doc: dict, out_dir=None, formats=None, seed=None,
                 threads=None) -> ExperimentConfig:
    """Validate a config document; CLI flags override file fields."""
    model = _get(doc, "model", "", str)
    if model not in MODELS:
        raise ConfigError(f"unknown model {model!r} (one of {MODELS})",
                          field="model")
    task = _get(doc, "task", "", str)
    if task not in TASKS:
        raise ConfigError(f"unknown task {task!r} (one of {TASKS})",
                          field="task")
    if task not in TASKS_BY_MODEL[model]:
        raise ConfigError(f"model {model!r} does not support task {task!r}",
                          field="task")
    params = _get(doc, "params", "", dict)
    options = _get(doc, task, "", dict, required=False, default={})

    out_block = _get(doc, "output", "", dict, required=False, default={})
    if out_dir is None:
        out_dir = out_block.get("directory") or os.environ.get(OUTPUT_DIR_ENV) \
            or "out"
    if formats is None:
        formats = out_block.get("formats", ["csv", "svg"])
    if not isinstance(formats, (list, tuple)) or not formats:
        raise ConfigError("formats must be a nonempty list",
                          field="output.formats")
    for f in formats:
        if f not in FORMATS:
            raise ConfigError(f"unknown format {f!r} (subset of {FORMATS})",
                              field="output.formats")
    if seed is None:
        seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("seed must be an integer", field="seed")
    if threads is None:
        threads = doc.get("threads", 1)
    if not isinstance(threads, int) or isinstance(threads, bool) or threads < 1:
        raise ConfigError("threads must be a positive integer", field="threads")

    resolved = {"model": model, "task": task, "params": dict(params),
                task: dict(options),
                "output": {"directory": str(out_dir),
                           "formats": list(formats)},
                "seed": seed, "threads": threads}
    cfg = ExperimentConfig(model=model, task=task, params=dict(params),
                           options=dict(options), out_dir=Path(out_dir),
                           formats=tuple(formats), seed=seed,
                           threads=threads, resolved=resolved)
    # surface parameter errors now, not at run time
    _validate_task_inputs(cfg)
    return cfg


def _validate_task_inputs(cfg: ExperimentConfig):
    path = "params"
    if cfg.model in ("jc_full", "qsd"):
        _jc_system_params(cfg.params, path,
                          require_detuning=cfg.task != "sweep")
        _get(cfg.params, "fock_cutoff", path, int, required=False,
             default=liouville.FAST_FOCK_CUTOFF)
    elif cfg.model == "jc_dressed3":
        if cfg.task != "saturation":
            _dressed_params(cfg.params, path, 3)
        else:
            _get(cfg.params, "g", path, float)
    elif cfg.model == "jc_dressed2":
        _dressed_params(cfg.params, path, 2)
    elif cfg.model == "kerr":
        _kerr_params(cfg.params, path)

    opt = cfg.options
    tpath = cfg.task
    if cfg.task == "sweep":
        _linspace_block(opt, "detuning_over_g", tpath)
    elif cfg.task == "saturation":
        _linspace_block(opt, "eps_over_g", tpath)
    elif cfg.task in ("g2", "origin_trace"):
        tau_max = _get(opt, "tau_max", tpath, float, required=False,
                       default=8.0)
        if tau_max <= 0:
            raise ConfigError("tau_max must be positive",
                              field=f"{tpath}.tau_max")
        num = _get(opt, "num", tpath, int, required=False, default=1601)
        if num < 2:
            raise ConfigError("num must be >= 2", field=f"{tpath}.num")
    elif cfg.task == "transient_wigner":
        tau = _get(opt, "tau", tpath, float, required=False, default=0.0)
        if tau < 0:
            raise ConfigError("tau must be >= 0", field=f"{tpath}.tau")
        _phase_grid(opt, tpath)
    elif cfg.task == "steady_wigner":
        _phase_grid(opt, tpath)
    elif cfg.task == "trajectories":
        t0 = _get(opt, "t_sample_start", tpath, float, required=False,
                  default=8.0)
        t1 = _get(opt, "t_end", tpath, float, required=False, default=200.0)
        dt = _get(opt, "sample_interval", tpath, float, required=False,
                  default=0.01)
        if not t0 < t1:
            raise ConfigError("t_sample_start must precede t_end",
                              field=f"{tpath}.t_sample_start")
        if dt <= 0:
            raise ConfigError("sample_interval must be positive",
                              field=f"{tpath}.sample_interval")
        nb = _get(opt, "n_bins", tpath, int, required=False, default=100)
        if nb < 1:
            raise ConfigError("n_bins must be >= 1", field=f"{tpath}.n_bins")
        if "seeds" in opt:
            seeds = _get(opt, "seeds", tpath, list)
            if not seeds or not all(isinstance(s, int) for s in seeds):
                raise ConfigError("seeds must be a nonempty list of integers",
                                  field=f"{tpath}.seeds")
        else:
            n = _get(opt, "n_seeds", tpath, int, required=False, default=1)
            if n < 1:
                raise ConfigError("n_seeds must be >= 1",
                                  field=f"{tpath}.n_seeds")


# ---------------------------------------------------------------------------
# Task execution
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _space(cfg) -> hilbert.HilbertSpace:
    cutoff = cfg.params.get("fock_cutoff", liouville.FAST_FOCK_CUTOFF)
    return hilbert.HilbertSpace(int(cutoff))


def _wigner_table(fld: wigner.WignerField):
    cols = ["x", "y", "quantity", "value"]
    xs, ys = fld.grid.x_values, fld.grid.y_values
    rows = []
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            rows.append((float(x), float(y), "wigner", float(fld.values[i, j])))
    return cols, rows


def _series_table(xname, x, quantities: dict):
    cols = [xname, "quantity", "value"]
    rows = []
    for name, vals in quantities.items():
        for xi, vi in zip(x, vals):
            rows.append((float(xi), name, float(vi)))
    return cols, rows


def _task_sweep(cfg):
    p = _jc_system_params(cfg.params, "params", require_detuning=False)
    space = _space(cfg)
    grid_g = _linspace_block(cfg.options, "detuning_over_g", "sweep")
    pts = liouville.sweep_detuning(p, space, grid_g * p.g)
    n_ss = [pt.n_ss for pt in pts]
    g2_0 = [pt.g2_0 for pt in pts]
    tables = {"sweep": _series_table("detuning_over_g", grid_g,
                                     {"n_ss": n_ss, "g2_0": g2_0})}
    figures = {
        "sweep_n": render.render_lines(grid_g, {"n_ss": n_ss},
                                       "detuning / g", "steady photon number"),
        "sweep_g2": render.render_lines(grid_g, {"g2_0": g2_0},
                                        "detuning / g", "g2(0)"),
    }
    errors = {f"{pt.delta_omega_d / p.g:.6g}": pt.error
              for pt in pts if pt.error}
    return tables, figures, {"point_errors": errors} if errors else {}


def _steady_field(cfg):
    """Field density matrix + metadata for the steady_wigner task."""
    if cfg.model == "jc_full":
        p = _jc_system_params(cfg.params, "params")
        space = _space(cfg)
        rho = liouville.steady_state(liouville.build_liouvillian(p, space))
        n_ss = hilbert.expectation(hilbert.number_operator(space), rho).real
        return hilbert.partial_trace_atom(rho), {"n_ss": float(n_ss)}
    if cfg.model == "jc_dressed3":
        dp = _dressed_params(cfg.params, "params", 3)
        p5 = dressed.p5_steady(dp.omega3, dp.gamma)
        return (wigner.steady_field_matrix(p5),
                {"p5": float(p5), "n_ss": float(6.25 * p5)})
    if cfg.model == "kerr":
        kp = _kerr_params(cfg.params, "params")
        rho = liouville.steady_state(kerr_mod.build_kerr_liouvillian(kp))
        n_ss = float(np.sum(np.arange(kp.fock_cutoff)
                            * rho.elements.real.diagonal()))
        return rho, {"n_ss": n_ss}
    raise ConfigError("steady_wigner not supported for this model",
                      field="task")


def _task_steady_wigner(cfg):
    grid = _phase_grid(cfg.options, "steady_wigner")
    rho_c, meta = _steady_field(cfg)
    fld = wigner.wigner_numeric(rho_c, grid)
    tables = {"wigner": _wigner_table(fld)}
    figures = {"wigner": render.render_contour(fld)}
    meta["wigner_integral"] = float(fld.integral())
    return tables, figures, meta


def _task_transient_wigner(cfg):
    dp = _dressed_params(cfg.params, "params", 3)
    tau = float(cfg.options.get("tau", 0.0))
    grid = _phase_grid(cfg.options, "transient_wigner")
    init = dressed.conditional_state().initial_state()
    state = dressed.rate_evolve(init, dp, [tau])[-1] if tau > 0 else init
    coeffs = wigner.transient_coeffs(state)
    fld = wigner.wigner_transient(coeffs, grid)
    tables = {"wigner": _wigner_table(fld)}
    figures = {"wigner": render.render_contour(fld)}
    return tables, figures, {"tau": tau,
                             "coefficients": [float(c) for c in coeffs]}


def _task_g2(cfg):
    opt = cfg.options
    tau_max = float(opt.get("tau_max", 8.0))
    num = int(opt.get("num", 1601))
    tau = np.linspace(0.0, tau_max, num)
    if cfg.model == "jc_full":
        p = _jc_system_params(cfg.params, "params")
        vals = liouville.g2_forward(p, _space(cfg), tau)
    elif cfg.model == "jc_dressed3":
        vals = dressed.g2_analytic_3photon(
            _dressed_params(cfg.params, "params", 3), tau)
    else:
        vals = dressed.g2_analytic_2photon(
            _dressed_params(cfg.params, "params", 2), tau)
    tables = {"g2": _series_table("tau", tau, {"g2": vals})}
    figures = {"g2": render.render_lines(tau, {"g2": vals},
                                         "gamma tau", "g2(tau)")}
    return tables, figures, {"g2_zero": float(vals[0])}


def _task_origin_trace(cfg):
    opt = cfg.options
    tau_max = float(opt.get("tau_max", 3.0))
    num = int(opt.get("num", 1601))
    tau = np.linspace(0.0, tau_max, num)
    if cfg.model == "jc_dressed3":
        dp = _dressed_params(cfg.params, "params", 3)
        vals = wigner.wigner_origin_3photon(tau, dp)
    else:
        dp = _dressed_params(cfg.params, "params", 2)
        vals = wigner.wigner_origin_2photon(tau, dp)
    tables = {"origin": _series_table("tau", tau, {"wigner_origin": vals})}
    figures = {"origin": render.render_lines(
        tau, {"wigner_origin": vals}, "gamma tau", "W(0; tau)")}
    return tables, figures, {"min_value": float(np.min(vals))}


def _task_trajectories(cfg):
    p = _jc_system_params(cfg.params, "params")
    space = _space(cfg)
    opt = cfg.options
    seeds = opt.get("seeds")
    if seeds is None:
        seeds = [cfg.seed + i for i in range(int(opt.get("n_seeds", 1)))]
    base = qsd.TrajectoryConfig(
        params=p, space=space, seed=0,
        t_sample_start=float(opt.get("t_sample_start", 8.0)),
        t_end=float(opt.get("t_end", 200.0)),
        sample_interval=float(opt.get("sample_interval", 0.01)),
    )
    n_bins = int(opt.get("n_bins", 100))

    from dataclasses import replace

    def one(seed):
        return qsd.run_trajectory(replace(base, seed=int(seed)))

    if cfg.threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            records = list(pool.map(one, seeds))
    else:
        records = [one(s) for s in seeds]

    tables, figures, means = {}, {}, {}
    for rec in records:
        hist = qsd.histogram_n(rec, n_bins)
        name = f"trajectory_{rec.seed}"
        tables[name] = _series_table("t", rec.times, {"n": rec.n_values})
        centers = 0.5 * (hist.bin_edges[:-1] + hist.bin_edges[1:])
        tables[f"histogram_{rec.seed}"] = _series_table(
            "bin_center", centers, {"count": hist.counts.astype(float)})
        figures[name] = render.render_lines(
            rec.times, {"n": rec.n_values}, "gamma t", "<n>(t)")
        figures[f"histogram_{rec.seed}"] = render.render_histogram(
            hist.bin_edges, hist.counts, hist.mean, "<n>")
        means[str(rec.seed)] = hist.mean
    return tables, figures, {"histogram_means": means}


def _task_saturation(cfg):
    g = _get(cfg.params, "g", "params", float)
    grid = _linspace_block(cfg.options, "eps_over_g", "saturation")
    omega = np.array([dressed.three_photon_rabi(e * g, g) for e in grid])
    n_ss = 25.0 / (26.0 + 9.0 * (1.0 / omega) ** 2)
    p5 = np.array([dressed.p5_steady(om, 1.0) for om in omega])
    tables = {"saturation": _series_table(
        "eps_over_g", grid,
        {"n_ss": n_ss, "p5": p5, "omega_over_gamma": omega})}
    figures = {"saturation": render.render_lines(
        grid, {"n_ss": n_ss}, "eps_d / g", "steady photon number")}
    return tables, figures, {}


_TASK_RUNNERS = {
    "sweep": _task_sweep,
    "steady_wigner": _task_steady_wigner,
    "transient_wigner": _task_transient_wigner,
    "g2": _task_g2,
    "origin_trace": _task_origin_trace,
    "trajectories": _task_trajectories,
    "saturation": _task_saturation,
}


# ---------------------------------------------------------------------------
# Output sink and entry points
# ---------------------------------------------------------------------------

def _csv_bytes(columns, rows) -> bytes:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue().encode()


def run(config: ExperimentConfig) -> dict:
    """Execute one experiment; returns the manifest of produced files."""
    t0 = time.monotonic()
    tables, figures, extras = _TASK_RUNNERS[config.task](config)

    out = config.out_dir
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_bytes(b"")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory not writable: {exc}",
                          field="output.directory")

    files = []

    def sink(name: str, payload: bytes):
        (out / name).write_bytes(payload)
        files.append({"name": name,
                      "sha256": hashlib.sha256(payload).hexdigest(),
                      "bytes": len(payload)})

    if "csv" in config.formats:
        for name, (cols, rows) in tables.items():
            sink(f"{name}.csv", _csv_bytes(cols, rows))
    if "json" in config.formats:
        doc = {"tool": "jcsim", "version": __version__,
               "config": config.resolved,
               "tables": {name: {"columns": cols, "rows": rows}
                          for name, (cols, rows) in tables.items()}}
        sink("data.json", json.dumps(doc, indent=1, sort_keys=True).encode())
    if "svg" in config.formats:
        for name, payload in figures.items():
            sink(f"{name}.svg", payload)

    manifest = {
        "tool": "jcsim",
        "version": __version__,
        "config": config.resolved,
        "seed": config.seed,
        "threads": config.threads,
        "wall_time_s": round(time.monotonic() - t0, 3),
        "files": files,
    }
    manifest.update(extras)
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=1, sort_keys=True, default=str) + "\n")
    return manifest


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="jcsim",
        description="Multiphoton resonances of the driven Jaynes-Cummings "
                    "model: run one configured experiment.")
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="execute an experiment config")
    runp.add_argument("config", help="YAML/JSON experiment file (or manifest)")
    runp.add_argument("--out", help="output directory (overrides config and "
                                    f"${OUTPUT_DIR_ENV})")
    runp.add_argument("--format", help="comma-separated subset of "
                                       "csv,json,svg")
    runp.add_argument("--seed", type=int, help="base random seed")
    runp.add_argument("--threads", type=int, help="worker count")
    args = parser.parse_args(argv)

    try:
        doc = load_config_file(args.config)
        formats = args.format.split(",") if args.format else None
        cfg = parse_config(doc, out_dir=args.out, formats=formats,
                           seed=args.seed, threads=args.threads)
        manifest = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except JcsimError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 3
    except Exception:
        traceback.print_exc()
        return 3
    print(f"wrote {len(manifest['files'])} files to {cfg.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
