"""Scenario configuration, drivers, CSV/metadata emission and the sweep harness.

    simulate <scenario> --config <path> [--out <dir>] [--parallel <k>] [--seed <n>]
    simulate --print-schema

Times are in scaled units (``|epsilon - 2S chi| = 1``) except for the NV
scenarios, which use microseconds with energies in MHz.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import metadata as importlib_metadata
from pathlib import Path
from typing import Any, Callable

import jsonschema
import numpy as np
import scipy
from threadpoolctl import threadpool_limits

from .engine import (
    CouplingSet,
    build_model,
    couplings_from_relative,
    evolve_many,
    metric_norm,
    relative_couplings,
)
from .errors import ConfigError, SqueezeError
from .nv import NvConfig, contour_grid, nv_moments
from .spin import coherent_state
from .squeezing import basis_weights, report_from_moments, spin_moments, to_dB
from .su11 import asymptotic_state, boson_params, quadrature_variances

log = logging.getLogger("nhsqueeze")

SCENARIOS = ("evolve", "sweep_eta", "sweep_N", "asymptotic_map", "boson_compare", "nv_contour", "nv_sweep")

HEADERS = {
    "evolve": "t,zeta2x,zeta2y,zeta2x_dB,zeta2y_dB,product_dB,theta_mean,Sz_mean,norm_S",
    "evolve_weights": "t,k,w",
    "sweep_eta": "eta,zeta2x_dB,zeta2y_dB,product_dB,Qx_dB,Qp_dB,Qproduct_dB",
    "sweep_N": "N,zeta2x_dB,zeta2y_dB,product_dB",
    "asymptotic_map": "eta,Gamma,region,rho_L,phi,Qx,Qp",
    "boson_compare": "t,zeta2x_dB,zeta2y_dB,product_dB,Qx_dB,Qp_dB,Qproduct_dB",
    "nv_contour": "g1_over_g2,phonon_fraction,Xi2_first_principles,Xi2_paper_form",
    "nv_sweep": "g1_over_g2,n_ph,zeta2x_dB,zeta2y_dB,product_dB",
}

STEADY_GAMMA_T = 20.0

# -- schema -----------------------------------------------------------------

_NUM = {"type": "number"}
_GRID = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["linear", "log", "list"]},
        "start": _NUM,
        "stop": _NUM,
        "num": {"type": "integer", "minimum": 1},
        "values": {"type": "array", "items": _NUM, "minItems": 1},
    },
    "required": ["kind"],
    "additionalProperties": False,
    "if": {"properties": {"kind": {"const": "list"}}},
    "then": {"required": ["values"]},
    "else": {"required": ["start", "stop", "num"]},
}

SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "simulate scenario configuration",
    "type": "object",
    "properties": {
        "scenario": {"enum": list(SCENARIOS)},
        "seed": {"type": "integer", "minimum": 0},
        "model": {
            "type": "object",
            "properties": {
                "two_S": {"type": "integer", "minimum": 1},
                "theta0": {"type": "number", "minimum": 0, "maximum": math.pi},
                "phi0": _NUM,
                "eta": {"type": "number", "minimum": 0},
                "Gamma": {"type": "number", "minimum": 0},
                "sigma": {"enum": [-1, 1]},
                "epsilon": _NUM,
                "v_sign": {"enum": [-1, 1]},
                "couplings": {
                    "type": "object",
                    "properties": {
                        "chi": _NUM,
                        "V": _NUM,
                        "epsilon": _NUM,
                        "gamma": {"type": "number", "minimum": 0},
                    },
                    "required": ["chi", "V", "epsilon", "gamma"],
                    "additionalProperties": False,
                },
            },
            "required": ["two_S"],
            "additionalProperties": False,
        },
        "time": _GRID,
        "steady_time": {"type": "number", "exclusiveMinimum": 0},
        "weights": {"type": "boolean"},
        "sweep": {
            "type": "object",
            "properties": {k: _GRID for k in ("eta", "Gamma", "two_S", "ratio", "n_ph")},
            "additionalProperties": False,
        },
        "nv": {
            "type": "object",
            "properties": {
                "omega_r": {"type": "number", "exclusiveMinimum": 0},
                "g1": _NUM,
                "g2": _NUM,
                "gamma": {"type": "number", "minimum": 0},
                "two_S": {"type": "integer", "minimum": 1},
                "n_ph": {"type": "number", "minimum": 0},
                "theta0": {"type": "number", "minimum": 0, "maximum": math.pi},
                "phi0": _NUM,
                "mass_tol": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            },
            "required": ["omega_r", "g1", "g2", "gamma", "two_S"],
            "additionalProperties": False,
        },
        "contour": {
            "type": "object",
            "properties": {
                "r_range": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
                "m_range": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
                "resolution": {"type": "integer", "minimum": 2},
            },
            "required": ["r_range", "m_range", "resolution"],
            "additionalProperties": False,
        },
        "tolerances": {
            "type": "object",
            "properties": {"iss_tol_dB": {"type": "number", "exclusiveMinimum": 0}},
            "additionalProperties": False,
        },
        "units": {
            "type": "object",
            "properties": {
                "time": {"type": "string"},
                "energy": {"type": "string"},
                "energy_scale": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

_REQUIRED = {
    "evolve": [("model",), ("time",)],
    "boson_compare": [("model",), ("time",)],
    "sweep_eta": [("model",), ("sweep", "eta")],
    "sweep_N": [("model",), ("sweep", "two_S")],
    "asymptotic_map": [("sweep", "eta"), ("sweep", "Gamma")],
    "nv_contour": [("nv",), ("contour",)],
    "nv_sweep": [("nv",), ("sweep", "ratio"), ("sweep", "n_ph"), ("steady_time",)],
}

# -- config dataclasses -----------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    kind: str
    start: float | None = None
    stop: float | None = None
    num: int | None = None
    values: tuple[float, ...] | None = None

    def array(self) -> np.ndarray:
        if self.kind == "list":
            return np.asarray(self.values, dtype=float)
        if self.kind == "log":
            return np.geomspace(self.start, self.stop, self.num)
        return np.linspace(self.start, self.stop, self.num)


@dataclass(frozen=True)
class ModelConfig:
    two_S: int
    theta0: float = math.pi / 4
    phi0: float = 0.0
    eta: float | None = None
    Gamma: float | None = None
    sigma: int = -1
    epsilon: float = 0.0
    v_sign: int = 1
    couplings: dict | None = None

    def coupling_set(self, two_S: int | None = None, eta: float | None = None) -> CouplingSet:
        two_S = self.two_S if two_S is None else two_S
        if self.couplings is not None and eta is None:
            return CouplingSet(**self.couplings)
        eta = self.eta if eta is None else eta
        return couplings_from_relative(two_S, eta, self.Gamma, self.sigma, self.epsilon, self.v_sign)

    def gamma_scaled(self) -> float:
        """Decay rate in the scaled unit."""
        c = self.coupling_set()
        return relative_couplings(c, self.two_S / 2).Gamma


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    seed: int = 0
    model: ModelConfig | None = None
    time: GridSpec | None = None
    steady_time: float | None = None
    weights: bool = True
    sweep: dict[str, GridSpec] = field(default_factory=dict)
    nv: NvConfig | None = None
    contour: dict | None = None
    iss_tol_dB: float = 0.1
    units: dict | None = None
    raw: dict = field(default_factory=dict, compare=False)

    def steady(self) -> float:
        if self.steady_time is not None:
            return self.steady_time
        g = self.model.gamma_scaled()
        if g <= 0:
            raise ConfigError("required when the scaled decay rate is zero", ("steady_time",))
        return STEADY_GAMMA_T / g


def _get(d: dict, path: tuple) -> Any:
    for p in path:
        if not isinstance(d, dict) or p not in d:
            return None
        d = d[p]
    return d


def validate_config(raw: dict, scenario: str | None = None) -> ScenarioConfig:
    """Schema-check ``raw`` and build the typed config; errors carry the field path."""
    raw = copy.deepcopy(raw)
    if scenario is not None:
        if raw.setdefault("scenario", scenario) != scenario:
            raise ConfigError(f"config is for {raw['scenario']!r}, command asked for {scenario!r}", ("scenario",))
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        e = errors[0]
        raise ConfigError(e.message, tuple(e.absolute_path))
    if "scenario" not in raw:
        raise ConfigError("'scenario' is a required property", ("scenario",))
    name = raw["scenario"]
    for path in _REQUIRED[name]:
        if _get(raw, path) is None:
            raise ConfigError(f"required for scenario {name!r}", path)

    model = None
    if "model" in raw:
        m = raw["model"]
        if "couplings" not in m:
            needed = ("Gamma",) if name == "sweep_eta" else ("eta", "Gamma")
            for key in needed:
                if key not in m:
                    raise ConfigError("required unless 'couplings' is given", ("model", key))
        model = ModelConfig(**m)
    time = None
    if "time" in raw:
        time = _grid(raw["time"], ("time",))
        t = time.array()
        if len(t) < 2 or np.any(np.diff(t) <= 0) or t[0] < 0:
            raise ConfigError("time grid must be non-negative, strictly increasing, with >= 2 points", ("time",))
    sweep = {k: _grid(v, ("sweep", k)) for k, v in raw.get("sweep", {}).items()}
    for k, g in sweep.items():
        if len(g.array()) == 0:
            raise ConfigError("empty sweep", ("sweep", k))
    nv = None
    if "nv" in raw:
        try:
            nv = NvConfig(**raw["nv"])
        except SqueezeError as exc:
            raise ConfigError(str(exc), ("nv",)) from exc
    return ScenarioConfig(
        scenario=name,
        seed=raw.get("seed", 0),
        model=model,
        time=time,
        steady_time=raw.get("steady_time"),
        weights=raw.get("weights", True),
        sweep=sweep,
        nv=nv,
        contour=raw.get("contour"),
        iss_tol_dB=raw.get("tolerances", {}).get("iss_tol_dB", 0.1),
        units=raw.get("units"),
        raw=raw,
    )


def _grid(d: dict, path: tuple) -> GridSpec:
    g = GridSpec(d["kind"], d.get("start"), d.get("stop"), d.get("num"), tuple(d["values"]) if "values" in d else None)
    if g.kind == "log" and not (g.start > 0 and g.stop > 0):
        raise ConfigError("log grid bounds must be positive", path)
    return g


def load_config(path: str | os.PathLike, scenario: str | None = None) -> ScenarioConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("top level must be an object")
    return validate_config(raw, scenario)


# -- formatting -------------------------------------------------------------


def fmt(x) -> str:
    """Shortest round-trip text; ``None`` and non-finite values become empty fields."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    return repr(x) if math.isfinite(x) else ""


def csv_text(header: str, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header.split(","))
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


class Diagnostics:
    """Worst-case residuals accumulated over every model built in a run."""

    MAX_KEYS = ("biorthonormality", "reconstruction", "intertwining_residual", "metric_self_adjointness", "imag_residue")
    MIN_KEYS = ("metric_min_eigenvalue",)

    def __init__(self):
        self.values: dict[str, float] = {}
        self.constructions: set[str] = set()

    def add(self, d: dict):
        for k in self.MAX_KEYS:
            if d.get(k) is not None:
                self.values[k] = max(self.values.get(k, -math.inf), float(d[k]))
        for k in self.MIN_KEYS:
            if d.get(k) is not None:
                self.values[k] = min(self.values.get(k, math.inf), float(d[k]))
        if "metric_construction" in d:
            self.constructions.add(d["metric_construction"])

    def as_dict(self) -> dict:
        out = {k: self.values[k] for k in sorted(self.values)}
        out["metric_constructions"] = sorted(self.constructions)
        return out


# -- sweep harness ----------------------------------------------------------


@dataclass
class PointResult:
    key: tuple
    rows: list
    diagnostics: dict
    error: str | None = None


def _run_point(task):
    func, key, payload = task
    with threadpool_limits(limits=1):
        try:
            rows, diag = func(payload)
            return PointResult(key, rows, diag)
        except SqueezeError as exc:
            return PointResult(key, [], {}, f"{type(exc).__name__}: {exc}")


def sweep(func: Callable, points: list[tuple[tuple, Any]], parallelism: int = 1) -> list[PointResult]:
    """Evaluate ``func(payload)`` for each ``(key, payload)``; results sorted by key.

    Failures are captured per point, so one bad point never aborts the sweep.
    """
    if not points:
        raise ConfigError("sweep has no points")
    if parallelism < 1:
        raise ConfigError("parallelism must be a positive integer")
    tasks = [(func, key, payload) for key, payload in points]
    if parallelism == 1:
        results = [_run_point(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(_run_point, tasks))
    return sorted(results, key=lambda r: r.key)


# -- physics drivers (top level so worker processes can pickle them) ---------


def _steady_exact(args) -> tuple[Any, dict]:
    model_cfg, two_S, eta, t_steady, iss_tol = args
    c = model_cfg.coupling_set(two_S, eta)
    model = build_model(two_S, c)
    psi = coherent_state(model.basis, model_cfg.theta0, model_cfg.phi0)
    (state,) = evolve_many(model.spectrum, psi, [t_steady], rescale=True)
    mom = spin_moments(state, model.metric, model.ops)
    rep = report_from_moments(mom.mean, mom.second, model.basis.S, iss_tol)
    diag = model.diagnostics()
    diag["imag_residue"] = mom.imag_residue
    return rep, diag


def _point_sweep_eta(args):
    model_cfg, eta, t_steady, iss_tol = args
    rep, diag = _steady_exact((model_cfg, model_cfg.two_S, eta, t_steady, iss_tol))
    c = model_cfg.coupling_set(model_cfg.two_S, eta)
    _, _, qx, qp = quadrature_variances(boson_params(c, model_cfg.two_S / 2, t_steady))
    return [[eta, rep.zeta2_x_dB, rep.zeta2_y_dB, rep.product_dB, to_dB(qx), to_dB(qp), to_dB(qx * qp)]], diag


def _point_sweep_N(args):
    model_cfg, two_S, t_steady, iss_tol = args
    rep, diag = _steady_exact((model_cfg, two_S, None, t_steady, iss_tol))
    return [[two_S, rep.zeta2_x_dB, rep.zeta2_y_dB, rep.product_dB]], diag


def _point_asymptotic(args):
    eta, Gamma = args
    rel = relative_couplings(couplings_from_relative(2, eta, Gamma), 1.0)
    a = asymptotic_state(rel)
    return [[eta, Gamma, a.region, a.rho_L, a.phi, a.Qx, a.Qp]], {}


def _point_nv(args):
    nv_cfg, t, iss_tol = args
    m = nv_moments(nv_cfg, [t])
    rep = report_from_moments(m.mean[0], m.second[0], nv_cfg.S, iss_tol)
    return [[nv_cfg.ratio, nv_cfg.n_ph, rep.zeta2_x_dB, rep.zeta2_y_dB, rep.product_dB]], m.diagnostics


# -- scenarios --------------------------------------------------------------


@dataclass
class ScenarioOutput:
    tables: dict[str, tuple[str, list]]
    diagnostics: dict
    failures: list[dict]
    extra: dict = field(default_factory=dict)


def _collect(results: list[PointResult], key_names: list[str], width: int, diag: Diagnostics):
    rows, failures = [], []
    for r in results:
        if r.error is None:
            rows.extend(r.rows)
            diag.add(r.diagnostics)
        else:
            failures.append({**dict(zip(key_names, r.key)), "error": r.error})
            rows.append(list(r.key) + [None] * (width - len(r.key)))
    return rows, failures


def run_evolve(cfg: ScenarioConfig, parallelism: int = 1) -> ScenarioOutput:
    mc = cfg.model
    model = build_model(mc.two_S, mc.coupling_set())
    diag = Diagnostics()
    diag.add(model.diagnostics())
    psi = coherent_state(model.basis, mc.theta0, mc.phi0)
    times = cfg.time.array()
    rows, wrows, failures = [], [], []
    with threadpool_limits(limits=1):
        states = evolve_many(model.spectrum, psi, times, rescale=True)
    for t, st in zip(times, states):
        mom = spin_moments(st, model.metric, model.ops)
        diag.add({"imag_residue": mom.imag_residue})
        try:
            rep = report_from_moments(mom.mean, mom.second, model.basis.S, cfg.iss_tol_dB)
            vals = [rep.zeta2_x, rep.zeta2_y, rep.zeta2_x_dB, rep.zeta2_y_dB, rep.product_dB, rep.theta_mean]
        except SqueezeError as exc:
            failures.append({"t": float(t), "error": f"{type(exc).__name__}: {exc}"})
            vals = [None] * 6
        rows.append([t, *vals, mom.mean[2], metric_norm(model.metric, st)])
        if cfg.weights:
            wrows.extend([t, int(k), w] for k, w in enumerate(basis_weights(st)))
    tables = {"evolve": (HEADERS["evolve"], rows)}
    if cfg.weights:
        tables["evolve_weights"] = (HEADERS["evolve_weights"], wrows)
    return ScenarioOutput(tables, diag.as_dict(), failures)


def run_boson_compare(cfg: ScenarioConfig, parallelism: int = 1) -> ScenarioOutput:
    out = run_evolve(replace(cfg, weights=False))
    mc = cfg.model
    c = mc.coupling_set()
    rows = []
    for erow in out.tables["evolve"][1]:
        t = erow[0]
        try:
            _, _, qx, qp = quadrature_variances(boson_params(c, mc.two_S / 2, float(t)))
            q = [to_dB(qx), to_dB(qp), to_dB(qx * qp)]
        except SqueezeError as exc:
            out.failures.append({"t": float(t), "error": f"boson: {type(exc).__name__}: {exc}"})
            q = [None] * 3
        rows.append([t, erow[3], erow[4], erow[5], *q])
    return ScenarioOutput({"boson_compare": (HEADERS["boson_compare"], rows)}, out.diagnostics, out.failures)


def run_sweep_eta(cfg: ScenarioConfig, parallelism: int = 1) -> ScenarioOutput:
    t_steady = cfg.steady()
    points = [((float(e),), (cfg.model, float(e), t_steady, cfg.iss_tol_dB)) for e in cfg.sweep["eta"].array()]
    diag = Diagnostics()
    rows, failures = _collect(sweep(_point_sweep_eta, points, parallelism), ["eta"], 7, diag)
    return ScenarioOutput({"sweep_eta": (HEADERS["sweep_eta"], rows)}, diag.as_dict(), failures, {"steady_time": t_steady})


def run_sweep_N(cfg: ScenarioConfig, parallelism: int = 1) -> ScenarioOutput:
    t_steady = cfg.steady()
    Ns = cfg.sweep["two_S"].array()
    if np.any(Ns != np.round(Ns)) or np.any(Ns < 1):
        raise ConfigError("two_S sweep values must be positive integers", ("sweep", "two_S"))
    points = [((int(n),), (cfg.model, int(n), t_steady, cfg.iss_tol_dB)) for n in Ns]
    diag = Diagnostics()
    rows, failures = _collect(sweep(_point_sweep_N, points, parallelism), ["N"], 4, diag)
    return ScenarioOutput({"sweep_N": (HEADERS["sweep_N"], rows)}, diag.as_dict(), failures, {"steady_time": t_steady})


def run_asymptotic_map(cfg: ScenarioConfig, parallelism: int = 1) -> ScenarioOutput:
    points = [
        ((float(e), float(g)), (float(e), float(g)))
        for e in cfg.sweep["eta"].array()
        for g in cfg.sweep["Gamma"].array()
    ]
    diag = Diagnostics()
    rows, failures = _collect(sweep(_point_asymptotic, points, parallelism), ["eta", "Gamma"], 7, diag)
    return ScenarioOutput({"asymptotic_map": (HEADERS["asymptotic_map"], rows)}, {}, failures)


def run_nv_contour(cfg: ScenarioConfig, parallelism: int = 1) -> ScenarioOutput:
    c = cfg.contour
    pts = contour_grid(cfg.nv, c["r_range"], c["m_range"], c["resolution"])
    rows = [[p.ratio, p.fraction, p.xi2, p.xi2_linear] for p in pts]
    missing = [{"g1_over_g2": p.ratio, "phonon_fraction": p.fraction} for p in pts if p.xi2 is None]
    return ScenarioOutput({"nv_contour": (HEADERS["nv_contour"], rows)}, {"missing_points": len(missing)}, missing)


def run_nv_sweep(cfg: ScenarioConfig, parallelism: int = 1) -> ScenarioOutput:
    points = []
    for r in cfg.sweep["ratio"].array():
        for n in cfg.sweep["n_ph"].array():
            nv = replace(cfg.nv, g1=float(r) * cfg.nv.g2, n_ph=float(n))
            points.append(((float(r), float(n)), (nv, cfg.steady_time, cfg.iss_tol_dB)))
    diag = Diagnostics()
    rows, failures = _collect(sweep(_point_nv, points, parallelism), ["g1_over_g2", "n_ph"], 5, diag)
    return ScenarioOutput({"nv_sweep": (HEADERS["nv_sweep"], rows)}, diag.as_dict(), failures)


RUNNERS = {
    "evolve": run_evolve,
    "boson_compare": run_boson_compare,
    "sweep_eta": run_sweep_eta,
    "sweep_N": run_sweep_N,
    "asymptotic_map": run_asymptotic_map,
    "nv_contour": run_nv_contour,
    "nv_sweep": run_nv_sweep,
}


def package_version() -> str:
    try:
        return importlib_metadata.version("artifact")
    except importlib_metadata.PackageNotFoundError:
        return "unknown"


def config_hash(raw: dict) -> str:
    blob = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def run_scenario(cfg: ScenarioConfig, out_dir: str | os.PathLike = ".", parallelism: int = 1) -> dict[str, Path]:
    """Run one scenario and write its CSV tables plus a ``.meta.json`` sidecar."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    log.info("scenario %s (parallel=%d)", cfg.scenario, parallelism)
    try:
        result = RUNNERS[cfg.scenario](cfg, parallelism)
    except ConfigError:
        raise
    except SqueezeError as exc:
        raise ScenarioError(cfg.scenario, exc) from exc
    written = {}
    for name, (header, rows) in result.tables.items():
        path = out_dir / f"{name}.csv"
        path.write_text(csv_text(header, rows))
        written[name] = path
    meta = {
        "scenario": cfg.scenario,
        "seed": cfg.seed,
        "config": cfg.raw,
        "config_hash": config_hash(cfg.raw),
        "version": package_version(),
        "libraries": {"numpy": np.__version__, "scipy": scipy.__version__},
        "columns": {name: header for name, (header, _) in result.tables.items()},
        "diagnostics": result.diagnostics,
        "failures": result.failures,
        **result.extra,
    }
    if cfg.units is not None:
        meta["units"] = cfg.units
    meta_path = out_dir / f"{cfg.scenario}.meta.json"
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True, default=_json_default) + "\n")
    written["meta"] = meta_path
    for f in result.failures:
        log.warning("failed point: %s", f)
    return written


class ScenarioError(SqueezeError):
    def __init__(self, scenario: str, cause: Exception):
        super().__init__(f"scenario {scenario!r}: {type(cause).__name__}: {cause}")
        self.cause = cause


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _setup_logging():
    level = os.environ.get("SQUEEZE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    p = argparse.ArgumentParser(prog="simulate", description=__doc__.splitlines()[0])
    p.add_argument("scenario", nargs="?", choices=SCENARIOS)
    p.add_argument("--config", help="JSON scenario configuration")
    p.add_argument("--out", default=".", help="output directory (default: .)")
    p.add_argument("--parallel", type=int, default=1, help="worker processes for sweeps")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--print-schema", action="store_true", help="print the config JSON schema and exit")
    args = p.parse_args(argv)
    if args.print_schema:
        print(json.dumps(SCHEMA, indent=2))
        return 0
    if args.scenario is None or args.config is None:
        p.error("a scenario and --config are required")
    try:
        cfg = load_config(args.config, args.scenario)
        if args.seed is not None:
            cfg.raw["seed"] = args.seed
            cfg = validate_config(cfg.raw)
        written = run_scenario(cfg, args.out, args.parallel)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SqueezeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for name, path in written.items():
        print(f"{name}: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
