"""Experiment configuration: YAML documents checked against a JSON schema.

Every problem a document can describe is caught before any computation
starts, and the error carries the YAML line of the offending node.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field, replace
from pathlib import Path

import jsonschema
import numpy as np
import yaml

from . import presets
from .data import DEFAULT_S, FINAL_TIME, KINDS, TIME_TRACE
from .errors import ConfigError
from .expr import ExprError, parse
from .model import (BC, PRODUCT, U2V, Coupling, Dirichlet, Grid, Neumann, Robin, Source,
                    SystemSpec, Univariate)

_EXPR = {"type": ["string", "number"]}
_NUM = {"type": "number"}
_BC_END = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["dirichlet", "neumann", "robin"]},
        "value": _EXPR,
        "gamma": {"type": "number", "minimum": 0},
    },
}
_BC_SPECIES = {
    "type": "object", "additionalProperties": False, "required": ["left", "right"],
    "properties": {"left": _BC_END, "right": _BC_END},
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["system"],
    "properties": {
        "system": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "preset": {"enum": sorted(presets.PRESETS)},
                "name": {"type": "string"},
                "unknown": {"enum": ["f", "phi"]},
                "beta": _NUM, "beta_u": _NUM, "beta_v": _NUM,
                "c": _NUM,
                "coupling": {"type": "string"},
                "f1": _EXPR, "f2": _EXPR, "phi1": _EXPR, "phi2": _EXPR,
                "r_u": _EXPR, "r_v": _EXPR, "u0": _EXPR, "v0": _EXPR,
                "a": {"type": "number", "exclusiveMinimum": 0},
                "q": _NUM,
                "bc": {"type": "object", "additionalProperties": False, "required": ["u", "v"],
                       "properties": {"u": _BC_SPECIES, "v": _BC_SPECIES}},
                "blowup_cap": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "grid": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "nx": {"type": "integer", "minimum": 9},
                "nt": {"type": "integer", "minimum": 5},
                "length": {"type": "number", "exclusiveMinimum": 0},
                "T": {"type": "number", "exclusiveMinimum": 0},
                "extrapolate": {"type": "boolean"},
            },
        },
        "data": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "mode": {"enum": list(KINDS)},
                "samples": {"type": "integer", "minimum": 4},
                "noise": {"type": "number", "minimum": 0},
                "seed": {"type": "integer", "minimum": 0},
                "endpoint": {"enum": ["left", "right"]},
                "smoothing": {"type": "boolean"},
                "mu": {"type": ["number", "null"], "minimum": 0},
                "ncoef": {"type": "integer", "minimum": 1},
                "measurement": {"type": "string"},
            },
        },
        "inversion": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "max_iters": {"type": "integer", "minimum": 1},
                "tol": {"type": "number", "minimum": 0},
                "ncenters": {"type": "integer", "minimum": 2},
                "ridge": {"type": ["number", "null"], "minimum": 0},
            },
        },
        "sweep": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "betas": {"type": "array", "items": _NUM},
                "workers": {"type": "integer", "minimum": 1},
            },
        },
        "diagnose": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "c_Q": _NUM,
                "nsamples": {"type": "integer", "minimum": 2},
            },
        },
        "output": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "svg": {"type": "boolean"},
                "snapshots": {"type": "array", "items": {"type": "number", "minimum": 0}},
            },
        },
    },
}


# ----------------------------------------------------------------- loading

def _line_of(node, path):
    """1-based line of the YAML node at ``path`` (deepest existing prefix)."""
    for key in path:
        if isinstance(node, yaml.MappingNode):
            nxt = next((v for k, v in node.value if k.value == key), None)
            if nxt is None:
                # unknown key: point at the key itself when present
                break
            node = nxt
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            break
    return node.start_mark.line + 1


def _key_line(node, path, key):
    target = node
    for k in path:
        if isinstance(target, yaml.MappingNode):
            target = next((v for kk, v in target.value if kk.value == k), target)
    if isinstance(target, yaml.MappingNode):
        for k, _ in target.value:
            if k.value == key:
                return k.start_mark.line + 1
    return target.start_mark.line + 1


def parse_config_text(text: str):
    """Return (document, node tree); raises ConfigError on any problem."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        doc = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else None
        raise ConfigError(f"YAML syntax: {exc.problem}", line) from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping at top level", 1)
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        path = list(err.absolute_path)
        if err.validator == "additionalProperties":
            extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
            line = _key_line(node, path, extra[0]) if extra else _line_of(node, path)
            where = ".".join(map(str, path)) or "top level"
            raise ConfigError(f"unknown key {extra[0]!r} in {where}", line)
        where = ".".join(map(str, path)) or "top level"
        raise ConfigError(f"{where}: {err.message}", _line_of(node, path))
    return doc, node


def load_config(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config_text(text)


# ---------------------------------------------------------------- building

def _expr(value, allowed, where, node):
    try:
        e = parse(value)
    except ExprError as exc:
        raise ConfigError(f"{where}: {exc}", _line_of(node, where.split("."))) from None
    extra = e.variables - set(allowed)
    if extra:
        raise ConfigError(f"{where}: variable(s) {sorted(extra)} not allowed; use {list(allowed)}",
                          _line_of(node, where.split(".")))
    return e


def _univariate(value, var, where, node) -> Univariate:
    e = _expr(value, (var,), where, node)
    d = e.derivative(var)
    return Univariate(lambda s: np.asarray(e(**{var: s})) * np.ones_like(s),
                      lambda s: np.asarray(d(**{var: s})) * np.ones_like(s), name=str(value))


def _coupling(value, where, node) -> Coupling:
    if value in ("u*v", "uv"):
        return PRODUCT
    if value in ("u^2*v", "u2v"):
        return U2V
    e = _expr(value, ("u", "v"), where, node)
    du, dv = e.derivative("u"), e.derivative("v")
    ones = lambda u, v: np.ones_like(np.asarray(u, dtype=float) + np.asarray(v, dtype=float))
    return Coupling(lambda u, v: e(u=u, v=v) * ones(u, v), lambda u, v: du(u=u, v=v) * ones(u, v),
                    lambda u, v: dv(u=u, v=v) * ones(u, v), name=str(value))


def _source(value, where, node) -> Source:
    e = _expr(value, ("x", "t", "u", "v"), where, node)
    partial = {}
    for var in ("u", "v"):
        if var in e.variables:
            d = e.derivative(var)
            partial[var] = lambda x, t, u, v, d=d: d(x=x, t=t, u=u, v=v)
    return Source(lambda x, t, u, v: e(x=x, t=t, u=u, v=v), partial.get("u"), partial.get("v"),
                  name=str(value))


def _initial(value, where, node):
    e = _expr(value, ("x",), where, node)
    return lambda x: np.asarray(e(x=x)) * np.ones_like(x)


def _bc(entry, where, node) -> BC:
    kind = entry["kind"]
    value = entry.get("value", 0.0)
    e = _expr(value, ("t",), f"{where}.value" if "value" in entry else where, node)
    fn = (lambda t, c=float(e()): c) if not e.variables else (lambda t: float(e(t=t)))
    if kind == "dirichlet":
        return Dirichlet(fn)
    if kind == "neumann":
        return Neumann(fn)
    if "gamma" not in entry:
        raise ConfigError(f"{where}: robin condition needs gamma", _line_of(node, where.split(".")))
    return Robin(float(entry["gamma"]), fn)


def build_spec(system: dict, node, beta_override=None) -> SystemSpec:
    """SystemSpec from the ``system`` section; ``beta_override`` sets all multipliers."""
    sysd = dict(system)
    if beta_override is not None:
        sysd["beta"] = beta_override
        sysd.pop("beta_u", None)
        sysd.pop("beta_v", None)
    preset = sysd.get("preset")
    if preset is None:
        spec = SystemSpec(unknown=sysd.get("unknown", "f"), bc=(presets.DIR_NEU, presets.DIR_NEU))
    elif preset == "competing-species":
        spec = presets.competing_species(sysd.get("beta", -1.0))
    elif preset == "interaction":
        bu = sysd.get("beta_u", sysd.get("beta", 1.0))
        bv = sysd.get("beta_v", sysd.get("beta", bu))
        cp = _coupling(sysd.get("coupling", "u*v"), "system.coupling", node)
        spec = presets.interaction(bu, bv, cp)
    elif preset == "brusselator":
        spec = presets.brusselator()
    else:
        spec = presets.eigen_mode(sysd.get("c", 0.5))
    changes = {}
    if preset != "interaction":
        if "beta" in sysd:
            changes["beta_u"] = changes["beta_v"] = float(sysd["beta"])
        for key in ("beta_u", "beta_v"):
            if key in sysd:
                changes[key] = float(sysd[key])
        if "coupling" in sysd:
            changes["w"] = _coupling(sysd["coupling"], "system.coupling", node)
    for key, var in (("f1", "u"), ("f2", "v"), ("phi1", "w"), ("phi2", "w")):
        if key in sysd:
            changes[key] = _univariate(sysd[key], var, f"system.{key}", node)
    for key in ("r_u", "r_v"):
        if key in sysd:
            changes[key] = _source(sysd[key], f"system.{key}", node)
    for key in ("u0", "v0"):
        if key in sysd:
            changes[key] = _initial(sysd[key], f"system.{key}", node)
    if "bc" in sysd:
        changes["bc"] = tuple(
            (_bc(sysd["bc"][s]["left"], f"system.bc.{s}.left", node),
             _bc(sysd["bc"][s]["right"], f"system.bc.{s}.right", node)) for s in ("u", "v"))
    for key in ("a", "q", "blowup_cap", "unknown", "name"):
        if key in sysd:
            changes[key] = sysd[key]
    try:
        return replace(spec, **changes)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"system: {exc}", _line_of(node, ["system"])) from None


@dataclass
class Experiment:
    """Everything a subcommand needs, resolved from one config document."""

    doc: dict
    node: object
    spec: SystemSpec
    grid: Grid
    extrapolate: bool = True
    mode: str = TIME_TRACE
    samples: int = 25
    noise: float = 0.0
    seed: int = 0
    endpoint: str = "right"
    smoothing: bool = True
    mu: float | None = None
    ncoef: int | None = None
    measurement: str | None = None
    max_iters: int = 12
    tol: float = 1e-4
    ncenters: int = 40
    ridge: float | None = None
    betas: list = field(default_factory=list)
    workers: int = 1
    c_Q: float = 0.0
    nsamples: int = 41
    out_dir: str = "out"
    svg: bool = True
    snapshots: list = field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])

    def with_beta(self, beta) -> "Experiment":
        ex = copy.copy(self)
        ex.spec = build_spec(self.doc["system"], self.node, beta_override=beta)
        return ex


def build_experiment(doc: dict, node, *, seed=None, mode=None, out=None, betas=None) -> Experiment:
    """Resolve a validated document plus command-line overrides."""
    spec = build_spec(doc["system"], node)
    g = doc.get("grid", {})
    grid = Grid(g.get("nx", 200), g.get("nt", 300), g.get("length", 1.0), g.get("T", 1.0))
    if grid.length != spec.length:
        spec = replace(spec, length=grid.length)
    d = doc.get("data", {})
    inv = doc.get("inversion", {})
    sw = doc.get("sweep", {})
    dg = doc.get("diagnose", {})
    o = doc.get("output", {})
    mode = mode or d.get("mode", TIME_TRACE)
    ex = Experiment(
        doc=doc, node=node, spec=spec, grid=grid, extrapolate=g.get("extrapolate", True),
        mode=mode, samples=d.get("samples", DEFAULT_S[mode]), noise=float(d.get("noise", 0.0)),
        seed=d.get("seed", 0) if seed is None else seed, endpoint=d.get("endpoint", "right"),
        smoothing=d.get("smoothing", True), mu=d.get("mu"), ncoef=d.get("ncoef"),
        measurement=d.get("measurement"),
        max_iters=inv.get("max_iters", 12), tol=float(inv.get("tol", 1e-4)),
        ncenters=inv.get("ncenters", 40), ridge=inv.get("ridge"),
        betas=list(sw.get("betas", [])) if betas is None else list(betas), workers=sw.get("workers", 1),
        c_Q=float(dg.get("c_Q", 0.0)), nsamples=dg.get("nsamples", 41),
        out_dir=out or o.get("dir", "out"), svg=o.get("svg", True),
        snapshots=list(o.get("snapshots", [k * grid.T / 4 for k in range(5)])),
    )
    if ex.samples > (grid.nx if mode == FINAL_TIME else grid.nt):
        raise ConfigError(f"data.samples={ex.samples} exceeds the grid resolution",
                          _line_of(node, ["data", "samples"]))
    if spec.unknown == "phi" and 0.0 in spec.betas():
        raise ConfigError("interaction reconstruction needs nonzero beta_u and beta_v",
                          _line_of(node, ["system"]))
    bad = [s for s in ex.snapshots if s > grid.T]
    if bad:
        raise ConfigError(f"output.snapshots: time {bad[0]} exceeds T={grid.T}",
                          _line_of(node, ["output", "snapshots"]))
    return ex
