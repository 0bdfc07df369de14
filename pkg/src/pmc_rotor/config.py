"""JSON run configurations and the bundled figure corpus."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Any

from .curvfn import CurvatureProfile, from_json
from .integrate import (
    IntegrationOptions,
    OrbitTrace,
    integrate_both,
    integrate_orbit,
    start_at_axis,
    start_at_point,
)

__all__ = ["MODES", "ConfigError", "InitSpec", "RunConfig", "parse_config", "load_config",
           "load_corpus", "run_trace"]

MODES = ("portrait", "orbit", "classify", "family", "mesh", "check-dirichlet", "verify")
_TOP_KEYS = {"n", "h", "mode", "init", "options", "output", "family", "portrait", "mesh",
             "dirichlet", "description", "expect"}
_OPTION_FIELDS = {f.name: f.type for f in fields(IntegrationOptions)}


class ConfigError(ValueError):
    def __init__(self, msg: str, line: int = 1, source: str = "<config>"):
        super().__init__(f"{source}:{line}: {msg}")
        self.msg, self.line, self.source = msg, line, source


@dataclass(frozen=True)
class InitSpec:
    kind: str  # "axis" or "point"
    delta: int = 1
    x: float = 1.0
    phi: float = math.pi / 2
    z: float = 0.0
    two_sided: bool = False


@dataclass
class RunConfig:
    n: int = 2
    h: CurvatureProfile | None = None
    mode: str | None = None
    init: InitSpec | None = None
    options: IntegrationOptions = field(default_factory=IntegrationOptions)
    output: str | None = None
    family: dict[str, Any] = field(default_factory=dict)
    portrait: dict[str, Any] = field(default_factory=dict)
    mesh: dict[str, Any] = field(default_factory=dict)
    dirichlet: dict[str, Any] = field(default_factory=dict)
    description: str = ""
    expect: dict[str, Any] = field(default_factory=dict)
    source: str = "<config>"


class _Locator:
    """Maps a key path to the first matching line of the raw JSON text."""

    def __init__(self, text: str, source: str):
        self.text, self.source = text, source

    def line(self, *path: str) -> int:
        pos = 0
        for key in path:
            idx = self.text.find(f'"{key}"', pos)
            if idx >= 0:
                pos = idx
        return self.text.count("\n", 0, pos) + 1

    def error(self, msg: str, *path: str) -> ConfigError:
        return ConfigError(msg, self.line(*path), self.source)


def _number(loc: _Locator, v, *path, positive=False, nonneg=False) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise loc.error(f"{'.'.join(path)} must be a finite number", *path)
    if positive and not v > 0:
        raise loc.error(f"{'.'.join(path)} must be positive", *path)
    if nonneg and v < 0:
        raise loc.error(f"{'.'.join(path)} must be non-negative", *path)
    return float(v)


def _integer(loc: _Locator, v, *path, minimum=None) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise loc.error(f"{'.'.join(path)} must be an integer", *path)
    if minimum is not None and v < minimum:
        raise loc.error(f"{'.'.join(path)} must be >= {minimum}", *path)
    return v


def _section(loc, raw, key) -> dict:
    v = raw.get(key, {})
    if not isinstance(v, dict):
        raise loc.error(f"{key} must be an object", key)
    return v


def _allowed(loc, obj, allowed, *path):
    for k in obj:
        if k not in allowed:
            raise loc.error(f"unknown key {k!r} in {'.'.join(path) or 'config'}", *path, k)


def parse_config(text: str, source: str = "<config>", mode: str | None = None) -> RunConfig:
    """Validate a JSON config; raises :class:`ConfigError` with a line number."""
    loc = _Locator(text, source)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", exc.lineno, source) from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object", 1, source)
    _allowed(loc, raw, _TOP_KEYS)

    cfg = RunConfig(source=source)
    if "mode" in raw:
        if raw["mode"] not in MODES:
            raise loc.error(f"unknown mode {raw['mode']!r}", "mode")
        cfg.mode = raw["mode"]
    mode = mode or cfg.mode
    if mode is None:
        raise ConfigError("no mode given", 1, source)
    cfg.mode = mode
    if "description" in raw:
        cfg.description = str(raw["description"])
    if "expect" in raw:
        cfg.expect = _section(loc, raw, "expect")
    if "output" in raw:
        if not isinstance(raw["output"], str) or not raw["output"]:
            raise loc.error("output must be a non-empty string", "output")
        cfg.output = raw["output"]

    if "n" in raw:
        cfg.n = _integer(loc, raw["n"], "n", minimum=2)
    elif mode not in ("verify",):
        raise ConfigError("missing required key 'n'", 1, source)

    if "h" in raw:
        if not isinstance(raw["h"], dict):
            raise loc.error("h must be an object", "h")
        try:
            cfg.h = from_json(raw["h"])
        except (KeyError, TypeError, ValueError) as exc:
            raise loc.error(f"bad curvature function: {exc}", "h") from None
    elif mode not in ("verify", "check-dirichlet"):
        raise ConfigError("missing required key 'h'", 1, source)

    opts = _section(loc, raw, "options")
    _allowed(loc, opts, _OPTION_FIELDS, "options")
    kw = {}
    for k, v in opts.items():
        if k == "stop_at_equilibrium":
            if not isinstance(v, bool):
                raise loc.error("options.stop_at_equilibrium must be true or false", "options", k)
            kw[k] = v
        elif k in ("max_pole_crossings", "max_samples"):
            kw[k] = _integer(loc, v, "options", k, minimum=1)
        else:
            kw[k] = _number(loc, v, "options", k, positive=True)
    cfg.options = IntegrationOptions(**kw)

    if "init" in raw:
        cfg.init = _parse_init(loc, raw["init"])
    elif mode in ("orbit", "classify", "mesh"):
        raise ConfigError(f"mode {mode!r} needs an 'init' entry", 1, source)

    fam = _section(loc, raw, "family")
    _allowed(loc, fam, {"x_start", "count"}, "family")
    if mode == "family":
        if "x_start" not in fam:
            raise loc.error("family.x_start is required", "family")
        xs = fam["x_start"]
        if isinstance(xs, list):
            if len(xs) != 2:
                raise loc.error("family.x_start range must have two entries", "family", "x_start")
            xs = [_number(loc, v, "family", "x_start", positive=True) for v in xs]
        else:
            xs = _number(loc, xs, "family", "x_start", positive=True)
        fam = {"x_start": xs, "count": _integer(loc, fam.get("count", 1), "family", "count", minimum=1)}
    cfg.family = fam

    por = _section(loc, raw, "portrait")
    _allowed(loc, por, {"eps", "x_view"}, "portrait")
    if "eps" in por and por["eps"] not in (-1, 1):
        raise loc.error("portrait.eps must be +1 or -1", "portrait", "eps")
    if "x_view" in por:
        _number(loc, por["x_view"], "portrait", "x_view", nonneg=True)
    cfg.portrait = por

    mesh = _section(loc, raw, "mesh")
    _allowed(loc, mesh, {"m", "periods"}, "mesh")
    if "m" in mesh:
        _integer(loc, mesh["m"], "mesh", "m", minimum=3)
    if "periods" in mesh:
        _integer(loc, mesh["periods"], "mesh", "periods", minimum=1)
    if mode == "mesh" and cfg.n != 2:
        raise loc.error("mesh mode renders surfaces in R^3 only (n = 2)", "n")
    cfg.mesh = mesh

    dch = _section(loc, raw, "dirichlet")
    _allowed(loc, dch, {"H_max", "rho"}, "dirichlet")
    if mode == "check-dirichlet":
        if "rho" not in dch:
            raise loc.error("dirichlet.rho is required", "dirichlet")
        _number(loc, dch["rho"], "dirichlet", "rho", positive=True)
        if "H_max" in dch:
            _number(loc, dch["H_max"], "dirichlet", "H_max", nonneg=True)
        elif cfg.h is None:
            raise loc.error("dirichlet.H_max or h is required", "dirichlet")
    cfg.dirichlet = dch
    return cfg


def _parse_init(loc: _Locator, v) -> InitSpec:
    if not isinstance(v, dict) or len(v) != 1:
        raise loc.error("init must be {\"axis\": {...}} or {\"point\": {...}}", "init")
    (kind, body), = v.items()
    if not isinstance(body, dict):
        raise loc.error(f"init.{kind} must be an object", "init", kind)
    if kind == "axis":
        _allowed(loc, body, {"delta"}, "init", "axis")
        delta = body.get("delta", 1)
        if delta not in (-1, 1) or isinstance(delta, bool):
            raise loc.error("init.axis.delta must be +1 or -1", "init", "delta")
        return InitSpec("axis", delta=int(delta))
    if kind == "point":
        _allowed(loc, body, {"x", "phi", "z", "two_sided"}, "init", "point")
        if "x" not in body or "phi" not in body:
            raise loc.error("init.point needs x and phi", "init", "point")
        two = body.get("two_sided", False)
        if not isinstance(two, bool):
            raise loc.error("init.point.two_sided must be true or false", "init", "two_sided")
        return InitSpec("point",
                        x=_number(loc, body["x"], "init", "x", positive=True),
                        phi=_number(loc, body["phi"], "init", "phi"),
                        z=_number(loc, body.get("z", 0.0), "init", "z"),
                        two_sided=two)
    raise loc.error(f"unknown init kind {kind!r}", "init", kind)


def load_config(path: str | Path, mode: str | None = None) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", 1, str(p)) from None
    return parse_config(text, str(p), mode)


def load_corpus() -> dict[str, RunConfig]:
    """Bundled configs reproducing the reference figures, keyed by name."""
    out = {}
    root = resources.files("pmc_rotor") / "corpus"
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            name = entry.name[:-5]
            out[name] = parse_config(entry.read_text(), f"corpus/{entry.name}")
    return out


def run_trace(cfg: RunConfig, options: IntegrationOptions | None = None) -> OrbitTrace:
    """Integrate the orbit described by ``cfg.init``."""
    if cfg.init is None or cfg.h is None:
        raise ValueError("config has no orbit to integrate")
    opts = options or cfg.options
    init = cfg.init
    if init.kind == "axis":
        return integrate_orbit(cfg.n, cfg.h, start_at_axis(cfg.n, cfg.h, init.delta), opts)
    state = start_at_point(init.x, init.phi, init.z)
    if init.two_sided:
        return integrate_both(cfg.n, cfg.h, state, opts)
    return integrate_orbit(cfg.n, cfg.h, state, opts)


def with_overrides(cfg: RunConfig, tol: float | None = None, s_max: float | None = None) -> RunConfig:
    """Copy of ``cfg`` with command-line tolerance overrides applied."""
    kw = {}
    if tol is not None:
        kw.update(tol_abs=tol, tol_rel=tol)
    if s_max is not None:
        kw["s_max"] = s_max
    return replace(cfg, options=replace(cfg.options, **kw)) if kw else cfg
