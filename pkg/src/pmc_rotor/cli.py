"""``pmc-rotor <mode> --config <file> [--out <prefix>] [--tol <float>] [--s-max <float>]``."""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .classify import classify, delaunay_family, periodic_extension, sphere_equator_radius
from .config import MODES, ConfigError, RunConfig, load_config, parse_config, run_trace, with_overrides
from .curvfn import sign_and_zeros
from .geomio import PortraitOptions, portrait_svg, profile_csv, revolve, to_obj
from .integrate import EventKind, OrbitTrace, StepSizeUnderflow
from .oracles import dirichlet_ball_check
from .phase import PhaseContext

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.bool_):
        return bool(v)
    raise TypeError(f"not serializable: {type(v).__name__}")


def _write(path: Path, data: str | bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode()
    path.write_bytes(data)


def _trace_summary(tr: OrbitTrace) -> dict:
    def ev(e):
        if e is None:
            return None
        st = e.state_at
        return {"kind": e.kind.value, "s": e.s_at, "x": st.x, "z": st.z, "y": math.cos(st.phi),
                "info": {k: v for k, v in e.info.items()}}

    return {
        "n": tr.n,
        "h": tr.h.to_json(),
        "samples": len(tr.s),
        "termination": ev(tr.termination),
        "origin": ev(tr.origin),
        "events": [ev(e) for e in tr.events],
    }


def _path(prefix: Path, suffix: str) -> Path:
    return prefix.parent / (prefix.name + suffix)


def _prefix(cfg: RunConfig, out: str | None, config_path: str | None) -> Path:
    if out:
        return Path(out)
    if cfg.output:
        return Path(cfg.output)
    if config_path:
        return Path(Path(config_path).stem)
    return Path("pmc_rotor_out")


def _run_orbit(cfg, prefix, with_verdict_only: bool):
    tr = run_trace(cfg)
    verdict = classify(tr).to_json()
    _write(_path(prefix, ".csv"), profile_csv(tr))
    doc = verdict if with_verdict_only else {"trace": _trace_summary(tr), **verdict}
    _write(_path(prefix, ".json"), _dump(doc))
    print(verdict["verdict"])


def _run_portrait(cfg, prefix):
    eps = cfg.portrait.get("eps", 1)
    ctx = PhaseContext(cfg.n, cfg.h, eps)
    traces = [run_trace(cfg)] if cfg.init is not None else []
    opts = PortraitOptions(x_view=cfg.portrait.get("x_view"))
    _write(_path(prefix, ".svg"), portrait_svg(ctx, traces, opts))


def _run_mesh(cfg, prefix):
    tr = run_trace(cfg)
    periods = int(cfg.mesh.get("periods", 1))
    if periods > 1 and tr.termination.kind == EventKind.CLOSURE:
        x, z = periodic_extension(tr, periods)
    else:
        x, z = tr.x, tr.z
    mesh = revolve(x, z, int(cfg.mesh.get("m", 64)), cfg.options.axis_tol)
    _write(_path(prefix, ".obj"), to_obj(mesh))


def _run_family(cfg, prefix):
    members = delaunay_family(cfg.n, cfg.h, cfg.family["x_start"], cfg.family.get("count", 1), cfg.options)
    doc = {
        "n": cfg.n,
        "h": cfg.h.to_json(),
        "sphere_equator_radius": sphere_equator_radius(cfg.n, cfg.h, cfg.options),
        "members": [{"x_start": x, **c.to_json()} for x, c in members],
    }
    _write(_path(prefix, "_family.json"), _dump(doc))
    for x, c in members:
        print(f"{x:.6f} {c.verdict.value}")


def _run_dirichlet(cfg):
    H_max = cfg.dirichlet.get("H_max")
    if H_max is None:
        info = sign_and_zeros(cfg.h)
        H_max = max(abs(info.min_value), abs(info.max_value))
    rec = dirichlet_ball_check(cfg.n, float(H_max), float(cfg.dirichlet["rho"]))
    print(_dump({"n": cfg.n, "H_max": H_max, "rho": cfg.dirichlet["rho"], **rec._asdict()}), end="")
    return rec


def _run_verify() -> int:
    from .verify import run_all

    results = run_all(echo=print)
    bad = [r for r in results if not r.ok]
    print(f"{len(results) - len(bad)}/{len(results)} criteria passed")
    return EXIT_OK if not bad else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pmc-rotor",
                                description="Rotational hypersurfaces of prescribed mean curvature.")
    p.add_argument("mode", choices=MODES)
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--out", help="output path prefix")
    p.add_argument("--tol", type=float, help="override tol_abs and tol_rel")
    p.add_argument("--s-max", type=float, dest="s_max", help="override the arclength budget")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            cfg = load_config(args.config, mode=args.mode)
        elif args.mode == "verify":
            cfg = parse_config('{"mode": "verify"}', "<default>")
        else:
            raise ConfigError("--config is required for this mode", 1, "<command line>")
        for flag, v in (("--tol", args.tol), ("--s-max", args.s_max)):
            if v is not None and not (v > 0 and math.isfinite(v)):
                raise ConfigError(f"{flag} must be a positive number", 1, "<command line>")
        cfg = with_overrides(cfg, args.tol, args.s_max)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    prefix = _prefix(cfg, args.out, args.config)
    try:
        mode = args.mode
        if mode == "verify":
            return _run_verify()
        if mode in ("orbit", "classify"):
            _run_orbit(cfg, prefix, with_verdict_only=(mode == "classify"))
        elif mode == "portrait":
            _run_portrait(cfg, prefix)
        elif mode == "mesh":
            _run_mesh(cfg, prefix)
        elif mode == "family":
            _run_family(cfg, prefix)
        elif mode == "check-dirichlet":
            _run_dirichlet(cfg)
    except StepSizeUnderflow as exc:
        st = exc.state
        print(f"error: {exc}", file=sys.stderr)
        print(f"last good state: s={st.s!r} x={st.x!r} z={st.z!r} phi={st.phi!r}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # precondition failures (e.g. a family for a non-even h)
        print(f"error: {cfg.source}:1: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
