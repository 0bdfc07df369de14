"""Artifacts: revolved meshes (OBJ), phase portraits (SVG) and profile CSV."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .integrate import OrbitTrace, fd_derivative
from .phase import PhaseContext, equilibrium, gamma, monotonicity

__all__ = [
    "Mesh",
    "revolve",
    "to_obj",
    "PortraitOptions",
    "portrait_svg",
    "CSV_HEADER",
    "profile_csv",
    "parse_profile_csv",
]


# --------------------------------------------------------------------------
# meshes


@dataclass
class Mesh:
    vertices: np.ndarray  # (V, 3)
    triangles: np.ndarray  # (T, 3) zero-based

    def area(self) -> float:
        a, b, c = (self.vertices[self.triangles[:, k]] for k in range(3))
        return float(0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1).sum())


def revolve(x: Sequence[float], z: Sequence[float], m: int = 64,
            axis_tol: float = 1e-8) -> Mesh:
    """Rotate the profile ``(x, z)`` about the z-axis with ``m`` angular samples.

    Vertex ``(i, j)`` is ``(x_i cos t_j, x_i sin t_j, z_i)`` with
    ``t_j = 2 pi j / m``. Samples with ``x <= axis_tol`` become a single pole
    vertex joined to the neighbouring ring by a fan. Faces are wound so that
    their normal is ``d/dt x d/ds``, which points outward when the profile
    turns counterclockwise (e.g. a sphere traced from its south pole).
    """
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if len(x) < 2:
        raise ValueError("need at least 2 profile samples")
    if m < 3:
        raise ValueError("need at least 3 angular samples")
    # drop repeated samples, which would give zero-area quads
    keep = np.ones(len(x), dtype=bool)
    keep[1:] = np.hypot(np.diff(x), np.diff(z)) > 1e-9
    x, z = x[keep], z[keep]
    if len(x) < 2:
        raise ValueError("profile collapses to a point")

    t = 2.0 * np.pi * np.arange(m) / m
    ct, st = np.cos(t), np.sin(t)
    verts: list[np.ndarray] = []
    rings: list[np.ndarray] = []
    count = 0
    for xi, zi in zip(x, z):
        if xi <= axis_tol:
            verts.append(np.array([[0.0, 0.0, zi]]))
            rings.append(np.full(m, count))
            count += 1
        else:
            verts.append(np.column_stack([xi * ct, xi * st, np.full(m, zi)]))
            rings.append(count + np.arange(m))
            count += m
    tris = []
    for r0, r1 in zip(rings[:-1], rings[1:]):
        a, b = r0, np.roll(r0, -1)
        c, d = r1, np.roll(r1, -1)
        pole0, pole1 = r0[0] == r0[-1], r1[0] == r1[-1]
        if pole0 and pole1:
            continue
        if not pole0:
            tris.append(np.column_stack([a, b, c]))
        if not pole1:
            tris.append(np.column_stack([b, d, c]))
    tri = np.concatenate(tris) if tris else np.zeros((0, 3), dtype=int)
    return Mesh(np.concatenate(verts), tri.astype(np.int64))


def to_obj(mesh: Mesh) -> str:
    """Wavefront OBJ text: ``v`` lines then ``f`` lines with 1-based indices."""
    out = io.StringIO()
    for v in mesh.vertices:
        out.write("v %.17g %.17g %.17g\n" % tuple(v))
    for f in mesh.triangles:
        out.write("f %d %d %d\n" % (f[0] + 1, f[1] + 1, f[2] + 1))
    return out.getvalue()


# --------------------------------------------------------------------------
# phase portrait


@dataclass(frozen=True)
class PortraitOptions:
    x_view: float | None = None  # right edge of the plot; automatic if None
    width: int = 800
    height: int = 600
    margin: int = 10
    arrows: tuple[int, int] = (16, 12)
    gamma_samples: int = 401


def _auto_x_view(ctx: PhaseContext, traces) -> float:
    cands = [1.0]
    eq = equilibrium(ctx)
    if eq is not None:
        cands.append(2.0 * eq.point[0])
    for tr in traces:
        if len(tr.x):
            cands.append(float(np.max(tr.x)) * 1.05)
    return max(cands)


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def portrait_svg(ctx: PhaseContext | None, traces: Iterable[OrbitTrace] = (),
                 options: PortraitOptions = PortraitOptions()) -> str:
    """Phase portrait of the strip ``(0, x_view] x [-1, 1]``.

    Draws the nullcline, the rest point, orbit projections ``(x, cos phi)``
    restricted to the branch of ``ctx`` and a grid of monotonicity arrows.
    With no context (or an empty view) only the frame is emitted.
    """
    traces = list(traces)
    W, H, M = options.width, options.height, options.margin
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{W}" height="{H}" viewBox="0 0 {W} {H}">\n')
    lines = [head, f'<rect class="frame" x="{M}" y="{M}" width="{W - 2 * M}" '
                   f'height="{H - 2 * M}" fill="white" stroke="black"/>\n']
    x_view = options.x_view if options.x_view is not None else (
        _auto_x_view(ctx, traces) if ctx is not None else 0.0)
    if ctx is None or not x_view > 0:
        lines.append("</svg>\n")
        return "".join(lines)

    def px(x):
        return M + (W - 2 * M) * x / x_view

    def py(y):
        return M + (H - 2 * M) * (1.0 - y) / 2.0

    lines.append('<defs><marker id="arrow" viewBox="0 0 6 6" refX="5" refY="3" '
                 'markerWidth="5" markerHeight="5" orient="auto">'
                 '<path d="M0,0 L6,3 L0,6 z" fill="gray"/></marker></defs>\n')
    lines.append(f'<line class="axis" x1="{_fmt(px(0))}" y1="{_fmt(py(0))}" '
                 f'x2="{_fmt(px(x_view))}" y2="{_fmt(py(0))}" stroke="black" stroke-width="0.5"/>\n')

    # monotonicity arrows
    nx, ny = options.arrows
    for i in range(nx):
        for j in range(ny):
            x = x_view * (i + 0.5) / nx
            y = -1.0 + 2.0 * (j + 0.5) / ny
            mono = monotonicity(ctx, x, y)
            if mono.dy_dx_sign is None:
                continue
            dx = 1.0 if y > 0 else -1.0
            dy = dx * mono.dy_dx_sign
            L = 0.35 * min((W - 2 * M) / nx, (H - 2 * M) / ny)
            norm = math.hypot(dx, dy)
            x0, y0 = px(x), py(y)
            lines.append(f'<line class="arrow" x1="{_fmt(x0)}" y1="{_fmt(y0)}" '
                         f'x2="{_fmt(x0 + L * dx / norm)}" y2="{_fmt(y0 - L * dy / norm)}" '
                         f'stroke="gray" stroke-width="0.75" marker-end="url(#arrow)"/>\n')

    # nullcline components
    ys = np.linspace(-1.0, 1.0, options.gamma_samples)[1:-1]
    comp: list[str] = []
    comps: list[list[str]] = []
    for y in ys:
        g = gamma(ctx, float(y))
        if g is None or g > x_view:
            if comp:
                comps.append(comp)
                comp = []
            continue
        comp.append(f"{_fmt(px(g))},{_fmt(py(float(y)))}")
    if comp:
        comps.append(comp)
    for c in comps:
        lines.append(f'<polyline class="gamma" points="{" ".join(c)}" fill="none" '
                     f'stroke="blue" stroke-width="1.5"/>\n')

    # orbits, split where they leave this branch
    for k, tr in enumerate(traces):
        on = np.sign(np.sin(tr.phi)) == ctx.eps
        seg: list[str] = []
        for xi, yi, ok in zip(tr.x, np.cos(tr.phi), on):
            if ok and 0 < xi <= x_view:
                seg.append(f"{_fmt(px(xi))},{_fmt(py(yi))}")
            elif seg:
                lines.append(_orbit_line(k, seg))
                seg = []
        if seg:
            lines.append(_orbit_line(k, seg))

    eq = equilibrium(ctx)
    if eq is not None and eq.point[0] <= x_view:
        x0, y0 = eq.point
        lines.append(f'<circle class="equilibrium" data-x="{x0:.17g}" data-y="{y0:.17g}" '
                     f'cx="{_fmt(px(x0))}" cy="{_fmt(py(y0))}" r="4" fill="red"/>\n')
    lines.append("</svg>\n")
    return "".join(lines)


def _orbit_line(k: int, pts: list[str]) -> str:
    return (f'<polyline class="orbit" data-index="{k}" points="{" ".join(pts)}" '
            f'fill="none" stroke="black" stroke-width="1"/>\n')


# --------------------------------------------------------------------------
# CSV


CSV_HEADER = "s,x,z,phi,y,kappa1,kappa2"


def profile_csv(trace: OrbitTrace) -> bytes:
    """Samples as CSV rows followed by ``# event,<kind>,<s>,<x>,<y>`` lines.

    ``kappa1`` is the finite-difference derivative of ``phi``; ``kappa2`` is
    ``sin(phi)/x`` (the value ``h(y)`` on the axis).
    """
    out = io.StringIO(newline="")
    out.write(CSV_HEADER + "\n")
    m = len(trace.s)
    if m:
        y = np.cos(trace.phi)
        try:
            k1 = fd_derivative(trace.s, trace.phi)
        except ValueError:  # repeated arclength values
            k1 = np.full(m, np.nan)
        sn = np.sin(trace.phi)
        k2 = np.array([sn[i] / trace.x[i] if trace.x[i] > 0 else trace.h.value(float(np.clip(y[i], -1, 1)))
                       for i in range(m)])
        for row in zip(trace.s, trace.x, trace.z, trace.phi, y, k1, k2):
            out.write(",".join("%.17g" % v for v in row) + "\n")
    evs = list(trace.events)
    for e in (trace.origin, trace.termination):
        if e is not None and e not in evs:
            evs.append(e)
    evs.sort(key=lambda e: e.s_at)
    for e in evs:
        st = e.state_at
        out.write("# event,%s,%.17g,%.17g,%.17g\n" % (e.kind.value, e.s_at, st.x, math.cos(st.phi)))
    return out.getvalue().encode("ascii")


def parse_profile_csv(data: bytes | str) -> tuple[dict[str, np.ndarray], list[tuple[str, float, float, float]]]:
    """Inverse of :func:`profile_csv`: column arrays and event tuples."""
    text = data.decode("ascii") if isinstance(data, bytes) else data
    lines = text.split("\n")
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("missing or malformed header")
    names = CSV_HEADER.split(",")
    rows, events = [], []
    for ln in lines[1:]:
        if not ln:
            continue
        if ln.startswith("#"):
            tag, kind, s, x, y = ln[1:].strip().split(",")
            if tag != "event":
                raise ValueError(f"unknown comment line {ln!r}")
            events.append((kind, float(s), float(x), float(y)))
            continue
        rows.append([float(v) for v in ln.split(",")])
    arr = np.array(rows, dtype=float).reshape(-1, len(names))
    return {k: arr[:, i].copy() for i, k in enumerate(names)}, events
