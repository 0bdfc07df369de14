"""Surface-type verdicts for integrated profile curves."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .curvfn import CurvatureProfile, SignInfo, parity, sign_and_zeros
from .integrate import (
    EventKind,
    IntegrationOptions,
    OrbitTrace,
    curvatures,
    integrate_orbit,
    join_traces,
    start_at_axis,
    start_at_point,
)
from .phase import PhaseContext, equilibrium

__all__ = [
    "Verdict",
    "Diagnostics",
    "SurfaceClass",
    "HInfo",
    "classify",
    "embedded",
    "gauss_image",
    "periodic_extension",
    "sphere_equator_radius",
    "delaunay_family",
    "bowl_limit",
]

INTERSECT_SLACK = 1e-10
WIGGLE_MIN_GAMMA = 3
BOWL_H_TOL = 1e-6


class Verdict(str, Enum):
    HYPERPLANE = "Hyperplane"
    CYLINDER = "Cylinder"
    CONVEX_SPHERE = "ConvexSphere"
    BOWL = "Bowl"
    CATENOID = "Catenoid"
    UNDULOID = "Unduloid"
    NODOID = "Nodoid"
    WING_LIKE = "WingLike"
    WIGGLING_DISK = "WigglingDisk"
    CONVERGENT_GRAPH = "ConvergentGraph"
    NON_EMBEDDED_DISK = "NonEmbeddedDisk"
    EMBEDDED_ANNULUS = "EmbeddedAnnulus"
    UNKNOWN = "Unknown"

    def __str__(self):
        return self.value


@dataclass
class Diagnostics:
    pole_crossings: int
    gamma_crossings: int
    closed: bool
    embedded: bool
    strictly_convex: bool
    gauss_image: list[tuple[float, float]]
    period: float | None = None
    notes: dict = field(default_factory=dict)


@dataclass
class SurfaceClass:
    verdict: Verdict
    diagnostics: Diagnostics

    def to_json(self) -> dict:
        d = asdict(self.diagnostics)
        d["gauss_image"] = [list(iv) for iv in d["gauss_image"]]
        return {"verdict": self.verdict.value, "diagnostics": d}


@dataclass(frozen=True)
class HInfo:
    signs: SignInfo
    parity: str

    @classmethod
    def of(cls, h: CurvatureProfile) -> "HInfo":
        return cls(sign_and_zeros(h), parity(h))


# --------------------------------------------------------------------------
# geometric helpers


def embedded(x: Sequence[float], z: Sequence[float], slack: float = INTERSECT_SLACK) -> bool:
    """True when the polyline ``(x, z)`` has no transversal self-intersection.

    Sweep and prune: segments are sorted by their left end and each one is
    tested only against segments starting inside its x-span. Neighbouring
    segments share a vertex and are skipped.
    """
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if len(x) < 2:
        raise ValueError("need at least 2 samples")
    a = np.column_stack([x[:-1], z[:-1]])
    b = np.column_stack([x[1:], z[1:]])
    m = len(a)
    if m < 3:
        return True
    xlo, xhi = np.minimum(a[:, 0], b[:, 0]), np.maximum(a[:, 0], b[:, 0])
    zlo, zhi = np.minimum(a[:, 1], b[:, 1]), np.maximum(a[:, 1], b[:, 1])
    order = np.argsort(xlo, kind="stable")
    xlo_sorted = xlo[order]
    stop = np.searchsorted(xlo_sorted, xhi[order] + slack, side="right")
    counts = stop - np.arange(m) - 1
    counts = np.maximum(counts, 0)
    chunk = 2_000_000
    start = 0
    while start < m:
        # group sweep positions so each batch holds at most ``chunk`` pairs
        csum = np.cumsum(counts[start:])
        end = start + max(1, int(np.searchsorted(csum, chunk, side="right")))
        end = min(end, m)
        pos = np.arange(start, end)
        cnt = counts[start:end]
        if cnt.sum() > 0:
            i_pos = np.repeat(pos, cnt)
            offs = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
            j_pos = i_pos + 1 + offs
            i, j = order[i_pos], order[j_pos]
            ok = np.abs(i - j) > 1
            ok &= (zlo[i] <= zhi[j] + slack) & (zlo[j] <= zhi[i] + slack)
            i, j = i[ok], j[ok]
            if len(i) and _any_crossing(a[i], b[i], a[j], b[j], slack):
                return False
        start = end
    return True


def _orient(p, q, r):
    return (q[:, 0] - p[:, 0]) * (r[:, 1] - p[:, 1]) - (q[:, 1] - p[:, 1]) * (r[:, 0] - p[:, 0])


def _any_crossing(p1, p2, q1, q2, slack) -> bool:
    lp = np.hypot(*(p2 - p1).T)
    lq = np.hypot(*(q2 - q1).T)
    lp = np.where(lp > 0, lp, 1.0)
    lq = np.where(lq > 0, lq, 1.0)
    # signed distances of each endpoint to the other segment's line
    d1 = _orient(p1, p2, q1) / lp
    d2 = _orient(p1, p2, q2) / lp
    d3 = _orient(q1, q2, p1) / lq
    d4 = _orient(q1, q2, p2) / lq
    cross = ((d1 > slack) & (d2 < -slack)) | ((d1 < -slack) & (d2 > slack))
    cross &= ((d3 > slack) & (d4 < -slack)) | ((d3 < -slack) & (d4 > slack))
    return bool(np.any(cross))


def gauss_image(trace: OrbitTrace) -> list[tuple[float, float]]:
    """Range of the angle function over samples and refined event states."""
    ys = [trace.y]
    ev = np.array([math.cos(e.state_at.phi) for e in trace.events
                   + [e for e in (trace.origin, trace.termination) if e is not None]])
    if ev.size:
        ys.append(ev)
    y = np.clip(np.concatenate(ys), -1.0, 1.0)
    return [(float(y.min()), float(y.max()))]


def periodic_extension(trace: OrbitTrace, periods: int) -> tuple[np.ndarray, np.ndarray]:
    """``(x, z)`` of a closed trace repeated ``periods`` times by vertical translation."""
    if trace.termination.kind != EventKind.CLOSURE:
        raise ValueError("trace did not close")
    dz = trace.termination.info["dz"]
    xs, zs = [trace.x], [trace.z]
    for k in range(1, periods):
        xs.append(trace.x[1:])
        zs.append(trace.z[1:] + k * dz)
    return np.concatenate(xs), np.concatenate(zs)


def bowl_limit(trace: OrbitTrace, frac: float = 0.1) -> float:
    """Limit of ``y`` at the escaping end.

    Fits ``y = a + b/x + c/x**2`` on the last ``frac`` of the samples and
    returns ``a``; the decay in ``1/x`` is too slow for a plain average.
    """
    m = len(trace.s)
    k = max(3, int(math.ceil(frac * m)))
    u = 1.0 / trace.x[m - k:]
    y = trace.y[m - k:]
    A = np.vander(u, 3, increasing=True)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0])


def _strictly_convex(trace: OrbitTrace) -> bool:
    k1, k2 = curvatures(trace)
    return bool(np.all((k1 > 0) & (k2 > 0)) or np.all((k1 < 0) & (k2 < 0)))


def _stationary(trace: OrbitTrace) -> bool:
    """All samples sit on the rest point of their branch."""
    eps = 1 if np.sin(trace.phi[0]) > 0 else -1
    eq = equilibrium(PhaseContext(trace.n, trace.h, eps))
    if eq is None:
        return False
    x0, _ = eq.point
    d = np.hypot(trace.x - x0, trace.y)
    return bool(np.all(d < trace.options.e0_tol)) and bool(np.all(np.sin(trace.phi) * eps > 0))


def _outward(ev, forward: bool) -> int:
    """Vertical direction in which the curve leaves through the end ``ev``."""
    v = math.sin(ev.state_at.phi)
    v = v if forward else -v
    return (v > 0) - (v < 0)


def _gamma_alternates(trace: OrbitTrace) -> bool:
    ys = [math.cos(e.state_at.phi) for e in trace.events_of(EventKind.GAMMA_CROSS)]
    if len(ys) < WIGGLE_MIN_GAMMA:
        return False
    signs = np.sign(ys)
    return bool(np.all(signs[1:] * signs[:-1] < 0))


# --------------------------------------------------------------------------
# the decision table


def classify(trace_or_pair, h_info: HInfo | None = None) -> SurfaceClass:
    """Verdict and diagnostics for a trace, or for a ``(backward, forward)`` pair."""
    if isinstance(trace_or_pair, (tuple, list)):
        if len(trace_or_pair) != 2:
            raise ValueError("expected a (backward, forward) pair of traces")
        trace = join_traces(*trace_or_pair)
    else:
        trace = trace_or_pair
    if trace is None or len(trace.s) == 0:
        raise ValueError("empty trace")
    h = trace.h
    h_info = h_info or HInfo.of(h)

    poles = len(trace.events_of(EventKind.POLE_CROSS))
    gammas = len(trace.events_of(EventKind.GAMMA_CROSS))
    term = trace.termination
    closed = term.kind == EventKind.CLOSURE
    ends = [e for e in (trace.origin, term) if e is not None]
    axis_ends = [e for e in ends if e.kind in (EventKind.AXIS_ORTHOGONAL, EventKind.AXIS_SINGULAR)]
    singular = any(e.kind == EventKind.AXIS_SINGULAR for e in axis_ends)
    emb = (not singular) and embedded(trace.x, trace.z)
    convex = _strictly_convex(trace)
    gimg = gauss_image(trace)
    diag = Diagnostics(
        pole_crossings=poles,
        gamma_crossings=gammas,
        closed=closed,
        embedded=emb,
        strictly_convex=convex,
        gauss_image=gimg,
        period=float(term.info["period"]) if closed else None,
    )
    verdict = _decide(trace, diag, axis_ends, h_info)
    return SurfaceClass(verdict, diag)


def _decide(trace: OrbitTrace, d: Diagnostics, axis_ends, h_info: HInfo) -> Verdict:
    term, origin = trace.termination, trace.origin
    K = EventKind
    n_axis = len(axis_ends)
    orth = [e for e in axis_ends if e.kind == K.AXIS_ORTHOGONAL]

    if np.all(np.abs(np.sin(trace.phi)) <= 1e-12) and np.ptp(trace.phi) <= 1e-12:
        return Verdict.HYPERPLANE
    if n_axis == 0 and _stationary(trace):
        return Verdict.CYLINDER

    if len(orth) == 2:
        deltas = {1 if math.cos(e.state_at.phi) > 0 else -1 for e in orth}
        if len(deltas) == 2 and d.pole_crossings == 0 and d.strictly_convex:
            return Verdict.CONVEX_SPHERE
        return Verdict.UNKNOWN

    if len(orth) == 1 and n_axis == 1:
        other = term if origin is orth[0] else origin
        if other is None:
            return Verdict.UNKNOWN
        if other.kind == K.ESCAPE:
            if d.pole_crossings >= 1:
                return Verdict.NON_EMBEDDED_DISK
            y = trace.y if origin is orth[0] else trace.y[::-1]
            monotone = bool(np.all(np.diff(y) <= 1e-12)) or bool(np.all(np.diff(y) >= -1e-12))
            if monotone:
                y_inf = bowl_limit(trace) if origin is orth[0] else _reverse_bowl_limit(trace)
                d.notes["y_limit"] = y_inf
                if abs(trace.h.value(min(1.0, max(-1.0, y_inf)))) <= BOWL_H_TOL:
                    return Verdict.BOWL
            return Verdict.UNKNOWN
        if other.kind in (K.EQUILIBRIUM_APPROACH, K.BUDGET_EXHAUSTED):
            if d.gamma_crossings >= WIGGLE_MIN_GAMMA and _gamma_alternates(trace):
                return Verdict.WIGGLING_DISK
            if other.kind == K.EQUILIBRIUM_APPROACH and d.gamma_crossings <= 1:
                return Verdict.CONVERGENT_GRAPH
        return Verdict.UNKNOWN

    if n_axis:
        return Verdict.UNKNOWN

    if d.closed:
        if d.pole_crossings == 0:
            return Verdict.UNDULOID
        if d.pole_crossings >= 2:
            return Verdict.NODOID
        return Verdict.UNKNOWN

    if origin is not None and origin.kind == K.ESCAPE and term.kind == K.ESCAPE:
        up_fwd = _outward(term, forward=True)
        up_bwd = _outward(origin, forward=False)
        d.notes["end_directions"] = [up_bwd, up_fwd]
        if up_fwd == up_bwd and up_fwd != 0:
            return Verdict.WING_LIKE
        if up_fwd * up_bwd < 0:
            if d.embedded:
                lo, hi = d.gauss_image[0]
                if _max_h(trace.h, lo, hi) <= 0.0:
                    return Verdict.CATENOID
                return Verdict.EMBEDDED_ANNULUS
            d.notes["shape"] = "non-closed nodoid-type annulus"
            return Verdict.UNKNOWN
    return Verdict.UNKNOWN


def _reverse_bowl_limit(trace: OrbitTrace) -> float:
    rev = replace(trace, s=-trace.s[::-1], x=trace.x[::-1], z=trace.z[::-1], phi=trace.phi[::-1])
    return bowl_limit(rev)


def _max_h(h: CurvatureProfile, lo: float, hi: float, num: int = 1001) -> float:
    ys = np.linspace(lo, hi, num)
    return max(h.value(float(v)) for v in ys)


# --------------------------------------------------------------------------
# Delaunay-type families


def sphere_equator_radius(n: int, h: CurvatureProfile,
                          opts: IntegrationOptions | None = None) -> float:
    """Radius at which the axis-launched sphere orbit meets ``y = 0``.

    The crossing is located by the integrator's bisection on ``cos(phi)``.
    """
    tr = integrate_orbit(n, h, start_at_axis(n, h, 1), opts)
    eq = tr.events_of(EventKind.EQUATOR_CROSS)
    if not eq:
        raise RuntimeError("axis orbit never reaches y = 0")
    return eq[0].state_at.x


def _thread_count() -> int:
    raw = os.environ.get("PMC_ROTOR_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def delaunay_family(n: int, h: CurvatureProfile, x_start, count: int = 1,
                    opts: IntegrationOptions | None = None,
                    threads: int | None = None) -> list[tuple[float, SurfaceClass]]:
    """Classify orbits launched vertically at ``x_start``.

    ``x_start`` is a single radius (``count`` is then ignored) or a
    ``(lo, hi)`` pair sampled at ``count`` evenly spaced radii including
    both bounds. ``h`` must be even and positive.
    """
    info = HInfo.of(h)
    if info.parity != "even" or not info.signs.min_value > 0:
        raise ValueError("delaunay_family needs an even, strictly positive h")
    if isinstance(x_start, (tuple, list)):
        lo, hi = map(float, x_start)
        radii = [lo] if count == 1 else list(np.linspace(lo, hi, count))
    else:
        radii = [float(x_start)]
    if any(r <= 0 for r in radii):
        raise ValueError("launch radii must be positive")

    def one(r):
        tr = integrate_orbit(n, h, start_at_point(r, math.pi / 2), opts)
        return float(r), classify(tr, info)

    workers = threads or _thread_count()
    if workers <= 1 or len(radii) <= 1:
        return [one(r) for r in radii]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, radii))
