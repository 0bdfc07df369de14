"""Acceptance checks shared by the test suite and ``pmc-rotor verify``.

Each ``criterion_*`` function returns a :class:`CheckResult`; the ones
that integrate orbits also hand their traces back so the invariant suite
can run over all of them.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .classify import HInfo, Verdict, classify, sphere_equator_radius
from .config import load_corpus, run_trace
from .curvfn import Constant, CurvatureProfile, GrimReaper, Polynomial
from .integrate import (
    EventKind,
    IntegrationOptions,
    OrbitTrace,
    curvatures,
    fd_derivative,
    integrate_both,
    integrate_orbit,
    pmc_residual,
    start_at_axis,
    start_at_point,
)
from .oracles import dirichlet_ball_check, grim_reaper_height
from .phase import PhaseContext, equilibrium, gamma, linearize_check, monotonicity

__all__ = ["CheckResult", "CRITERIA", "run_all", "trace_invariants"]


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    budget: float
    traces: list[OrbitTrace] = field(default_factory=list, repr=False)

    @property
    def ok(self) -> bool:
        return self.passed and self.seconds < self.budget

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return (f"[{status}] {self.number:2d} {self.name}: {self.detail} "
                f"({self.seconds:.2f}s / budget {self.budget:g}s)")


class _Checks:
    """Collects named boolean checks and renders a short detail string."""

    def __init__(self):
        self.items: list[tuple[str, bool]] = []

    def __call__(self, label: str, cond) -> bool:
        cond = bool(cond)
        self.items.append((label, cond))
        return cond

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.items)

    def detail(self) -> str:
        bad = [label for label, ok in self.items if not ok]
        return "all checks hold" if not bad else "failed: " + "; ".join(bad)


def _timed(number: int, name: str, budget: float):
    def wrap(fn: Callable[[_Checks], list[OrbitTrace]]):
        def run() -> CheckResult:
            chk = _Checks()
            t0 = time.perf_counter()
            try:
                traces = fn(chk) or []
            except Exception as exc:  # reported, not raised
                chk(f"raised {type(exc).__name__}: {exc}", False)
                traces = []
            dt = time.perf_counter() - t0
            return CheckResult(number, name, chk.passed, chk.detail(), dt, budget, traces)

        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return wrap


# --------------------------------------------------------------------------
# 1-7: orbit constructions


@_timed(1, "CMC sphere reproduction", 1.0)
def criterion_sphere(chk: _Checks):
    traces = []
    for n in (2, 3):
        h = Constant(1.0)
        tr = integrate_orbit(n, h, start_at_axis(n, h, 1))
        traces.append(tr)
        ends = [tr.origin, tr.termination]
        chk(f"n={n} both ends AxisOrthogonal",
            all(e is not None and e.kind == EventKind.AXIS_ORTHOGONAL for e in ends))
        deltas = [np.sign(math.cos(e.state_at.phi)) for e in ends]
        chk(f"n={n} opposite deltas", deltas[0] * deltas[1] < 0)
        eq = tr.events_of(EventKind.EQUATOR_CROSS)
        chk(f"n={n} one equator crossing at x=1", len(eq) == 1 and abs(eq[0].state_at.x - 1.0) <= 1e-6)
        chk(f"n={n} ConvexSphere", classify(tr).verdict == Verdict.CONVEX_SPHERE)
    return traces


@_timed(2, "cylinder fixed point", 1.0)
def criterion_cylinder(chk: _Checks):
    h = Constant(1.0)
    opts = IntegrationOptions(s_max=100.0, stop_at_equilibrium=False)
    tr = integrate_orbit(2, h, start_at_point(0.5, math.pi / 2), opts)
    chk("reached s=100", abs(tr.s[-1] - 100.0) < 1e-9)
    dist = np.hypot(tr.x - 0.5, tr.y)
    chk(f"max distance to e0 {dist.max():.1e} <= 1e-8", dist.max() <= 1e-8)
    return [tr]


@_timed(3, "Delaunay family for 1+y^2", 5.0)
def criterion_delaunay(chk: _Checks):
    n, h = 2, Polynomial((1.0, 0.0, 1.0))
    info = HInfo.of(h)
    chk("h even", info.parity == "even")
    chk("h positive", info.signs.min_value > 0)
    r0 = equilibrium(PhaseContext(n, h, 1)).point[0]
    x_g = sphere_equator_radius(n, h)
    chk("sphere equator beyond r0", x_g > r0)
    traces = []
    for x0 in np.linspace(r0, x_g, 7)[1:-1]:
        tr = integrate_orbit(n, h, start_at_point(float(x0), math.pi / 2))
        traces.append(tr)
        c = classify(tr, info)
        d = c.diagnostics
        lo, hi = d.gauss_image[0]
        chk(f"x={x0:.4f} Unduloid", c.verdict == Verdict.UNDULOID)
        chk(f"x={x0:.4f} closed within 1e-6", d.closed and abs(tr.termination.info["dx"]) <= 1e-6)
        chk(f"x={x0:.4f} no pole crossing", d.pole_crossings == 0)
        chk(f"x={x0:.4f} Gauss image inside (-1,1)", -1 < lo and hi < 1)
    x_out = x_g + 0.5 * (x_g - r0)
    tr = integrate_orbit(n, h, start_at_point(x_out, math.pi / 2))
    traces.append(tr)
    c = classify(tr, info)
    d = c.diagnostics
    lo, hi = d.gauss_image[0]
    chk("outer orbit Nodoid", c.verdict == Verdict.NODOID)
    chk("outer orbit closed within 1e-6", d.closed and abs(tr.termination.info["dx"]) <= 1e-6)
    chk("outer orbit >= 2 pole crossings", d.pole_crossings >= 2)
    chk("outer Gauss image [-1,1]", lo <= -1 + 1e-6 and hi >= 1 - 1e-6)
    chk("outer vertical period nonzero", abs(tr.termination.info["dz"]) > 1e-6)
    return traces


@_timed(4, "h-bowl for y-1/2", 2.0)
def criterion_bowl(chk: _Checks):
    h = Polynomial((-0.5, 1.0))
    tr = integrate_orbit(2, h, start_at_axis(2, h, 1), IntegrationOptions(s_max=1e4))
    chk("escapes at x=1000", tr.termination.kind == EventKind.ESCAPE and abs(tr.x[-1] - 1e3) < 1e-6)
    chk("y monotone decreasing", np.all(np.diff(tr.y) <= 0))
    chk(f"|y_final - 0.5| = {abs(tr.y[-1] - 0.5):.1e} < 1e-3", abs(tr.y[-1] - 0.5) < 1e-3)
    k1, k2 = curvatures(tr)
    chk("k1, k2 > 0 everywhere", np.all(k1 > 0) and np.all(k2 > 0))
    chk("classified Bowl", classify(tr).verdict == Verdict.BOWL)
    return [tr]


@_timed(5, "h-catenoid for y^2-1", 2.0)
def criterion_catenoid(chk: _Checks):
    h = Polynomial((-1.0, 0.0, 1.0))
    tr = integrate_both(2, h, start_at_point(1.0, math.pi / 2), IntegrationOptions(s_max=1e4))
    chk("both directions escape", tr.origin.kind == EventKind.ESCAPE and tr.termination.kind == EventKind.ESCAPE)
    chk("no pole crossing", not tr.events_of(EventKind.POLE_CROSS))
    chk("one equator crossing", len(tr.events_of(EventKind.EQUATOR_CROSS)) == 1)
    k1, k2 = curvatures(tr)
    chk("k1*k2 < 0 everywhere", np.all(k1 * k2 < 0))
    y = tr.y
    chk("|y| < 1 everywhere", np.all(np.abs(y) < 1))
    chk("ends approach y = -1 and y = +1", y[0] < -0.999 and y[-1] > 0.999)
    chk("classified Catenoid", classify(tr).verdict == Verdict.CATENOID)
    return [tr]


@_timed(6, "grim-reaper convergent graph", 2.0)
def criterion_grim(chk: _Checks):
    h = GrimReaper()
    tr = integrate_orbit(2, h, start_at_axis(2, h, 1), IntegrationOptions(s_max=200.0))
    m = tr.x <= math.pi / 2 - 0.1
    err = float(np.max(np.abs(tr.z[m] - grim_reaper_height(tr.x[m]))))
    chk(f"profile error {err:.1e} <= 1e-6", err <= 1e-6)
    chk("classified ConvergentGraph", classify(tr).verdict == Verdict.CONVERGENT_GRAPH)
    near = np.abs(tr.x - math.pi / 2) < 1e-3
    chk("within 1e-3 of x=pi/2 by s=200", np.any(near & (tr.s <= 200.0)))
    return [tr]


PHENOMENOLOGY = {
    "noes1": Verdict.WIGGLING_DISK,
    "noes2": Verdict.NON_EMBEDDED_DISK,
    "wing": Verdict.WING_LIKE,
    "hno1": Verdict.EMBEDDED_ANNULUS,
    "hno2": Verdict.UNKNOWN,
}


@_timed(7, "non-CMC phenomenology", 5.0)
def criterion_phenomenology(chk: _Checks):
    corpus = load_corpus()
    traces = []
    for name, want in PHENOMENOLOGY.items():
        cfg = corpus[name]
        tr = run_trace(cfg)
        traces.append(tr)
        c = classify(tr)
        chk(f"{name} -> {want.value} (got {c.verdict.value})", c.verdict == want)
        if name == "hno1":
            chk("hno1 embedded", c.diagnostics.embedded)
        if name == "hno2":
            chk("hno2 not embedded", not c.diagnostics.embedded)
            chk("hno2 has a pole loop", c.diagnostics.pole_crossings >= 2)
    return traces


# --------------------------------------------------------------------------
# 8: invariants over every trace above


def _pole_or_axis_near(trace: OrbitTrace, s_lo: float, s_hi: float) -> bool:
    for e in trace.events:
        if e.kind == EventKind.POLE_CROSS and s_lo <= e.s_at <= s_hi:
            return True
    return False


def trace_invariants(trace: OrbitTrace) -> dict[str, tuple[bool, str]]:
    """Per-trace invariant checks; maps check name to (ok, detail)."""
    out: dict[str, tuple[bool, str]] = {}
    res = pmc_residual(trace) if len(trace.s) >= 3 else 0.0
    out["pmc_residual"] = (res <= 1e-6, f"{res:.1e}")

    ds = np.diff(trace.s)
    chord2 = np.diff(trace.x) ** 2 + np.diff(trace.z) ** 2
    unit = np.abs(chord2 - ds ** 2) / np.where(ds > 0, ds, 1.0)
    out["unit_speed"] = (bool(np.all(unit <= 1e-8)), f"{unit.max() if len(unit) else 0:.1e}")

    if len(trace.s) < 3:
        return out
    s, x, phi = trace.s, trace.x, trace.phi
    y = np.cos(phi)
    sn = np.sin(phi)
    dy = fd_derivative(s, y)
    k1, _ = curvatures(trace)

    # monotonicity: sign of dy/dx from the samples vs the phase-plane verdict
    bad = checked = 0
    for i in range(len(s)):
        if x[i] <= 0 or abs(sn[i]) < 1e-8 or abs(y[i]) < 1e-8 or abs(dy[i]) < 1e-7:
            continue
        eps = 1 if sn[i] > 0 else -1
        ctx = PhaseContext(trace.n, trace.h, eps)
        g = gamma(ctx, float(y[i]))
        if g is not None and abs(x[i] - g) < 1e-6:
            continue
        want = monotonicity(ctx, float(x[i]), float(y[i])).dy_dx_sign
        got = int(np.sign(dy[i] / y[i]))  # dx/ds = y
        checked += 1
        bad += got != want
    out["monotonicity"] = (bad == 0, f"{bad} mismatches in {checked}")

    # sign(k1) = sign(-eps y')
    m = (np.abs(sn) > 1e-8) & (np.abs(k1) > 1e-6) & (np.abs(dy) > 1e-7) & (x > 0)
    lhs = np.sign(k1[m])
    rhs = np.sign(-np.sign(sn[m]) * dy[m])
    nbad = int(np.sum(lhs != rhs))
    out["signk"] = (nbad == 0, f"{nbad} mismatches in {int(m.sum())}")

    # Gamma crossings <-> interior extrema of y on the samples
    d = np.diff(y)
    ext = [i for i in range(1, len(y) - 1) if d[i - 1] * d[i] < 0 and abs(d[i - 1]) > 1e-13
           and abs(d[i]) > 1e-13]
    gam = [e.s_at for e in trace.events_of(EventKind.GAMMA_CROSS)]
    miss = 0
    for sg in gam:
        if not any(s[i - 1] <= sg <= s[i + 1] for i in ext):
            miss += 1
    extra = 0
    for i in ext:
        lo, hi = s[i - 1], s[i + 1]
        if _pole_or_axis_near(trace, lo, hi):
            continue
        if not any(lo <= sg <= hi for sg in gam):
            extra += 1
    out["gamma_extrema"] = (miss == 0 and extra == 0,
                            f"{len(gam)} crossings, {miss} unmatched, {extra} unexplained extrema")
    return out


def criterion_invariants(traces: list[OrbitTrace]) -> CheckResult:
    chk = _Checks()
    t0 = time.perf_counter()
    worst = 0.0
    for k, tr in enumerate(traces):
        for name, (ok, detail) in trace_invariants(tr).items():
            chk(f"trace {k} {name} ({detail})", ok)
        worst = max(worst, pmc_residual(tr))
    dt = time.perf_counter() - t0
    detail = chk.detail()
    if chk.passed:
        detail = f"{len(traces)} traces, worst pmc residual {worst:.1e}"
    return CheckResult(8, "invariant suite", chk.passed, detail, dt, 5.0)


# --------------------------------------------------------------------------
# 9-11


def _random_profile(rng: np.random.Generator, even: bool) -> CurvatureProfile:
    deg = int(rng.integers(0, 4))
    c = rng.uniform(-2.0, 2.0, size=deg + 1)
    c[0] = rng.uniform(0.3, 3.0) * rng.choice([-1.0, 1.0])
    if even:
        c[1::2] = 0.0
    return Polynomial(tuple(c))


@_timed(9, "linearization at e0", 1.0)
def criterion_linearization(chk: _Checks):
    rng = np.random.default_rng(20240611)
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(2, 6))
        h = _random_profile(rng, even=False)
        eps = 1 if h.value(0.0) > 0 else -1
        worst = max(worst, linearize_check(PhaseContext(n, h, eps)))
    chk(f"worst Jacobian gap {worst:.1e} <= 1e-6", worst <= 1e-6)
    for _ in range(10):
        n = int(rng.integers(2, 6))
        h = _random_profile(rng, even=True)
        eps = 1 if h.value(0.0) > 0 else -1
        eig = equilibrium(PhaseContext(n, h, eps)).eigenvalues
        w = n * abs(h.value(0.0)) / math.sqrt(n - 1)
        gap = max(abs(eig[0] - 1j * w), abs(eig[1] + 1j * w))
        chk(f"even n={n} eigenvalues +-{w:.4f}i (gap {gap:.1e})", gap <= 1e-8)
    return []


@_timed(10, "minimal catenoid oracle", 1.0)
def criterion_min_catenoid(chk: _Checks):
    h = Constant(0.0)
    tr = integrate_both(2, h, start_at_point(1.0, math.pi / 2), IntegrationOptions(x_max=4.0))
    m = np.abs(tr.z) <= 2.0
    chk("covers z in [-2, 2]", tr.z.min() < -2.0 and tr.z.max() > 2.0)
    err = float(np.max(np.abs(tr.x[m] - np.cosh(tr.z[m]))))
    chk(f"sup |x - cosh z| = {err:.1e} <= 1e-8", err <= 1e-8)
    return [tr]


@_timed(11, "Dirichlet ball check", 1.0)
def criterion_dirichlet(chk: _Checks):
    r = dirichlet_ball_check(2, 1.0, 0.4)
    chk("(2, 1, 0.4) both true", r.cond_volume and r.cond_boundary and r.solvable)
    r = dirichlet_ball_check(2, 1.0, 0.6)
    chk("(2, 1, 0.6) boundary false", not r.cond_boundary and not r.solvable)
    for n in (2, 3, 5):
        r = dirichlet_ball_check(n, 0.0, 7.0)
        chk(f"({n}, 0, 7) both true", r.cond_volume and r.cond_boundary)
    Hs = np.linspace(0.0, 3.0, 20)
    rhos = np.linspace(0.05, 2.0, 20)
    for n in (2, 3):
        grid = [[dirichlet_ball_check(n, float(H), float(rho)) for rho in rhos] for H in Hs]
        mono = True
        for i in range(20):
            for j in range(20):
                for f in range(3):
                    v = grid[i][j][f]
                    if i + 1 < 20 and grid[i + 1][j][f] and not v:
                        mono = False
                    if j + 1 < 20 and grid[i][j + 1][f] and not v:
                        mono = False
        chk(f"n={n} monotone on 20x20 grid", mono)
    return []


ORBIT_CRITERIA = [
    criterion_sphere,
    criterion_cylinder,
    criterion_delaunay,
    criterion_bowl,
    criterion_catenoid,
    criterion_grim,
    criterion_phenomenology,
]
OTHER_CRITERIA = [criterion_linearization, criterion_min_catenoid, criterion_dirichlet]
CRITERIA = ORBIT_CRITERIA + OTHER_CRITERIA


def run_all(echo: Callable[[str], None] | None = None) -> list[CheckResult]:
    """Run criteria 1-11 in order; ``echo`` receives one line per criterion."""
    results = []
    traces: list[OrbitTrace] = []
    for crit in ORBIT_CRITERIA:
        r = crit()
        traces.extend(r.traces)
        results.append(r)
        if echo:
            echo(r.line())
    r = criterion_invariants(traces)
    results.append(r)
    if echo:
        echo(r.line())
    for crit in OTHER_CRITERIA:
        r = crit()
        results.append(r)
        if echo:
            echo(r.line())
    return results
