"""Profile-curve integration with event detection.

The profile curve ``(x(s), z(s))`` of a rotational hypersurface is integrated
in unit-speed tangent-angle form::

    x' = cos(phi)
    z' = sin(phi)
    phi' = n h(cos phi) - (n - 1) sin(phi) / x

``y = cos(phi)`` is the angle function and ``sign(sin(phi))`` picks the
branch of the phase plane. Unlike the ``(x, y)`` system this field stays
smooth where the tangent is horizontal (``|y| = 1``), so pole crossings need
no special treatment.

The stepper is the Dormand-Prince 5(4) pair with a PI step-size controller.
Events are bracketed on each accepted step, located on the cubic Hermite
interpolant and polished with Newton iterations that re-step from the left
end of the bracket.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .curvfn import CurvatureProfile

__all__ = [
    "ProfileState",
    "IntegrationOptions",
    "EventKind",
    "Event",
    "OrbitTrace",
    "StepSizeUnderflow",
    "profile_field",
    "start_at_axis",
    "start_at_point",
    "integrate_orbit",
    "integrate_both",
    "join_traces",
    "pmc_residual",
    "residual_of_samples",
    "fd_derivative",
    "curvatures",
]

AXIS_SEED = 1e-4
ORTHOGONAL_SIN = 1e-4


@dataclass(frozen=True)
class ProfileState:
    """Point of a unit-speed profile curve.

    ``direction`` is the sign of ``ds`` used when integrating from this
    state; ``axis_delta`` is set (to +1 or -1) for axis-seeded states.
    """

    s: float
    x: float
    z: float
    phi: float
    direction: int = 1
    axis_delta: int | None = None

    @property
    def y(self) -> float:
        return math.cos(self.phi)

    @property
    def eps(self) -> int:
        sn = math.sin(self.phi)
        return (sn > 0) - (sn < 0)


@dataclass(frozen=True)
class IntegrationOptions:
    tol_abs: float = 1e-10
    tol_rel: float = 1e-10
    s_max: float = 1e3
    x_max: float = 1e3
    axis_tol: float = 1e-8
    e0_tol: float = 1e-6
    closure_tol: float = 1e-8
    max_pole_crossings: int = 64
    max_samples: int = 2_000_000
    e0_window: float = 1.0
    stop_at_equilibrium: bool = True
    # inward crossing of this radius hands over to the axis-contact model
    axis_capture: float = 1e-3
    max_step: float = 0.25
    # sample spacing keeps |chord^2 - ds^2| <= chord_tol * ds
    chord_tol: float = 4e-9
    # step <= axis_step_frac * x resolves the x**-(n-1) mode near the axis
    axis_step_frac: float = 0.1
    min_step: float = 1e-14

    def __post_init__(self):
        for name in ("tol_abs", "tol_rel", "s_max", "x_max", "axis_tol", "e0_tol",
                     "closure_tol", "e0_window", "axis_capture", "max_step", "chord_tol",
                     "axis_step_frac", "min_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_pole_crossings < 0 or self.max_samples < 3:
            raise ValueError("invalid caps")


class EventKind(str, Enum):
    AXIS_ORTHOGONAL = "AxisOrthogonal"
    AXIS_SINGULAR = "AxisSingular"
    EQUATOR_CROSS = "EquatorCross"
    POLE_CROSS = "PoleCross"
    GAMMA_CROSS = "GammaCross"
    EQUILIBRIUM_APPROACH = "EquilibriumApproach"
    CLOSURE = "Closure"
    ESCAPE = "Escape"
    BUDGET_EXHAUSTED = "BudgetExhausted"

    def __str__(self):
        return self.value


TERMINAL = frozenset({
    EventKind.AXIS_ORTHOGONAL, EventKind.AXIS_SINGULAR, EventKind.EQUILIBRIUM_APPROACH,
    EventKind.CLOSURE, EventKind.ESCAPE, EventKind.BUDGET_EXHAUSTED,
})


@dataclass(frozen=True)
class Event:
    kind: EventKind
    s_at: float
    state_at: ProfileState
    info: dict = field(default_factory=dict, compare=False)


@dataclass
class OrbitTrace:
    """Sampled profile curve.

    Samples are stored column-wise in arrays ordered by increasing ``s``.
    ``termination`` is the event that stopped the integration; ``origin``
    describes the other end: the axis contact of an axis launch, the
    backward termination of a two-sided trace, or ``None``.
    """

    n: int
    h: CurvatureProfile
    s: np.ndarray
    x: np.ndarray
    z: np.ndarray
    phi: np.ndarray
    events: list[Event]
    termination: Event
    origin: Event | None = None
    options: IntegrationOptions = field(default_factory=IntegrationOptions)

    @property
    def y(self) -> np.ndarray:
        return np.cos(self.phi)

    @property
    def samples(self) -> list[ProfileState]:
        return [ProfileState(*row) for row in zip(self.s.tolist(), self.x.tolist(),
                                                  self.z.tolist(), self.phi.tolist())]

    def __len__(self):
        return len(self.s)

    def events_of(self, kind: EventKind) -> list[Event]:
        return [e for e in self.events if e.kind == kind]

    @property
    def ends(self) -> tuple[Event | None, Event]:
        """(start-side end, finish-side end) in increasing ``s``."""
        if self.termination.s_at < (self.origin.s_at if self.origin else -math.inf):
            return self.termination, self.origin
        return self.origin, self.termination


class StepSizeUnderflow(RuntimeError):
    def __init__(self, state: ProfileState, step: float):
        super().__init__(f"step size {step:.3e} below minimum at s={state.s:.17g}, "
                         f"x={state.x:.17g}, phi={state.phi:.17g}")
        self.state = state
        self.step = step


def profile_field(n: int, h: CurvatureProfile, state: ProfileState) -> tuple[float, float, float]:
    """(dx/ds, dz/ds, dphi/ds) at ``state``."""
    if not state.x > 0:
        raise ValueError(f"profile field undefined at x={state.x}")
    c, sn = math.cos(state.phi), math.sin(state.phi)
    return c, sn, n * h.value(c) - (n - 1) * sn / state.x


def start_at_axis(n: int, h: CurvatureProfile, delta: int, s0: float = AXIS_SEED) -> ProfileState:
    """Seed for the profile meeting the axis orthogonally with normal ``delta * e_{n+1}``.

    At the axis point all principal curvatures equal ``k = h(delta)``. The
    seed is the first-order Taylor state at arclength ``s0`` from the axis.
    For ``delta = -1`` the tangent there points toward the axis, so the
    curve is continued in decreasing ``s``.
    """
    if delta not in (1, -1):
        raise ValueError("delta must be +1 or -1")
    k = h.value(float(delta))
    if delta == 1:
        return ProfileState(s0, s0, 0.5 * k * s0 * s0, k * s0, 1, 1)
    return ProfileState(-s0, s0, -0.5 * k * s0 * s0, math.pi - k * s0, -1, -1)


def start_at_point(x: float, phi: float, z: float = 0.0, direction: int = 1) -> ProfileState:
    if not x > 0:
        raise ValueError("x must be positive")
    return ProfileState(0.0, float(x), float(z), float(phi), direction)


# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200,
                                22 / 525, -1 / 40)


class _Stepper:
    """DOPRI5 on the 3-component profile field, scalar arithmetic."""

    def __init__(self, n: int, h: CurvatureProfile):
        self.n = n
        self.m = n - 1
        self.hv = h.value
        self.hd = h.deriv

    def f(self, x, phi):
        c = math.cos(phi)
        sn = math.sin(phi)
        return c, sn, self.n * self.hv(c) - self.m * sn / x

    def step(self, x, z, p, k1, dt):
        """One DOPRI5 step. Returns (x, z, phi, k7, (ex, ez, ep))."""
        f = self.f
        k2 = f(x + dt * _A21 * k1[0], p + dt * _A21 * k1[2])
        k3 = f(x + dt * (_A31 * k1[0] + _A32 * k2[0]), p + dt * (_A31 * k1[2] + _A32 * k2[2]))
        k4 = f(x + dt * (_A41 * k1[0] + _A42 * k2[0] + _A43 * k3[0]),
               p + dt * (_A41 * k1[2] + _A42 * k2[2] + _A43 * k3[2]))
        k5 = f(x + dt * (_A51 * k1[0] + _A52 * k2[0] + _A53 * k3[0] + _A54 * k4[0]),
               p + dt * (_A51 * k1[2] + _A52 * k2[2] + _A53 * k3[2] + _A54 * k4[2]))
        k6 = f(x + dt * (_A61 * k1[0] + _A62 * k2[0] + _A63 * k3[0] + _A64 * k4[0] + _A65 * k5[0]),
               p + dt * (_A61 * k1[2] + _A62 * k2[2] + _A63 * k3[2] + _A64 * k4[2] + _A65 * k5[2]))
        out = []
        err = []
        for i in range(3):
            incr = _B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i]
            out.append(incr)
        xn = x + dt * out[0]
        zn = z + dt * out[1]
        pn = p + dt * out[2]
        if not xn > 0:
            return None
        k7 = f(xn, pn)
        for i in range(3):
            err.append(dt * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i]
                             + _E6 * k6[i] + _E7 * k7[i]))
        return xn, zn, pn, k7, err

    def dphi_ds2(self, x, phi, dphi):
        """d/ds of phi' along the flow."""
        c, sn = math.cos(phi), math.sin(phi)
        return (self.n * self.hd(c) * (-sn * dphi)
                - self.m * (c * dphi * x - sn * c) / (x * x))


def _hermite(ya, yb, fa, fb, dt, theta):
    t1 = theta - 1.0
    return [
        (1.0 - theta) * a + theta * b + theta * t1 * ((1.0 - 2.0 * theta) * (b - a)
                                                        + t1 * dt * da + theta * dt * db)
        for a, b, da, db in zip(ya, yb, fa, fb)
    ]


# indicator(g, dg/ds) over (x, z, phi, field)
def _ind_pole(st, Y, F):
    return math.sin(Y[2]), math.cos(Y[2]) * F[2]


def _ind_equator(st, Y, F):
    return math.cos(Y[2]), -math.sin(Y[2]) * F[2]


def _ind_gamma(st, Y, F):
    return F[2], st.dphi_ds2(Y[0], Y[2], F[2])


def _ind_radius(r):
    def ind(st, Y, F):
        return Y[0] - r, F[0]
    return ind


class _Integrator:
    def __init__(self, n, h, init: ProfileState, opts: IntegrationOptions, record_start=True):
        self.n, self.h, self.opts = n, h, opts
        self.st = _Stepper(n, h)
        self.init = init
        self.d = 1 if init.direction >= 0 else -1
        self.record_start = record_start
        h0 = h.value(0.0)
        self.eps0 = (h0 > 0) - (h0 < 0)
        self.e0 = (n - 1) / (n * abs(h0)) if h0 != 0 else None

    def _polish(self, ind, sa, Ya, Fa, s_lo, s_hi, s_guess):
        """Newton on g(restep(sa -> s)) bracketed to [s_lo, s_hi]."""
        st = self.st
        s_star = s_guess
        Y, F = None, None
        for _ in range(4):
            dt = s_star - sa
            if dt == 0.0:
                Y, F = Ya, Fa
            else:
                r = st.step(Ya[0], Ya[1], Ya[2], Fa, dt)
                if r is None:
                    break
                Y = (r[0], r[1], r[2])
                F = r[3]
            g, dg = ind(st, Y, F)
            if dg == 0.0 or not math.isfinite(dg):
                break
            s_new = s_star - g / dg
            if not (min(s_lo, s_hi) <= s_new <= max(s_lo, s_hi)):
                break
            if abs(s_new - s_star) < 1e-15 * max(1.0, abs(s_star)):
                s_star = s_new
                break
            s_star = s_new
        dt = s_star - sa
        if dt == 0.0:
            return s_star, tuple(Ya), tuple(Fa)
        r = st.step(Ya[0], Ya[1], Ya[2], Fa, dt)
        return s_star, (r[0], r[1], r[2]), r[3]

    def _locate(self, ind, sa, Ya, Fa, sb, Yb, Fb, ga):
        dt = sb - sa
        lo, hi = 0.0, 1.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            Ym = _hermite(Ya, Yb, Fa, Fb, dt, mid)
            Fm = self.st.f(Ym[0], Ym[2]) if Ym[0] > 0 else Fa
            gm, _ = ind(self.st, Ym, Fm)
            if (gm < 0) == (ga < 0) and gm != 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-15:
                break
        s_guess = sa + 0.5 * (lo + hi) * dt
        return self._polish(ind, sa, Ya, Fa, sa + lo * dt, sa + hi * dt, s_guess)

    def _state(self, s, Y):
        return ProfileState(s, Y[0], Y[1], Y[2], self.d)

    def _axis_contact(self, s, Y, F):
        """Continue from the capture radius to x = 0 on the osculating circle."""
        x, z, p = Y
        k = F[2]
        if abs(k) < 1e-12:
            c = math.cos(p)
            if c * self.d >= 0:
                return None
            dl = -x / c
            return s + dl, (0.0, z + math.sin(p) * dl, p)
        q = math.sin(p) - k * x
        if abs(q) > 1.0:
            return None
        best = None
        for base in (math.asin(q), math.pi - math.asin(q)):
            # k * ds = base + 2*pi*m - p; want ds with sign d and minimal length
            raw = (base - p) / k
            period = 2.0 * math.pi / abs(k)
            ds = math.fmod(raw * self.d, period)
            if ds < 0:
                ds += period
            ds *= self.d
            if best is None or abs(ds) < abs(best):
                best = ds
        if abs(best) > 10.0 * x + 1e-12:
            return None
        pe = p + k * best
        ze = z - (math.cos(pe) - math.cos(p)) / k
        return s + best, (0.0, ze, pe)

    def run(self) -> OrbitTrace:
        opts, st, d, n = self.opts, self.st, self.d, self.n
        init = self.init
        s = init.s
        Y = (init.x, init.z, init.phi)
        F = st.f(Y[0], Y[2])
        S, X, Z, P = [s], [Y[0]], [Y[1]], [Y[2]]
        events: list[Event] = []
        origin = None
        s_start = s
        if init.axis_delta is not None:
            phi0 = 0.0 if init.axis_delta == 1 else math.pi
            axis_state = ProfileState(0.0, 0.0, 0.0, phi0, d, init.axis_delta)
            origin = Event(EventKind.AXIS_ORTHOGONAL, 0.0, axis_state, {"delta": init.axis_delta})
            S.insert(0, 0.0)
            X.insert(0, 0.0)
            Z.insert(0, 0.0)
            P.insert(0, phi0)
            s_start = 0.0

        sections = []  # (s, x, z, sign sin, sign phi')
        if self.record_start and abs(math.cos(Y[2])) < 1e-14:
            ev = Event(EventKind.EQUATOR_CROSS, s, self._state(s, Y))
            events.append(ev)
            sections.append((s, Y[0], Y[1], _sgn(math.sin(Y[2])), _sgn(F[2])))

        e0_entry = None
        if opts.stop_at_equilibrium and self.e0 is not None:
            if self._e0_dist(Y) < opts.e0_tol:
                e0_entry = (s, Y)
        pole_count = 0
        indicators = [
            (EventKind.POLE_CROSS, _ind_pole, 0),
            (EventKind.EQUATOR_CROSS, _ind_equator, 0),
            (EventKind.GAMMA_CROSS, _ind_gamma, 0),
            (EventKind.ESCAPE, _ind_radius(opts.x_max), 1),
            ("capture", _ind_radius(opts.axis_capture), -1),
        ]
        g_prev = [ind(st, Y, F)[0] for _, ind, _ in indicators]
        g_prev = [0.0 if abs(g) < 1e-14 else g for g in g_prev]

        dt = min(opts.max_step, 0.01 * Y[0], self._chord_step(F[2]))
        err_prev = 1e-4
        termination = None
        while termination is None:
            remaining = opts.s_max - abs(s - s_start)
            if remaining <= 0:
                termination = Event(EventKind.BUDGET_EXHAUSTED, s, self._state(s, Y))
                break
            dt = min(dt, opts.max_step, self._chord_step(F[2]), remaining,
                     opts.axis_step_frac * Y[0])
            if dt < opts.min_step:
                raise StepSizeUnderflow(self._state(s, Y), dt)
            r = st.step(Y[0], Y[1], Y[2], F, d * dt)
            if r is None:
                dt *= 0.25
                continue
            xn, zn, pn, Fn, e = r
            sc0 = opts.tol_abs + opts.tol_rel * max(abs(Y[0]), abs(xn))
            sc1 = opts.tol_abs + opts.tol_rel * max(abs(Y[1]), abs(zn))
            sc2 = opts.tol_abs + opts.tol_rel * max(abs(Y[2]), abs(pn))
            err = math.sqrt(((e[0] / sc0) ** 2 + (e[1] / sc1) ** 2 + (e[2] / sc2) ** 2) / 3.0)
            if not math.isfinite(err):
                dt *= 0.25
                continue
            if err > 1.0:
                dt *= max(0.2, 0.9 * err ** -0.2)
                continue
            # accepted
            sa, Ya, Fa = s, Y, F
            sb, Yb, Fb = s + d * dt, (xn, zn, pn), Fn
            fac = 0.9 * max(err, 1e-10) ** -0.14 * err_prev ** 0.08
            err_prev = max(err, 1e-4)
            dt *= min(5.0, max(0.2, fac))

            found = []
            g_new = []
            for idx, (kind, ind, mode) in enumerate(indicators):
                gb = ind(st, Yb, Fb)[0]
                g_new.append(gb)
                ga = g_prev[idx]
                if ga == 0.0:
                    continue
                crossed = (ga < 0 <= gb) or (ga > 0 >= gb)
                if not crossed:
                    continue
                if mode == 1 and not ga < 0:
                    continue
                if mode == -1 and not ga > 0:
                    continue
                se, Ye, Fe = self._locate(ind, sa, Ya, Fa, sb, Yb, Fb, ga)
                found.append((d * se, kind, se, Ye, Fe))
            g_prev = g_new
            found.sort(key=lambda t: t[0])

            for _, kind, se, Ye, Fe in found:
                if kind == "capture":
                    contact = self._axis_contact(se, Ye, Fe)
                    if contact is None:
                        continue
                    sc, Yc = contact
                    k = (EventKind.AXIS_ORTHOGONAL if abs(math.sin(Yc[2])) <= ORTHOGONAL_SIN
                         else EventKind.AXIS_SINGULAR)
                    termination = Event(k, sc, self._state(sc, Yc))
                    break
                ev = Event(kind, se, self._state(se, Ye))
                if kind == EventKind.ESCAPE:
                    termination = ev
                    break
                events.append(ev)
                if kind == EventKind.POLE_CROSS:
                    pole_count += 1
                    if pole_count > opts.max_pole_crossings:
                        termination = Event(EventKind.BUDGET_EXHAUSTED, se, ev.state_at,
                                            {"reason": "max_pole_crossings"})
                        break
                if kind == EventKind.EQUATOR_CROSS:
                    sig = (_sgn(math.sin(Ye[2])), _sgn(Fe[2]))
                    match = None
                    for sec in reversed(sections):
                        if sec[3:] == sig:
                            match = sec
                            break
                    sections.append((se, Ye[0], Ye[1]) + sig)
                    if match is not None and abs(Ye[0] - match[1]) <= opts.closure_tol:
                        termination = Event(EventKind.CLOSURE, se, ev.state_at, {
                            "period": abs(se - match[0]),
                            "dz": Ye[1] - match[2],
                            "dx": Ye[0] - match[1],
                            "since": match[0],
                        })
                        break
            if termination is not None:
                self._append_final(S, X, Z, P, termination)
                break

            s, Y, F = sb, Yb, Fb
            S.append(s)
            X.append(Y[0])
            Z.append(Y[1])
            P.append(Y[2])

            if opts.stop_at_equilibrium and self.e0 is not None:
                if self._e0_dist(Y) < opts.e0_tol:
                    if e0_entry is None:
                        e0_entry = (s, Y)
                    elif abs(s - e0_entry[0]) >= opts.e0_window:
                        termination = Event(EventKind.EQUILIBRIUM_APPROACH, e0_entry[0],
                                            self._state(*e0_entry), {"s_stop": s})
                        break
                else:
                    e0_entry = None
            if len(S) >= opts.max_samples:
                termination = Event(EventKind.BUDGET_EXHAUSTED, s, self._state(s, Y),
                                    {"reason": "max_samples"})
                break

        arrays = [np.array(a) for a in (S, X, Z, P)]
        events.sort(key=lambda e: e.s_at)
        if d < 0:
            arrays = [a[::-1].copy() for a in arrays]
        return OrbitTrace(n, self.h, *arrays, events=events, termination=termination,
                          origin=origin, options=opts)

    def _append_final(self, S, X, Z, P, ev: Event):
        st = ev.state_at
        if len(S) >= 3:
            last = abs(st.s - S[-1])
            prev = abs(S[-1] - S[-2])
            if last < 0.1 * prev:
                for a in (S, X, Z, P):
                    a.pop()
        if st.s != S[-1]:
            S.append(st.s)
            X.append(st.x)
            Z.append(st.z)
            P.append(st.phi)

    def _e0_dist(self, Y):
        if self.e0 is None or _sgn(math.sin(Y[2])) != self.eps0:
            return math.inf
        return math.hypot(Y[0] - self.e0, math.cos(Y[2]))

    def _chord_step(self, k):
        k = abs(k)
        if k < 1e-300:
            return math.inf
        return (12.0 * self.opts.chord_tol / (k * k)) ** (1.0 / 3.0)


def _sgn(v):
    return (v > 0) - (v < 0)


def integrate_orbit(n: int, h: CurvatureProfile, init: ProfileState,
                    opts: IntegrationOptions | None = None) -> OrbitTrace:
    """Integrate from ``init`` in its ``direction`` until a terminal event.

    Raises :class:`StepSizeUnderflow` if the controller cannot proceed.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    return _Integrator(n, h, init, opts or IntegrationOptions()).run()


def integrate_both(n: int, h: CurvatureProfile, init: ProfileState,
                   opts: IntegrationOptions | None = None) -> OrbitTrace:
    """Integrate forward and backward from a regular point and join the halves.

    The result's ``termination`` is the forward end and ``origin`` the
    backward end.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    opts = opts or IntegrationOptions()
    fwd = _Integrator(n, h, replace(init, direction=1), opts).run()
    bwd = _Integrator(n, h, replace(init, direction=-1), opts, record_start=False).run()
    return join_traces(bwd, fwd)


def join_traces(bwd: OrbitTrace, fwd: OrbitTrace) -> OrbitTrace:
    """Join a backward and a forward trace that share their initial sample."""
    if bwd.s[-1] != fwd.s[0] or bwd.x[-1] != fwd.x[0] or bwd.phi[-1] != fwd.phi[0]:
        raise ValueError("traces do not share a starting sample")
    cut = len(bwd.s) - 1
    arrays = [np.concatenate([b[:cut], f]) for b, f in
              ((bwd.s, fwd.s), (bwd.x, fwd.x), (bwd.z, fwd.z), (bwd.phi, fwd.phi))]
    events = sorted(bwd.events + fwd.events, key=lambda e: e.s_at)
    return OrbitTrace(fwd.n, fwd.h, *arrays, events=events, termination=fwd.termination,
                      origin=bwd.termination, options=fwd.options)


def curvatures(trace: OrbitTrace) -> tuple[np.ndarray, np.ndarray]:
    """Principal curvatures (k1 from the field, k2 = sin(phi)/x) at every sample.

    Samples on the axis get ``k2 = k1 = h(+-1)`` (umbilic limit).
    """
    n, h = trace.n, trace.h
    y = np.cos(trace.phi)
    sn = np.sin(trace.phi)
    hv = np.array([h.value(v) for v in np.clip(y, -1.0, 1.0)])
    with np.errstate(divide="ignore", invalid="ignore"):
        k2 = np.where(trace.x > 0, sn / np.where(trace.x > 0, trace.x, 1.0), hv)
    k1 = n * hv - (n - 1) * k2
    return k1, k2


def fd_derivative(s: np.ndarray, f: np.ndarray, width: int = 7) -> np.ndarray:
    """Derivative of order ``width - 1`` on a nonuniform grid.

    Each node uses the ``width``-node window centred on it, shifted inward
    at the two ends of the array. Short arrays use all available nodes.
    ``s`` must be strictly increasing.
    """
    m = len(s)
    out = np.full(m, np.nan)
    if m < 3:
        return out
    if not np.all(np.diff(s) > 0):
        raise ValueError("grid must be strictly increasing")
    k = min(width, m)
    idx = np.arange(m)
    first = np.clip(idx - k // 2, 0, m - k)
    nodes = first[:, None] + np.arange(k)[None, :]
    offs = s[nodes] - s[idx][:, None]
    scale = np.max(np.abs(offs), axis=1)[:, None]
    u = offs / scale
    V = np.stack([u ** p for p in range(k)], axis=1)  # (m, power, node)
    rhs = np.zeros((m, k, 1))
    rhs[:, 1, 0] = 1.0
    w = np.linalg.solve(V, rhs)[..., 0] / scale
    out[:] = np.sum(w * f[nodes], axis=1)
    return out


def pmc_residual(trace: OrbitTrace, n: int | None = None, h: CurvatureProfile | None = None,
                 axis_tol: float | None = None) -> float:
    """Max over interior samples of ``|n h(cos phi) - (k1 + (n-1) k2)|``.

    ``k1`` is the finite-difference derivative of ``phi`` in ``s`` and
    ``k2 = sin(phi)/x``; samples closer than ``10 * axis_tol`` to the axis
    are skipped.
    """
    if len(trace.s) < 3:
        raise ValueError("need at least 3 samples")
    return residual_of_samples(
        trace.n if n is None else n,
        trace.h if h is None else h,
        trace.s, trace.x, trace.phi,
        trace.options.axis_tol if axis_tol is None else axis_tol,
    )


def residual_of_samples(n: int, h: CurvatureProfile, s, x, phi, axis_tol: float = 1e-8) -> float:
    """:func:`pmc_residual` on bare arrays (used for closed-form profiles)."""
    s, x, phi = (np.asarray(a, dtype=float) for a in (s, x, phi))
    keep = x >= 10 * axis_tol
    s, x, phi = s[keep], x[keep], phi[keep]
    if len(s) < 3:
        return 0.0
    k1 = fd_derivative(s, phi)[1:-1]
    y = np.cos(phi[1:-1])
    hv = np.array([h.value(v) for v in np.clip(y, -1.0, 1.0)])
    k2 = np.sin(phi[1:-1]) / x[1:-1]
    return float(np.max(np.abs(n * hv - (k1 + (n - 1) * k2))))
