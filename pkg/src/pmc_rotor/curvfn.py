"""Prescribed mean curvature functions ``h`` of the angle function.

A profile is a closed-form function on ``[-1, 1]``. Three kinds exist:

* :class:`Constant` -- ``h(y) = c``
* :class:`Polynomial` -- ``h(y) = sum(c_k y**k)``, ascending powers
* :class:`GrimReaper` -- the mean curvature of the rotated grim-reaper
  curve ``z = -log(cos x)`` written as a function of its angle function

All profiles are immutable and evaluation is pure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

__all__ = [
    "CurvatureProfile",
    "Constant",
    "Polynomial",
    "GrimReaper",
    "DomainError",
    "SignInfo",
    "evaluate",
    "evaluate_deriv",
    "parity",
    "sign_and_zeros",
    "from_json",
]

DOMAIN_GRACE = 1e-12


class DomainError(ValueError):
    """Raised when a query falls outside the admissible domain."""


def _check_y(y: float) -> float:
    y = float(y)
    if not abs(y) <= 1.0 + DOMAIN_GRACE:
        raise DomainError(f"angle function value {y!r} outside [-1, 1]")
    return min(1.0, max(-1.0, y))


class CurvatureProfile:
    """Base class. Subclasses implement ``value`` and ``deriv`` without domain checks."""

    kind: str = ""

    def value(self, y: float) -> float:
        raise NotImplementedError

    def deriv(self, y: float) -> float:
        raise NotImplementedError

    def __call__(self, y: float) -> float:
        return self.value(_check_y(y))

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(CurvatureProfile):
    c: float
    kind = "constant"

    def value(self, y: float) -> float:
        return self.c

    def deriv(self, y: float) -> float:
        return 0.0

    def to_json(self) -> dict:
        return {"kind": "constant", "c": self.c}


@dataclass(frozen=True)
class Polynomial(CurvatureProfile):
    coeffs: tuple[float, ...]
    kind = "poly"
    _dcoeffs: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs:
            raise ValueError("polynomial needs at least one coefficient")
        if not all(math.isfinite(c) for c in coeffs):
            raise ValueError("polynomial coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)
        dcoeffs = tuple(k * c for k, c in enumerate(coeffs))[1:] or (0.0,)
        object.__setattr__(self, "_dcoeffs", dcoeffs)

    @staticmethod
    def _horner(coeffs, y):
        acc = 0.0
        for c in reversed(coeffs):
            acc = acc * y + c
        return acc

    def value(self, y: float) -> float:
        return self._horner(self.coeffs, y)

    def deriv(self, y: float) -> float:
        return self._horner(self._dcoeffs, y)

    def to_json(self) -> dict:
        return {"kind": "poly", "coeffs": list(self.coeffs)}


# sin(t)/t and d/dy[sin(t)/t] with t = arccos(y), expanded about t = 0
_SINC_SERIES = (1.0, -1.0 / 6.0, 1.0 / 120.0, -1.0 / 5040.0, 1.0 / 362880.0)
_DSINC_SERIES = (1.0 / 3.0, 1.0 / 45.0, 2.0 / 945.0, 1.0 / 4725.0)
_SERIES_SWITCH = 1.0 - 1e-6
_DERIV_SERIES_SWITCH = 0.9999  # t < 0.0142: series error below 1e-16

# value, slope and curvature at y = 0+ (closed forms)
_GR_H0 = 1.0 / math.pi
_GR_H1 = 0.5 * (1.0 + 4.0 / math.pi**2)
_GR_H2 = 8.0 / math.pi**3 - 1.0 / math.pi
_GR_A = _GR_H1 / _GR_H0
_GR_B = 0.5 * (_GR_H2 / _GR_H0 - _GR_A**2)


def _poly_t2(coeffs, t2):
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * t2 + c
    return acc


@dataclass(frozen=True)
class GrimReaper(CurvatureProfile):
    """Mean curvature of the rotated grim reaper as a function of ``y``.

    On ``[0, 1]``::

        h(y) = (y + sqrt(1 - y**2) / arccos(y)) / 2

    which is ``(k1 + k2) / 2`` for the profile ``z = -log(cos x)`` with
    ``y = cos x``. The removable singularity at ``y = 1`` is handled by a
    series in ``t = arccos(y)``. For ``y < 0`` the function continues as
    ``h0 * exp(a*y + b*y**2)``, matching value, slope and curvature at 0,
    so the extension is C^2 and strictly positive.
    """

    kind = "grim_reaper"

    def value(self, y: float) -> float:
        if y < 0.0:
            return _GR_H0 * math.exp(y * (_GR_A + _GR_B * y))
        t = math.acos(y)
        if y > _SERIES_SWITCH:
            s = _poly_t2(_SINC_SERIES, t * t)
        else:
            s = math.sin(t) / t
        return 0.5 * (y + s)

    def deriv(self, y: float) -> float:
        if y < 0.0:
            return _GR_H0 * (_GR_A + 2.0 * _GR_B * y) * math.exp(y * (_GR_A + _GR_B * y))
        t = math.acos(y)
        if y > _DERIV_SERIES_SWITCH:
            ds = _poly_t2(_DSINC_SERIES, t * t)
        else:
            ds = -(t * math.cos(t) - math.sin(t)) / (t * t * math.sin(t))
        return 0.5 * (1.0 + ds)

    def to_json(self) -> dict:
        return {"kind": "grim_reaper"}


def evaluate(h: CurvatureProfile, y: float) -> float:
    """``h(y)``; raises :class:`DomainError` when ``|y| > 1``."""
    return h.value(_check_y(y))


def evaluate_deriv(h: CurvatureProfile, y: float) -> float:
    """``h'(y)``; raises :class:`DomainError` when ``|y| > 1``."""
    return h.deriv(_check_y(y))


def parity(h: CurvatureProfile, tol: float = 1e-12) -> str:
    """Return ``"even"`` or ``"not_even"``.

    Even means ``|h(y) - h(-y)| <= tol`` on a 1001-point grid and, for
    polynomials, every odd coefficient at most ``tol`` in magnitude.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    grid = np.linspace(0.0, 1.0, 501)
    gap = max(abs(h.value(y) - h.value(-y)) for y in grid)
    even = gap <= tol
    if isinstance(h, Polynomial):
        even = even and all(abs(c) <= tol for c in h.coeffs[1::2])
    return "even" if even else "not_even"


class SignInfo(NamedTuple):
    min_value: float
    max_value: float
    zeros: list[tuple[float, bool]]  # (location, tangential)


def sign_and_zeros(h: CurvatureProfile, grid_size: int = 2048) -> SignInfo:
    """Range of ``h`` on ``[-1, 1]`` and its zeros.

    Transversal zeros come from sign changes on the grid; tangential ones
    from local minima of ``|h|`` refined through ``h'``. A tangential zero
    is reported with flag ``True``; no multiplicity is inferred.
    """
    ys = np.linspace(-1.0, 1.0, grid_size)
    vals = np.array([h.value(y) for y in ys])
    zeros: list[tuple[float, bool]] = []
    extra: list[float] = []

    def f(y):
        return h.value(y)

    for i, (y, v) in enumerate(zip(ys, vals)):
        if abs(v) < 1e-12:
            zeros.append((float(y), _is_touching(vals, i)))
    for i in range(grid_size - 1):
        a, b = vals[i], vals[i + 1]
        if abs(a) < 1e-12 or abs(b) < 1e-12:
            continue
        if a * b < 0:
            r = brentq(f, ys[i], ys[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
            zeros.append((float(r), False))

    # local extrema of h between grid nodes (tangential zeros, true min/max)
    for i in range(1, grid_size - 1):
        a, b, c = abs(vals[i - 1]), abs(vals[i]), abs(vals[i + 1])
        if not (b <= a and b <= c) or not (b < a or b < c) or vals[i - 1] * vals[i + 1] < 0:
            continue
        lo, hi = ys[i - 1], ys[i + 1]
        y_star = _critical_point(h, lo, hi)
        extra.append(y_star)
        v = h.value(y_star)
        if abs(v) < 1e-10 and not any(abs(z - y_star) < 1e-6 for z, _ in zeros):
            zeros.append((y_star, True))

    sample = list(vals) + [h.value(y) for y in extra] + [h.value(z) for z, _ in zeros]
    zeros.sort()
    return SignInfo(float(min(sample)), float(max(sample)), zeros)


def _is_touching(vals, i) -> bool:
    left = vals[i - 1] if i > 0 else None
    right = vals[i + 1] if i + 1 < len(vals) else None
    if left is None or right is None:
        return False
    return left * right > 0


def _critical_point(h: CurvatureProfile, lo: float, hi: float) -> float:
    da, db = h.deriv(lo), h.deriv(hi)
    if da * db < 0:
        return float(brentq(h.deriv, lo, hi, xtol=1e-15))
    res = minimize_scalar(lambda y: h.value(y) ** 2, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-14})
    return float(res.x)


def from_json(obj: dict) -> CurvatureProfile:
    """Build a profile from ``{"kind": ...}`` records as used in run configs."""
    kind = obj.get("kind")
    if kind == "constant":
        return Constant(float(obj["c"]))
    if kind == "poly":
        return Polynomial(tuple(obj["coeffs"]))
    if kind == "grim_reaper":
        return GrimReaper()
    raise ValueError(f"unknown curvature kind {kind!r}")
