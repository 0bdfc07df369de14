"""Phase plane of the rotational profile equation.

Coordinates are ``x`` (distance to the axis) and ``y`` (the angle
function). On the branch where ``z' `` has sign ``eps`` the profile obeys

    x' = y
    y' = (n-1)(1-y^2)/x - n eps h(y) sqrt(1-y^2)

on the strip ``(0, inf) x (-1, 1)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .curvfn import CurvatureProfile, DomainError

__all__ = [
    "PhaseContext",
    "EquilibriumInfo",
    "Monotonicity",
    "vector_field",
    "equilibrium",
    "gamma",
    "monotonicity",
    "linearize_check",
]

GRACE = 1e-12
EXTREMUM_TOL = 1e-10


@dataclass(frozen=True)
class PhaseContext:
    n: int
    h: CurvatureProfile
    eps: int = 1

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"dimension n must be an integer >= 2, got {self.n!r}")
        if self.eps not in (-1, 1):
            raise ValueError(f"eps must be +1 or -1, got {self.eps!r}")


class EquilibriumInfo(NamedTuple):
    point: tuple[float, float]
    jacobian: np.ndarray
    eigenvalues: tuple[complex, complex]


class Monotonicity(NamedTuple):
    dy_dx_sign: int | None  # None when the orbit crosses y = 0 vertically
    y_extremum: bool


def _check_point(x: float, y: float) -> tuple[float, float]:
    x, y = float(x), float(y)
    if not (x > -GRACE) or not (abs(y) < 1.0 + GRACE):
        raise DomainError(f"({x!r}, {y!r}) outside the phase strip")
    if x <= 0.0 or abs(y) >= 1.0:
        # inside the grace band: nudge onto the open strip
        x = max(x, GRACE)
        y = math.copysign(min(abs(y), 1.0 - GRACE), y)
    return x, y


def _field(ctx: PhaseContext, x: float, y: float) -> tuple[float, float]:
    w = math.sqrt(max(0.0, 1.0 - y * y))
    n = ctx.n
    return y, (n - 1) * w * w / x - n * ctx.eps * ctx.h.value(y) * w


def vector_field(ctx: PhaseContext, x: float, y: float) -> tuple[float, float]:
    """Right-hand side ``(x', y')`` at ``(x, y)``."""
    x, y = _check_point(x, y)
    return _field(ctx, x, y)


def _jacobian(ctx: PhaseContext, x0: float) -> np.ndarray:
    n = ctx.n
    return np.array([[0.0, 1.0],
                     [-(n - 1) / x0 ** 2, -n * ctx.eps * ctx.h.deriv(0.0)]])


def equilibrium(ctx: PhaseContext) -> EquilibriumInfo | None:
    """The unique rest point ``((n-1)/(n eps h(0)), 0)``, or None if ``eps h(0) <= 0``."""
    eh = ctx.eps * ctx.h.value(0.0)
    if eh <= 0.0:
        return None
    x0 = (ctx.n - 1) / (ctx.n * eh)
    jac = _jacobian(ctx, x0)
    tr = jac[0, 0] + jac[1, 1]
    det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
    disc = cmath.sqrt(tr * tr / 4.0 - det)
    eig = (complex(tr / 2.0 + disc), complex(tr / 2.0 - disc))
    return EquilibriumInfo((x0, 0.0), jac, eig)


def gamma(ctx: PhaseContext, y: float) -> float | None:
    """Nullcline ``x = Gamma(y)``; None where ``eps h(y) <= 0``."""
    y = float(y)
    if abs(y) >= 1.0:
        raise DomainError(f"gamma needs |y| < 1, got {y!r}")
    eh = ctx.eps * ctx.h.value(y)
    if eh <= 0.0:
        return None
    return (ctx.n - 1) * math.sqrt(1.0 - y * y) / (ctx.n * eh)


def monotonicity(ctx: PhaseContext, x: float, y: float) -> Monotonicity:
    """Sign of ``dy/dx`` along the orbit through ``(x, y)``.

    Where the nullcline exists the sign is ``sign(y) * sign(Gamma(y) - x)``;
    where it does not, ``y'`` is positive and the sign is ``sign(y)``.
    """
    x, y = _check_point(x, y)
    g = gamma(ctx, y)
    extremum = g is not None and abs(x - g) <= EXTREMUM_TOL
    if y == 0.0:
        return Monotonicity(None, extremum)
    sy = 1 if y > 0 else -1
    if g is None:
        return Monotonicity(sy, False)
    if x > g:
        return Monotonicity(-sy, extremum)
    if x < g:
        return Monotonicity(sy, extremum)
    return Monotonicity(0, True)


def linearize_check(ctx: PhaseContext, step: float = 1e-5) -> float:
    """Max entrywise gap between the analytic and central-difference Jacobian at e0."""
    eq = equilibrium(ctx)
    if eq is None:
        raise ValueError("no equilibrium in this phase strip")
    x0, y0 = eq.point
    fd = np.empty((2, 2))
    for j, (dx, dy) in enumerate(((step, 0.0), (0.0, step))):
        fp = _field(ctx, x0 + dx, y0 + dy)
        fm = _field(ctx, x0 - dx, y0 - dy)
        fd[:, j] = [(a - b) / (2.0 * step) for a, b in zip(fp, fm)]
    return float(np.max(np.abs(fd - eq.jacobian)))
