"""Closed-form reference profiles and the ball-domain solvability test."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

__all__ = [
    "OracleProfile",
    "cmc_sphere",
    "cmc_cylinder",
    "minimal_catenoid",
    "grim_reaper_bowl",
    "grim_reaper_height",
    "unit_ball_volume",
    "DirichletCheck",
    "dirichlet_ball_check",
]

Sampler = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class OracleProfile:
    """Exact unit-speed profile ``s -> (x, z, phi)`` on ``s_range``."""

    name: str
    sampler: Sampler
    s_range: tuple[float, float]

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        lo, hi = self.s_range
        if np.any(s < lo - 1e-12) or np.any(s > hi + 1e-12):
            raise ValueError(f"{self.name}: arclength outside [{lo}, {hi}]")
        return self.sampler(s)

    def sample(self, ds: float = 1e-3, s_range: tuple[float, float] | None = None):
        """``(s, x, z, phi)`` on a uniform grid of spacing about ``ds``."""
        lo, hi = s_range or self.s_range
        num = max(3, int(math.ceil((hi - lo) / ds)) + 1)
        s = np.linspace(lo, hi, num)
        return (s, *self(s))


def cmc_sphere(H: float, n: int = 2) -> OracleProfile:
    """Round sphere of radius ``1/H`` starting at its south pole."""
    if not H > 0:
        raise ValueError("H must be positive")

    def sampler(s):
        return np.sin(H * s) / H, (1.0 - np.cos(H * s)) / H, H * s

    return OracleProfile(f"sphere(H={H:g}, n={n})", sampler, (0.0, math.pi / H))


def cmc_cylinder(h0: float, n: int = 2) -> float:
    """Radius ``(n-1)/(n |h0|)`` of the cylinder with mean curvature ``h0``."""
    if h0 == 0:
        raise ValueError("h0 must be nonzero")
    return (n - 1) / (n * abs(h0))


def minimal_catenoid(c: float = 1.0, s_max: float = 10.0) -> OracleProfile:
    """``x = c cosh(z/c)`` by arclength ``s = c sinh(z/c)``; neck at ``s = 0``."""
    if not c > 0:
        raise ValueError("c must be positive")

    def sampler(s):
        x = np.hypot(c, s)
        return x, c * np.arcsinh(s / c), np.arctan2(c, s)

    return OracleProfile(f"catenoid(c={c:g})", sampler, (-s_max, s_max))


def grim_reaper_bowl(s_max: float = 20.0) -> OracleProfile:
    """Rotated grim reaper ``z = -log(cos x)`` with ``phi = x``.

    In arclength ``x = gd(s)`` and ``z = log(cosh s)``.
    """

    def sampler(s):
        x = 2.0 * np.arctan(np.tanh(0.5 * s))
        return x, _log_cosh(s), x

    return OracleProfile("grim_reaper", sampler, (0.0, s_max))


def _log_cosh(s):
    a = np.abs(s)
    return a + np.log1p(np.exp(-2.0 * a)) - math.log(2.0)


def grim_reaper_height(x):
    """Height ``-log(cos x)`` of the grim-reaper profile over radius ``x``."""
    return -np.log(np.cos(x))


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in ``R^n``: ``pi^(n/2) / Gamma(n/2 + 1)``.

    The gamma value at integers and half integers is built by recursion.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n % 2 == 0:
        g = float(math.factorial(n // 2))
    else:
        g = math.sqrt(math.pi) / 2.0  # Gamma(3/2)
        for k in range(3, n + 1, 2):  # Gamma(k/2 + 1) = (k/2) Gamma(k/2)
            g *= k / 2.0
    return math.pi ** (n / 2.0) / g


class DirichletCheck(NamedTuple):
    cond_volume: bool
    cond_boundary: bool
    solvable: bool


def dirichlet_ball_check(n: int, H_max: float, rho: float) -> DirichletCheck:
    """Sufficient conditions for the Dirichlet problem over a ball of radius ``rho``.

    Volume: ``H_max^n * omega_n * rho^n < omega_n``. Boundary: the boundary
    sphere has mean curvature ``1/rho``, which must be at least
    ``n/(n-1) * H_max``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if H_max < 0 or not rho > 0:
        raise ValueError("need H_max >= 0 and rho > 0")
    omega = unit_ball_volume(n)
    vol = (H_max ** n) * omega * rho ** n
    cond_volume = vol < omega
    cond_boundary = 1.0 / rho >= n / (n - 1) * H_max
    return DirichletCheck(cond_volume, cond_boundary, cond_volume and cond_boundary)
