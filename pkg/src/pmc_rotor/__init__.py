"""Rotational hypersurfaces whose mean curvature is a prescribed function of the angle function.

Modules: :mod:`curvfn` (the function ``h``), :mod:`phase` (phase plane),
:mod:`integrate` (profile integration and events), :mod:`classify`
(surface types), :mod:`oracles` (closed-form references), :mod:`geomio`
(OBJ/SVG/CSV output) and :mod:`cli`.
"""
from .classify import SurfaceClass, Verdict, classify, delaunay_family, embedded
from .curvfn import Constant, CurvatureProfile, DomainError, GrimReaper, Polynomial
from .integrate import (
    Event,
    EventKind,
    IntegrationOptions,
    OrbitTrace,
    ProfileState,
    StepSizeUnderflow,
    integrate_both,
    integrate_orbit,
    pmc_residual,
    start_at_axis,
    start_at_point,
)
from .phase import PhaseContext

__version__ = "0.1.0"
