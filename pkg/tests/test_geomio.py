import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pmc_rotor.curvfn import Constant, Polynomial
from pmc_rotor.geomio import (
    CSV_HEADER,
    PortraitOptions,
    parse_profile_csv,
    portrait_svg,
    profile_csv,
    revolve,
    to_obj,
)
from pmc_rotor.integrate import (
    Event,
    EventKind,
    OrbitTrace,
    ProfileState,
    integrate_orbit,
    start_at_axis,
)
from pmc_rotor.oracles import cmc_sphere
from pmc_rotor.phase import PhaseContext

EVEN = Polynomial((1.0, 0.0, 1.0))


@pytest.fixture(scope="module")
def sphere_trace():
    return integrate_orbit(2, Constant(1.0), start_at_axis(2, Constant(1.0), 1))


# -- meshes -------------------------------------------------------------------------------

def test_sphere_mesh_area(sphere_trace):
    mesh = revolve(sphere_trace.x, sphere_trace.z, 64)
    assert mesh.area() == pytest.approx(4 * math.pi, rel=1e-2)


def test_sphere_mesh_is_closed(sphere_trace):
    mesh = revolve(sphere_trace.x, sphere_trace.z, 16)
    edges = {}
    for tri in mesh.triangles:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (min(a, b), max(a, b))
            edges[key] = edges.get(key, 0) + 1
    assert set(edges.values()) == {2}
    V, E, F = len(mesh.vertices), len(edges), len(mesh.triangles)
    assert V - E + F == 2  # genus 0


def test_sphere_faces_point_outward():
    _, x, z, _ = cmc_sphere(1.0).sample(1e-2)
    mesh = revolve(x, z, 32)
    a, b, c = (mesh.vertices[mesh.triangles[:, k]] for k in range(3))
    normals = np.cross(b - a, c - a)
    centres = (a + b + c) / 3 - np.array([0.0, 0.0, 1.0])
    assert np.all(np.einsum("ij,ij->i", normals, centres) > 0)


def test_cylinder_mesh_area():
    z = np.linspace(0.0, 1.0, 11)
    mesh = revolve(np.full_like(z, 0.5), z, 64)
    assert mesh.area() == pytest.approx(math.pi, rel=1e-2)


def test_smallest_mesh():
    mesh = revolve([1.0, 1.0], [0.0, 1.0], 3)
    assert mesh.vertices.shape == (6, 3)
    assert mesh.triangles.shape == (6, 3)


def test_revolve_validation():
    with pytest.raises(ValueError):
        revolve([1.0], [0.0])
    with pytest.raises(ValueError):
        revolve([1.0, 1.0], [0.0, 1.0], 2)


@pytest.mark.parametrize("m", [3, 7, 64])
def test_rotation_permutes_vertices(sphere_trace, m):
    mesh = revolve(sphere_trace.x[::50], sphere_trace.z[::50], m)
    t = 2 * math.pi / m
    R = np.array([[math.cos(t), -math.sin(t), 0], [math.sin(t), math.cos(t), 0], [0, 0, 1]])
    rotated = mesh.vertices @ R.T
    key = lambda v: np.lexsort(np.round(v, 9).T[::-1])
    a = mesh.vertices[key(mesh.vertices)]
    b = rotated[key(rotated)]
    assert np.max(np.abs(a - b)) <= 1e-12


def test_obj_format():
    mesh = revolve([1.0, 1.0], [0.0, 1.0], 3)
    lines = to_obj(mesh).splitlines()
    assert sum(ln.startswith("v ") for ln in lines) == 6
    faces = [ln for ln in lines if ln.startswith("f ")]
    assert len(faces) == 6
    idx = [int(v) for ln in faces for v in ln.split()[1:]]
    assert min(idx) == 1 and max(idx) == 6


# -- portraits -------------------------------------------------------------------------------

def test_portrait_even_positive():
    svg = portrait_svg(PhaseContext(2, EVEN, 1))
    assert svg.count('class="gamma"') == 1
    assert svg.count('class="equilibrium"') == 1
    assert 'data-x="0.5" data-y="0"' in svg
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")


def test_portrait_without_nullcline():
    svg = portrait_svg(PhaseContext(2, Polynomial((-1.0, 0.0, 1.0)), 1))
    assert 'class="gamma"' not in svg
    assert 'class="equilibrium"' not in svg


def test_portrait_skeleton():
    svg = portrait_svg(None)
    assert 'class="frame"' in svg
    assert "polyline" not in svg and "circle" not in svg
    import xml.dom.minidom

    xml.dom.minidom.parseString(svg)


def test_portrait_with_orbit_is_deterministic(sphere_trace):
    ctx = PhaseContext(2, Constant(1.0), 1)
    opts = PortraitOptions(x_view=1.2)
    a = portrait_svg(ctx, [sphere_trace], opts)
    b = portrait_svg(ctx, [sphere_trace], opts)
    assert a == b
    assert 'class="orbit"' in a
    import xml.dom.minidom

    xml.dom.minidom.parseString(a)


# -- CSV -------------------------------------------------------------------------------------

def test_csv_round_trip(sphere_trace):
    data = profile_csv(sphere_trace)
    cols, events = parse_profile_csv(data)
    for name in ("s", "x", "z", "phi"):
        assert np.array_equal(cols[name], getattr(sphere_trace, name))
    kinds = [e[0] for e in events]
    assert kinds[0] == "AxisOrthogonal" and kinds[-1] == "AxisOrthogonal"
    assert "EquatorCross" in kinds
    assert data.decode().splitlines()[0] == CSV_HEADER
    # kappa1 and kappa2 are both 1 on the unit sphere
    inner = cols["x"] > 1e-3
    assert np.allclose(cols["kappa1"][inner], 1.0, atol=1e-6)
    assert np.allclose(cols["kappa2"][inner], 1.0, atol=1e-6)


def _trace(rows):
    a = np.array(rows, dtype=float).reshape(-1, 4)
    st0 = ProfileState(0.0, 1.0, 0.0, 0.0)
    ev = Event(EventKind.BUDGET_EXHAUSTED, 0.0, st0)
    return OrbitTrace(2, Constant(1.0), a[:, 0], a[:, 1], a[:, 2], a[:, 3], [], ev)


def test_csv_empty_trace():
    tr = _trace([])
    data = profile_csv(tr).decode()
    lines = data.splitlines()
    assert lines[0] == CSV_HEADER
    assert all(ln.startswith("#") for ln in lines[1:])


finite = st.floats(allow_nan=False, allow_infinity=False, min_value=-1e300, max_value=1e300)


@settings(max_examples=100, deadline=None)
@given(rows=st.lists(st.tuples(finite, st.floats(1e-300, 1e300), finite, finite), min_size=0, max_size=12))
def test_csv_round_trip_bitwise(rows):
    tr = _trace(sorted(rows))
    cols, _ = parse_profile_csv(profile_csv(tr))
    for name in ("s", "x", "z", "phi"):
        assert cols[name].tobytes() == getattr(tr, name).tobytes()


def test_csv_parse_rejects_bad_header():
    with pytest.raises(ValueError):
        parse_profile_csv(b"a,b\n")
