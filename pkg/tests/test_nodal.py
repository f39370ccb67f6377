import numpy as np
import pytest

from hopfseg.experiments import admissible_fw, figure5_function
from hopfseg.nodal import boundary_zeros, counts, trace, verify_index
from hopfseg.rational import monomial, rational
from hopfseg.states import reconstruct


@pytest.fixture(scope="module")
def cubic_graph():
    st = reconstruct(monomial(0.25, 3), 0.0, resolution=256)
    return st, trace(st)


def test_constant_diameter():
    st = reconstruct(rational(0.25), 0.0, resolution=128)
    g = trace(st)
    assert (g.M, g.N, g.T) == (2, 2, 1)
    assert len(g.arcs) == 1
    assert len([v for v in g.vertices if v.kind == "boundary-zero"]) == 2
    rep = verify_index(g)
    assert rep.formula_check and rep.euler_check and rep.index_sum == 0
    # the arc is the vertical diameter
    pts = np.asarray(g.arcs[0].points)
    assert np.max(np.abs(pts.real)) < 1e-6


def test_cubic_five_rays(cubic_graph):
    st, g = cubic_graph
    assert (g.M, g.N, g.T) == (5, 5, 1)
    assert len(g.arcs) == 5
    rep = verify_index(g)
    assert rep.index_sum == 3
    assert rep.formula_check and rep.euler_check
    assert g.clean


def test_boundary_zero_angles(cubic_graph):
    st, _ = cubic_graph
    bz = boundary_zeros(st)
    targets = [np.pi / 5 + 2 * k * np.pi / 5 for k in range(5)]
    assert len(bz) == 5
    for z, t in zip(sorted(bz), targets):
        assert z == pytest.approx(t, abs=1e-9)


def test_vertex_arc_incidence(cubic_graph):
    _, g = cubic_graph
    for v in g.vertices:
        if v.kind == "interior-critical":
            assert g.incident(v.id) == v.multiplicity
        else:
            assert g.incident(v.id) == v.multiplicity - 1  # one interior arc


def test_counts_accessor(cubic_graph):
    _, g = cubic_graph
    assert counts(g) == (5, 5, 1)


def test_admissible_family_one_3pt_one_4pt():
    f, base = admissible_fw(0)
    st = reconstruct(f, base, resolution=256)
    g = trace(st)
    rep = verify_index(g)
    assert (g.M, g.N, g.T) == (5, 5, 1)
    assert rep.index_sum == 3  # 1 + 2
    assert rep.formula_check and rep.euler_check
    mults = sorted(v.multiplicity for v in g.vertices if v.kind == "interior-critical")
    assert mults == [3, 4]


def test_nonadmissible_angle_topology():
    w = 0.1 * np.exp(0.2j)
    f = rational(0.25, roots=[(0, 1), (w, 2)])
    st = reconstruct(f, 0.0, resolution=256)
    g = trace(st)
    rep = verify_index(g)
    # only the 3-point survives; the even zero is off the nodal set
    assert (g.M, g.N, g.T) == (5, 4, 2)
    assert rep.index_sum == 1
    assert rep.formula_check and rep.euler_check


def test_figure5_counts():
    f, base = figure5_function()
    st = reconstruct(f, base, resolution=256)
    g = trace(st)
    rep = verify_index(g)
    assert (g.M, g.N, g.T) == (7, 6, 2)
    assert rep.index_sum == 3
    assert rep.formula_check and rep.euler_check


def test_max_multiplicity_bound(cubic_graph):
    _, g = cubic_graph
    for v in g.vertices:
        if v.kind == "interior-critical":
            assert v.multiplicity <= g.N


def test_graph_export_dict(cubic_graph):
    _, g = cubic_graph
    d = g.to_dict()
    assert set(d) == {"vertices", "arcs", "M", "N", "T"}
    assert len(d["vertices"]) == len(g.vertices)
    assert all(set(v) == {"id", "x", "y", "kind", "index"} for v in d["vertices"])
    assert all(set(a) == {"from", "to", "points"} for a in d["arcs"])
