import numpy as np
import pytest

from hopfseg.diffusion import (
    DiffusionConfig,
    boundary_from_state,
    interface_cells,
    interface_distance,
    solve,
)
from hopfseg.nodal import trace
from hopfseg.rational import monomial, rational
from hopfseg.states import reconstruct


@pytest.fixture(scope="module")
def half_disk_state():
    return reconstruct(rational(0.25), 0.0, resolution=128)


def test_config_invariants():
    g = np.zeros((2, 32))
    g[0, :16] = 1.0
    g[1, 16:] = 0.5
    DiffusionConfig(g=g, angles=np.arange(32.0), mu=10.0, resolution=64)
    bad = g.copy()
    bad[1, 0] = 0.1  # overlapping supports
    with pytest.raises(ValueError):
        DiffusionConfig(g=bad, angles=np.arange(32.0), mu=10.0, resolution=64)
    with pytest.raises(ValueError):
        DiffusionConfig(g=-g, angles=np.arange(32.0), mu=10.0, resolution=64)


def test_harmonic_constant_data():
    cfg = DiffusionConfig(g=np.ones((1, 64)), angles=2 * np.pi * np.arange(64) / 64,
                          mu=0.0, resolution=64)
    fld = solve(cfg, warm_start=False)
    assert np.abs(fld.u[0][fld.inside] - 1.0).max() < 1e-4


def test_mu_zero_decouples(half_disk_state):
    cfg = boundary_from_state(half_disk_state, samples=256)
    fld = solve(cfg, mu=0.0)
    # each species solves an independent Dirichlet problem: u1 approximates
    # the harmonic extension of max(cos, 0), compare at the center
    # harmonic extension value at 0 = mean of boundary data = 1/pi
    G = fld.resolution
    mid = G // 2
    total = fld.u[:, mid, mid].sum()
    assert total == pytest.approx(2 / np.pi, rel=0.05)


def test_boundary_from_state_halves(half_disk_state):
    cfg = boundary_from_state(half_disk_state, samples=512)
    th = cfg.angles
    # one species owns the cos > 0 arc, the other the cos < 0 arc
    right = [j for j in range(2) if cfg.g[j][0] > 0]
    assert len(right) == 1
    gr = cfg.g[right[0]]
    gl = cfg.g[1 - right[0]]
    assert np.all(np.cos(th[gr > 0]) > -1e-9)
    assert np.all(np.cos(th[gl > 0]) < 1e-9)
    assert np.allclose(cfg.g.sum(axis=0), np.abs(np.cos(th)), atol=1e-6)


def test_boundary_from_state_cubic_bumps():
    st = reconstruct(monomial(0.25, 3), 0.0, resolution=128)
    cfg = boundary_from_state(st, samples=640)
    assert cfg.g.shape[0] == 5
    assert np.allclose(cfg.g.sum(axis=0), np.abs(0.4 * np.cos(2.5 * cfg.angles)), atol=1e-6)
    # support arcs have equal angular length 2 pi / 5
    for j in range(5):
        frac = (cfg.g[j] > 0).mean()
        assert frac == pytest.approx(0.2, abs=0.02)


def test_maximum_principle(half_disk_state):
    cfg = boundary_from_state(half_disk_state, samples=256)
    fld = solve(cfg, mu=100.0)
    for j in range(2):
        assert fld.u[j].min() >= 0.0
        assert fld.u[j].max() <= cfg.g[j].max() + 1e-9


def test_superharmonic_difference(half_disk_state):
    # sum_k u_k - 2 u_j is discretely superharmonic away from the embedded
    # boundary ring (rim stencils see the raw Dirichlet data)
    cfg = boundary_from_state(half_disk_state, samples=256)
    fld = solve(cfg, mu=1000.0)
    G = fld.resolution
    h = 2.0 / G
    c = -1.0 + (np.arange(G) + 0.5) * h
    X, Y = np.meshgrid(c, c)
    u = fld.u
    tot = u.sum(axis=0)
    for j in range(2):
        v = tot - 2 * u[j]
        lap = (
            np.roll(v, 1, 0) + np.roll(v, -1, 0) + np.roll(v, 1, 1) + np.roll(v, -1, 1)
            - 4 * v
        )
        core = fld.inside & (np.hypot(X, Y) < 0.95)
        assert lap[core].max() <= 1e-6


def test_interface_matches_diameter(half_disk_state):
    cfg = boundary_from_state(half_disk_state, samples=512)
    fld = solve(cfg, mu=1e4)
    pts = interface_cells(fld)
    assert len(pts) > 0
    assert np.abs(pts[:, 0]).max() < 3 * (2 / fld.resolution)
    g = trace(half_disk_state)
    d = interface_distance(fld, half_disk_state, g)
    assert d <= 2.0


def test_defect_decreases_with_mu(half_disk_state):
    cfg = boundary_from_state(half_disk_state, samples=256)
    defects = [solve(cfg, mu=mu).defect for mu in (1e2, 1e3, 1e4)]
    assert defects[0] > defects[1] > defects[2]


def test_identical_partitions_zero_distance(half_disk_state):
    g = trace(half_disk_state)
    cfg = boundary_from_state(half_disk_state, samples=512)
    fld = solve(cfg, mu=1e4)
    d1 = interface_distance(fld, half_disk_state, g)
    d2 = interface_distance(fld, half_disk_state, g)
    assert d1 == d2  # deterministic
