import numpy as np
import pytest

from hopfseg.errors import PoleHit, RootHit, RootOnContour
from hopfseg.rational import (
    RationalFactored,
    ZeroRecord,
    monomial,
    multiply,
    order_at,
    rational,
    winding_count,
)


def test_eval_examples():
    f = monomial(0.25, 3)
    assert f(1.0) == pytest.approx(0.25, rel=1e-14)
    assert f(0.0) == 0
    g = rational(0.25, roots=[(0, 1), (0.1, 2)])
    assert g(0.2) == pytest.approx(0.2 * 0.1**2 / 4, rel=1e-13)


def test_eval_vectorized_matches_scalar():
    f = rational(0.5 - 0.25j, roots=[(0.2 + 0.1j, 2), (-0.3, 1)],
                 unit_num=[(1.4, 1)], unit_den=[(-1.7 + 0.4j, 2)])
    z = np.array([0.1, -0.2 + 0.3j, 0.7j])
    vec = f.eval(z)
    for i, zi in enumerate(z):
        assert vec[i] == pytest.approx(f.eval(complex(zi)), rel=1e-14)


def test_pole_hit():
    f = rational(1.0, unit_den=[(1.5, 1)])
    with pytest.raises(PoleHit):
        f.eval(1.5)


def test_log_derivative_examples():
    f = monomial(0.25, 3)
    assert f.log_derivative(1.0) == pytest.approx(3.0, rel=1e-14)
    g = rational(1.0, roots=[(0, 1), (0.3, 2)])
    assert g.log_derivative(1.0) == pytest.approx(1 + 2 / 0.7, rel=1e-14)
    c = rational(0.25)
    assert c.log_derivative(0.37 + 0.1j) == 0
    with pytest.raises(RootHit):
        g.log_derivative(0.3)


def test_order_at_examples():
    f = monomial(0.25, 3)
    assert order_at(f, 0.0) == 3
    assert order_at(f, 0.5) == 0
    g = rational(0.25, roots=[(0, 1), (0.1, 2)])
    assert order_at(g, 0.1) == 2


def test_order_matches_log_slope():
    # ord agrees with the limit exponent of log|f| along shrinking circles
    f = rational(0.3 + 0.1j, roots=[(0.2 + 0.2j, 3)], unit_num=[(1.3, 1)])
    z0 = 0.2 + 0.2j
    slopes = []
    for r in (1e-3, 1e-4):
        th = np.linspace(0, 2 * np.pi, 32, endpoint=False)
        vals = np.abs(f.eval(z0 + r * np.exp(1j * th))).max()
        slopes.append((np.log(vals), np.log(r)))
    est = (slopes[0][0] - slopes[1][0]) / (slopes[0][1] - slopes[1][1])
    assert abs(est - 3) < 0.1


def test_winding_examples():
    h = rational(1.0, roots=[(0, 1), (0.3, 2)])
    assert winding_count(h, 0.0, 0.5) == 3
    assert winding_count(h, 0.0, 0.1) == 1
    f = monomial(0.25, 3)
    assert winding_count(f, 0.0, 0.9) == 3


def test_winding_root_on_contour():
    h = rational(1.0, roots=[(0.5, 1)])
    with pytest.raises(RootOnContour):
        winding_count(h, 0.0, 0.5)


def test_root_merging_and_validation():
    f = rational(1.0, roots=[(0.1, 1), (0.1 + 1e-14, 2)])
    assert f.interior_roots == ((0.1 + 0j, 3),)
    with pytest.raises(ValueError):
        rational(0.0, roots=[(0, 1)])
    with pytest.raises(ValueError):
        rational(1.0, roots=[(0.99, 1)])       # inside the boundary band
    with pytest.raises(ValueError):
        rational(1.0, unit_num=[(1.01, 1)])    # unit factor too close


def test_zero_record_parity():
    assert ZeroRecord(location=0.1, order=3).parity == "odd"
    assert ZeroRecord(location=0.1, order=2).parity == "even"
    with pytest.raises(ValueError):
        ZeroRecord(location=0.0, order=0)


def test_multiply_closure(rng):
    for _ in range(5):
        f = rational(
            rng.normal() + 1j * rng.normal() or 1.0,
            roots=[(0.5 * (rng.random() + 1j * rng.random()) - 0.25 - 0.25j,
                    int(rng.integers(1, 3)))],
        )
        g = rational(1.3, roots=[(0.3j, 2)], unit_den=[(2.0, 1)])
        h = multiply(f, g)
        z = 0.3 - 0.2j
        assert h.eval(z) == pytest.approx(f.eval(z) * g.eval(z), rel=1e-12)


def test_winding_counts_stored_multiplicities(rng):
    for _ in range(6):
        k = int(rng.integers(1, 4))
        roots = [
            (0.8 * (rng.random() + 1j * rng.random()) - 0.4 - 0.4j, int(rng.integers(1, 4)))
            for _ in range(k)
        ]
        f = rational(1.0 + 0.5j, roots=roots)
        r = 0.9
        if any(abs(abs(z) - r) < 1e-3 for z, _ in f.interior_roots):
            continue
        expected = sum(m for z, m in f.interior_roots if abs(z) < r)
        assert winding_count(f, 0.0, r) == expected


def test_immutability():
    f = monomial(1.0, 2)
    with pytest.raises(Exception):
        f.leading = 2.0


def test_self_check_winding_oracle(rng):
    for _ in range(4):
        k = int(rng.integers(1, 4))
        roots = [
            (0.9 * (rng.random() + 1j * rng.random()) - 0.45 - 0.45j, int(rng.integers(1, 3)))
            for _ in range(k)
        ]
        f = rational(0.8 + 0.3j, roots=roots, unit_den=[(1.9 - 0.5j, 1)])
        assert f.self_check()
