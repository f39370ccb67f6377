"""Adaptive Gauss-Kronrod quadrature with square-root branch tracking.

The integrand everywhere in this package is f^{1/2} along straight segments,
with f rational in factored form.  The branch is fixed by continuity: a
subinterval is accepted only if the argument of f turns by less than pi/2
between consecutive nodes, which makes the nearest-sign choice against the
running reference value provably correct.  Segments ending at a root of odd
local order are integrated in a substituted parameter (t = s^2) so the
integrand is smooth there.
"""

from __future__ import annotations

import numpy as np

from .errors import StepCollapse, ToleranceNotMet

# QUADPACK 15-point Kronrod rule on [-1, 1]; Gauss nodes are every other one.
_XGK = np.array([
    -0.9914553711208126, -0.9491079123427585, -0.8648644233597691,
    -0.7415311855993944, -0.5860872354676911, -0.4058451513773972,
    -0.2077849550078985, 0.0, 0.2077849550078985, 0.4058451513773972,
    0.5860872354676911, 0.7415311855993944, 0.8648644233597691,
    0.9491079123427585, 0.9914553711208126,
])
_WGK = np.array([
    0.0229353220105292, 0.0630920926299785, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278, 0.2044329400752989,
    0.1903505780647854, 0.1690047266392679, 0.1406532597155259,
    0.1047900103222502, 0.0630920926299785, 0.0229353220105292,
])
_WG7 = np.array([
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694, 0.3818300505051189, 0.2797053914892767,
    0.1294849661688697,
])
_GAUSS_IDX = np.arange(1, 15, 2)

_MAX_ARG_STEP = 0.45 * np.pi


def gauss_legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


GL6_X, GL6_W = gauss_legendre(6)
GL12_X, GL12_W = gauss_legendre(12)


def nearest_sqrt(w, ref):
    """Square root of w closest to ref (elementwise for arrays)."""
    s = np.sqrt(w)
    flip = np.abs(s - ref) > np.abs(s + ref)
    if np.isscalar(flip) or flip.shape == ():
        return -s if flip else s
    return np.where(flip, -s, s)


def continue_sqrt_chain(fvals, v_start):
    """Assign continued sqrt values along an ordered node sequence.

    Requires the argument of f to rotate < pi/2 between consecutive nodes
    (the caller checks); v_start is the continued value just before the
    first node.
    """
    out = np.empty_like(fvals)
    ref = v_start
    for i, w in enumerate(fvals):
        s = nearest_sqrt(w, ref)
        out[i] = s
        if s != 0:
            ref = s
    return out


def _arg_steps_ok(fvals):
    """True if consecutive arguments differ by < pi/2 (nonzero values only)."""
    nz = fvals[np.abs(fvals) > 0]
    if len(nz) < 2:
        return True
    ratios = nz[1:] / nz[:-1]
    return bool(np.all(np.abs(np.angle(ratios)) < _MAX_ARG_STEP))


def _winding_safe(f, z_pts, exclude_root=None):
    """Node gaps must stay below half the distance to the nearest root.

    The argument-ratio test alone can alias a full 2*pi*k turn of f between
    consecutive nodes to a small angle; bounding the step by the root
    distance caps the possible turn of (z - r)^n well under 2*pi, making the
    ratio test sound.
    """
    roots = [r for r, _ in f.interior_roots
             if exclude_root is None or abs(r - exclude_root) > 1e-13]
    if not roots:
        return True
    z = np.asarray(z_pts)
    gaps = np.abs(np.diff(z))
    if not gaps.size:
        return True
    d = np.full(z.shape, np.inf)
    for r in roots:
        d = np.minimum(d, np.abs(z - r))
    if np.min(d) > 2.1 * np.max(gaps):
        return True
    return bool(np.all(gaps <= 0.5 * np.minimum(d[:-1], d[1:])))


class SqrtSegmentIntegrator:
    """Integrates f^{1/2} dz along straight segments with branch continuity."""

    def __init__(self, f, tol=1e-10, max_depth=52):
        self.f = f
        self.tol = tol
        self.max_depth = max_depth

    # -- plain segments -----------------------------------------------------

    def integrate(self, za, zb, v_start, tol=None):
        """Integral of f^{1/2} from za to zb; v_start continues the branch at za.

        Returns (value, err_estimate, v_end).  za must not be a root (v_start
        nonzero); zb may be a root of any order, in which case the integration
        runs in the substituted parameter from the za side.
        """
        tol = self.tol if tol is None else tol
        if za == zb:
            return 0.0 + 0.0j, 0.0, v_start
        n_end = self._root_order(zb)
        if n_end > 0:
            return self._integrate_into_root(za, zb, v_start, n_end, tol)
        val, err, v_end = self._adaptive(za, zb, v_start, tol, 0)
        return val, err, v_end

    def _root_order(self, z):
        from .rational import order_at

        return order_at(self.f, z, tol=1e-13)

    def _adaptive(self, za, zb, v_a, tol, depth):
        if depth > self.max_depth:
            if abs(zb - za) < 1e-14:
                raise StepCollapse("refinement collapsed; segment passes through a root")
            raise ToleranceNotMet(f"segment [{za}, {zb}] stuck above tol {tol}")
        half = 0.5 * (zb - za)
        mid = za + half
        nodes = mid + half * _XGK
        fv = self.f.eval(nodes)
        f_b = self.f.eval(zb)
        chain = np.concatenate(([v_a**2], fv, [f_b]))
        z_chain = np.concatenate(([za], nodes, [zb]))
        if not (_arg_steps_ok(chain) and _winding_safe(self.f, z_chain)):
            lval, lerr, v_m = self._adaptive(za, mid, v_a, 0.5 * tol, depth + 1)
            rval, rerr, v_b = self._adaptive(mid, zb, v_m, 0.5 * tol, depth + 1)
            return lval + rval, lerr + rerr, v_b
        v = continue_sqrt_chain(fv, v_a)
        i15 = half * np.sum(_WGK * v)
        i7 = half * np.sum(_WG7 * v[_GAUSS_IDX])
        err = abs(i15 - i7)
        if err <= tol or abs(half) < 1e-15:
            v_b = nearest_sqrt(f_b, v[-1])
            return i15, err, v_b
        lval, lerr, v_m = self._adaptive(za, mid, v_a, 0.5 * tol, depth + 1)
        rval, rerr, v_b = self._adaptive(mid, zb, v_m, 0.5 * tol, depth + 1)
        return lval + rval, lerr + rerr, v_b

    # -- segments ending at a root ---------------------------------------------

    def _integrate_into_root(self, za, z_root, v_a, order, tol):
        """Integrate up to a root endpoint.

        Substituting z = z_root + (za - z_root) s^2 turns the local factor
        (z - z_root)^{order/2} into s^order times a smooth function, so the
        s-integrand is analytic at s = 0 for every order.  Orientation: s = 1
        corresponds to za, s = 0 to the root, and the branch is continued from
        the za end inward.
        """
        d = za - z_root

        def geom(s):
            return z_root + d * s * s

        # continued values on the s-grid (descending from s=1), via chain rule
        # integral = int_1^0 f^{1/2}(geom) * 2 d s ds  (then negated for a->root)
        val, err, _ = self._adaptive_sub(geom, d, 1.0, 0.0, v_a, tol, 0)
        return val, err, 0.0 + 0.0j

    def _adaptive_sub(self, geom, d, sa, sb, v_a, tol, depth):
        """Adaptive GK in the substituted parameter s from sa to sb."""
        if depth > self.max_depth:
            raise ToleranceNotMet("substituted segment stuck above tolerance")
        half = 0.5 * (sb - sa)
        mid = sa + half
        s_nodes = mid + half * _XGK
        z_nodes = geom(s_nodes)
        fv = self.f.eval(z_nodes)
        chain = np.concatenate(([v_a**2], fv))
        if not _winding_safe(self.f, z_nodes, exclude_root=geom(0.0)):
            lval, lerr, v_m = self._adaptive_sub(geom, d, sa, mid, v_a, 0.5 * tol, depth + 1)
            rval, rerr, v_b = self._adaptive_sub(geom, d, mid, sb, v_m, 0.5 * tol, depth + 1)
            return lval + rval, lerr + rerr, v_b
        if not _arg_steps_ok(chain):
            lval, lerr, v_m = self._adaptive_sub(geom, d, sa, mid, v_a, 0.5 * tol, depth + 1)
            rval, rerr, v_b = self._adaptive_sub(geom, d, mid, sb, v_m, 0.5 * tol, depth + 1)
            return lval + rval, lerr + rerr, v_b
        v = continue_sqrt_chain(fv, v_a)
        w = v * (2.0 * d * s_nodes)  # dz/ds
        i15 = half * np.sum(_WGK * w)
        i7 = half * np.sum(_WG7 * w[_GAUSS_IDX])
        err = abs(i15 - i7)
        if err <= tol or abs(half) < 1e-15:
            return i15, err, v[-1]
        lval, lerr, v_m = self._adaptive_sub(geom, d, sa, mid, v_a, 0.5 * tol, depth + 1)
        rval, rerr, v_b = self._adaptive_sub(geom, d, mid, sb, v_m, 0.5 * tol, depth + 1)
        return lval + rval, lerr + rerr, v_b


def adaptive_gk(fn, a, b, tol=1e-11, max_depth=50, _depth=0):
    """Plain adaptive Gauss-Kronrod for a smooth (vectorized) scalar integrand."""
    half = 0.5 * (b - a)
    mid = a + half
    nodes = mid + half * _XGK
    v = fn(nodes)
    i15 = half * np.sum(_WGK * v)
    i7 = half * np.sum(_WG7 * v[_GAUSS_IDX])
    err = abs(i15 - i7)
    if err <= tol or _depth >= max_depth:
        if _depth >= max_depth and err > 100 * max(tol, 1e-15):
            raise ToleranceNotMet(f"adaptive_gk stuck at err {err}")
        return i15
    left = adaptive_gk(fn, a, mid, 0.5 * tol, max_depth, _depth + 1)
    right = adaptive_gk(fn, mid, b, 0.5 * tol, max_depth, _depth + 1)
    return left + right
