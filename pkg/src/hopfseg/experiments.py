"""Reusable experiment drivers: the rigidity scan, phase-tuned configurations,
and generators for the index-formula suite.

The phase-tuning trick: rotating the leading coefficient by e^{2 i gamma}
rotates F by e^{i gamma}, so a single residual condition Re F(r) = 0 at one
chosen zero is solved exactly by gamma = pi/2 - Arg F(r) (mod pi).  That is
how even-order zeros are placed on the nodal set by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .desingularize import reduce_to_simple, split_zero
from .primitive import PathEngine
from .rational import RationalFactored, monomial, rational
from .slits import build_slit_disk
from .states import ADMISSIBILITY_REL_TOL, admissibility


# -- the rigidity scan (one-parameter family z (z - w)^2 / 4) -----------------


def rigidity_residual(radius: float, phi: float, tol: float = 1e-11) -> float:
    """Signed Re F(w) for f = z (z - w)^2 / 4, w = radius e^{i phi}, base 0."""
    w = radius * np.exp(1j * phi)
    f = rational(0.25, roots=[(0.0, 1), (w, 2)])
    eng = PathEngine(f, build_slit_disk(f, 0.0), tol=tol)
    return eng.F(w).real


@dataclass(frozen=True)
class RigidityScan:
    radius: float
    step: float
    phis: np.ndarray
    residuals: np.ndarray      # signed Re F(w)
    admissible: np.ndarray     # |residual| <= tol at the grid angles
    zeros: tuple               # refined angles where admissibility holds
    tol: float


def rigidity_scan(radius: float = 0.1, step: float = 1e-3,
                  tol: float | None = None) -> RigidityScan:
    """Scan the family over phi in [0, 2 pi), locating the admissible angles.

    Sign changes of the signed residual are refined by bisection; a refined
    angle counts as admissible only if the residual there actually drops
    below tolerance (the sheet convention can flip between nearby scan
    points when the cut direction jumps, which produces sign changes without
    zeros -- those are rejected by the magnitude test).
    """
    if tol is None:
        # boundary scale of F is ~ 2/5 + O(radius); one engine probe fixes it
        f0 = rational(0.25, roots=[(0.0, 1), (radius, 2)])
        eng0 = PathEngine(f0, build_slit_disk(f0, 0.0))
        tol = ADMISSIBILITY_REL_TOL * eng0.boundary_scale()
    phis = np.arange(0.0, 2 * np.pi, step)
    res = np.array([rigidity_residual(radius, p) for p in phis])
    adm = np.abs(res) <= tol

    zeros = []
    n = len(phis)
    for i in range(n):
        j = (i + 1) % n
        a, fa = phis[i], res[i]
        b, fb = phis[i] + step, res[j]
        if fa == 0.0:
            zeros.append(a)
            continue
        if fa * fb >= 0:
            continue
        for _ in range(60):
            m = 0.5 * (a + b)
            fm = rigidity_residual(radius, m)
            if fa * fm <= 0:
                b, fb = m, fm
            else:
                a, fa = m, fm
            if b - a < 1e-12:
                break
        m = 0.5 * (a + b)
        if abs(rigidity_residual(radius, m)) <= tol:
            zeros.append(m % (2 * np.pi))
    return RigidityScan(
        radius=radius, step=step, phis=phis, residuals=res,
        admissible=adm, zeros=tuple(sorted(zeros)), tol=tol,
    )


# -- phase-tuned configurations --------------------------------------------------


def tune_phase(roots, base, tune_root, c0: complex = 0.25) -> RationalFactored:
    """Rotate the leading coefficient so Re F vanishes at one chosen zero."""
    f0 = rational(c0, roots=roots)
    eng = PathEngine(f0, build_slit_disk(f0, complex(base)))
    F0 = eng.F(complex(tune_root))
    gamma = (0.5 * np.pi - np.angle(F0)) % np.pi
    return rational(c0 * np.exp(2j * gamma), roots=roots)


def figure5_function() -> tuple[RationalFactored, complex]:
    """A handcrafted state with counts M = 7, N = 6, T = 2.

    One 3-point (the odd base zero), one 4-point (phase-tuned double zero) in
    a separate nodal component, and one non-critical double zero.
    """
    a = -0.4 - 0.3j
    r = 0.5 + 0.0j
    s = -0.05 + 0.55j
    f = tune_phase([(a, 1), (r, 2), (s, 2)], a, r)
    return f, a


# -- configuration generators for the index-formula suite ------------------------


def random_even_function(rng) -> RationalFactored:
    """Even-only-root function with well-separated structure, base origin.

    Draws are filtered on generator preconditions (root separation, roots
    clearly off the nodal set, separated boundary zeros) so the traced graph
    is meaningful at moderate resolutions; the counting identities are never
    part of the filter.
    """
    from .nodal import boundary_zeros
    from .states import reconstruct

    while True:
        k = int(rng.integers(1, 4))
        roots = []
        for _ in range(k):
            z = (rng.uniform(-0.55, 0.55) + 1j * rng.uniform(-0.55, 0.55))
            roots.append((z, 2))
        if any(
            abs(roots[i][0] - roots[j][0]) < 0.25
            for i in range(k) for j in range(i + 1, k)
        ):
            continue
        c = 0.3 * np.exp(1j * rng.uniform(0, 2 * np.pi))
        try:
            f = rational(c, roots=roots)
            eng = PathEngine(f, build_slit_disk(f, 0.0))
            scale = eng.boundary_scale()
            if any(abs(eng.F(z).real) < 1e-2 * scale for z, _ in roots):
                continue
            st = reconstruct(f, 0.0, resolution=96)
            bz = boundary_zeros(st)
            gaps = np.diff(sorted(bz) + [sorted(bz)[0] + 2 * np.pi]) if bz else []
            # shallow boundary caps (close zero pairs) are invisible at
            # working resolutions; keep the arcs well separated
            if len(bz) and min(gaps) < 0.35:
                continue
            return f
        except Exception:
            continue


def splitting_outputs() -> list[tuple[RationalFactored, complex]]:
    """Admissible states produced by the zero-splitting pipeline."""
    out = []
    for branch in range(5):
        res = split_zero(monomial(0.25, 3), 0.0, eps_target=1e9, branch=branch, eps0=0.01)
        out.append((res.f_new, 0.0 + 0.0j))
    for branch in range(4):
        res = split_zero(monomial(0.25, 2), 0.0, eps_target=1e9, branch=branch, eps0=0.01)
        out.append((res.f_new, 0.0 + 0.0j))
    g = reduce_to_simple(monomial(0.25, 3), eps_budget=3.0)
    out.append((g, None))
    return out


def admissible_fw(k: int = 0) -> tuple[RationalFactored, complex]:
    """The rigidity family at one of its five admissible angles."""
    phi = np.pi / 5 + 2 * k * np.pi / 5
    w = 0.1 * np.exp(1j * phi)
    return rational(0.25, roots=[(0.0, 1), (w, 2)]), 0.0 + 0.0j


def tuned_multizero(a, b, na: int, nb: int, c0: complex = 0.25) -> RationalFactored:
    """(z-a)^{na} (z-b)^{nb} with the phase tuned so both zeros are critical.

    Base at a handles its own residual (F(a) = 0 by definition); the single
    remaining condition at b is solved by the phase rotation.
    """
    return tune_phase([(complex(a), na), (complex(b), nb)], a, b, c0=c0)
