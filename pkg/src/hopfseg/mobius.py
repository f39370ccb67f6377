"""Disk automorphisms and the Hopf-differential pushforward.

phi_{alpha,theta}(z) = e^{i theta} (z + alpha) / (conj(alpha) z + 1) maps the
unit disk onto itself.  Composing a state with a disk automorphism transforms
its Hopf differential by the chain rule, f -> (f o phi) * (phi')^2, which
stays rational in factored form; the general-position search of the
desingularization pipeline lives here too.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RootTooCloseToBoundary, SearchExhausted
from .rational import RationalFactored
from .slits import GOLDEN_ANGLE, point_segment_distance, segment_segment_distance

GENERAL_POSITION_GAP = 1e-6


@dataclass(frozen=True)
class MobiusMap:
    alpha: complex
    theta: float = 0.0

    def __post_init__(self):
        if abs(self.alpha) >= 1.0:
            raise ValueError("|alpha| must be < 1")
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "theta", float(self.theta))


def apply(m: MobiusMap, z):
    zz = np.asarray(z, dtype=complex)
    out = np.exp(1j * m.theta) * (zz + m.alpha) / (np.conj(m.alpha) * zz + 1.0)
    return complex(out) if out.shape == () else out


def invert(m: MobiusMap) -> MobiusMap:
    """The inverse automorphism, again in (alpha, theta) form.

    phi^{-1}(w) = e^{-i theta} (w - e^{i theta} alpha) / (1 - conj(alpha) e^{-i theta} w)
               = e^{i theta'} (w + alpha') / (conj(alpha') w + 1)
    with alpha' = -e^{i theta} alpha and theta' = -theta.
    """
    return MobiusMap(alpha=-np.exp(1j * m.theta) * m.alpha, theta=-m.theta)


def compose(outer: MobiusMap, inner: MobiusMap) -> MobiusMap:
    """The automorphism outer o inner."""
    e1 = np.exp(1j * inner.theta)
    a1, a2 = inner.alpha, outer.alpha
    beta = e1 + a2 * np.conj(a1)
    gamma = e1 * a1 + a2
    mu = np.conj(a2) * e1 * a1 + 1.0
    alpha = gamma / beta
    phase = np.exp(1j * outer.theta) * beta / mu
    theta = float(np.angle(phase))
    return MobiusMap(alpha=alpha, theta=theta)


def preimage(m: MobiusMap, w):
    return apply(invert(m), w)


def pushforward_hopf(f: RationalFactored, m: MobiusMap) -> RationalFactored:
    """Factored form of (f o phi_m) * (phi_m')^2.

    Each factor (phi(z) - r) rewrites as coeff * (z - phi^{-1}(r)) / (abar z + 1),
    and phi'(z) = e^{i theta}(1 - |alpha|^2) / (abar z + 1)^2, so the result is
    again rational with the Moebius denominator absorbed into the unit factors.
    """
    a = m.alpha
    if abs(a) < 1e-12 and a != 0:
        # numerically a rotation; the pole bookkeeping would underflow
        m = MobiusMap(alpha=0.0, theta=m.theta)
        a = 0.0 + 0.0j
    ab = np.conj(a)
    eth = np.exp(1j * m.theta)
    lead = complex(f.leading) * eth**2 * (1.0 - abs(a) ** 2) ** 2
    den_pow = 4
    interior = []
    unit_num = []
    unit_den = []

    def push_factor(r, mult, bucket_interior):
        nonlocal lead, den_pow
        coeff = eth - r * ab
        if abs(coeff) < 1e-14:
            # r is the image of infinity; the factor becomes coeff'/(abar z + 1)
            lead *= (eth * a - r) ** mult
            den_pow += mult
            return
        rho = complex(apply(invert(m), r))
        lead *= coeff**mult
        den_pow += mult
        if bucket_interior:
            interior.append((rho, mult))
        elif abs(rho) > 1.0:
            unit_num.append((rho, mult))
        else:
            raise RootTooCloseToBoundary(f"unit root {r} pulled inside the disk")

    for r, mult in f.interior_roots:
        push_factor(r, mult, True)
    for r, mult in f.unit_num:
        push_factor(r, mult, False)
    for r, mult in f.unit_den:
        # denominator factors invert the bookkeeping
        coeff = eth - r * ab
        if abs(coeff) < 1e-14:
            lead /= (eth * a - r) ** mult
            den_pow -= mult
            continue
        rho = complex(apply(invert(m), r))
        lead /= coeff**mult
        den_pow -= mult
        if abs(rho) <= 1.0:
            raise RootTooCloseToBoundary(f"pole {r} pulled into the disk")
        unit_den.append((rho, mult))

    if a != 0 and den_pow != 0:
        # (abar z + 1)^p = abar^p (z - pole)^p with pole = -1/abar
        pole = -1.0 / ab
        lead /= ab**den_pow
        if den_pow > 0:
            unit_den.append((pole, den_pow))
        else:
            unit_num.append((pole, -den_pow))
    delta = f.delta_bd
    for rho, _ in interior:
        if abs(rho) > 1.0 - 0.5 * delta:
            raise RootTooCloseToBoundary(f"interior root pushed to |z| = {abs(rho):.6f}")
    margins = [abs(r) - 1.0 for r, _ in unit_num + unit_den]
    new_delta = min([delta] + [0.9 * g for g in margins if g < delta])
    if new_delta <= 1e-9:
        raise RootTooCloseToBoundary("pushed unit factors hug the boundary")
    return RationalFactored(
        leading=lead,
        interior_roots=tuple(interior),
        unit_num=tuple(unit_num),
        unit_den=tuple(unit_den),
        delta_bd=min(new_delta, 1.0 - max((abs(r) for r, _ in interior), default=0.0) - 1e-12)
        if interior
        else new_delta,
    )


def dilate(f: RationalFactored, eps: float) -> RationalFactored:
    """Factored form of (1+eps)^{-2} f(z / (1+eps)); roots scale by 1+eps.

    Interior roots pushed past the unit circle migrate to the unit-numerator
    bucket (the zero count inside the disk drops).
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    s = 1.0 + eps
    if eps == 0:
        return f
    pow_total = 0
    interior = []
    unit_num = []
    unit_den = []
    for r, mult in f.interior_roots:
        pow_total += mult
        rs = r * s
        if abs(rs) <= 1.0 - f.delta_bd:
            interior.append((rs, mult))
        elif abs(rs) >= 1.0 + 1e-9:
            unit_num.append((rs, mult))
        else:
            raise RootTooCloseToBoundary(f"dilated root lands on the boundary band: {rs}")
    for r, mult in f.unit_num:
        pow_total += mult
        unit_num.append((r * s, mult))
    for r, mult in f.unit_den:
        pow_total -= mult
        unit_den.append((r * s, mult))
    lead = complex(f.leading) * s ** (-2 - pow_total)
    margins = [abs(r) - 1.0 for r, _ in unit_num + unit_den]
    new_delta = min([f.delta_bd] + [0.9 * g for g in margins if g < f.delta_bd])
    return RationalFactored(
        leading=lead,
        interior_roots=tuple(interior),
        unit_num=tuple(unit_num),
        unit_den=tuple(unit_den),
        delta_bd=max(new_delta, 1e-9),
    )


# -- general position -------------------------------------------------------


def _clip_ray_to_disk(p, direction):
    """Segment of {p + t*direction, t >= 0} inside the closed unit disk."""
    b = (p.conjugate() * direction).real
    disc = b * b + 1.0 - abs(p) ** 2
    if disc <= 0:
        return p, p
    t = -b + np.sqrt(disc)
    return p, p + max(t, 0.0) * direction


def is_general_position(points, p0, gap: float = GENERAL_POSITION_GAP) -> bool:
    """Distinct distances from p0 and pairwise-disjoint outward half-lines.

    The half-line through p_j must also clear every other point of the
    configuration (it becomes a cut later on).  Gaps shrink proportionally
    for clustered configurations, where a fixed clearance would be
    structurally unsatisfiable.
    """
    pts = [complex(p) for p in points if abs(complex(p) - complex(p0)) > 1e-14]
    p0 = complex(p0)
    dists = sorted(abs(p - p0) for p in pts)
    for d1, d2 in zip(dists[:-1], dists[1:]):
        if d2 - d1 < min(gap, 0.1 * d1):
            return False
    rays = []
    for p in pts:
        d = (p - p0) / abs(p - p0)
        rays.append(_clip_ray_to_disk(p, d))
    for i in range(len(rays)):
        di = abs(pts[i] - p0)
        for j in range(i + 1, len(rays)):
            req = min(gap, 0.2 * min(di, abs(pts[j] - p0)))
            if segment_segment_distance(*rays[i], *rays[j]) < req:
                return False
        for k, q in enumerate(pts):
            if k == i:
                continue
            req = min(gap, 0.2 * min(di, abs(q - p0), abs(q - pts[i])))
            if point_segment_distance(q, *rays[i]) < req:
                return False
    return True


def make_general_position(points, p0, gap: float = GENERAL_POSITION_GAP) -> MobiusMap:
    """A disk automorphism putting the configuration in general position.

    Recentering phi_{-p0} sends p0 to the origin; then small alpha off the
    finitely many forbidden angles (bisectors of recentered argument pairs)
    make distances distinct and rays disjoint.  The search is deterministic:
    geometric growth in |alpha|, golden-angle stepping in its argument.
    """
    pts = [complex(p) for p in points]
    p0 = complex(p0)
    recenter = MobiusMap(alpha=-p0)
    q = [apply(recenter, p) for p in pts]
    candidate = recenter
    if is_general_position(q, 0.0, gap):
        return candidate

    forbidden = []
    qs = [z for z in q if abs(z) > 1e-14]
    for i in range(len(qs)):
        for j in range(i, len(qs)):
            forbidden.append(0.5 * (np.angle(qs[i]) + np.angle(qs[j])))
    tried = 0
    k = 0
    rho = 1e-3
    while tried < 10000:
        psi = (GOLDEN_ANGLE * k) % (2 * np.pi)
        k += 1
        if k % 97 == 0:
            rho = min(2 * rho, 0.45)
        bad = any(
            abs((psi - ang + 0.5 * np.pi) % np.pi - 0.5 * np.pi) < 1e-3 for ang in forbidden
        )
        if bad:
            continue
        tried += 1
        alpha = rho * np.exp(1j * psi)
        m = compose(MobiusMap(alpha=alpha), recenter)
        imgs = [apply(m, p) for p in pts]
        if max(abs(z) for z in imgs) > 1.0 - 1e-6:
            continue
        if is_general_position(imgs, apply(m, p0), gap):
            return m
    raise SearchExhausted("no Moebius map reached general position in 10^4 candidates")
