"""Holomorphic functions on a neighborhood of the closed disk, in factored form.

A function is stored as

    f(z) = c * prod (z - r_i)^{n_i} * prod (z - u_j)^{m_j} / prod (z - d_k)^{p_k}

with interior roots r_i well inside the disk (|r| <= 1 - delta_bd) and the
unit factor roots u_j, d_k strictly outside (|u| >= 1 + delta_bd), so the unit
part never vanishes on a neighborhood of the closed disk.  Keeping roots
explicit makes zero orders exact integers instead of numerically detected
quantities, which the multiplicity bookkeeping downstream relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonIntegerWinding, PoleHit, RootHit, RootOnContour

DELTA_BD_DEFAULT = 0.05
ROOT_MERGE_TOL = 1e-12
ORDER_MATCH_TOL = 1e-10


def _merge_roots(pairs, tol=ROOT_MERGE_TOL):
    """Merge roots closer than tol (multiplicities add); returns sorted tuple."""
    merged: list[list] = []
    for z, m in pairs:
        z = complex(z)
        m = int(m)
        if m < 1:
            raise ValueError(f"multiplicity must be >= 1, got {m}")
        for slot in merged:
            if abs(slot[0] - z) < tol:
                slot[1] += m
                break
        else:
            merged.append([z, m])
    merged.sort(key=lambda s: (s[0].real, s[0].imag))
    return tuple((z, m) for z, m in merged)


@dataclass(frozen=True)
class RationalFactored:
    """Factored rational function, holomorphic near the closed unit disk."""

    leading: complex
    interior_roots: tuple = ()
    unit_num: tuple = ()
    unit_den: tuple = ()
    delta_bd: float = DELTA_BD_DEFAULT

    def __post_init__(self):
        c = complex(self.leading)
        if not np.isfinite(c.real) or not np.isfinite(c.imag) or c == 0:
            raise ValueError("leading coefficient must be finite and nonzero")
        object.__setattr__(self, "leading", c)
        object.__setattr__(self, "interior_roots", _merge_roots(self.interior_roots))
        object.__setattr__(self, "unit_num", _merge_roots(self.unit_num))
        object.__setattr__(self, "unit_den", _merge_roots(self.unit_den))
        for z, _ in self.interior_roots:
            if abs(z) > 1.0 - self.delta_bd + 1e-15:
                raise ValueError(f"interior root {z} outside |z| <= {1 - self.delta_bd}")
        for z, _ in self.unit_num + self.unit_den:
            if abs(z) < 1.0 + self.delta_bd - 1e-15:
                raise ValueError(f"unit-factor root {z} inside |z| < {1 + self.delta_bd}")

    # -- structure helpers ---------------------------------------------------

    @property
    def total_interior_order(self) -> int:
        return sum(m for _, m in self.interior_roots)

    def roots(self):
        """Interior roots with multiplicities, as (location, mult) pairs."""
        return self.interior_roots

    def odd_roots(self):
        return tuple((z, m) for z, m in self.interior_roots if m % 2 == 1)

    def zero_records(self):
        return tuple(
            ZeroRecord(location=z, order=m) for z, m in self.interior_roots
        )

    def min_root_distance(self, z) -> float:
        if not self.interior_roots:
            return np.inf
        z = np.asarray(z)
        d = np.full(z.shape, np.inf, dtype=float)
        for r, _ in self.interior_roots:
            d = np.minimum(d, np.abs(z - r))
        return d if d.shape else float(d)

    # -- evaluation -----------------------------------------------------------

    def __call__(self, z):
        return self.eval(z)

    def eval(self, z):
        """Value of f at z (scalar or ndarray)."""
        scalar = np.isscalar(z) or getattr(z, "shape", None) == ()
        if scalar:
            for d, p in self.unit_den:
                if abs(complex(z) - d) < 1e-14:
                    raise PoleHit(f"evaluation at pole {d}")
        zz = np.asarray(z, dtype=complex)
        out = np.full(zz.shape, self.leading, dtype=complex)
        for r, m in self.interior_roots:
            out *= (zz - r) ** m
        for u, m in self.unit_num:
            out *= (zz - u) ** m
        for d, m in self.unit_den:
            out /= (zz - d) ** m
        return complex(out) if scalar else out

    def log_derivative(self, z):
        """f'(z)/f(z) as a partial-fraction sum."""
        scalar = np.isscalar(z) or getattr(z, "shape", None) == ()
        if scalar:
            for r, _ in self.interior_roots + self.unit_num:
                if abs(complex(z) - r) < 1e-14:
                    raise RootHit(f"log derivative at root {r}")
            for d, _ in self.unit_den:
                if abs(complex(z) - d) < 1e-14:
                    raise PoleHit(f"log derivative at pole {d}")
        zz = np.asarray(z, dtype=complex)
        out = np.zeros(zz.shape, dtype=complex)
        for r, m in self.interior_roots:
            out += m / (zz - r)
        for u, m in self.unit_num:
            out += m / (zz - u)
        for d, m in self.unit_den:
            out -= m / (zz - d)
        return complex(out) if scalar else out

    def eval_without_root(self, z, root):
        """f(z) / (z - root)^mult, i.e. the co-factor at a stored root."""
        zz = np.asarray(z, dtype=complex)
        out = np.full(zz.shape, self.leading, dtype=complex)
        hit = False
        for r, m in self.interior_roots:
            if abs(r - root) < ORDER_MATCH_TOL:
                hit = True
                continue
            out *= (zz - r) ** m
        if not hit:
            raise ValueError(f"{root} is not a stored root")
        for u, m in self.unit_num:
            out *= (zz - u) ** m
        for d, m in self.unit_den:
            out /= (zz - d) ** m
        return out if out.shape else complex(out)

    def unit_log(self, z):
        """Analytic branch of log(c * unit_num / unit_den) on the closed disk.

        Each factor is written (z - u) = -u (1 - z/u); since |z/u| < 1 the
        principal log of (1 - z/u) is single valued there.
        """
        zz = np.asarray(z, dtype=complex)
        out = np.full(zz.shape, np.log(complex(self.leading)), dtype=complex)
        for u, m in self.unit_num:
            out += m * (np.log(-u) + np.log1p(-zz / u))
        for d, m in self.unit_den:
            out -= m * (np.log(-d) + np.log1p(-zz / d))
        return out if out.shape else complex(out)

    def unit_sqrt(self, z):
        """Single-valued square root of the nonvanishing unit part (incl. leading)."""
        return np.exp(0.5 * self.unit_log(z))

    def self_check(self) -> bool:
        """Interior zero count (with multiplicity) against the winding oracle."""
        radius = 1.0 - 0.5 * self.delta_bd
        return winding_count(self, 0.0, radius) == self.total_interior_order


@dataclass(frozen=True)
class ZeroRecord:
    """A zero of f with its order and parity."""

    location: complex
    order: int
    parity: str = field(init=False)

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("zero order must be positive")
        object.__setattr__(self, "parity", "odd" if self.order % 2 else "even")


# -- module-level operation surface  -------------------------------------


def rational(leading, roots=(), unit_num=(), unit_den=(), delta_bd=DELTA_BD_DEFAULT):
    """Convenience constructor; roots may be bare locations (mult 1) or pairs."""

    def norm(pairs):
        out = []
        for p in pairs:
            if isinstance(p, (tuple, list)):
                out.append((complex(p[0]), int(p[1])))
            else:
                out.append((complex(p), 1))
        return tuple(out)

    return RationalFactored(
        leading=leading,
        interior_roots=norm(roots),
        unit_num=norm(unit_num),
        unit_den=norm(unit_den),
        delta_bd=delta_bd,
    )


def monomial(coeff, order):
    """c * z^order."""
    return rational(coeff, roots=[(0.0, order)] if order else [])


def multiply(f: RationalFactored, g: RationalFactored) -> RationalFactored:
    return RationalFactored(
        leading=f.leading * g.leading,
        interior_roots=f.interior_roots + g.interior_roots,
        unit_num=f.unit_num + g.unit_num,
        unit_den=f.unit_den + g.unit_den,
        delta_bd=min(f.delta_bd, g.delta_bd),
    )


def order_at(f: RationalFactored, z, tol=ORDER_MATCH_TOL) -> int:
    """Multiplicity of z as a stored interior root (0 if not a root)."""
    z = complex(z)
    for r, m in f.interior_roots:
        if abs(r - z) < tol:
            return m
    return 0


def winding_count(f: RationalFactored, center, radius, guard=1e-6) -> int:
    """(1/2 pi i) * contour integral of f'/f over the circle, rounded to int.

    Trapezoid quadrature of the periodic analytic integrand converges
    geometrically; node count doubles until two consecutive estimates agree.
    """
    center = complex(center)
    radius = float(radius)
    clearance = []
    for r, _ in f.interior_roots + f.unit_num + f.unit_den:
        clearance.append(abs(abs(r - center) - radius))
    if clearance and min(clearance) < guard:
        raise RootOnContour(f"root within {guard} of the contour")

    prev = None
    for n in (64, 128, 256, 512, 1024, 2048, 4096):
        th = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        z = center + radius * np.exp(1j * th)
        vals = f.log_derivative(z) * (1j * radius * np.exp(1j * th))
        est = np.mean(vals) / 1j  # the 2*pi of dtheta and of 1/(2*pi*i) cancel
        if prev is not None and abs(est - prev) < 1e-10:
            break
        prev = est
    k = round(est.real)
    if abs(est - k) > 0.25:
        raise NonIntegerWinding(f"winding estimate {est} not near an integer")
    return int(k)
