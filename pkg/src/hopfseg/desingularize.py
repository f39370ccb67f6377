"""Splitting a critical zero of order m0+1 into order m0 plus a simple zero.

The perturbed function is

    z^{m0} (z - w0) h^2(z) q^2(z, W) prod_j (z - w_j)^{q_j},      q = 1 + sum_l W_l z^{lR},

recentred at the zero being split.  The weights W kill the real parts of the
primitive at the untouched zeros (a linear system built from radial-path
integrals), and the direction of w0 solves a one-dimensional angular
equation whose eps -> 0 limit is an explicit sine.  Every square root in the
system integrals is evaluated through a fixed star-shaped determination
(angles lifted against a chart cut), so entries are branch-safe pointwise
and need no continuation bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    BranchLost,
    ClosenessFailed,
    DeterminantFloor,
    NotAdmissible,
    SingularSolve,
)
from .mobius import apply, invert, is_general_position, make_general_position, pushforward_hopf
from .quadrature import adaptive_gk
from .rational import RationalFactored, order_at
from .states import admissibility, reconstruct

R_CANDIDATES = (2, 4, 8, 16, 32, 64)
DET_FLOOR = 1e-8


def beta_moment(m0: int) -> float:
    """c_{m0} = int_0^1 t^{m0/2} sqrt(1-t) dt, in closed Gamma form."""
    return 0.5 * math.sqrt(math.pi) * math.exp(
        math.lgamma(1.0 + 0.5 * m0) - math.lgamma(0.5 * (5.0 + m0))
    )


def gamma_moment(k: float, q: float) -> float:
    """int_0^1 t^k (1-t)^{q/2} dt = Gamma(1+k) Gamma(1+q/2) / Gamma(2+k+q/2)."""
    return math.exp(
        math.lgamma(1.0 + k) + math.lgamma(1.0 + 0.5 * q) - math.lgamma(2.0 + k + 0.5 * q)
    )


def _lift(angle: float, gamma_arg: float) -> float:
    """Lift an angle into the chart window (gamma_arg, gamma_arg + 2*pi]."""
    d = (angle - gamma_arg) % (2.0 * np.pi)
    if d == 0.0:
        d = 2.0 * np.pi
    return gamma_arg + d


def _pow_chart(zeta, p: float, gamma_arg: float):
    """zeta^p with arg(zeta) lifted against the chart cut (window (g, g+2pi])."""
    zeta = np.asarray(zeta, dtype=complex)
    d = (np.angle(zeta) - gamma_arg) % (2.0 * np.pi)
    d = np.where(d == 0.0, 2.0 * np.pi, d)
    return np.exp(p * (np.log(np.abs(zeta)) + 1j * (gamma_arg + d)))


def _halfpow_star(zeta, w: complex, q: int, lift_w: float):
    """(zeta - w)^{q/2} continued from zeta = 0 along straight rays.

    Single valued off the radial cut {t w : t >= 1}; the constant branch
    choice assigns angle lift_w + pi to (-w).
    """
    zeta = np.asarray(zeta, dtype=complex)
    const = 0.5 * q * (np.log(abs(w)) + 1j * (lift_w + np.pi))
    return np.exp(const + 0.5 * q * np.log((zeta - w) / (-w)))


@dataclass
class PerturbationContext:
    """Recentred data for one splitting step."""

    f: RationalFactored
    z0: complex
    m0: int
    omegas: tuple            # other zeros relative to z0, |w_1| < ... strictly
    qs: tuple
    gamma_arg: float
    R: int = 0
    B0: np.ndarray | None = None
    _A0: np.ndarray | None = field(default=None, repr=False)

    @property
    def M(self) -> int:
        return len(self.omegas)

    def h(self, zeta):
        """Square root of the nonvanishing factor (leading and unit part)."""
        return self.f.unit_sqrt(np.asarray(zeta, dtype=complex) + self.z0)

    def H(self, zeta):
        """h(zeta) * prod_j (zeta - w_j)^{q_j/2} in the star determination."""
        out = self.h(zeta)
        for w, q in zip(self.omegas, self.qs):
            out = out * _halfpow_star(zeta, w, q, _lift(np.angle(w), self.gamma_arg))
        return out

    def sqrt_core(self, zeta, omega0: complex):
        """zeta^{m0/2} (zeta - omega0)^{1/2} H(zeta), chart determination."""
        if omega0 == 0:
            base = _pow_chart(zeta, 0.5 * (self.m0 + 1), self.gamma_arg)
        else:
            lift0 = _lift(np.angle(omega0), self.gamma_arg)
            base = _pow_chart(zeta, 0.5 * self.m0, self.gamma_arg) * _halfpow_star(
                zeta, omega0, 1, lift0
            )
        return base * self.H(zeta)


def _ray_integral(ctx: PerturbationContext, endpoint: complex, omega0: complex,
                  monomial_pow: int, tol: float = 1e-12):
    """2 * int_0^{endpoint} zeta^{k} core(zeta) dzeta along the radial path.

    Substitutions t = s^2 at both ends keep the integrand smooth at the
    fractional endpoints.
    """

    def E(t):
        zeta = t * endpoint
        v = ctx.sqrt_core(zeta, omega0)
        if monomial_pow:
            v = v * zeta**monomial_pow
        return v

    smax = math.sqrt(0.5)
    left = adaptive_gk(lambda s: E(s * s) * 2.0 * s, 0.0, smax, tol=tol)
    right = adaptive_gk(lambda s: E(1.0 - s * s) * 2.0 * s, 0.0, smax, tol=tol)
    return 2.0 * endpoint * (left + right)


def make_context(f: RationalFactored, z0, gamma_arg: float | None = None) -> PerturbationContext:
    z0 = complex(z0)
    n0 = order_at(f, z0)
    if n0 < 2:
        raise ValueError(f"zero at {z0} must have order >= 2 (got {n0})")
    others = [(z - z0, m) for z, m in f.interior_roots if abs(z - z0) > 1e-13]
    others.sort(key=lambda p: abs(p[0]))
    dists = [abs(w) for w, _ in others]
    for d1, d2 in zip(dists[:-1], dists[1:]):
        if d2 - d1 < max(1e-12, 1e-6 * d1):
            raise ValueError("other zeros not in general position (equal distances)")
    if gamma_arg is None:
        if others:
            angs = sorted(np.angle(w) % (2 * np.pi) for w, _ in others)
            gaps = [
                ((angs[(i + 1) % len(angs)] - angs[i]) % (2 * np.pi)) or 2 * np.pi
                for i in range(len(angs))
            ]
            i = int(np.argmax(gaps))
            gamma_arg = float((angs[i] + 0.5 * gaps[i]) % (2 * np.pi))
        else:
            gamma_arg = 0.1
    if others:
        # the chart cut must stay strictly off every zero ray
        for _ in range(64):
            if all(abs((gamma_arg - np.angle(w)) % (2 * np.pi)) > 1e-6
                   and abs((np.angle(w) - gamma_arg) % (2 * np.pi)) > 1e-6
                   for w, _ in others):
                break
            gamma_arg = (gamma_arg + 0.0137) % (2 * np.pi)
    return PerturbationContext(
        f=f, z0=z0, m0=n0 - 1,
        omegas=tuple(w for w, _ in others),
        qs=tuple(q for _, q in others),
        gamma_arg=gamma_arg,
    )


def _limit_signs(ctx: PerturbationContext, theta: float) -> np.ndarray:
    """Per-ray signs of the omega0 -> 0 limit of the (zeta - omega0)^{1/2} factor.

    The radial cut hanging off omega0 sweeps the chart as omega0 shrinks
    along angle theta; rays whose lifted angle does not exceed the lifted
    theta pick up a factor -1 relative to the plain zeta^{1/2} chart branch.
    """
    lift0 = _lift(theta, ctx.gamma_arg)
    return np.array([
        -1.0 if _lift(np.angle(w), ctx.gamma_arg) <= lift0 else 1.0
        for w in ctx.omegas
    ])


def assemble_system(ctx: PerturbationContext, omega0, R: int | None = None,
                    tol: float = 1e-12, theta_ref: float | None = None):
    """System matrix and vector: entries are radial-path integrals to each w_j.

    For omega0 = 0 pass theta_ref (the working angle) so the entries are the
    limit of the omega0-system along that direction; without it the plain
    chart branch is returned (enough for determinant conditioning).
    """
    R = ctx.R if R is None else R
    M = ctx.M
    A = np.zeros((M, M), dtype=complex)
    B = np.zeros(M, dtype=complex)
    for j, wj in enumerate(ctx.omegas):
        B[j] = _ray_integral(ctx, wj, omega0, 0, tol=tol)
        for ell in range(1, M + 1):
            A[j, ell - 1] = _ray_integral(ctx, wj, omega0, ell * R, tol=tol)
    if omega0 == 0 and theta_ref is not None and M:
        s = _limit_signs(ctx, theta_ref)
        A = s[:, None] * A
        B = s * B
    return A, B


def choose_R(ctx: PerturbationContext) -> int:
    """Smallest doubling R whose row-normalized system determinant clears 1e-8."""
    if ctx.M == 0:
        ctx.R = 2
        ctx.B0 = np.zeros(0, dtype=complex)
        ctx._A0 = np.zeros((0, 0), dtype=complex)
        return 2
    best = None
    for R in R_CANDIDATES + (1,):
        A0, B0 = assemble_system(ctx, 0.0, R=R)
        norms = np.linalg.norm(A0, axis=1)
        if np.any(norms == 0):
            continue
        det = abs(np.linalg.det(A0 / norms[:, None]))
        if det >= DET_FLOOR:
            ctx.R = R
            ctx.B0 = B0
            ctx._A0 = A0
            return R
        if best is None or det > best[0]:
            best = (det, R, A0, B0)
    # the normalized determinant is only a conditioning proxy; nearly
    # coincident satellite zeros (deep splitting chains) push it below the
    # floor while the system stays consistent.  Fall back to the best scale
    # and let the solve residual and the independent admissibility check of
    # the result act as the certificate.
    if best is not None and best[0] >= 1e-12:
        ctx.R = best[1]
        ctx._A0 = best[2]
        ctx.B0 = best[3]
        return ctx.R
    raise DeterminantFloor("no exponent scale R <= 64 gave a usable determinant")


def normalized_det(ctx: PerturbationContext, R: int) -> float:
    A0, _ = assemble_system(ctx, 0.0, R=R)
    norms = np.linalg.norm(A0, axis=1)
    return float(abs(np.linalg.det(A0 / norms[:, None])))


def solve_weights(A: np.ndarray, B: np.ndarray, B0: np.ndarray) -> np.ndarray:
    """W = A^{-1} (B0 - B); the imaginary parts Lambda are fixed by B0 itself."""
    if len(B) == 0:
        return np.zeros(0, dtype=complex)
    try:
        W = np.linalg.solve(A, B0 - B)
    except np.linalg.LinAlgError as exc:
        raise SingularSolve(str(exc)) from exc
    resid = np.linalg.norm(A @ W - (B0 - B))
    if resid > 1e-10 * max(1.0, float(np.linalg.norm(B0 - B))):
        raise SingularSolve(f"solve residual {resid}")
    return W


def K_value(ctx: PerturbationContext, eps: float, theta: float, tol: float = 1e-12) -> float:
    """Scaled real part of the primitive at the candidate simple zero.

    K(eps, theta) = eps^{-(m0+3)/2} * Re F(w0) / 2 with w0 = eps e^{i theta};
    at eps = 0 the closed form -|H(0)| c_{m0} sin((3+m0)/2 lift(theta) - phi)
    with phi = -Arg H(0).
    """
    m0 = ctx.m0
    if eps == 0.0:
        H0 = complex(ctx.H(np.array([0.0 + 0.0j]))[0])
        phi = -np.angle(H0)
        th = _lift(theta, ctx.gamma_arg)
        return float(-abs(H0) * beta_moment(m0) * math.sin(0.5 * (3 + m0) * th - phi))
    omega0 = eps * np.exp(1j * theta)
    if ctx.M:
        A, B = assemble_system(ctx, omega0, tol=tol)
        W = solve_weights(A, B, _limit_signs(ctx, theta) * ctx.B0)
    else:
        W = np.zeros(0, dtype=complex)
    return _K_scaled(ctx, omega0, W, tol=tol)


def _K_scaled(ctx: PerturbationContext, omega0: complex, W, tol: float = 1e-12) -> float:
    """Re(i e^{i(m0+3) lift(theta)/2} * int t^{m0/2} sqrt(1-t) H(t w0) q(t w0) dt).

    The eps powers are factored out analytically, so the value never
    underflows however small |w0| is.
    """
    m0 = ctx.m0
    lift0 = _lift(np.angle(omega0), ctx.gamma_arg)

    def E(t):
        zeta = t * omega0
        v = np.power(t, 0.5 * m0) * np.sqrt(1.0 - t) * ctx.H(zeta)
        if len(W):
            q = np.ones_like(zeta)
            for ell, w in enumerate(W, start=1):
                q = q + w * zeta ** (ell * ctx.R)
            v = v * q
        return v

    smax = math.sqrt(0.5)
    left = adaptive_gk(lambda s: E(s * s) * 2.0 * s, 0.0, smax, tol=tol)
    right = adaptive_gk(lambda s: E(1.0 - s * s) * 2.0 * s, 0.0, smax, tol=tol)
    I = left + right
    return float(np.real(1j * np.exp(0.5j * (m0 + 3) * lift0) * I))


def limit_angles(ctx: PerturbationContext):
    """The m0+3 zero directions of K(0, .), sorted in [0, 2*pi)."""
    H0 = complex(ctx.H(np.array([0.0 + 0.0j]))[0])
    phi = -np.angle(H0)
    m = ctx.m0 + 3
    return sorted(((2 * phi + 2 * k * np.pi) / m) % (2 * np.pi) for k in range(m))


@dataclass(frozen=True)
class DesingularizationResult:
    f_new: RationalFactored
    z0: complex
    omega0: complex          # offset of the new simple zero, relative to z0
    W: tuple
    R: int
    epsilon: float
    theta: float
    branch: int
    sup_dist: float
    h1_dist: float
    admissibility: object

    @property
    def new_zero(self) -> complex:
        return self.z0 + self.omega0


def _assemble_f_new(ctx: PerturbationContext, omega0: complex, W: np.ndarray):
    """Factored form of z^{m0}(z - w0) h^2 q^2 prod (z - w_j)^{q_j}, recentred back."""
    f = ctx.f
    z0 = ctx.z0
    roots = [(z0 + omega0, 1)]
    if ctx.m0 >= 1:
        roots.append((z0, ctx.m0))
    for w, q in zip(ctx.omegas, ctx.qs):
        roots.append((z0 + w, q))
    lead = f.leading
    unit_num = list(f.unit_num)
    if len(W) and np.max(np.abs(W)) > 1e-300:
        coeffs = np.zeros(len(W) * ctx.R + 1, dtype=complex)
        coeffs[0] = 1.0
        for ell, w in enumerate(W, start=1):
            coeffs[ell * ctx.R] = w
        qroots = np.roots(coeffs[::-1])
        wM = coeffs[-1]
        lead = lead * wM**2
        for rho in qroots:
            unit_num.append((complex(rho) + z0, 2))
    min_outside = min((abs(r) for r, _ in unit_num), default=np.inf)
    delta = min(f.delta_bd, 0.9 * (min_outside - 1.0)) if unit_num else f.delta_bd
    if delta <= 1e-9:
        raise ClosenessFailed("q-polynomial roots too close to the disk")
    return RationalFactored(
        leading=lead,
        interior_roots=tuple(roots),
        unit_num=tuple(unit_num),
        unit_den=f.unit_den,
        delta_bd=delta,
    )


def _state_distances(f_old, f_new, base, resolution=96):
    st1 = reconstruct(f_old, base, resolution=resolution)
    st2 = reconstruct(f_new, base, resolution=resolution)
    d = st1.u - st2.u
    inside = st1.inside & st2.inside
    sup = float(np.nanmax(np.abs(d[inside])))
    h = st1.h
    dd = np.where(inside, d, 0.0)
    gx = np.diff(dd, axis=1) / h
    gy = np.diff(dd, axis=0) / h
    l2 = float(np.sum(dd * dd) * h * h)
    semi = float((np.sum(gx * gx) + np.sum(gy * gy)) * h * h)
    return sup, math.sqrt(l2 + semi)


def split_zero(f: RationalFactored, z0, eps_target: float = 0.05, branch: int = 0,
               eps0: float | None = None, newton_tol: float = 1e-9) -> DesingularizationResult:
    """One application of the zero-splitting construction, with verification.

    Preconditions: ord(f, z0) >= 2, the full admissibility of f at z0, and
    general position of the remaining zeros seen from z0 (arrange via the
    Moebius helpers first if needed).  Backtracks eps by halving when Newton
    leaves its branch basin or the new state strays beyond eps_target.
    """
    z0 = complex(z0)
    rep = admissibility(f, z0)
    if not rep.admissible:
        raise NotAdmissible(f"input not admissible at {z0}: {rep.residuals}")
    pts = [z for z, _ in f.interior_roots]
    if not is_general_position(pts, z0):
        raise ValueError("zeros not in general position with respect to z0")

    ctx0 = make_context(f, z0)
    choose_R(ctx0)
    if ctx0.M:
        scale_b = float(np.max(np.abs(ctx0.B0))) if len(ctx0.B0) else 1.0
        bad = float(np.max(np.abs(ctx0.B0.real)))
        if bad > max(1e-8, 1e-7 * scale_b):
            raise NotAdmissible(f"system vector at 0 not purely imaginary: {bad}")

    th0_all = limit_angles(ctx0)
    m = ctx0.m0 + 3
    if not 0 <= branch < m:
        raise ValueError(f"branch must lie in [0, {m})")
    th_seed0 = th0_all[branch]

    # final chart: keep the cut far from the working angle and the zero rays
    gamma = (th_seed0 + np.pi / m) % (2 * np.pi)
    for _ in range(64):
        if all(abs((gamma - np.angle(w)) % (2 * np.pi)) > 0.02
               and abs((np.angle(w) - gamma) % (2 * np.pi)) > 0.02
               for w in ctx0.omegas):
            break
        gamma = (gamma + 0.013) % (2 * np.pi)
    ctx = make_context(f, z0, gamma_arg=gamma)
    choose_R(ctx)
    cand = limit_angles(ctx)
    th_seed = min(cand, key=lambda a: abs((a - th_seed0 + np.pi) % (2 * np.pi) - np.pi))

    w1 = abs(ctx.omegas[0]) if ctx.M else None
    eps = eps0 if eps0 is not None else (0.01 * w1 if w1 else 0.01)
    if w1:
        eps = min(eps, 0.45 * w1)

    basin = np.pi / m
    last_exc = None
    tried_small_R = False
    for _ in range(36):
        try:
            theta = th_seed
            K = K_value(ctx, eps, theta)
            for _ in range(30):
                if abs(K) <= newton_tol:
                    break
                dK = (K_value(ctx, eps, theta + 1e-6) - K_value(ctx, eps, theta - 1e-6)) / 2e-6
                if dK == 0:
                    raise BranchLost("flat K derivative")
                step = -K / dK
                step = max(-0.3 * basin, min(0.3 * basin, step))
                theta += step
                if abs((theta - th_seed + np.pi) % (2 * np.pi) - np.pi) > basin:
                    raise BranchLost("Newton left the branch basin")
                K = K_value(ctx, eps, theta)
            if abs(K) > newton_tol:
                raise BranchLost(f"Newton stalled at |K| = {abs(K)}")

            omega0 = eps * np.exp(1j * theta)
            if ctx.M:
                A, B = assemble_system(ctx, omega0)
                W = solve_weights(A, B, _limit_signs(ctx, theta) * ctx.B0)
            else:
                W = np.zeros(0, dtype=complex)
            f_new = _assemble_f_new(ctx, omega0, W)

            assert order_at(f_new, z0) == ctx.m0
            assert order_at(f_new, z0 + omega0) == 1
            for w, q in zip(ctx.omegas, ctx.qs):
                assert order_at(f_new, z0 + w) == q
            rep_new = admissibility(f_new, z0)
            if not rep_new.admissible:
                raise ClosenessFailed(f"perturbed function failed admissibility: {rep_new.residuals}")
            sup, h1 = _state_distances(f, f_new, z0)
            if sup + h1 > eps_target:
                raise ClosenessFailed(f"state moved by {sup + h1} > {eps_target}")
            return DesingularizationResult(
                f_new=f_new, z0=z0, omega0=omega0, W=tuple(W), R=ctx.R,
                epsilon=eps, theta=theta, branch=branch,
                sup_dist=sup, h1_dist=h1, admissibility=rep_new,
            )
        except (BranchLost, ClosenessFailed) as exc:
            last_exc = exc
            if "q-polynomial" in str(exc):
                # representability failure: the weights scale like
                # eps / |w_1|^{lR+1}, so shrink hard, and prefer the
                # smallest exponent scale the determinant floor allows
                if not tried_small_R and ctx.M and ctx.R > 1:
                    tried_small_R = True
                    if normalized_det(ctx, 1) >= DET_FLOOR:
                        ctx.R = 1
                        continue
                eps *= 0.25
            else:
                eps *= 0.5
    raise ClosenessFailed(f"backtracking exhausted: {last_exc}")


def excess_index(f: RationalFactored) -> int:
    """Total multiplicity excess over triple junctions: sum of (order - 1)."""
    return sum(n - 1 for _, n in f.interior_roots)


def reduce_to_simple(f: RationalFactored, eps_budget: float = 0.2,
                     bold: bool = True) -> RationalFactored:
    """Split highest-order zeros until all are simple, one excess unit per step.

    Each step may first move the configuration into general position by a
    disk automorphism (the state distance then carries that map's condition
    factor).  With bold=True the initial eps per step is a quarter of the
    nearest-zero distance (backtracking shrinks it as needed), which keeps
    the produced zeros as separated as the budget allows; the conservative
    default (eps = 0.01 |w_1|, bold=False) makes later splits exponentially
    harder to represent because the q-weights scale like eps / |w_1|^{R+1}.
    """
    alpha0 = excess_index(f)
    if alpha0 == 0:
        return f
    per_step = eps_budget / alpha0

    def step_eps(g, z0):
        others = [abs(z - z0) for z, _ in g.interior_roots if abs(z - z0) > 1e-13]
        w1 = min(others) if others else None
        if not bold:
            return 0.01 * w1 if w1 else 0.01
        return 0.25 * w1 if w1 else 0.25

    cur = f
    while True:
        alpha = excess_index(cur)
        if alpha == 0:
            return cur
        # among the highest-order zeros, split the most isolated first;
        # splitting the same center twice in a row parks two fresh zeros at
        # nearly equal distances from every later center, which is exactly
        # the degeneracy the system determinant cannot absorb
        top = max(m for _, m in cur.interior_roots)

        def isolation(z):
            others = [abs(z - w) for w, _ in cur.interior_roots if abs(w - z) > 1e-13]
            return min(others) if others else 2.0

        cands = [(z, m) for z, m in cur.interior_roots if m == top]
        cands.sort(key=lambda p: (-isolation(p[0]), abs(p[0]), np.angle(p[0])))
        z0, n0 = cands[0]
        pts = [z for z, _ in cur.interior_roots]
        if is_general_position(pts, z0):
            res = split_zero(cur, z0, eps_target=per_step, eps0=step_eps(cur, z0))
            cur = res.f_new
            continue
        mob = make_general_position(pts, z0)
        g = pushforward_hopf(cur, invert(mob))
        gz0 = complex(apply(mob, z0))
        res = split_zero(g, gz0, eps_target=per_step, eps0=step_eps(g, gz0))
        cur = pushforward_hopf(res.f_new, mob)
