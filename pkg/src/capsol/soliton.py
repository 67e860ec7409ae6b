"""Gap solitons of the cubic lattice eigenproblem C a + V a = lam (1 + sigma |a|^2) a.

The search follows the valley-top (linking) geometry of the energy

    J(a) = 1/2 (C a, a) - lam/2 ||a||^2 + 1/2 (S V R a, a) - lam sigma / 4 ||a||_4^4

on k-periodic windows: a constrained gradient ascent over the linking set
M = {y + t z0k : y in Ran(P-), ||a|| < rho, t > r} locates the interior
maximizer, which an undamped Newton iteration on the full gradient then
polishes to a machine-precision critical point.  A k-sweep with warm
starts emulates the infinite-lattice limit, and every accepted result is
re-certified from scratch (residual, gap membership, defect premise,
decay rate, critical-value floor).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    BoundaryMaximum,
    DegenerateZ0,
    NewtonDiverged,
    SingularJacobian,
    TooFewAnnuli,
    WindowMismatch,
)
from .lattice import (
    BlockStencil,
    Box,
    DiagonalDefect,
    HalfSpaceStencil,
    LatticeField,
    Periodic,
    Strip,
    apply_operator,
    defect_norm,
    halfspace_stencil,
    nonlinear_residual,
    periodize,
    truncate,
)
from .spectrum import (
    SpectralGap,
    SpectralProjector,
    band_structure,
    spectral_projector,
)

__all__ = [
    "ProblemSpec",
    "LinkingSet",
    "SolitonResult",
    "SweepReport",
    "energy",
    "energy_gradient",
    "build_linking_set",
    "linking_maximize",
    "newton_refine",
    "k_sweep",
    "decay_rate",
    "halfspace_solve",
]

RESIDUAL_RTOL = 1e-10
FLOOR_TOL = 1e-8


# ----------------------------------------------------------------------
# problem description
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ProblemSpec:
    """Everything that defines one soliton problem.

    ``gap`` may be None for point-spectrum stencils (e.g. the single-site
    reduction), in which case the isolation distance is sampled from the
    band structure instead of taken from gap edges.  ``mirror_symmetric``
    asserts the half-space reflection identity and is required by
    halfspace_solve.
    """

    stencil: BlockStencil
    lam: float
    sigma: float
    V: DiagonalDefect = dc_field(default_factory=DiagonalDefect.empty)
    gap: SpectralGap | None = None
    mirror_symmetric: bool = False

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.gap is not None:
            if not self.gap.contains(self.lam):
                raise ValueError(
                    f"lambda = {self.lam} outside the gap "
                    f"({self.gap.lower}, {self.gap.upper})"
                )
            delta = min(self.lam - self.gap.lower, self.gap.upper - self.lam)
            if delta < 1e-6 * self.gap.width:
                raise ValueError(
                    "lambda sits numerically on a band edge; the linking "
                    "radii all degenerate (delta ~ 0)"
                )

    @property
    def delta_iso(self) -> float:
        """Isolation distance dist(lambda, Spec C)."""
        if self.gap is not None:
            return min(self.lam - self.gap.lower, self.gap.upper - self.lam)
        M = max(8, 2 * self.stencil.radius + 1)
        return band_structure(self.stencil, M).spectrum_distance(self.lam)

    @property
    def defect_premise_ok(self) -> bool:
        """2 ||V||_1 < dist(lambda, Spec C) — sufficiency, not necessity."""
        return 2.0 * defect_norm(self.V) < self.delta_iso

    def operator_for(self, window):
        if isinstance(window, Strip):
            return halfspace_stencil(self.stencil, self.mirror_symmetric)
        return self.stencil


# ----------------------------------------------------------------------
# energy and gradient
# ----------------------------------------------------------------------

def energy(spec: ProblemSpec, a: LatticeField) -> float:
    """J(a); the imaginary part must vanish (self-adjoint quadratic forms)."""
    op = spec.operator_for(a.window)
    Ca = apply_operator(op, a)
    quad = Ca.inner(a)
    va = spec.V.apply(a).inner(a) if len(spec.V) else 0.0
    n2 = a.norm(2) ** 2
    n4 = a.norm(4) ** 4
    J = 0.5 * quad - 0.5 * spec.lam * n2 + 0.5 * va - 0.25 * spec.lam * spec.sigma * n4
    if abs(J.imag) > 1e-12 * max(1.0, abs(J.real)):
        raise WindowMismatch(f"energy has imaginary part {J.imag:.3g}")
    return float(J.real)


def energy_gradient(spec: ProblemSpec, a: LatticeField) -> LatticeField:
    """Gradient of J, which is literally the nonlinear residual field."""
    op = spec.operator_for(a.window)
    grad, _ = nonlinear_residual(op, spec.V, spec.lam, spec.sigma, a)
    return grad


# ----------------------------------------------------------------------
# linking set
# ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LinkingSet:
    """The valley-top search region M = {y + t z0k : ||a|| < rho, t > r}.

    z0 is a fixed unit vector in Ran(P+) of a large reference period
    (stored as a Box field around its seed site); z0k is its projected,
    renormalized shadow on the working period k.
    """

    k: int
    z0: LatticeField                # Box field, ||z0|| = 1
    z0k: LatticeField               # Periodic(k) field, ||z0k|| = 1, real
    seed_site: tuple[int, int]
    seed_component: int
    P_plus: SpectralProjector
    P_minus: SpectralProjector
    rho: float
    r: float
    t_star: float
    C1: float
    C3: float
    N4: float
    proj_norm: float                # ||P+ S z0|| before renormalization

    @property
    def m1(self) -> float:
        return 0.5 * self.r

    @property
    def M1(self) -> float:
        return self.rho


def inner_truncated(a: LatticeField, z0: LatticeField) -> float:
    """(R a, z0)_{l^2}: pairing of a windowed field with a Box field.

    For Periodic windows the field is truncated to Y_k first; for Strip
    windows sites are taken at their absolute (n1, n2) coordinates.
    """
    if isinstance(a.window, Periodic):
        a = truncate(a)
    total = 0.0 + 0.0j
    lo, hi = z0.window.lo, z0.window.hi
    for i1 in range(z0.values.shape[0]):
        for i2 in range(z0.values.shape[1]):
            site = (lo[0] + i1, lo[1] + i2)
            if a.window.contains(site):
                j1, j2 = a.window.index(site)
                total += np.vdot(z0.values[i1, i2], a.values[j1, j2])
    _ = hi
    return float(total.real)


def _z0_from_kernel(P_ref: SpectralProjector, seed_site, component) -> tuple[LatticeField, float]:
    """Normalized projection of a site delta, as a Box field around the seed.

    (P delta_{s,c})_n = K(n - s) e_c, so the field is just a kernel column
    laid out on the centered cell of the reference period.
    """
    K = P_ref.k
    col = P_ref.kernel[:, :, :, component]      # (K, K, d), index = (n - s) mod K
    nrm = float(np.linalg.norm(col))
    if nrm < 1e-8:
        return None, nrm
    half = K // 2
    lo = (seed_site[0] - half, seed_site[1] - half)
    vals = np.zeros((K, K, P_ref.d), dtype=np.complex128)
    for i1 in range(K):
        for i2 in range(K):
            n1 = lo[0] + i1
            n2 = lo[1] + i2
            vals[i1, i2] = col[(n1 - seed_site[0]) % K, (n2 - seed_site[1]) % K]
    box = Box(lo=lo, hi=(lo[0] + K - 1, lo[1] + K - 1))
    return LatticeField(box, vals / nrm), nrm


def build_linking_set(
    spec: ProblemSpec,
    k: int,
    seed_site=None,
    seed_component: int = 0,
    z0: LatticeField | None = None,
    reference_k: int | None = None,
) -> LinkingSet:
    """Construct the linking set with the proof's radii made computable.

    z0 defaults to the normalized P+ projection of a site delta on a
    reference period (cycling components, then neighboring sites, before
    giving up with DegenerateZ0).  The radii use
        r   = 0.5 min( sqrt(delta/(2 lam sigma)), sqrt(delta^2/(32 C1 lam sigma)) ),
        rho = max( (C1 + delta/4)/sqrt(delta C3), 2 t* ),
    with C1 = (||C|| + |lam| + delta/2)/2 and C3 built from the l^4
    projection certificate N4 and ||z0||_4.
    """
    if spec.gap is None:
        raise ValueError("linking construction needs a certified spectral gap")
    gap = spec.gap
    delta = spec.delta_iso
    lam_sigma = spec.lam * spec.sigma
    if lam_sigma <= 0:
        raise ValueError("linking construction assumes lam > 0 (focusing case)")

    P_plus = spectral_projector(spec.stencil, k, gap, "plus")
    P_minus = spectral_projector(spec.stencil, k, gap, "minus")

    if seed_site is None:
        seed_site = (k // 2, k // 2)
    seed_site = (int(seed_site[0]), int(seed_site[1]))

    if z0 is None:
        K_ref = reference_k or max(4 * k, 32)
        P_ref = spectral_projector(spec.stencil, K_ref, gap, "plus")
        z0 = None
        tried = []
        for ds in [(0, 0), (1, 0), (0, 1)]:
            for comp in range(spec.stencil.d):
                cand_site = (seed_site[0] + ds[0], seed_site[1] + ds[1])
                cand, nrm = _z0_from_kernel(P_ref, cand_site, comp)
                tried.append((cand_site, comp, nrm))
                if cand is not None:
                    z0 = cand
                    seed_site, seed_component = cand_site, comp
                    break
            if z0 is not None:
                break
        if z0 is None:
            raise DegenerateZ0(
                f"no site delta projects onto Ran(P+): tried {tried}"
            )

    sz0 = periodize(z0, k)
    pz0 = P_plus.apply(sz0)
    proj_norm = pz0.norm(2)
    if proj_norm <= 2.0 / 3.0:
        raise ValueError(
            f"||P+ S z0|| = {proj_norm:.3f} <= 2/3 at k = {k}; "
            "increase k (below the admissible k0)"
        )
    z0k = (1.0 / proj_norm) * pz0
    z0k = z0k.real_part()

    norm_C = spec.stencil.operator_norm()
    C1 = 0.5 * (norm_C + abs(spec.lam) + 0.5 * delta)
    # l^4 certificate of P+ from its kernel row sums (C3 surrogate = C1row)
    C1row = float(np.max(np.sum(np.abs(P_plus.kernel), axis=(0, 1, 3))))
    N4 = C1row ** 0.75 * (2.0 * C1row) ** 0.25
    C2 = lam_sigma / (4.0 * N4 ** 4)
    C3 = 0.5 * C2 * z0.norm(4) ** 4

    t_star = math.sqrt(delta / (2.0 * lam_sigma))
    r = 0.5 * min(t_star, math.sqrt(delta ** 2 / (32.0 * C1 * lam_sigma)))
    rho = max((C1 + 0.25 * delta) / math.sqrt(delta * C3), 2.0 * t_star)

    return LinkingSet(
        k=k,
        z0=z0,
        z0k=z0k,
        seed_site=seed_site,
        seed_component=seed_component,
        P_plus=P_plus,
        P_minus=P_minus,
        rho=rho,
        r=r,
        t_star=t_star,
        C1=C1,
        C3=C3,
        N4=N4,
        proj_norm=proj_norm,
    )


# ----------------------------------------------------------------------
# constrained ascent
# ----------------------------------------------------------------------

def linking_maximize(
    spec: ProblemSpec,
    lset: LinkingSet,
    max_iter: int = 5000,
    step_tol: float = 1e-8,
) -> LatticeField:
    """Projected gradient ascent of J over the closure of the linking set.

    The iterate is parametrized as a = y + t z0k with y in Ran(P-) real
    and t > r; Armijo backtracking keeps J increasing.  The maximizer
    must end up interior (distance to the boundary > 1e-6 rho), otherwise
    BoundaryMaximum is raised with the measured values.
    """
    k = lset.k
    window = Periodic(k)
    z = lset.z0k.values.real
    y = np.zeros_like(z)
    t = lset.t_star
    rho, r = lset.rho, lset.r

    def assemble(yv, tv):
        return LatticeField(window, (yv + tv * z).astype(np.complex128))

    def project(yv, tv):
        tv = max(tv, r * (1.0 + 1e-9))
        nrm = math.sqrt(float(np.sum(yv ** 2)) + tv ** 2)
        if nrm >= rho:
            scale = (rho * (1.0 - 1e-9)) / nrm
            yv = yv * scale
            tv = max(tv * scale, r * (1.0 + 1e-9))
        return yv, tv

    a = assemble(y, t)
    J = energy(spec, a)
    eta = 1.0 / (2.0 * lset.C1 + 1.0)
    for _ in range(max_iter):
        g = energy_gradient(spec, a)
        gy = lset.P_minus.apply(g).values.real
        gt = float(np.sum(g.values.real * z))
        gnorm2 = float(np.sum(gy ** 2)) + gt ** 2
        if math.sqrt(gnorm2) < 1e-12:
            break
        moved = None
        while eta > 1e-16:
            y_new, t_new = project(y + eta * gy, t + eta * gt)
            a_new = assemble(y_new, t_new)
            J_new = energy(spec, a_new)
            if J_new >= J + 1e-4 * eta * gnorm2:
                moved = (y_new, t_new, a_new, J_new)
                break
            eta *= 0.5
        if moved is None:
            break
        step = math.sqrt(
            float(np.sum((moved[0] - y) ** 2)) + (moved[1] - t) ** 2
        )
        y, t, a, J = moved
        eta = min(eta * 1.5, 1.0)
        if step < step_tol:
            break

    dist_boundary = min(t - r, rho - math.sqrt(float(np.sum(y ** 2)) + t ** 2))
    if dist_boundary <= 1e-6 * rho:
        raise BoundaryMaximum(
            f"ascent terminated on the boundary: t - r = {t - r:.3g}, "
            f"rho - ||a|| = {rho - a.norm(2):.3g}, J = {J:.6g}"
        )
    return a


# ----------------------------------------------------------------------
# Newton refinement and certification
# ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SolitonResult:
    """A certified critical point: the field plus every measured check."""

    a: LatticeField
    lam: float
    sigma: float
    residual_norm: float
    energy: float
    decay_gamma: float | None
    decay_quality: float | None
    checks: dict
    details: dict

    @property
    def all_pass(self) -> bool:
        return all(self.checks.values())


def _operator_matrix(spec: ProblemSpec, window):
    """Solver matrix for the window: sparse CSR (Periodic) or dense (Strip)."""
    if isinstance(window, Periodic):
        return spec.stencil.periodic_matrix(window.k)
    if isinstance(window, Strip):
        hs = halfspace_stencil(spec.stencil, spec.mirror_symmetric)
        return hs.matrix(window.width, window.k)
    raise WindowMismatch(f"no solver matrix for window {window!r}")


def _near_zero_eigenvalue(J) -> float:
    Jd = J.toarray() if sp.issparse(J) else J
    w = np.linalg.eigvalsh(0.5 * (Jd + Jd.T))
    return float(w[np.argmin(np.abs(w))])


def newton_refine(
    spec: ProblemSpec,
    a0: LatticeField,
    linking: LinkingSet | None = None,
    max_iter: int = 50,
) -> SolitonResult:
    """Solve grad J(a) = 0 by damped Newton from a0, then certify.

    The linearization is C - lam + V - 3 lam sigma diag(a^2) on real
    fields.  Raises NewtonDiverged when 50 iterations (or the damping
    budget) are exhausted, SingularJacobian when the linear solve fails.
    """
    window = a0.window
    if not a0.is_real(1e-12):
        raise ValueError("Newton refinement runs on real fields")
    A = _operator_matrix(spec, window)
    d = a0.d
    vdiag = spec.V.diag_vector(window, d)
    lam, sigma = spec.lam, spec.sigma

    x = a0.values.real.reshape(-1).copy()

    def F(xv):
        return A @ xv + vdiag * xv - lam * (xv + sigma * xv ** 3)

    fx = F(x)
    fnorm = float(np.linalg.norm(fx))
    for it in range(max_iter):
        scale = max(1.0, float(np.linalg.norm(x)))
        if fnorm <= 1e-15 * scale:
            break
        dvec = vdiag - lam - 3.0 * lam * sigma * x ** 2
        try:
            if sp.issparse(A):
                J = (A + sp.diags(dvec)).tocsc()
                s = spla.splu(J).solve(-fx)
            else:
                J = A + np.diag(dvec)
                s = np.linalg.solve(J, -fx)
        except (np.linalg.LinAlgError, RuntimeError) as exc:
            raise SingularJacobian(
                f"linear solve failed at iteration {it}; eigenvalue closest "
                f"to zero: {_near_zero_eigenvalue(A + sp.diags(dvec) if sp.issparse(A) else J):.3g}"
            ) from exc
        lin_res = float(np.linalg.norm(J @ s + fx))
        if not np.all(np.isfinite(s)) or lin_res > 1e-6 * max(fnorm, 1e-300):
            raise SingularJacobian(
                f"Jacobian numerically singular (linear residual {lin_res:.3g}); "
                f"eigenvalue closest to zero: {_near_zero_eigenvalue(J):.3g}"
            )
        damp = 1.0
        accepted = False
        f_prev = fnorm
        while damp >= 2.0 ** -30:
            x_try = x + damp * s
            f_try = F(x_try)
            fn_try = float(np.linalg.norm(f_try))
            if fn_try < fnorm or fn_try <= 1e-15 * scale:
                x, fx, fnorm = x_try, f_try, fn_try
                accepted = True
                break
            damp *= 0.5
        if not accepted:
            raise NewtonDiverged(
                f"damping exhausted at iteration {it} with |F| = {fnorm:.3g}"
            )
        # below tolerance and past the quadratic phase: polishing is over
        if fnorm <= RESIDUAL_RTOL * scale and fnorm > 0.25 * f_prev:
            break
    else:
        scale = max(1.0, float(np.linalg.norm(x)))
        if fnorm > RESIDUAL_RTOL * scale:
            raise NewtonDiverged(f"no convergence after {max_iter} iterations, |F| = {fnorm:.3g}")

    a = LatticeField(window, x.reshape(a0.values.shape).astype(np.complex128))
    if linking is not None and inner_truncated(a, linking.z0) < 0:
        a = -a  # -a is also a critical point; fix the sign convention
    return certify(spec, a, linking)


def certify(spec: ProblemSpec, a: LatticeField, linking: LinkingSet | None = None) -> SolitonResult:
    """Re-derive every reported number from the raw field."""
    op = spec.operator_for(a.window)
    _, res_norm = nonlinear_residual(op, spec.V, spec.lam, spec.sigma, a)
    J = energy(spec, a)
    delta = spec.delta_iso
    floor = delta ** 2 / (16.0 * spec.lam * spec.sigma) if spec.lam * spec.sigma > 0 else None

    anorm = a.norm(2)
    checks = {}
    details = {
        "delta_iso": delta,
        "defect_norm": defect_norm(spec.V),
        "norm_l2": anorm,
        "residual_norm": res_norm,
        "energy": J,
    }

    checks["in_gap"] = (
        spec.gap.contains(spec.lam) if spec.gap is not None else delta > 0
    )
    checks["defect_ok"] = spec.defect_premise_ok
    checks["residual_ok"] = res_norm < RESIDUAL_RTOL * max(1.0, anorm)
    checks["realness_ok"] = a.is_real(0.0)

    if linking is not None:
        overlap = inner_truncated(a, linking.z0)
        details["z0_overlap"] = overlap
        details["m1"] = linking.m1
        details["M1"] = linking.M1
        checks["nontrivial"] = abs(overlap) >= linking.m1
    else:
        checks["nontrivial"] = anorm > 1e-8

    if floor is not None:
        details["critical_value_floor"] = floor
        premise = defect_norm(spec.V) <= 0.5 * delta
        details["floor_premise"] = 1.0 if premise else 0.0
        checks["critical_value_ok"] = (J >= floor - FLOOR_TOL) if premise else True

    gamma = quality = None
    k_like = a.window.k if isinstance(a.window, (Periodic, Strip)) else None
    if k_like is not None and k_like >= 8:
        amax_site = np.unravel_index(
            np.argmax(np.max(np.abs(a.values), axis=2)), a.window.shape
        )
        if isinstance(a.window, Periodic):
            center = (int(amax_site[0]), int(amax_site[1]))
        else:
            center = (int(amax_site[0]) + 1, int(amax_site[1]))
        gamma, quality = decay_rate(a, center)
        details["decay_center"] = center

    if isinstance(a.window, Strip):
        w = np.sum(np.abs(a.values) ** 2, axis=(1, 2))
        com = float(np.sum((np.arange(1, a.window.width + 1)) * w) / np.sum(w))
        edge_dist = min(com, a.window.width + 1 - com)
        details["edge_distance"] = edge_dist
        details["edge_proximity_warning"] = 1.0 if edge_dist < 4 else 0.0

    return SolitonResult(
        a=a,
        lam=spec.lam,
        sigma=spec.sigma,
        residual_norm=res_norm,
        energy=J,
        decay_gamma=gamma,
        decay_quality=quality,
        checks=checks,
        details=details,
    )


# ----------------------------------------------------------------------
# decay fitting
# ----------------------------------------------------------------------

def decay_rate(a: LatticeField, center) -> tuple[float, float]:
    """Exponential decay rate of |a| on annuli around ``center``.

    Returns (gamma, fit_quality).  Compactly supported fields whose tail
    sits at the numerical floor report gamma = inf (floor-saturated).
    Periodic/Strip distances wrap in the periodic directions.
    """
    window = a.window
    if isinstance(window, Periodic):
        k = window.k
    elif isinstance(window, Strip):
        k = window.k
    else:
        k = min(a.values.shape[0], a.values.shape[1])
    if k < 8:
        raise TooFewAnnuli(f"period {k} < 8: no annuli to fit")
    amp = np.max(np.abs(a.values), axis=2)
    if float(np.max(amp)) == 0.0:
        raise ValueError("decay_rate needs a nonzero field")

    # annulus s collects sites with round(|n - center|) = s; the regression
    # runs against the true distance of each annulus maximum, so an exact
    # exponential e^{-gamma |n|} fits with zero residual
    shells = {}
    for (i1, i2), v in np.ndenumerate(amp):
        if isinstance(window, Periodic):
            n1, n2 = i1, i2
            d1 = min(abs(n1 - center[0]), k - abs(n1 - center[0]))
            d2 = min(abs(n2 - center[1]), k - abs(n2 - center[1]))
        elif isinstance(window, Strip):
            n1, n2 = i1 + 1, i2
            d1 = abs(n1 - center[0])
            d2 = min(abs(n2 - center[1]), k - abs(n2 - center[1]))
        else:
            n1 = window.lo[0] + i1
            n2 = window.lo[1] + i2
            d1 = abs(n1 - center[0])
            d2 = abs(n2 - center[1])
        dist = math.hypot(d1, d2)
        s = int(round(dist))
        if s <= k / 4:
            best = shells.get(s)
            if best is None or v > best[0]:
                shells[s] = (float(v), dist)

    floor = 1e-14 * float(np.max(amp))
    pairs = sorted((dist, v) for v, dist in shells.values() if v > floor)
    if len(pairs) < 2:
        return math.inf, 1.0  # floor-saturated (e.g. a lone delta)
    xs = np.array([dist for dist, _ in pairs])
    ys = np.log([v for _, v in pairs])
    slope, intercept = np.polyfit(xs, ys, 1)
    pred = slope * xs + intercept
    ss_res = float(np.sum((ys - pred) ** 2))
    ss_tot = float(np.sum((ys - np.mean(ys)) ** 2))
    quality = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(-slope), float(quality)


# ----------------------------------------------------------------------
# k-sweep and half-space
# ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SweepReport:
    """Results of solving on increasing periods with warm starts."""

    k_list: tuple
    results: list
    tails: list            # || R^[k_i] a^[k_{i+1}] - R^[k_i] a^[k_i] ||
    converged: bool | None  # None when fewer than two periods ran
    failures: dict          # k -> error message for periods that failed


def k_sweep(spec: ProblemSpec, k_list, seed_site=None, seed_component: int = 0) -> SweepReport:
    """Solve on each period of increasing size, warm-starting from the last.

    The warm start is S^[k_next] R^[k_prev] a_prev (truncate to the old
    window, then wrap onto the new period).  Tail metrics compare
    consecutive solutions on the smaller window; convergence flags the
    last tail < 1e-6.  A failing period stops the sweep and is recorded;
    partial results are returned rather than discarded.
    """
    ks = [int(k) for k in k_list]
    if sorted(ks) != ks or len(set(ks)) != len(ks):
        raise ValueError("k_list must be strictly increasing")
    results = []
    failures = {}
    z0 = None
    seed = seed_site if seed_site is not None else (ks[0] // 2, ks[0] // 2)
    prev = None
    for k in ks:
        try:
            lset = build_linking_set(
                spec, k, seed_site=seed, seed_component=seed_component, z0=z0
            )
            z0 = lset.z0
            seed_component = lset.seed_component
            seed = lset.seed_site
            if prev is None:
                a0 = linking_maximize(spec, lset)
            else:
                a0 = periodize(truncate(prev), k).real_part()
            res = newton_refine(spec, a0, linking=lset)
            results.append(res)
            prev = res.a
        except Exception as exc:  # propagate per-k, keep partial results
            failures[k] = f"{type(exc).__name__}: {exc}"
            break
    tails = []
    for first, second in zip(results, results[1:]):
        kp = first.a.window.k
        diff = second.a.values[:kp, :kp] - first.a.values
        tails.append(float(np.linalg.norm(diff)))
    converged = (tails[-1] < 1e-6) if tails else None
    return SweepReport(
        k_list=tuple(ks),
        results=results,
        tails=tails,
        converged=converged,
        failures=failures,
    )


def halfspace_solve(
    spec: ProblemSpec,
    k: int,
    width: int | None = None,
    seed_site=None,
) -> SolitonResult:
    """Soliton of the half-space operator on Strip(width, k).

    A whole-space soliton at the same period seeds the strip (profile
    translated so its center sits mid-strip); Newton then converges in
    the half-space geometry.  The default width is ceil(8/gamma) from
    the whole-space decay fit.
    """
    if not spec.mirror_symmetric:
        # constructing the half-space stencil raises SymmetryNotAsserted
        halfspace_stencil(spec.stencil, spec.mirror_symmetric)
    sweep = k_sweep(spec, [k], seed_site=seed_site)
    if not sweep.results:
        raise NewtonDiverged(
            f"whole-space seed failed: {sweep.failures.get(k, 'unknown')}"
        )
    bulk = sweep.results[0]
    gamma = bulk.decay_gamma
    if width is None:
        if gamma is None or not math.isfinite(gamma) or gamma <= 0:
            raise ValueError("cannot derive strip width: no bulk decay rate")
        width = int(math.ceil(8.0 / gamma))

    ws = bulk.a.values
    c1 = int(np.unravel_index(np.argmax(np.max(np.abs(ws), axis=2)), (k, k))[0])
    strip = Strip(width, k)
    vals = np.zeros((width, k, spec.stencil.d), dtype=np.complex128)
    mid = width // 2
    for n1 in range(1, width + 1):
        vals[n1 - 1] = ws[(c1 + (n1 - mid)) % k]
    a0 = LatticeField(strip, vals)
    return newton_refine(spec, a0)
