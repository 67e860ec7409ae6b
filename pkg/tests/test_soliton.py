"""Linking construction, constrained ascent, Newton refinement, sweeps."""

import math

import numpy as np
import pytest

import capsol
from capsol import (
    BlockStencil,
    DegenerateZ0,
    DiagonalDefect,
    LatticeField,
    NewtonDiverged,
    Periodic,
    ProblemSpec,
    SingularJacobian,
    SpectralGap,
    Strip,
    SymmetryNotAsserted,
    build_linking_set,
    decay_rate,
    energy,
    energy_gradient,
    halfspace_solve,
    k_sweep,
    linking_maximize,
    newton_refine,
    nonlinear_residual,
)

from conftest import random_real_field


# ----------------------------------------------------------------------
# problem validation
# ----------------------------------------------------------------------

def test_spec_rejects_nonpositive_sigma(diatomic, diatomic_gap):
    with pytest.raises(ValueError):
        ProblemSpec(stencil=diatomic, lam=5.0, sigma=0.0, gap=diatomic_gap)


def test_spec_rejects_lambda_outside_gap(diatomic, diatomic_gap):
    with pytest.raises(ValueError):
        ProblemSpec(stencil=diatomic, lam=6.0, sigma=1.0, gap=diatomic_gap)


def test_spec_rejects_band_edge_lambda(diatomic, diatomic_gap):
    lam = diatomic_gap.lower + 1e-9 * diatomic_gap.width
    with pytest.raises(ValueError, match="band edge"):
        ProblemSpec(stencil=diatomic, lam=lam, sigma=1.0, gap=diatomic_gap)


def test_delta_iso_and_defect_premise(diatomic, diatomic_gap):
    V = DiagonalDefect({((4, 4), 0): 0.2})
    spec = ProblemSpec(stencil=diatomic, lam=5.0, sigma=1.0, V=V, gap=diatomic_gap)
    assert spec.delta_iso == pytest.approx(0.5, abs=1e-6)
    assert spec.defect_premise_ok  # 0.4 < 0.5
    big = ProblemSpec(stencil=diatomic, lam=5.0, sigma=1.0,
                      V=DiagonalDefect({((4, 4), 0): 0.3}), gap=diatomic_gap)
    assert not big.defect_premise_ok  # 0.6 >= 0.5


def test_gapless_spec_samples_band_distance(scalar_site):
    spec = ProblemSpec(stencil=scalar_site, lam=1.0, sigma=1.0)
    assert spec.delta_iso == pytest.approx(1.0)


# ----------------------------------------------------------------------
# energy and gradient
# ----------------------------------------------------------------------

def test_gradient_is_literally_the_residual(diatomic_spec):
    a = random_real_field(Periodic(8), 2, seed=2)
    g = energy_gradient(diatomic_spec, a)
    r, rnorm = nonlinear_residual(diatomic_spec.stencil, diatomic_spec.V,
                                  diatomic_spec.lam, diatomic_spec.sigma, a)
    np.testing.assert_array_equal(g.values, r.values)
    assert g.norm(2) == rnorm


@pytest.mark.parametrize("seed", range(5))
def test_gradient_matches_central_differences(diatomic_spec, seed):
    k = 6
    a = random_real_field(Periodic(k), 2, seed=seed)
    h = random_real_field(Periodic(k), 2, seed=seed + 100)
    analytic = energy_gradient(diatomic_spec, a).inner(h).real
    eps = 1e-6
    numeric = (energy(diatomic_spec, a + eps * h)
               - energy(diatomic_spec, a - eps * h)) / (2 * eps)
    assert numeric == pytest.approx(analytic, rel=1e-6, abs=1e-9)


def test_energy_of_zero_field(diatomic_spec):
    assert energy(diatomic_spec, LatticeField.zeros(Periodic(4), 2)) == 0.0


def test_sigma_rescaling_invariance(diatomic, diatomic_gap):
    # the quartic term is invariant under sigma -> c*sigma, a -> c^(-1/4) a
    a = random_real_field(Periodic(6), 2, seed=9)
    s1 = ProblemSpec(stencil=diatomic, lam=5.0, sigma=1.0, gap=diatomic_gap)
    s4 = ProblemSpec(stencil=diatomic, lam=5.0, sigma=4.0, gap=diatomic_gap)
    q1 = 0.25 * s1.lam * s1.sigma * a.norm(4) ** 4
    q4 = 0.25 * s4.lam * s4.sigma * (4.0 ** -0.25 * a).norm(4) ** 4
    assert q1 == pytest.approx(q4, rel=1e-12)


# ----------------------------------------------------------------------
# linking set
# ----------------------------------------------------------------------

def test_linking_set_constants_frozen_oracle(diatomic_spec):
    # delta = 0.5, ||C|| = 6.5 -> C1 = (6.5 + 5 + 0.25)/2 = 5.875
    # t* = sqrt(0.05) ; r = 0.5 sqrt(0.25 / (32 * 5.875 * 5))
    lset = build_linking_set(diatomic_spec, 16)
    assert lset.C1 == pytest.approx(5.875, abs=1e-9)
    assert lset.t_star == pytest.approx(math.sqrt(0.05), rel=1e-12)
    assert lset.r == pytest.approx(0.5 * math.sqrt(0.25 / (32 * 5.875 * 5.0)),
                                   rel=1e-9)
    assert lset.r < min(lset.t_star, 1.0)
    assert lset.m1 == pytest.approx(0.5 * lset.r)
    assert lset.M1 == lset.rho
    assert lset.z0k.norm(2) == pytest.approx(1.0, rel=1e-12)
    assert lset.z0.norm(2) == pytest.approx(1.0, rel=1e-12)
    assert lset.proj_norm > 2.0 / 3.0
    assert lset.z0k.is_real(0.0)


def test_shrinking_gap_shrinks_r(diatomic_gap):
    # t2 -> t1 closes the gap; with lambda mid-gap delta drops and so must r
    from conftest import diatomic_blocks
    st_wide = BlockStencil(diatomic_blocks(t2=0.5))
    st_narrow = BlockStencil(diatomic_blocks(t2=0.8))
    gap_wide = capsol.find_gaps(capsol.band_structure(st_wide, 32))[0]
    gap_narrow = capsol.find_gaps(capsol.band_structure(st_narrow, 32))[0]
    r_wide = build_linking_set(
        ProblemSpec(stencil=st_wide, lam=5.0, sigma=1.0, gap=gap_wide), 8).r
    r_narrow = build_linking_set(
        ProblemSpec(stencil=st_narrow, lam=5.0, sigma=1.0, gap=gap_narrow), 8).r
    assert r_narrow < r_wide


def test_z0_component_fallback():
    # diagonal stencil: P+ annihilates component-0 deltas, so the seed
    # construction must cycle to component 1
    st = BlockStencil({(0, 0): np.diag([2.0, 8.0])})
    gap = SpectralGap(lower=2.0, upper=8.0, inf_positive=True,
                      spectrum_below=True, spectrum_above=True)
    spec = ProblemSpec(stencil=st, lam=5.0, sigma=1.0, gap=gap)
    lset = build_linking_set(spec, 4)
    assert lset.seed_component == 1
    assert lset.z0k.norm(2) == pytest.approx(1.0)


def test_degenerate_z0_when_projector_has_rank_zero():
    st = BlockStencil({(0, 0): np.diag([2.0, 3.0])})
    fake = SpectralGap(lower=4.0, upper=9.0, inf_positive=True,
                       spectrum_below=True, spectrum_above=False)
    spec = ProblemSpec(stencil=st, lam=5.0, sigma=1.0, gap=fake)
    with pytest.raises(DegenerateZ0):
        build_linking_set(spec, 4)


def test_linking_requires_gap(scalar_site):
    spec = ProblemSpec(stencil=scalar_site, lam=1.0, sigma=1.0)
    with pytest.raises(ValueError, match="gap"):
        build_linking_set(spec, 4)


# ----------------------------------------------------------------------
# ascent + Newton
# ----------------------------------------------------------------------

def test_ascent_reaches_interior_maximum_above_floor(diatomic_spec):
    lset = build_linking_set(diatomic_spec, 8)
    a = linking_maximize(diatomic_spec, lset)
    J = energy(diatomic_spec, a)
    delta = diatomic_spec.delta_iso
    assert J >= delta ** 2 / (16 * 5.0 * 1.0) - 1e-8
    assert a.norm(2) < lset.rho


def test_newton_certifies_diatomic_soliton(diatomic_spec):
    lset = build_linking_set(diatomic_spec, 8)
    a0 = linking_maximize(diatomic_spec, lset)
    res = newton_refine(diatomic_spec, a0.real_part(), linking=lset)
    assert res.residual_norm < 1e-10 * max(1.0, res.a.norm(2))
    assert res.all_pass
    assert res.details["z0_overlap"] >= lset.m1
    assert res.a.norm(2) <= lset.M1
    assert res.a.is_real(0.0)


def test_newton_fixed_point_returns_input(scalar_site):
    spec = ProblemSpec(stencil=scalar_site, lam=1.0, sigma=1.0)
    vals = np.full((3, 3, 1), 1.0, dtype=np.complex128)
    exact = LatticeField(Periodic(3), vals)
    res = newton_refine(spec, exact)
    np.testing.assert_array_equal(res.a.values, vals)
    assert res.residual_norm == 0.0


def test_newton_scalar_closed_form(scalar_site):
    spec = ProblemSpec(stencil=scalar_site, lam=1.0, sigma=1.0)
    a0 = LatticeField(Periodic(1), np.full((1, 1, 1), 1.5, dtype=np.complex128))
    res = newton_refine(spec, a0)
    assert res.a.values[0, 0, 0].real == pytest.approx(1.0, abs=1e-12)
    assert res.residual_norm < 1e-14
    assert res.energy == pytest.approx(0.25, abs=1e-12)


def test_newton_sign_symmetry(scalar_site):
    spec = ProblemSpec(stencil=scalar_site, lam=1.0, sigma=1.0)
    plus = newton_refine(spec, LatticeField(
        Periodic(2), np.full((2, 2, 1), 0.9, dtype=np.complex128)))
    minus = newton_refine(spec, LatticeField(
        Periodic(2), np.full((2, 2, 1), -0.9, dtype=np.complex128)))
    np.testing.assert_allclose(plus.a.values, -minus.a.values, atol=0)
    assert plus.energy == pytest.approx(minus.energy, rel=1e-14)


def test_newton_rejects_complex_start(scalar_site):
    spec = ProblemSpec(stencil=scalar_site, lam=1.0, sigma=1.0)
    vals = np.full((2, 2, 1), 1.0 + 0.1j)
    with pytest.raises(ValueError):
        newton_refine(spec, LatticeField(Periodic(2), vals))


def test_newton_singular_jacobian(scalar_site):
    # J = diag(1 - 3 x^2) vanishes exactly at x = 1/sqrt(3)
    spec = ProblemSpec(stencil=scalar_site, lam=1.0, sigma=1.0)
    x = 1.0 / math.sqrt(3.0)
    a0 = LatticeField(Periodic(2), np.full((2, 2, 1), x, dtype=np.complex128))
    with pytest.raises(SingularJacobian):
        newton_refine(spec, a0)


def test_newton_iteration_cap(diatomic_spec):
    a0 = random_real_field(Periodic(8), 2, seed=17) * 10.0
    with pytest.raises(NewtonDiverged):
        newton_refine(diatomic_spec, a0, max_iter=1)


# ----------------------------------------------------------------------
# decay fitting
# ----------------------------------------------------------------------

def test_decay_rate_exact_exponential():
    k = 32
    center = (16, 16)
    vals = np.zeros((k, k, 1), dtype=np.complex128)
    for n1 in range(k):
        for n2 in range(k):
            d1 = min(abs(n1 - center[0]), k - abs(n1 - center[0]))
            d2 = min(abs(n2 - center[1]), k - abs(n2 - center[1]))
            vals[n1, n2, 0] = math.exp(-0.7 * math.hypot(d1, d2))
    gamma, quality = decay_rate(LatticeField(Periodic(k), vals), center)
    assert gamma == pytest.approx(0.7, abs=1e-3)
    assert quality > 0.999


def test_decay_rate_delta_is_floor_saturated():
    a = LatticeField.delta(Periodic(16), 1, (8, 8))
    gamma, quality = decay_rate(a, (8, 8))
    assert math.isinf(gamma)
    assert quality == 1.0


def test_decay_rate_too_few_annuli():
    a = LatticeField.delta(Periodic(4), 1, (2, 2))
    with pytest.raises(capsol.TooFewAnnuli):
        decay_rate(a, (2, 2))


# ----------------------------------------------------------------------
# sweeps and half-space
# ----------------------------------------------------------------------

def test_k_sweep_single_period(diatomic_spec):
    report = k_sweep(diatomic_spec, [8])
    assert len(report.results) == 1
    assert report.tails == []
    assert report.converged is None
    assert not report.failures


def test_k_sweep_rejects_unsorted_list(diatomic_spec):
    with pytest.raises(ValueError):
        k_sweep(diatomic_spec, [16, 8])


def test_k_sweep_records_failures(diatomic_spec):
    report = k_sweep(diatomic_spec, [2])
    assert report.results == []
    assert 2 in report.failures


def test_k_sweep_tails_shrink(diatomic_spec):
    report = k_sweep(diatomic_spec, [8, 12, 16])
    assert len(report.results) == 3
    assert report.tails[1] < report.tails[0]
    for res in report.results:
        assert res.details["z0_overlap"] >= res.details["m1"]


def test_halfspace_needs_mirror_flag(mirror2d, mirror2d_gap):
    spec = ProblemSpec(stencil=mirror2d, lam=5.1, sigma=1.0, gap=mirror2d_gap,
                       mirror_symmetric=False)
    with pytest.raises(SymmetryNotAsserted):
        halfspace_solve(spec, 8, width=8)


def test_halfspace_reports_edge_distance(mirror2d_spec):
    res = halfspace_solve(mirror2d_spec, 12, width=10)
    assert isinstance(res.a.window, Strip)
    assert res.a.window.width == 10
    edge = res.details["edge_distance"]
    assert 0 < edge <= 5.5
    assert res.residual_norm < 1e-10


def test_halfspace_narrow_strip_notes_edge_proximity(mirror2d_spec):
    res = halfspace_solve(mirror2d_spec, 12, width=3)
    assert res.details["edge_proximity_warning"] == 1.0


def test_certify_flags_oversized_defect(diatomic, diatomic_gap):
    V = DiagonalDefect({((4, 4), 0): 0.4})  # 2*0.4 > delta = 0.5
    spec = ProblemSpec(stencil=diatomic, lam=5.0, sigma=1.0, V=V, gap=diatomic_gap)
    report = k_sweep(spec, [8])
    res = report.results[0]
    assert not res.checks["defect_ok"]
    assert res.checks["residual_ok"]  # the solve itself still converges
    assert not res.all_pass
