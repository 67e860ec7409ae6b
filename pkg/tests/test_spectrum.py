"""Band structures, gap certification, spectral projectors and certificates."""

import math

import numpy as np
import pytest

import capsol
from capsol import (
    BlockStencil,
    Box,
    GapViolated,
    LatticeField,
    Periodic,
    SpectralGap,
    band_structure,
    bloch_matrix,
    bz_grid,
    find_gaps,
    kernel_decay_fit,
    lp_norm_probe,
    projection_convergence,
    spectral_projector,
)

from conftest import diatomic_blocks, random_complex_field


def analytic_diatomic_bands(kappa1, t1=1.0, t2=0.5, onsite=5.0):
    hop = abs(t1 + t2 * np.exp(1j * kappa1))
    return onsite - hop, onsite + hop


# ----------------------------------------------------------------------
# Bloch matrices and band structure
# ----------------------------------------------------------------------

def test_bz_grid_is_uniform_and_half_open():
    g = bz_grid(8)
    assert g[0] == pytest.approx(-math.pi)
    assert g[-1] == pytest.approx(math.pi - 2 * math.pi / 8)
    np.testing.assert_allclose(np.diff(g), 2 * math.pi / 8)


def test_bloch_matrix_is_hermitian(diatomic):
    for kappa in [(0.0, 0.0), (1.1, -2.3), (math.pi, 0.4)]:
        M = bloch_matrix(diatomic, kappa)
        np.testing.assert_allclose(M, M.conj().T, atol=1e-14)


def test_diatomic_bands_match_closed_form(diatomic):
    bands = band_structure(diatomic, 16)
    for i, k1 in enumerate(bands.kappas):
        lo, hi = analytic_diatomic_bands(k1)
        np.testing.assert_allclose(bands.bands[i, 0], [lo, hi], atol=1e-12)
        # bands are flat along kappa2 for this quasi-1D model
        np.testing.assert_allclose(bands.bands[i, :, 0], lo, atol=1e-12)


def test_band_structure_rejects_coarse_grid(diatomic):
    with pytest.raises(ValueError):
        band_structure(diatomic, 2)


def test_bands_sorted_and_real(mirror2d):
    bands = band_structure(mirror2d, 9)
    assert np.all(np.diff(bands.bands, axis=2) >= 0)
    assert bands.bands.dtype == np.float64


def test_spectrum_distance(diatomic):
    bands = band_structure(diatomic, 64)
    assert bands.spectrum_distance(5.0) == pytest.approx(0.5, abs=1e-3)
    assert bands.spectrum_distance(4.5) == pytest.approx(0.0, abs=1e-3)


# ----------------------------------------------------------------------
# gap finding
# ----------------------------------------------------------------------

def test_diatomic_gap_certified(diatomic_gap):
    assert diatomic_gap.lower == pytest.approx(4.5, abs=1e-6)
    assert diatomic_gap.upper == pytest.approx(5.5, abs=1e-6)
    assert diatomic_gap.qualifies
    assert diatomic_gap.contains(5.0)
    assert not diatomic_gap.contains(4.4)
    assert not diatomic_gap.contains(5.6)


def test_closed_gap_is_not_reported():
    # t2 = t1 makes the two bands touch at kappa1 = pi
    st = BlockStencil(diatomic_blocks(t1=1.0, t2=1.0))
    assert find_gaps(band_structure(st, 32)) == []


def test_single_band_has_no_gap(laplacian):
    assert find_gaps(band_structure(laplacian, 16)) == []


def test_refinement_tightens_the_grid_estimate(diatomic):
    coarse = find_gaps(band_structure(diatomic, 9), refine=False)[0]
    fine = find_gaps(band_structure(diatomic, 9), refine=True)[0]
    # the coarse grid misses the band extremum at kappa1 = pi
    assert abs(fine.lower - 4.5) < abs(coarse.lower - 4.5) + 1e-12
    assert fine.lower == pytest.approx(4.5, abs=1e-6)


# ----------------------------------------------------------------------
# spectral projectors
# ----------------------------------------------------------------------

@pytest.mark.parametrize("k", [4, 6])
def test_projector_invariants(diatomic, diatomic_gap, k):
    P = spectral_projector(diatomic, k, diatomic_gap, "plus")
    Q = spectral_projector(diatomic, k, diatomic_gap, "minus")
    M, N = P.matrix(), Q.matrix()
    C = diatomic.periodic_matrix(k).toarray()
    assert np.linalg.norm(M @ M - M, 2) < 1e-10
    assert np.linalg.norm(M + N - np.eye(len(M)), 2) < 1e-10
    assert np.linalg.norm(M @ C - C @ M, 2) < 1e-10
    assert P.rank + Q.rank == k * k * 2


def test_projector_kernel_symmetry_is_exact(diatomic, diatomic_gap):
    P = spectral_projector(diatomic, 6, diatomic_gap, "plus")
    k = P.k
    for d1 in range(k):
        for d2 in range(k):
            a = P.kernel[d1, d2]
            b = P.kernel[(-d1) % k, (-d2) % k]
            np.testing.assert_array_equal(a, b.T)


def test_projector_matrix_matches_kernel_blocks(diatomic, diatomic_gap):
    P = spectral_projector(diatomic, 5, diatomic_gap, "minus")
    M = P.matrix()
    d = P.d
    for n in [(0, 0), (2, 3), (4, 4)]:
        for m in [(1, 1), (3, 0)]:
            row = (n[0] * 5 + n[1]) * d
            col = (m[0] * 5 + m[1]) * d
            np.testing.assert_allclose(
                M[row:row + d, col:col + d], P.kernel_block(n, m), atol=1e-14
            )


def test_projector_apply_matches_matrix(diatomic, diatomic_gap):
    P = spectral_projector(diatomic, 6, diatomic_gap, "plus")
    a = random_complex_field(Periodic(6), 2, seed=11)
    via_matrix = (P.matrix() @ a.values.reshape(-1)).reshape(6, 6, 2)
    np.testing.assert_allclose(P.apply(a).values, via_matrix, atol=1e-12)


def test_projector_keeps_real_fields_real(diatomic, diatomic_gap):
    rng = np.random.default_rng(5)
    a = LatticeField(Periodic(8), rng.standard_normal((8, 8, 2)).astype(np.complex128))
    assert spectral_projector(diatomic, 8, diatomic_gap, "plus").apply(a).is_real(0.0)


def test_projector_rejects_eigenvalue_inside_gap(diatomic):
    fake = SpectralGap(lower=4.0, upper=5.0, inf_positive=True,
                       spectrum_below=True, spectrum_above=True)
    with pytest.raises(GapViolated):
        spectral_projector(diatomic, 8, fake, "plus")


def test_projector_rejects_too_small_period(diatomic, diatomic_gap):
    with pytest.raises(ValueError):
        spectral_projector(diatomic, 2, diatomic_gap, "plus")


def test_projector_side_argument_checked(diatomic, diatomic_gap):
    with pytest.raises(ValueError):
        spectral_projector(diatomic, 6, diatomic_gap, "above")


# ----------------------------------------------------------------------
# decay and norm certificates
# ----------------------------------------------------------------------

def test_kernel_decay_fit(diatomic, diatomic_gap):
    fit = kernel_decay_fit(spectral_projector(diatomic, 16, diatomic_gap, "plus"))
    assert fit.gamma > 0
    assert fit.r_squared > 0.9
    assert fit.C > 0


def test_lp_probe_below_certificate(diatomic, diatomic_gap):
    P = spectral_projector(diatomic, 8, diatomic_gap, "plus")
    probe = lp_norm_probe(P, 4, trials=16, seed=0)
    assert probe.probe <= probe.certificate
    assert probe.probe <= probe.C1 + 1e-12  # Schur bound on l^2 -> l^2


def test_lp_probe_rejects_p_below_two(diatomic, diatomic_gap):
    P = spectral_projector(diatomic, 8, diatomic_gap, "plus")
    with pytest.raises(ValueError):
        lp_norm_probe(P, 1.5)


def test_lp_probe_is_deterministic(diatomic, diatomic_gap):
    P = spectral_projector(diatomic, 8, diatomic_gap, "plus")
    a = lp_norm_probe(P, 4, trials=8, seed=3)
    b = lp_norm_probe(P, 4, trials=8, seed=3)
    assert a == b


# ----------------------------------------------------------------------
# projection convergence (periodization error)
# ----------------------------------------------------------------------

def test_projection_convergence_decreases(diatomic, diatomic_gap):
    z = LatticeField.delta(Box(2), 2, (0, 0), 0) \
        + LatticeField.delta(Box(2), 2, (1, 1), 1, 0.5)
    errors = projection_convergence(diatomic, diatomic_gap, z, [8, 16])
    assert errors[1] < errors[0]


def test_projection_convergence_requires_box_field(diatomic, diatomic_gap):
    z = LatticeField.zeros(Periodic(4), 2)
    with pytest.raises(Exception):
        projection_convergence(diatomic, diatomic_gap, z, [8, 16])
