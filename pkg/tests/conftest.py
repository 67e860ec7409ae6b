"""Shared model builders: small stencils with known band structure."""

import numpy as np
import pytest

import capsol

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collector for the one-line verdicts of the acceptance suite."""
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def diatomic_blocks(t1=1.0, t2=0.5, onsite=5.0):
    """Two-component chain stacked trivially in n2.

    Bloch fibers are [[onsite, t1 + t2 e^{-i k1}], [c.c., onsite]] with
    eigenvalues onsite +- |t1 + t2 e^{i k1}|; for t1=1, t2=0.5 the bands
    are [3.5, 4.5] and [5.5, 6.5] with gap (4.5, 5.5).
    """
    return {
        (0, 0): np.array([[onsite, t1], [t1, onsite]]),
        (1, 0): np.array([[0.0, 0.0], [t2, 0.0]]),
        (-1, 0): np.array([[0.0, t2], [0.0, 0.0]]),
    }


def mirror2d_blocks(s=0.05):
    """Mirror-symmetric radius-2 model with genuine coupling in both axes.

    Symmetric under m1 -> -m1, so the half-space reflection identity
    applies; the radius-2 reach makes the mirror correction nonzero on
    the first strip row.  Gap (4.7, 5.5) for s = 0.05.
    """
    return {
        (0, 0): np.array([[5.0, 1.0], [1.0, 5.0]]),
        (1, 0): np.array([[0.0, 0.25], [0.25, 0.0]]),
        (-1, 0): np.array([[0.0, 0.25], [0.25, 0.0]]),
        (2, 0): np.array([[0.05, 0.0], [0.0, 0.05]]),
        (-2, 0): np.array([[0.05, 0.0], [0.0, 0.05]]),
        (0, 1): s * np.eye(2),
        (0, -1): s * np.eye(2),
    }


def laplacian_blocks():
    """Discrete Laplacian plus 4: d=1, onsite 4, -1 to the four neighbors."""
    return {
        (0, 0): np.array([[4.0]]),
        (1, 0): np.array([[-1.0]]),
        (-1, 0): np.array([[-1.0]]),
        (0, 1): np.array([[-1.0]]),
        (0, -1): np.array([[-1.0]]),
    }


@pytest.fixture(scope="session")
def diatomic():
    return capsol.BlockStencil(diatomic_blocks())


@pytest.fixture(scope="session")
def diatomic_gap(diatomic):
    gaps = capsol.find_gaps(capsol.band_structure(diatomic, 32))
    assert len(gaps) == 1
    return gaps[0]


@pytest.fixture(scope="session")
def diatomic_spec(diatomic, diatomic_gap):
    return capsol.ProblemSpec(stencil=diatomic, lam=5.0, sigma=1.0, gap=diatomic_gap)


@pytest.fixture(scope="session")
def mirror2d():
    return capsol.BlockStencil(mirror2d_blocks())


@pytest.fixture(scope="session")
def mirror2d_gap(mirror2d):
    gaps = capsol.find_gaps(capsol.band_structure(mirror2d, 32))
    assert len(gaps) == 1
    return gaps[0]


@pytest.fixture(scope="session")
def mirror2d_spec(mirror2d, mirror2d_gap):
    return capsol.ProblemSpec(
        stencil=mirror2d, lam=5.1, sigma=1.0, gap=mirror2d_gap,
        mirror_symmetric=True,
    )


@pytest.fixture(scope="session")
def laplacian():
    return capsol.BlockStencil(laplacian_blocks())


@pytest.fixture(scope="session")
def scalar_site():
    """Single-site reduction: radius-0, c = 2, point spectrum {2}."""
    return capsol.BlockStencil({(0, 0): np.array([[2.0]])})


@pytest.fixture(scope="session")
def single_disk_geometry():
    return capsol.LatticeGeometry(
        e1=(1.0, 0.0), e2=(0.0, 1.0),
        resonator_centers=((0.5, 0.5),),
        resonator_radii=(0.25,),
    )


def random_real_field(window, d, seed):
    rng = np.random.default_rng(seed)
    values = rng.standard_normal(window.shape + (d,)).astype(np.complex128)
    return capsol.LatticeField(window, values)


def random_complex_field(window, d, seed):
    rng = np.random.default_rng(seed)
    values = rng.standard_normal(window.shape + (d,)) + 1j * rng.standard_normal(
        window.shape + (d,)
    )
    return capsol.LatticeField(window, values)
