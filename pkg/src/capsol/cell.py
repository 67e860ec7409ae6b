"""Capacitance stencils from disk geometry via quasi-periodic Laplace cell problems.

The pipeline: stamp the resonator disks onto a uniform grid over the unit
cell, solve the 5-point Laplace equation with kappa-quasi-periodic boundary
coupling and Dirichlet data 1 on one disk / 0 on the others, form the
Bloch capacitance C(kappa) as the exterior energy Gram matrix of those
potentials (Hermitian PSD by construction), and inverse-transform a
uniform Brillouin-zone sweep into a real-space BlockStencil.

The solver is restricted to the axis-aligned unit cell e1 = (1,0),
e2 = (0,1); general cells would need a mapped grid that nothing
downstream requires.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ImaginaryLeak, NonPositiveFloor, SingularSystem
from .lattice import BlockStencil, LatticeGeometry

__all__ = [
    "CellGrid",
    "BlochCapacitance",
    "solve_cell_problem",
    "bloch_capacitance",
    "stencil_from_samples",
    "realspace_stencil",
    "exterior_spectrum_floor",
]

MIN_DISK_NODES = 8


class CellGrid:
    """Uniform N x N grid over the unit cell with per-node disk labels.

    label[i, j] is the resonator index owning node (i*h, j*h), or -1 for
    exterior nodes.  h = 1/N; the node at coordinate 1 is identified with
    coordinate 0 by quasi-periodicity and not stored.
    """

    __slots__ = ("geometry", "N", "h", "label", "boundary_adjacent")

    def __init__(self, geometry: LatticeGeometry, N: int):
        if N < 8:
            raise ValueError(f"grid resolution N = {N} too coarse")
        if not (
            np.allclose(geometry.e1, (1.0, 0.0), atol=1e-12)
            and np.allclose(geometry.e2, (0.0, 1.0), atol=1e-12)
        ):
            raise ValueError(
                "cell solver supports the axis-aligned unit cell only "
                "(e1 = (1,0), e2 = (0,1))"
            )
        self.geometry = geometry
        self.N = int(N)
        self.h = 1.0 / N

        coords = np.arange(N) * self.h
        xx, yy = np.meshgrid(coords, coords, indexing="ij")
        label = np.full((N, N), -1, dtype=np.int64)
        for j, (center, radius) in enumerate(
            zip(geometry.resonator_centers, geometry.resonator_radii)
        ):
            inside = (xx - center[0]) ** 2 + (yy - center[1]) ** 2 < radius ** 2
            count = int(np.count_nonzero(inside))
            if count < MIN_DISK_NODES:
                raise ValueError(
                    f"resonator {j} covers {count} nodes < {MIN_DISK_NODES}: "
                    f"increase N (currently {N})"
                )
            label[inside] = j
        self.label = label
        self.label.setflags(write=False)

        disk = label >= 0
        near = np.zeros_like(disk)
        for axis, shift in ((0, 1), (0, -1), (1, 1), (1, -1)):
            near |= np.roll(disk, shift, axis=axis)
        self.boundary_adjacent = near & ~disk
        self.boundary_adjacent.setflags(write=False)

    @property
    def d(self) -> int:
        return self.geometry.d

    def exterior_count(self) -> int:
        return int(np.count_nonzero(self.label < 0))

    def __repr__(self):
        return f"CellGrid(N={self.N}, d={self.d}, exterior={self.exterior_count()})"


@dataclass(frozen=True)
class BlochCapacitance:
    """One Brillouin-zone fiber of the capacitance operator."""

    kappa: tuple
    matrix: np.ndarray

    def __post_init__(self):
        m = self.matrix
        if m.shape[0] != m.shape[1]:
            raise ValueError("capacitance fiber must be square")
        if np.max(np.abs(m - m.conj().T)) > 1e-10 * max(1.0, np.max(np.abs(m))):
            raise ValueError("capacitance fiber is not Hermitian")


def _assemble_laplacian(grid: CellGrid, kappa):
    """Sparse 5-point Laplacian on exterior nodes with quasi-periodic wrap.

    Returns (A, index) where index[i, j] is the unknown number of node
    (i, j) or -1.  Disk nodes are Dirichlet (dropped from the system);
    wrapping across the cell edge multiplies by e^{+-i kappa_l}.
    """
    N = grid.N
    exterior = grid.label < 0
    index = np.full((N, N), -1, dtype=np.int64)
    index[exterior] = np.arange(int(np.count_nonzero(exterior)))
    n_unknown = int(np.count_nonzero(exterior))

    phase1 = np.exp(1j * kappa[0])
    phase2 = np.exp(1j * kappa[1])

    rows, cols, vals = [], [], []
    sites = np.argwhere(exterior)
    for i, j in sites:
        u = index[i, j]
        rows.append(u)
        cols.append(u)
        vals.append(4.0 + 0.0j)
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            ii, jj = i + di, j + dj
            phase = 1.0 + 0.0j
            if ii == N:
                ii, phase = 0, phase1
            elif ii == -1:
                ii, phase = N - 1, np.conj(phase1)
            if jj == N:
                jj, phase = 0, phase2
            elif jj == -1:
                jj, phase = N - 1, np.conj(phase2)
            v = index[ii, jj]
            if v >= 0:
                rows.append(u)
                cols.append(v)
                vals.append(-phase)
    A = sp.csr_matrix(
        (np.array(vals), (np.array(rows), np.array(cols))),
        shape=(n_unknown, n_unknown),
    )
    return A, index


def _dirichlet_rhs(grid: CellGrid, kappa, index, j: int) -> np.ndarray:
    """Right-hand side moving the stamped Dirichlet values of disk j over."""
    N = grid.N
    phase1 = np.exp(1j * kappa[0])
    phase2 = np.exp(1j * kappa[1])
    b = np.zeros(int(index.max()) + 1, dtype=np.complex128)
    sites = np.argwhere(grid.label < 0)
    for i, jj_ in sites:
        u = index[i, jj_]
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            ii, jn = i + di, jj_ + dj
            phase = 1.0 + 0.0j
            if ii == N:
                ii, phase = 0, phase1
            elif ii == -1:
                ii, phase = N - 1, np.conj(phase1)
            if jn == N:
                jn, phase = 0, phase2
            elif jn == -1:
                jn, phase = N - 1, np.conj(phase2)
            if grid.label[ii, jn] == j:
                b[u] += phase
    return b


def solve_cell_problem(
    geom: LatticeGeometry, grid: CellGrid, kappa, j: int
) -> np.ndarray:
    """Discrete quasi-periodic harmonic potential with data 1 on disk j.

    Returns the full (N, N) complex node field: 1 on disk j, 0 on the
    other disks, and the 5-point harmonic extension on exterior nodes
    satisfying V(x + e_l) = e^{i kappa_l} V(x) across cell edges.
    """
    if not 0 <= j < grid.d:
        raise ValueError(f"resonator index {j} out of range (d = {grid.d})")
    A, index = _assemble_laplacian(grid, kappa)
    b = _dirichlet_rhs(grid, kappa, index, j)
    x = spla.spsolve(A.tocsc(), b)
    res = np.linalg.norm(A @ x - b)
    if not np.all(np.isfinite(x)) or res > 1e-10 * max(1.0, np.linalg.norm(b)):
        raise SingularSystem(
            f"cell problem at kappa = {tuple(kappa)} left relative residual "
            f"{res:.3g}"
        )
    V = np.zeros((grid.N, grid.N), dtype=np.complex128)
    V[grid.label == j] = 1.0
    V[grid.label < 0] = x
    return V


def _edge_differences(grid: CellGrid, kappa, V: np.ndarray) -> np.ndarray:
    """Covariant forward differences over every +x and +y grid edge."""
    fx = np.roll(V, -1, axis=0).copy()
    fx[-1, :] *= np.exp(1j * kappa[0])
    fy = np.roll(V, -1, axis=1).copy()
    fy[:, -1] *= np.exp(1j * kappa[1])
    return np.concatenate([(fx - V).ravel(), (fy - V).ravel()])


def bloch_capacitance(geom: LatticeGeometry, grid: CellGrid, kappa) -> BlochCapacitance:
    """C(kappa) as the exterior Dirichlet-energy Gram matrix.

    C_ij = sum over grid edges of dV_i conj(dV_j); in two dimensions the
    quadrature factors h^2 * (1/h)^2 cancel, so the plain sum is already
    the energy.  Hermitian and positive semidefinite by construction.
    """
    d = grid.d
    A, index = _assemble_laplacian(grid, kappa)
    lu = spla.splu(A.tocsc())
    diffs = []
    for j in range(d):
        b = _dirichlet_rhs(grid, kappa, index, j)
        x = lu.solve(b)
        res = np.linalg.norm(A @ x - b)
        if not np.all(np.isfinite(x)) or res > 1e-10 * max(1.0, np.linalg.norm(b)):
            raise SingularSystem(
                f"cell problem (j = {j}) at kappa = {tuple(kappa)} left "
                f"relative residual {res:.3g}"
            )
        V = np.zeros((grid.N, grid.N), dtype=np.complex128)
        V[grid.label == j] = 1.0
        V[grid.label < 0] = x
        diffs.append(_edge_differences(grid, kappa, V))
    G = np.column_stack(diffs)
    E = G.T @ np.conj(G)
    E = 0.5 * (E + E.conj().T)
    return BlochCapacitance(kappa=(float(kappa[0]), float(kappa[1])), matrix=E)


def stencil_from_samples(samples: np.ndarray, radius: int) -> BlockStencil:
    """Inverse-DFT an (M, M, d, d) fiber stack on the 2 pi j / M grid.

    Keeps offsets with |m|_inf <= radius, checks the imaginary leak
    against 1e-8 before discarding it, and symmetrizes the transpose
    pairs exactly so the stencil invariants hold bit-level.
    """
    M = samples.shape[0]
    if samples.shape[1] != M or samples.shape[2] != samples.shape[3]:
        raise ValueError("samples must be (M, M, d, d)")
    if M < 2 * radius + 1:
        raise ValueError(f"BZ grid M = {M} < 2R+1 = {2 * radius + 1}")
    table = np.fft.ifft2(samples, axes=(0, 1))
    leak = 0.0
    blocks = {}
    for m1 in range(-radius, radius + 1):
        for m2 in range(-radius, radius + 1):
            B = table[m1 % M, m2 % M]
            leak = max(leak, float(np.max(np.abs(B.imag))))
            blocks[(m1, m2)] = B.real.copy()
    if leak > 1e-8:
        raise ImaginaryLeak(
            f"inverse Bloch transform leaks imaginary part {leak:.3g} "
            "(broken Hermitian symmetry upstream)"
        )
    for m in list(blocks):
        neg = (-m[0], -m[1])
        sym = 0.5 * (blocks[m] + blocks[neg].T)
        blocks[m] = sym
        blocks[neg] = sym.T.copy()
    return BlockStencil(blocks)


def _bz_nodes(M: int) -> np.ndarray:
    """The 2 pi j / M sweep mapped into Y* = [-pi, pi)."""
    k = 2.0 * np.pi * np.arange(M) / M
    return np.where(k < np.pi, k, k - 2.0 * np.pi)


def realspace_stencil(
    geom: LatticeGeometry, grid: CellGrid, M: int, radius: int, workers: int = 1
) -> BlockStencil:
    """BlockStencil of the disk geometry from an M x M Brillouin-zone sweep.

    The sweep is an independent map over kappa points; ``workers`` > 1
    runs it on a thread pool (results land in a preallocated array, so
    the output is identical regardless of scheduling).
    """
    if M < 2 * radius + 1:
        raise ValueError(f"BZ grid M = {M} < 2R+1 = {2 * radius + 1}")
    nodes = _bz_nodes(M)
    d = grid.d
    samples = np.empty((M, M, d, d), dtype=np.complex128)

    def fill(point):
        i1, i2 = point
        samples[i1, i2] = bloch_capacitance(
            geom, grid, (nodes[i1], nodes[i2])
        ).matrix

    points = [(i1, i2) for i1 in range(M) for i2 in range(M)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, points))
    else:
        for point in points:
            fill(point)
    return stencil_from_samples(samples, radius)


def exterior_spectrum_floor(geom: LatticeGeometry, grid: CellGrid, M: int) -> float:
    """Minimum over the BZ grid of the smallest Dirichlet-Laplacian eigenvalue.

    The discrete operator is the 5-point Laplacian on exterior nodes,
    Dirichlet on every disk, quasi-periodic across cell edges, scaled by
    1/h^2 to approximate the continuum.  The spectral parameter lambda_0
    used downstream is half this value.
    """
    nodes = _bz_nodes(M)
    floor = np.inf
    for k1 in nodes:
        for k2 in nodes:
            A, _ = _assemble_laplacian(grid, (k1, k2))
            try:
                w = spla.eigsh(
                    A.tocsc(), k=1, sigma=0.0, which="LM",
                    return_eigenvectors=False,
                )
                lo = float(w[0])
            except RuntimeError as exc:
                raise NonPositiveFloor(
                    f"Dirichlet Laplacian singular at kappa = ({k1}, {k2})"
                ) from exc
            floor = min(floor, lo / grid.h ** 2)
    if not np.isfinite(floor) or floor <= 0:
        raise NonPositiveFloor(f"exterior spectrum floor {floor:.3g} <= 0")
    return float(floor)
