"""Lattice geometry, block stencils, windows, and discrete operator actions.

The central object is a translation-invariant operator on vector-valued
sequences over Z^2, stored as a finite family of real d x d blocks
{B_m : |m|_inf <= R} ("the stencil").  Its action is the block convolution

    (C a)_n = sum_m B_m a_{n+m},

realized on three kinds of finite windows: k-periodic cells (``Periodic``),
finite boxes with zero extension (``Box``), and half-space strips that are
periodic in the second coordinate (``Strip``).  Diagonal defects and the
cubic nonlinear residual live here too, so that the solver modules can be
checked against one independent code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import (
    DecayTooSlow,
    SymmetryNotAsserted,
    WindowMismatch,
    WindowTooSmall,
)

__all__ = [
    "LatticeGeometry",
    "Periodic",
    "Box",
    "Strip",
    "LatticeField",
    "BlockStencil",
    "HalfSpaceStencil",
    "DiagonalDefect",
    "apply_operator",
    "truncate",
    "periodize",
    "translate",
    "halfspace_stencil",
    "defect_norm",
    "nonlinear_residual",
]


# ----------------------------------------------------------------------
# geometry
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class LatticeGeometry:
    """Physical unit cell: lattice vectors plus disk-shaped resonators.

    Lengths are in cell units.  ``n_e`` is the exterior index; it is inert
    for the static (lambda = 0) cell problems but kept for completeness.
    """

    e1: tuple[float, float]
    e2: tuple[float, float]
    resonator_centers: tuple[tuple[float, float], ...]
    resonator_radii: tuple[float, ...]
    n_e: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "e1", tuple(float(x) for x in self.e1))
        object.__setattr__(self, "e2", tuple(float(x) for x in self.e2))
        object.__setattr__(
            self,
            "resonator_centers",
            tuple(tuple(float(x) for x in c) for c in self.resonator_centers),
        )
        object.__setattr__(
            self, "resonator_radii", tuple(float(r) for r in self.resonator_radii)
        )
        if len(self.resonator_centers) != len(self.resonator_radii):
            raise ValueError("need one radius per resonator center")
        if len(self.resonator_centers) == 0:
            raise ValueError("need at least one resonator")
        if any(r <= 0 for r in self.resonator_radii):
            raise ValueError("resonator radii must be positive")
        det = self.e1[0] * self.e2[1] - self.e1[1] * self.e2[0]
        if abs(det) <= 0.0:
            raise ValueError("lattice vectors must be linearly independent")
        self._check_disks()

    @property
    def d(self) -> int:
        return len(self.resonator_centers)

    def _check_disks(self):
        e1 = np.asarray(self.e1)
        e2 = np.asarray(self.e2)
        # distance from each center to the four cell edges must exceed the radius
        edges = [
            (np.zeros(2), e1),
            (np.zeros(2), e2),
            (e2, e1),
            (e1, e2),
        ]
        for c, r in zip(self.resonator_centers, self.resonator_radii):
            p = np.asarray(c)
            for q, v in edges:
                dist = abs(v[0] * (p - q)[1] - v[1] * (p - q)[0]) / np.hypot(*v)
                if dist <= r:
                    raise ValueError(
                        f"resonator at {c} (radius {r}) is not strictly inside the cell"
                    )
        centers = [np.asarray(c) for c in self.resonator_centers]
        for i in range(len(centers)):
            for j in range(i + 1, len(centers)):
                gap = np.linalg.norm(centers[i] - centers[j])
                if gap <= self.resonator_radii[i] + self.resonator_radii[j]:
                    raise ValueError(f"resonators {i} and {j} overlap")


# ----------------------------------------------------------------------
# windows
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Periodic:
    """k-periodic window: fields are stored on Y_k = {0..k-1}^2."""

    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("period must be >= 1")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.k, self.k)

    def contains(self, site) -> bool:
        return 0 <= site[0] < self.k and 0 <= site[1] < self.k

    def index(self, site):
        return (site[0], site[1])


class Box:
    """Finite rectangle of Z^2 with zero extension outside.

    ``Box(L)`` is the centered square [-L, L]^2; ``Box(lo=(a,b), hi=(c,d))``
    is the general inclusive rectangle.
    """

    __slots__ = ("lo", "hi")

    def __init__(self, L: int | None = None, *, lo=None, hi=None):
        if L is not None:
            lo, hi = (-L, -L), (L, L)
        if lo is None or hi is None:
            raise ValueError("give either L or both lo and hi")
        self.lo = (int(lo[0]), int(lo[1]))
        self.hi = (int(hi[0]), int(hi[1]))
        if self.hi[0] < self.lo[0] or self.hi[1] < self.lo[1]:
            raise ValueError("empty box")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.hi[0] - self.lo[0] + 1, self.hi[1] - self.lo[1] + 1)

    def contains(self, site) -> bool:
        return (
            self.lo[0] <= site[0] <= self.hi[0]
            and self.lo[1] <= site[1] <= self.hi[1]
        )

    def index(self, site):
        return (site[0] - self.lo[0], site[1] - self.lo[1])

    def sites(self):
        """Iterate absolute site coordinates in storage order."""
        for n1 in range(self.lo[0], self.hi[0] + 1):
            for n2 in range(self.lo[1], self.hi[1] + 1):
                yield (n1, n2)

    def __eq__(self, other):
        return isinstance(other, Box) and self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((Box, self.lo, self.hi))

    def __repr__(self):
        return f"Box(lo={self.lo}, hi={self.hi})"


@dataclass(frozen=True)
class Strip:
    """Half-space strip: n1 in {1..width} with a Dirichlet edge at n1 = 0,
    n2 periodic with period k."""

    width: int
    k: int

    def __post_init__(self):
        if self.width < 1 or self.k < 1:
            raise ValueError("strip needs width >= 1 and period >= 1")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.width, self.k)

    def contains(self, site) -> bool:
        return 1 <= site[0] <= self.width and 0 <= site[1] < self.k

    def index(self, site):
        return (site[0] - 1, site[1])


# ----------------------------------------------------------------------
# fields
# ----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LatticeField:
    """Complex d-vector valued function on a window.

    ``values`` has shape ``window.shape + (d,)`` and is frozen after
    construction; all operations return new fields.
    """

    window: Periodic | Box | Strip
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128)
        if v.shape[:2] != self.window.shape or v.ndim != 3:
            raise ValueError(
                f"values shape {v.shape} does not match window {self.window.shape} + (d,)"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    # -- constructors ---------------------------------------------------

    @classmethod
    def zeros(cls, window, d: int) -> "LatticeField":
        return cls(window, np.zeros(window.shape + (d,), dtype=np.complex128))

    @classmethod
    def delta(cls, window, d: int, site, component: int = 0, amplitude=1.0) -> "LatticeField":
        v = np.zeros(window.shape + (d,), dtype=np.complex128)
        if not window.contains(site):
            raise ValueError(f"site {site} outside window {window}")
        i, j = window.index(site)
        v[i, j, component] = amplitude
        return cls(window, v)

    # -- basic queries ----------------------------------------------------

    @property
    def d(self) -> int:
        return self.values.shape[2]

    def norm(self, p: float = 2) -> float:
        """l^p norm over the stored window (the local l^p_k norm on Periodic)."""
        if p == 2:
            return float(np.linalg.norm(self.values))
        if math.isinf(p):
            return float(np.max(np.abs(self.values)))
        return float(np.sum(np.abs(self.values) ** p) ** (1.0 / p))

    def inner(self, other: "LatticeField") -> complex:
        """(a, b) = sum a_n conj(b_n) over the common window."""
        if self.window != other.window:
            raise WindowMismatch(f"{self.window} vs {other.window}")
        return complex(np.sum(self.values * np.conj(other.values)))

    def is_real(self, tol: float = 0.0) -> bool:
        return bool(np.max(np.abs(self.values.imag), initial=0.0) <= tol)

    def real_part(self) -> "LatticeField":
        return LatticeField(self.window, self.values.real.astype(np.complex128))

    def value_at(self, site, component: int):
        if not self.window.contains(site):
            return 0.0 + 0.0j
        i, j = self.window.index(site)
        return complex(self.values[i, j, component])

    # -- arithmetic -------------------------------------------------------

    def _wrap(self, values) -> "LatticeField":
        return LatticeField(self.window, values)

    def __add__(self, other):
        if self.window != other.window:
            raise WindowMismatch(f"{self.window} vs {other.window}")
        return self._wrap(self.values + other.values)

    def __sub__(self, other):
        if self.window != other.window:
            raise WindowMismatch(f"{self.window} vs {other.window}")
        return self._wrap(self.values - other.values)

    def __mul__(self, scalar):
        return self._wrap(self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self._wrap(-self.values)


# ----------------------------------------------------------------------
# stencils
# ----------------------------------------------------------------------

def _spectral_norm(mat) -> float:
    return float(np.linalg.norm(mat, 2))


def fit_decay(offsets_and_norms) -> tuple[float, float]:
    """Least-squares exponential envelope through (|m|, ||B_m||) samples.

    Returns (alpha, beta) with ||B_m|| <= alpha * exp(-beta |m|) for every
    provided sample (alpha is inflated after the fit so the bound is a
    certificate, not merely a regression).  Raises DecayTooSlow if the
    fitted rate is not positive.
    """
    rs = np.array([r for r, _ in offsets_and_norms], dtype=float)
    ns = np.array([n for _, n in offsets_and_norms], dtype=float)
    keep = ns > 0
    rs, ns = rs[keep], ns[keep]
    if rs.size == 0:
        return 1.0, 1.0
    if np.unique(rs).size < 2:
        beta = 1.0
    else:
        slope, _ = np.polyfit(rs, np.log(ns), 1)
        beta = -float(slope)
        if beta <= 0:
            raise DecayTooSlow(f"fitted decay rate beta = {beta:.3g} <= 0")
    alpha = float(np.max(ns * np.exp(beta * rs)))
    return alpha, beta


class BlockStencil:
    """Translation-invariant kernel {B_m} of real d x d blocks.

    Invariants enforced at construction: every entry real, the adjointness
    symmetry B_m = B_{-m}^T, and the exponential-decay certificate
    ||B_m||_2 <= alpha * exp(-beta |m|_2).  Blocks below 1e-12 * ||B_0||
    are dropped.
    """

    __slots__ = ("d", "radius", "blocks", "decay_alpha", "decay_beta")

    DROP_TOL = 1e-12

    def __init__(self, blocks, decay: tuple[float, float] | None = None):
        items = {}
        for m, mat in dict(blocks).items():
            mat = np.asarray(mat)
            if np.iscomplexobj(mat):
                if np.max(np.abs(mat.imag), initial=0.0) != 0.0:
                    raise ValueError(f"block at offset {m} has imaginary entries")
                mat = mat.real
            mat = np.atleast_2d(np.array(mat, dtype=float))
            items[(int(m[0]), int(m[1]))] = mat
        if not items:
            raise ValueError("empty stencil")
        ds = {mat.shape for mat in items.values()}
        if len(ds) != 1 or items[next(iter(items))].shape[0] != items[next(iter(items))].shape[1]:
            raise ValueError("all blocks must be square with a common size")
        self.d = next(iter(items.values())).shape[0]

        ref = _spectral_norm(items.get((0, 0), np.zeros((self.d, self.d))))
        if ref == 0.0:
            ref = max(_spectral_norm(mat) for mat in items.values())
        kept = {
            m: mat
            for m, mat in items.items()
            if _spectral_norm(mat) >= self.DROP_TOL * ref or m == (0, 0)
        }
        self.blocks = kept
        self.radius = max(max(abs(m[0]), abs(m[1])) for m in kept)

        scale = max(_spectral_norm(mat) for mat in kept.values())
        for m, mat in kept.items():
            mm = (-m[0], -m[1])
            other = kept.get(mm)
            if other is None or np.max(np.abs(mat - other.T)) > 1e-12 * scale:
                raise ValueError(
                    f"symmetry violated at offset {m}: need B_m = B_(-m)^T"
                )
            mat.setflags(write=False)

        samples = [
            (math.hypot(*m), _spectral_norm(mat)) for m, mat in kept.items()
        ]
        if decay is None:
            self.decay_alpha, self.decay_beta = fit_decay(samples)
        else:
            alpha, beta = float(decay[0]), float(decay[1])
            if beta <= 0 or alpha <= 0:
                raise ValueError("decay constants must be positive")
            worst = max(n - alpha * math.exp(-beta * r) for r, n in samples)
            if worst > 1e-12 * scale:
                raise ValueError(
                    f"decay certificate violated by {worst:.3g}: "
                    f"||B_m|| > alpha exp(-beta |m|)"
                )
            self.decay_alpha, self.decay_beta = alpha, beta

    def offsets(self):
        return sorted(self.blocks)

    def block(self, m):
        """Block at offset m, or the zero matrix if m is not stored."""
        mat = self.blocks.get((int(m[0]), int(m[1])))
        if mat is None:
            return np.zeros((self.d, self.d))
        return mat

    def bloch(self, kappa) -> np.ndarray:
        """Symbol C(kappa) = sum_m B_m exp(i kappa . m); Hermitian d x d."""
        out = np.zeros((self.d, self.d), dtype=np.complex128)
        for m in self.offsets():
            out += self.blocks[m] * np.exp(1j * (kappa[0] * m[0] + kappa[1] * m[1]))
        return out

    def operator_norm(self, samples: int = 64) -> float:
        """sup over the Brillouin zone of the fiber spectral radius."""
        worst = 0.0
        ks = -np.pi + 2 * np.pi * np.arange(samples) / samples
        for k1 in ks:
            for k2 in ks:
                w = np.linalg.eigvalsh(self.bloch((k1, k2)))
                worst = max(worst, float(np.max(np.abs(w))))
        return worst

    def periodic_matrix(self, k: int) -> sp.csr_matrix:
        """Dense-storage-free matrix of the operator on Periodic(k).

        Row/column index is the C-order flattening of (n1, n2, component).
        """
        if k < 2 * self.radius + 1:
            raise WindowTooSmall(f"period {k} < {2 * self.radius + 1}")
        out = sp.csr_matrix((k * k * self.d, k * k * self.d))
        for m in self.offsets():
            s1 = sp.csr_matrix(np.roll(np.eye(k), m[0], axis=1))
            s2 = sp.csr_matrix(np.roll(np.eye(k), m[1], axis=1))
            out = out + sp.kron(sp.kron(s1, s2), sp.csr_matrix(self.blocks[m]))
        return sp.csr_matrix(out)

    def __repr__(self):
        return (
            f"BlockStencil(d={self.d}, radius={self.radius}, "
            f"offsets={len(self.blocks)}, decay=({self.decay_alpha:.3g}, "
            f"{self.decay_beta:.3g}))"
        )


class HalfSpaceStencil:
    """Reflection-combined operator on the half space n1 >= 1.

    Entries are C^half_{n,m} = C_{n,m} - C_{n,Fm} with F(m1,m2) = (-m1,m2),
    valid when the caller asserts the mirror symmetry of the underlying
    geometry (FD = D).
    """

    __slots__ = ("base", "mirror_symmetric")

    def __init__(self, base: BlockStencil, mirror_symmetric: bool):
        if not mirror_symmetric:
            raise SymmetryNotAsserted(
                "half-space construction requires the mirror_symmetric flag"
            )
        self.base = base
        self.mirror_symmetric = True

    @property
    def d(self) -> int:
        return self.base.d

    @property
    def radius(self) -> int:
        return self.base.radius

    def entry(self, n, m) -> np.ndarray:
        """d x d block coupling half-space sites n, m (n1, m1 >= 1)."""
        if n[0] < 1 or m[0] < 1:
            raise ValueError("half-space sites need n1, m1 >= 1")
        direct = self.base.block((m[0] - n[0], m[1] - n[1]))
        mirror = self.base.block((-m[0] - n[0], m[1] - n[1]))
        return direct - mirror

    def matrix(self, width: int, k: int) -> np.ndarray:
        """Dense operator matrix on Strip(width, k), n2 wrapped mod k."""
        if k < 2 * self.radius + 1:
            raise WindowTooSmall(f"period {k} < {2 * self.radius + 1}")
        d = self.d
        size = width * k * d
        out = np.zeros((size, size))
        for n1 in range(1, width + 1):
            for m1 in range(1, width + 1):
                for o2 in range(-self.radius, self.radius + 1):
                    blk = self.base.block((m1 - n1, o2)) - self.base.block(
                        (-m1 - n1, o2)
                    )
                    if not blk.any():
                        continue
                    for n2 in range(k):
                        m2 = (n2 + o2) % k
                        r = ((n1 - 1) * k + n2) * d
                        c = ((m1 - 1) * k + m2) * d
                        out[r : r + d, c : c + d] += blk
        return out

    def __repr__(self):
        return f"HalfSpaceStencil({self.base!r})"


def halfspace_stencil(stencil: BlockStencil, mirror_symmetric: bool = False) -> HalfSpaceStencil:
    """Build the half-space operator; the flag records caller responsibility."""
    return HalfSpaceStencil(stencil, mirror_symmetric)


# ----------------------------------------------------------------------
# defects
# ----------------------------------------------------------------------

class DiagonalDefect:
    """Real diagonal multiplication operator with finite support.

    ``entries`` maps ((n1, n2), component) -> real value.  For periodic
    windows only support sites inside Y_k act (the literal S V R
    composition: sites cut by the truncation never re-enter).
    """

    __slots__ = ("entries",)

    def __init__(self, entries=None):
        out = {}
        for key, val in dict(entries or {}).items():
            site, comp = key
            out[((int(site[0]), int(site[1])), int(comp))] = float(val)
        self.entries = out

    @classmethod
    def empty(cls):
        return cls({})

    @property
    def norm_l1(self) -> float:
        """Operator norm l^inf -> l^1; for a diagonal this is sum |v|."""
        return float(sum(abs(v) for v in self.entries.values()))

    def apply(self, a: LatticeField) -> LatticeField:
        v = np.array(a.values)
        out = np.zeros_like(v)
        for (site, comp), val in self.entries.items():
            if a.window.contains(site):
                i, j = a.window.index(site)
                out[i, j, comp] = val * v[i, j, comp]
        return LatticeField(a.window, out)

    def diag_vector(self, window, d: int) -> np.ndarray:
        """Flattened diagonal of the defect on the given window."""
        out = np.zeros(window.shape + (d,))
        for (site, comp), val in self.entries.items():
            if window.contains(site):
                i, j = window.index(site)
                out[i, j, comp] = val
        return out.reshape(-1)

    def __len__(self):
        return len(self.entries)

    def __repr__(self):
        return f"DiagonalDefect({len(self.entries)} entries, |V|_1={self.norm_l1:.3g})"


def defect_norm(V: DiagonalDefect | None) -> float:
    """||V||_{B(l^inf, l^1)} = sum of absolute entries (diagonal case)."""
    if V is None:
        return 0.0
    return V.norm_l1


# ----------------------------------------------------------------------
# operator actions
# ----------------------------------------------------------------------

def _apply_periodic(stencil: BlockStencil, a: LatticeField) -> LatticeField:
    k = a.window.k
    if k < 2 * stencil.radius + 1:
        raise WindowTooSmall(
            f"period {k} < 2R+1 = {2 * stencil.radius + 1}: offsets would wrap onto themselves"
        )
    v = a.values
    out = np.zeros_like(v)
    for m in stencil.offsets():
        shifted = np.roll(v, shift=(-m[0], -m[1]), axis=(0, 1))
        out += shifted @ stencil.blocks[m].T
    return LatticeField(a.window, out)


def _apply_box(stencil: BlockStencil, a: LatticeField) -> LatticeField:
    v = a.values
    s1, s2 = v.shape[0], v.shape[1]
    out = np.zeros_like(v)
    for m in stencil.offsets():
        m1, m2 = m
        dst1 = slice(max(0, -m1), s1 - max(0, m1))
        dst2 = slice(max(0, -m2), s2 - max(0, m2))
        src1 = slice(max(0, m1), s1 + min(0, m1))
        src2 = slice(max(0, m2), s2 + min(0, m2))
        if dst1.start >= dst1.stop or dst2.start >= dst2.stop:
            continue
        out[dst1, dst2] += v[src1, src2] @ stencil.blocks[m].T
    return LatticeField(a.window, out)


def _apply_strip(h: HalfSpaceStencil, a: LatticeField) -> LatticeField:
    base = h.base
    W, k = a.window.width, a.window.k
    if k < 2 * base.radius + 1:
        raise WindowTooSmall(f"period {k} < {2 * base.radius + 1}")
    v = a.values  # row r <-> n1 = r+1
    out = np.zeros_like(v)
    # direct part: zero (Dirichlet) beyond the strip rows, periodic in n2
    for m in base.offsets():
        m1, m2 = m
        rolled = np.roll(v, shift=-m2, axis=1)
        dst = slice(max(0, -m1), W - max(0, m1))
        src = slice(max(0, m1), W + min(0, m1))
        if dst.start >= dst.stop:
            continue
        out[dst] += rolled[src] @ base.blocks[m].T
    # mirror part: -C_{0,(-m1-n1, o2)} a_{(m1, n2+o2)}, only rows n1+m1 <= R
    R = base.radius
    for n1 in range(1, min(R - 1, W) + 1):
        acc = np.zeros_like(v[0])
        for m1 in range(1, R - n1 + 1):
            if m1 > W:
                break
            for o2 in range(-R, R + 1):
                blk = base.blocks.get((-m1 - n1, o2))
                if blk is None:
                    continue
                acc += np.roll(v[m1 - 1], shift=-o2, axis=0) @ blk.T
        out[n1 - 1] -= acc
    return LatticeField(a.window, out)


def apply_operator(stencil, a: LatticeField) -> LatticeField:
    """Apply the (half-space) capacitance operator to a field.

    BlockStencil acts on Periodic and Box windows; HalfSpaceStencil acts on
    Strip windows.  Any other pairing raises WindowMismatch.
    """
    if isinstance(stencil, BlockStencil):
        if isinstance(a.window, Periodic):
            return _apply_periodic(stencil, a)
        if isinstance(a.window, Box):
            return _apply_box(stencil, a)
        raise WindowMismatch(
            f"BlockStencil does not act on {type(a.window).__name__}; "
            "use a HalfSpaceStencil for strips"
        )
    if isinstance(stencil, HalfSpaceStencil):
        if isinstance(a.window, Strip):
            return _apply_strip(stencil, a)
        raise WindowMismatch(
            f"HalfSpaceStencil acts on Strip windows, not {type(a.window).__name__}"
        )
    raise TypeError(f"not a stencil: {stencil!r}")


def truncate(a: LatticeField) -> LatticeField:
    """R^[k]: restrict a periodic field to Y_k, zero outside (a Box field)."""
    if not isinstance(a.window, Periodic):
        raise WindowMismatch("truncate expects a Periodic field")
    k = a.window.k
    return LatticeField(Box(lo=(0, 0), hi=(k - 1, k - 1)), np.array(a.values))


def periodize(a: LatticeField, k: int) -> LatticeField:
    """S^[k]: truncate to Y_k, then extend k-periodically.

    Sites of ``a`` outside Y_k are cut before wrapping, so e.g. a delta at
    (k, 0) periodizes to zero.
    """
    if isinstance(a.window, Periodic):
        a = truncate(a)
    if not isinstance(a.window, Box):
        raise WindowMismatch("periodize expects a Box (or Periodic) field")
    out = np.zeros((k, k, a.d), dtype=np.complex128)
    lo, hi = a.window.lo, a.window.hi
    for n1 in range(max(lo[0], 0), min(hi[0], k - 1) + 1):
        for n2 in range(max(lo[1], 0), min(hi[1], k - 1) + 1):
            out[n1, n2] = a.values[n1 - lo[0], n2 - lo[1]]
    return LatticeField(Periodic(k), out)


def translate(a: LatticeField, shift) -> LatticeField:
    """Shift a Box field by an integer vector: (Ta)_{n+shift} = a_n."""
    if not isinstance(a.window, Box):
        raise WindowMismatch("translate expects a Box field")
    lo = (a.window.lo[0] + shift[0], a.window.lo[1] + shift[1])
    hi = (a.window.hi[0] + shift[0], a.window.hi[1] + shift[1])
    return LatticeField(Box(lo=lo, hi=hi), np.array(a.values))


def nonlinear_residual(stencil, V, lam, sigma, a: LatticeField):
    """Residual of the cubic eigenproblem, r = Ca + Va - lam (1 + sigma |a|^2) a.

    The cubic term acts per site and per component:
    (|a|^2 a)_n^(i) = |a_n^(i)|^2 a_n^(i).  Returns (field, l2 norm).
    """
    Ca = apply_operator(stencil, a)
    r = Ca.values.copy()
    if V is not None and len(V):
        r += V.apply(a).values
    v = a.values
    r -= lam * (v + sigma * (np.abs(v) ** 2) * v)
    rf = LatticeField(a.window, r)
    return rf, rf.norm(2)
