"""capsol: capacitance operators of resonator lattices.

Bloch band structures and certified spectral gaps of block-convolution
capacitance stencils on Z^2, spectral projectors with decay certificates,
and discrete gap solitons of the cubic eigenproblem
C a + V a = lam (1 + sigma |a|^2) a found by a linking-geometry ascent
plus Newton refinement — with a finite-difference cell solver that builds
stencils from physical disk geometries.
"""

from .cell import (
    BlochCapacitance,
    CellGrid,
    bloch_capacitance,
    exterior_spectrum_floor,
    realspace_stencil,
    solve_cell_problem,
    stencil_from_samples,
)
from .errors import (
    BoundaryMaximum,
    CapsolError,
    DecayTooSlow,
    DegenerateZ0,
    GapViolated,
    ImaginaryLeak,
    NewtonDiverged,
    NoDecay,
    NonPositiveFloor,
    SingularJacobian,
    SingularSystem,
    SymmetryNotAsserted,
    TooFewAnnuli,
    WindowMismatch,
    WindowTooSmall,
)
from .lattice import (
    BlockStencil,
    Box,
    DiagonalDefect,
    HalfSpaceStencil,
    LatticeField,
    LatticeGeometry,
    Periodic,
    Strip,
    apply_operator,
    defect_norm,
    fit_decay,
    halfspace_stencil,
    nonlinear_residual,
    periodize,
    translate,
    truncate,
)
from .soliton import (
    LinkingSet,
    ProblemSpec,
    SolitonResult,
    SweepReport,
    build_linking_set,
    certify,
    decay_rate,
    energy,
    energy_gradient,
    halfspace_solve,
    k_sweep,
    linking_maximize,
    newton_refine,
)
from .spectrum import (
    BandStructure,
    DecayFit,
    LpProbe,
    SpectralGap,
    SpectralProjector,
    band_structure,
    bloch_matrix,
    bz_grid,
    find_gaps,
    kernel_decay_fit,
    lp_norm_probe,
    projection_convergence,
    spectral_projector,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # lattice
    "LatticeGeometry", "BlockStencil", "HalfSpaceStencil", "LatticeField",
    "DiagonalDefect", "Periodic", "Box", "Strip",
    "apply_operator", "truncate", "periodize", "translate",
    "halfspace_stencil", "defect_norm", "nonlinear_residual", "fit_decay",
    # spectrum
    "BandStructure", "SpectralGap", "SpectralProjector", "DecayFit", "LpProbe",
    "bloch_matrix", "bz_grid", "band_structure", "find_gaps",
    "spectral_projector", "kernel_decay_fit", "lp_norm_probe",
    "projection_convergence",
    # soliton
    "ProblemSpec", "LinkingSet", "SolitonResult", "SweepReport",
    "energy", "energy_gradient", "build_linking_set", "linking_maximize",
    "newton_refine", "certify", "k_sweep", "decay_rate", "halfspace_solve",
    # cell
    "CellGrid", "BlochCapacitance", "solve_cell_problem", "bloch_capacitance",
    "stencil_from_samples", "realspace_stencil", "exterior_spectrum_floor",
    # errors
    "CapsolError", "WindowTooSmall", "WindowMismatch", "SymmetryNotAsserted",
    "SingularSystem", "ImaginaryLeak", "DecayTooSlow", "NonPositiveFloor",
    "GapViolated", "NoDecay", "DegenerateZ0", "BoundaryMaximum",
    "NewtonDiverged", "SingularJacobian", "TooFewAnnuli",
]
