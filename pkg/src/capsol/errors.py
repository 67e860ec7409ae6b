"""Exception types raised across the package.

Every failure mode that callers are expected to handle gets its own class;
generic misuse (bad argument types etc.) raises plain ValueError/TypeError.
"""


class CapsolError(Exception):
    """Base class for all package-specific errors."""


# ---- lattice operators ----

class WindowTooSmall(CapsolError):
    """Periodic window k < 2R+1: an offset and its wrap image would collide."""


class WindowMismatch(CapsolError):
    """Operands live on incompatible windows."""


class SymmetryNotAsserted(CapsolError):
    """Half-space construction requested without the mirror-symmetry flag."""


# ---- cell solver ----

class SingularSystem(CapsolError):
    """The discrete cell problem has no unique solution."""


class ImaginaryLeak(CapsolError):
    """Inverse Bloch transform produced a non-negligible imaginary part."""


class DecayTooSlow(CapsolError):
    """Fitted exponential decay rate of stencil blocks is not positive."""


class NonPositiveFloor(CapsolError):
    """Exterior spectral floor came out non-positive (discretization bug)."""


# ---- spectrum ----

class GapViolated(CapsolError):
    """A Bloch fiber eigenvalue lies inside the requested gap interval."""


class NoDecay(CapsolError):
    """Projector kernel shows no exponential decay (fit slope <= 0)."""


# ---- soliton solver ----

class DegenerateZ0(CapsolError):
    """No site delta has a usable projection onto the upper spectral subspace."""


class BoundaryMaximum(CapsolError):
    """Constrained ascent terminated on the boundary of the linking set."""


class NewtonDiverged(CapsolError):
    """Newton refinement failed to converge within the iteration budget."""


class SingularJacobian(CapsolError):
    """Linearized soliton equation is numerically singular."""


class TooFewAnnuli(CapsolError):
    """Window too small to fit a decay rate (need k >= 8)."""
