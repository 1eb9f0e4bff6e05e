"""Exception types shared across the package."""


class ZgvError(Exception):
    """Base class for all package-specific errors."""


class NoConvergence(ZgvError):
    """An iteration exhausted its budget without meeting its tolerance.

    For the eigensolver, the partially converged results are attached as
    ``pairs`` so callers can still use what was found.
    """

    def __init__(self, message, pairs=None):
        super().__init__(message)
        self.pairs = pairs if pairs is not None else []


class Breakdown(ZgvError):
    """The Krylov recurrence hit an exact invariant subspace too early."""


class SingularSylvester(ZgvError):
    """Eigenvalue collision makes the Sylvester operator (near-)singular."""


class RankDeficient(ZgvError):
    """Least-squares matrix has a numerically zero triangular pivot."""


class SingularMass(ZgvError):
    """The mass-like matrix of a pencil is numerically singular."""


class EigenvalueCollision(ZgvError):
    """The shift-invert reduction is singular at the chosen shift."""


class DegenerateQuotient(ZgvError):
    """Rayleigh-quotient denominator underflow (multiple-eigenvalue case)."""


class StagnatedResidual(ZgvError):
    """Refinement residual plateaued above its target."""


class OracleTooLarge(ZgvError):
    """Explicit operator-determinant assembly requested above the size cap."""


class InvalidMaterial(ZgvError):
    """Material constants fail the positivity/symmetry requirements."""


class ParseError(ZgvError):
    """Malformed input file; carries a line number when known."""

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc = f"{path}"
            if line is not None:
                loc += f":{line}"
            loc = f" [{loc}]"
        super().__init__(message + loc)
        self.path = path
        self.line = line


class DimensionMismatch(ZgvError):
    """Input matrices do not share one square size."""


class NonRealEntries(ZgvError):
    """Pencil input files must contain real matrices."""
