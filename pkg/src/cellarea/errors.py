"""Exception hierarchy shared by every module."""


class CellAreaError(Exception):
    """Base class for all errors raised by this package."""


class GeometryError(CellAreaError):
    """A geometric construction failed or produced an invalid solid."""


class EmptyInterior(GeometryError):
    pass


class EmptyIntersection(GeometryError):
    pass


class DegenerateFace(GeometryError):
    pass


class DegenerateInput(GeometryError):
    pass


class InvalidPolyhedron(GeometryError):
    """Combinatorial invariants (edge incidence, Euler relation) do not hold."""


class CutoffTooSmall(GeometryError):
    pass


class PreconditionViolated(CellAreaError):
    pass


class CaseSumMismatch(CellAreaError):
    pass


class NotAPartition(CellAreaError):
    pass


class InvalidDiameter(CellAreaError, ValueError):
    pass


class UnknownPreset(CellAreaError, ValueError):
    pass


class NoBoundedCandidate(CellAreaError):
    pass


class ParseError(CellAreaError):
    pass


class CertificateFailure(CellAreaError):
    pass
