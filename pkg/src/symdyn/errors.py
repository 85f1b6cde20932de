"""Exception hierarchy shared by all symdyn modules."""


class SymdynError(Exception):
    """Base class for every error raised by this package."""


# symbolic
class MatrixError(SymdynError, ValueError):
    pass


class NotBinary(MatrixError):
    pass


class ZeroRow(MatrixError):
    pass


class ZeroColumn(MatrixError):
    pass


class TooSmall(MatrixError):
    pass


class EmptyWord(SymdynError, ValueError):
    pass


class SymbolOutOfRange(SymdynError, ValueError):
    pass


class NotAdmissible(SymdynError, ValueError):
    pass


class NonConvergence(SymdynError, RuntimeError):
    pass


class NotChaoticMatrix(SymdynError, ValueError):
    pass


# maps
class OutOfDomain(SymdynError, ValueError):
    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class DegenerateRegion(SymdynError, ValueError):
    pass


class DimensionMismatch(SymdynError, ValueError):
    pass


# expansion
class NotOneDimensional(SymdynError, ValueError):
    pass


class NotTwoDimensional(SymdynError, ValueError):
    pass


class AperiodicRule(SymdynError, ValueError):
    pass


class SeparationViolation(SymdynError, ValueError):
    pass


class FaceTestInconclusive(SymdynError, RuntimeError):
    pass


# coding
class EmptyCell(SymdynError, RuntimeError):
    def __init__(self, message: str, prefix: tuple[int, ...] = ()):
        super().__init__(message)
        self.prefix = prefix


class NoContraction(SymdynError, RuntimeError):
    pass


class OrbitEscapes(SymdynError, RuntimeError):
    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


class BoundaryAmbiguity(SymdynError, RuntimeError):
    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


# chaoslab
class CoveringRequired(SymdynError, RuntimeError):
    pass


class InsufficientSamples(SymdynError, ValueError):
    pass


# scenarios / cli
class ParseError(SymdynError, ValueError):
    def __init__(self, message: str, location: str = ""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


class ValidationError(SymdynError, ValueError):
    def __init__(self, message: str, location: str = "", invariant: str = ""):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location
        self.invariant = invariant


class UnknownCommand(SymdynError, ValueError):
    pass
