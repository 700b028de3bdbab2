"""Exception types shared across the package."""


class JunctionFlowError(Exception):
    """Base class for all errors raised by junctionflow."""


class InvalidKernel(JunctionFlowError):
    """Kernel parameters violate the admissibility requirements."""


class NonCommensurateGrid(JunctionFlowError):
    """A length (kernel range or road) is not an integer multiple of dx."""


class GridMismatch(JunctionFlowError):
    """Two quantities that must share a grid do not."""


class CflViolation(JunctionFlowError):
    """Requested time step exceeds the stability bound of the scheme."""


class UnsupportedRegime(JunctionFlowError):
    """Exact-solution parameters are outside the enumerated cases."""


class OutOfDomain(JunctionFlowError):
    """A position lies outside the stated road's domain."""


class ParseError(JunctionFlowError):
    """Scenario file could not be read or decoded."""


class ValidationError(JunctionFlowError):
    """Scenario contents violate an invariant.

    Carries the path of the offending key, e.g. ``kernel.eta``.
    """

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")
