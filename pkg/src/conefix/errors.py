"""Exception hierarchy shared by every module of the package."""


class ConefixError(Exception):
    """Base class for all structured errors raised by conefix."""


class DimensionMismatchError(ConefixError, ValueError):
    def __init__(self, expected, got, what="vector"):
        self.expected = expected
        self.got = got
        super().__init__(f"{what} has dimension {got}, expected {expected}")


class NotAChainError(ConefixError, ValueError):
    """Two elements of a supposed chain are incomparable."""

    def __init__(self, i, j):
        self.pair = (i, j)
        super().__init__(f"elements {i} and {j} are incomparable; input is not a chain")


class PreconditionError(ConefixError, ValueError):
    """A hypothesis of a fixed-point engine does not hold at the start point."""


class ConeExitError(ConefixError, ValueError):
    """A map that must send the cone into itself produced a point outside it."""

    def __init__(self, index, point):
        self.index = index
        self.point = point
        super().__init__(f"evaluation {index} left the cone: {point!r}")


class DomainNotClosedError(ConefixError, ValueError):
    def __init__(self, element, image):
        self.element = element
        self.image = image
        super().__init__(f"image {image!r} of {element!r} is outside the domain")


class QuadratureError(ConefixError, ArithmeticError):
    """Non-finite integrand at an off-diagonal node, or an impossible sign of g."""

    def __init__(self, message, node=None):
        self.node = node
        super().__init__(message)


class KernelValidationError(ConefixError, ValueError):
    def __init__(self, report):
        self.report = report
        super().__init__(
            f"kernel violates its hypotheses: {len(report.sign_violations)} sign, "
            f"{len(report.growth_violations)} growth violations"
        )


class NegativeCoordinateError(ConefixError, ValueError):
    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(f"coordinate {index} is negative ({value!r}); input must lie in the cone")
