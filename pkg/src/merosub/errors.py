"""Exception hierarchy shared by every module."""


class MerosubError(Exception):
    """Base class for all errors raised by the package."""


class NumericDegeneracy(MerosubError):
    """A numeric precondition failed; the CLI maps these to exit code 3."""


class DegenerateDivision(NumericDegeneracy):
    def __init__(self, magnitude: float):
        self.magnitude = magnitude
        super().__init__(f"divisor constant term too small: |s2(0)| = {magnitude:.3e}")


class BranchRisk(NumericDegeneracy):
    def __init__(self, constant: complex):
        self.constant = constant
        super().__init__(f"power base must have constant term 1, got {constant!r}")


class DegenerateBase(NumericDegeneracy):
    """The operator base vanishes at the origin."""


class DegenerateDerivative(NumericDegeneracy):
    def __init__(self, magnitude: float, z: complex):
        self.magnitude = magnitude
        self.z = z
        super().__init__(f"|s'| = {magnitude:.3e} below floor at z = {z!r}")


class DomainError(MerosubError):
    """Evaluation point outside the region where a series is trusted."""


class NotSchwarz(MerosubError):
    """Inner function of a composition is not a Schwarz function."""


class TooClose(MerosubError):
    """Winding number requested for a point lying on (or near) the curve."""


class OracleUnstable(NumericDegeneracy):
    def __init__(self, estimate: float):
        self.estimate = estimate
        super().__init__(f"quadrature error estimate {estimate:.3e} exceeds tolerance")


class SpecError(MerosubError):
    """Invalid dominant-family specification."""


class UsageError(MerosubError):
    """Bad theorem id, preset name, or argument combination."""


class GeneratorStuck(MerosubError):
    """Random function generator exhausted its rejection budget."""


class ParseError(MerosubError):
    """Malformed series literal."""
