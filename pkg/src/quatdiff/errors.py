"""Exception types raised across the package."""


class QuatDiffError(ValueError):
    """Base class for domain errors."""


class NonUnitInput(QuatDiffError):
    """A quaternion that must be unit is not, within tolerance."""


class NonSPDInertia(QuatDiffError):
    """Inertia matrix is not symmetric positive definite."""


class AntipodalSingularity(QuatDiffError):
    """Scalar error part too close to -1 (the 1 + e0 denominators blow up)."""


class SingularE0(QuatDiffError):
    """Scalar error part too close to 0 (the 1 / e0 terms blow up)."""


class NonCompliantState(QuatDiffError):
    """State violates the constant-difference constraint e_v . w = 0."""


class NonCompliantInitialState(NonCompliantState):
    """Initial state of a nominal-flow run is not constraint compliant."""


class DegenerateFrame(QuatDiffError):
    """e_v and w cannot span the aligned orthonormal frame."""


class DegenerateErrorVector(QuatDiffError):
    """|e_v| too small for a law that divides by it."""


class NonFiniteDerivative(QuatDiffError):
    """Integration produced NaN or inf."""

    def __init__(self, t, message=None):
        self.t = float(t)
        super().__init__(message or f"non-finite derivative at t = {self.t!r} s")


class InvalidRange(QuatDiffError):
    """Bad sweep range for the stability command."""


class ScenarioError(QuatDiffError):
    """Scenario file failed to parse or validate."""

    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)
