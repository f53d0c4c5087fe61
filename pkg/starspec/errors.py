"""Exception hierarchy for starspec.

Every error carries the process exit code the CLI reports for it.
"""


class StarSpecError(Exception):
    exit_code: int = 3

    def __init__(self, message: str = "", *, index: int | None = None) -> None:
        super().__init__(message)
        self.index = index

    def with_index(self, index: int) -> "StarSpecError":
        self.index = index
        return self

    def __str__(self) -> str:
        base = super().__str__()
        if self.index is None:
            return base
        return f"{base} (index n={self.index})"


# --- usage / configuration errors (exit 2) ---


class ConfigError(StarSpecError):
    exit_code = 2


class ConfigNotFound(ConfigError):
    pass


class InvalidConfig(ConfigError):
    pass


class InvalidParameter(InvalidConfig):
    pass


class NonPositiveLength(ConfigError):
    pass


class TooFewEdges(ConfigError):
    pass


class InconsistentRationalDeclaration(ConfigError):
    pass


class RationalityUndeclared(ConfigError):
    pass


class RequiresIndependentLengths(ConfigError):
    pass


class RequiresRationalLengths(ConfigError):
    pass


class InvalidTarget(ConfigError):
    pass


class AlphaZero(ConfigError):
    pass


class SupportMismatch(ConfigError):
    pass


class SpectrumTooShort(ConfigError):
    pass


# --- numerical failures (exit 3) ---


class NumericalError(StarSpecError):
    exit_code = 3


class PoleProximity(NumericalError):
    pass


class ZeroArgument(NumericalError):
    pass


class BracketFailure(NumericalError):
    pass


class NotARegularRoot(NumericalError):
    pass


class NewtonDiverged(NumericalError):
    pass


class ContourIllConditioned(NumericalError):
    pass


class CoincidentEigenfunction(NumericalError):
    pass


class SampleNearPole(NumericalError):
    pass


class OutOfComputedRange(NumericalError):
    pass


class TargetNotFound(NumericalError):
    pass
