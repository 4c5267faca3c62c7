"""
Error hierarchy for the lab.

Every error carries the process exit code it maps to; the command-line
entry point prints the detail and exits with that code.
"""

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class LabError(Exception):
    """Base class for all lab errors"""

    exit_code: int = EXIT_FAILURE

    def __init__(self, detail: str = ""):
        super().__init__(detail)
        self.detail = detail

    def __str__(self) -> str:
        return f"{type(self).__name__}: {self.detail}"


# Usage / configuration errors (exit 2)

class ConfigError(LabError):
    exit_code = EXIT_USAGE


class ParameterOutOfRange(LabError):
    exit_code = EXIT_USAGE


# Numerical and experiment failures (exit 1)

class HermitianViolation(LabError):
    pass


class QuadratureFailure(LabError):
    pass


class UnresolvedSpectrum(LabError):
    pass


class CflViolation(LabError):
    pass


class KappaMismatch(LabError):
    pass


class NonzeroMeanVorticity(LabError):
    pass


class MeanNotZero(LabError):
    pass


class MassDefect(LabError):
    pass


class DegenerateFit(LabError):
    pass


class IdentityDefect(LabError):
    pass


class PropertyFailure(LabError):
    pass


class GateFailure(LabError):
    pass


class NonFiniteField(LabError):
    pass


class ArtifactError(LabError):
    pass
