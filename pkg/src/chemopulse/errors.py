"""Exception hierarchy.

Every error carries a short machine-readable ``code`` used by the command
line front end to pick an exit status.
"""


class ChemopulseError(Exception):
    code = "error"


class InvalidParameterError(ChemopulseError, ValueError):
    code = "invalid_parameter"

    def __init__(self, name, message):
        self.name = name
        super().__init__(f"{name}: {message}")


class AdmissibilityError(ChemopulseError, ValueError):
    """Speed lies outside the interval on which the pulse decays both ways."""

    code = "not_admissible"


class DomainError(ChemopulseError, ValueError):
    code = "domain"


class BifurcationUndefinedError(ChemopulseError):
    """The speed-selection hypothesis does not hold for the parameters."""

    code = "hypothesis_failed"

    def __init__(self, clause):
        self.clause = clause
        super().__init__(f"bifurcation hypothesis fails: {clause}")


class SingularFitError(ChemopulseError, ValueError):
    code = "singular_fit"


class InvalidProfileError(ChemopulseError, ValueError):
    code = "invalid_profile"


class SimulationError(ChemopulseError):
    code = "numerical_failure"

    def __init__(self, message, t=None):
        self.t = t
        if t is not None:
            message = f"{message} (t = {t!r} s)"
        super().__init__(message)


class StepRejectedError(SimulationError):
    code = "step_rejected"


class NumericalFailureError(SimulationError):
    code = "numerical_failure"


class NoPeakError(ChemopulseError, ValueError):
    code = "no_peak"


class InsufficientDataError(ChemopulseError, ValueError):
    code = "insufficient_data"


class ConfigError(ChemopulseError, ValueError):
    code = "config"

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(key)
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
