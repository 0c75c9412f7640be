"""Exception hierarchy shared across the package."""


class PairTuneError(Exception):
    """Base class for all package errors."""


class DimensionError(PairTuneError, ValueError):
    """A vector or setting has the wrong number of entries."""


class InvalidSettingError(PairTuneError, ValueError):
    """A setting violates its parameter specifications.

    :param violations: the per-parameter violations found by ``validate``.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        names = ", ".join(v.name for v in self.violations)
        super().__init__(f"invalid setting: violations on {names}")


class SpaceFormatError(PairTuneError, ValueError):
    """A space definition document is malformed."""


class RulesFormatError(PairTuneError, ValueError):
    """An experience-rules file is malformed or names unknown parameters."""


class DegenerateTrainingError(PairTuneError, ValueError):
    """Comparison data carries only one label class."""


class ModelFormatError(PairTuneError, ValueError):
    """A persisted classifier file is not readable."""


class EvaluationError(PairTuneError, RuntimeError):
    """The system under tune failed to produce a performance value.

    :param raw_output: whatever the command wrote before failing.
    """

    def __init__(self, message, raw_output=""):
        super().__init__(message)
        self.raw_output = raw_output


class FingerprintError(PairTuneError, ValueError):
    """A sample database belongs to a different parameter space."""


class DataFormatError(PairTuneError, ValueError):
    """A database or report file could not be parsed."""


class ConfigError(PairTuneError, ValueError):
    """Tuning configuration is inconsistent."""
