"""Exception hierarchy shared across the package."""


class AirError(Exception):
    """Base class for all airlearn errors."""


class FormatError(AirError, ValueError):
    """A binary file (AIRF or AIRW) could not be written or parsed."""


class BadMagicError(FormatError):
    pass


class VersionMismatchError(FormatError):
    pass


class TruncatedFileError(FormatError):
    pass


class InvalidDimensionError(FormatError):
    pass


class ScenarioError(AirError, ValueError):
    """A stream could not be built from the given dataset and configuration."""


class ClassReappearedError(ScenarioError):
    """A label arrived in CIL mode after its statistics were already folded."""

    def __init__(self, label, phase=None):
        self.label = label
        self.phase = phase
        where = f" in phase {phase}" if phase is not None else ""
        super().__init__(
            f"class {label} reappeared{where} after being folded into the CIL "
            "accumulators; classes must be disjoint across phases in CIL mode, "
            "use GCIL mode for streams where classes recur"
        )


class ConfigError(AirError, ValueError):
    """Invalid run configuration."""
