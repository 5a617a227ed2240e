"""Exception and warning types shared across the package."""


class GaSelectError(Exception):
    """Base class for all errors raised by gaselect."""


class FormatError(GaSelectError):
    """Input file is structurally malformed (e.g. ragged rows)."""


class ParseError(GaSelectError):
    """A token could not be interpreted."""


class EmptyInputError(GaSelectError):
    pass


class AlignmentError(GaSelectError):
    """Labels and samples disagree in count."""


class StateError(GaSelectError):
    """Operation applied to an object in the wrong state."""


class DegenerateMaskError(GaSelectError):
    pass


class DimensionError(GaSelectError, ValueError):
    pass


class ConfigError(GaSelectError, ValueError):
    pass


class FitnessError(GaSelectError):
    pass


class StratificationWarning(UserWarning):
    """A stratified split left some class without test samples."""
