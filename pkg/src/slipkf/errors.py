"""Exception hierarchy shared by all slipkf modules."""


class SlipKFError(Exception):
    """Base class for every error raised by this package."""


class InvalidConfigError(SlipKFError, ValueError):
    """A configuration value is out of its allowed range."""


class InvalidStateError(SlipKFError, ValueError):
    """A filter state or measurement contains non-finite values."""


class FilterDivergenceError(SlipKFError, ArithmeticError):
    """The innovation covariance could not be inverted safely."""


class InvalidInputError(SlipKFError, ValueError):
    """Input data does not satisfy an operation's preconditions."""


class FormatError(SlipKFError, ValueError):
    """A gaze log file is malformed."""
