"""Exception hierarchy shared across the package."""


class HomophilyError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(HomophilyError):
    """A parameter is outside its valid range (e.g. n <= m for graph generation)."""


class DegenerateInputError(HomophilyError):
    """Input has no usable variation (constant vector, empty neighbor set, ...)."""


class DegenerateLabelsError(HomophilyError):
    """A label vector contains a single class where two are required."""


class EmptyTrainingSetError(HomophilyError):
    """No labeled rows are available to fit a model."""


class CalibrationError(HomophilyError):
    """Intercept calibration could not reach the target count inside the bracket."""


class EstimandUndefinedError(HomophilyError):
    """The homophily estimand is undefined (group of interest is empty)."""


class NumericalError(HomophilyError):
    """A linear solve failed even after the ridge fallback."""


class ConfigError(HomophilyError):
    """A config document is malformed or contains unknown keys."""


class SchemaError(HomophilyError):
    """A CSV input does not match the expected schema."""
