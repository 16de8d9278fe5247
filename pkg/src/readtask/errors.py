"""Exception hierarchy shared across the toolkit."""


class ReadtaskError(Exception):
    """Base class for all errors raised by this package."""


class CorpusFormatError(ReadtaskError):
    """A corpus file could not be parsed (bad JSON, missing manifest, ...)."""


class CorpusValidationError(ReadtaskError):
    """A corpus violates a documented invariant; the message names the rule."""


class ParameterError(ReadtaskError):
    """An operation was called with out-of-domain parameters."""


class SignalLengthError(ParameterError):
    """A signal is too short for the requested filter or transform."""


class NumericError(ReadtaskError):
    """Non-finite values where finite ones are required."""


class DataUnavailableError(ReadtaskError):
    """A feature set was requested from a corpus that lacks the raw data."""


class NoFixationsError(DataUnavailableError):
    """A fixation-based quantity was requested for a fixation-free segment."""


class UnknownFeatureSetError(ParameterError):
    """Unknown feature-set name; the message lists the valid names."""


class UnsupportedDistributionError(ReadtaskError):
    """The Bayes oracle only handles Gaussian class conditionals."""


class SingleClassError(ReadtaskError):
    """Training data contains a single class where two or more are needed."""


class ProtocolError(ReadtaskError):
    """An evaluation protocol's preconditions are not met."""


class SchemaVersionError(ReadtaskError):
    """A report or model file was written with an unsupported schema version."""
