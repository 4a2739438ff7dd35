"""Exception hierarchy shared by all advscene modules."""


class AdvSceneError(Exception):
    """Base class for all package errors."""


class InvalidStateError(AdvSceneError):
    """A vehicle state, action, or command contains non-finite or out-of-domain values."""


class ConfigError(AdvSceneError):
    """A configuration value is out of its legal range or a referenced path is missing."""


class ShapeError(AdvSceneError):
    """Tensor shapes are inconsistent with the declared horizon/agent layout."""


class SchemaError(AdvSceneError):
    """An input file is missing a required column or key."""


class ParseError(AdvSceneError):
    """A cell or field could not be parsed; message carries the location."""


class FormatError(AdvSceneError):
    """Structured LLM output does not match the expected template."""


class RangeError(FormatError):
    """A parsed value is outside its documented range."""


class CredentialError(AdvSceneError):
    """API key could not be resolved from the environment."""


class TransportError(AdvSceneError):
    """Chat endpoint failed after the retry budget was exhausted."""


class RequestTimeoutError(TransportError):
    """Chat endpoint did not answer within the configured timeout."""


class AgentFormatError(AdvSceneError):
    """Driver agent output stayed unparseable after the parse retry."""


class NoAnchorsError(AdvSceneError):
    """Anchor validation removed every anchor."""


class UnsupportedInstructionError(AdvSceneError):
    """task_success has no rule for the instruction pattern."""


class DivergenceError(AdvSceneError):
    """A numeric routine produced non-finite values; message reports where."""
