"""Exception types shared across the package."""


class KinecoachError(Exception):
    """Base class for all kinecoach errors."""


class ParseError(KinecoachError):
    """Malformed input file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DuplicateObservationError(ParseError):
    """The same (frame, joint) pair was observed more than once."""


class AmbiguousJointError(KinecoachError):
    """Two distinct input joint names map to the same canonical joint."""


class ImputationError(KinecoachError):
    """A joint does not have enough valid frames to fill its gaps."""


class InsufficientFramesError(KinecoachError):
    """An operation needs more frames than the sequence provides."""


class DegenerateGeometryError(KinecoachError):
    """A joint-angle ray is too short to define a direction."""


class MissingEndEffectorError(KinecoachError):
    """Neither a racket marker nor a right-hand proxy is available."""


class ConfigError(KinecoachError):
    """Invalid configuration data (reference ranges, pipeline options)."""


class DegenerateSampleError(KinecoachError):
    """A statistical sample has zero variance or is otherwise unusable."""
