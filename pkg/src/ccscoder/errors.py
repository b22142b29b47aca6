"""Exception types shared across the package."""


class CcscoderError(Exception):
    """Base class for all package errors."""


class EmptyCorpus(CcscoderError):
    pass


class EmptySplit(CcscoderError):
    pass


class ShapeMismatch(CcscoderError):
    pass


class NonFiniteInput(CcscoderError):
    pass


class IndexOutOfRange(CcscoderError):
    pass


class LengthMismatch(CcscoderError):
    pass


class TooFewPairs(CcscoderError):
    pass


class ZeroVariance(CcscoderError):
    pass


class AllZeroSupport(CcscoderError):
    pass


class UnseenLabel(CcscoderError):
    pass


class StaleCache(CcscoderError):
    pass


class InvalidSpec(CcscoderError):
    pass


class NoCommonClasses(CcscoderError):
    pass


class ConfigError(CcscoderError):
    pass
