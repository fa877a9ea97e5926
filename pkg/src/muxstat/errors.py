"""Exception hierarchy. Every error carries a short ``category`` used by the CLI."""


class MuxstatError(Exception):
    category = "error"


class ParameterDomainError(MuxstatError, ValueError):
    category = "parameter-domain"


class DomainError(MuxstatError, ValueError):
    category = "domain"


class SampleSizeError(MuxstatError, ValueError):
    category = "sample-size"


class DegenerateSampleError(MuxstatError, ValueError):
    category = "degenerate-sample"


class SupportError(MuxstatError, ValueError):
    category = "support"


class FormatError(MuxstatError, ValueError):
    category = "format"


class ParseError(MuxstatError, ValueError):
    category = "parse"


class EmptyRankingError(MuxstatError):
    category = "empty-ranking"


class UnavailableError(MuxstatError, LookupError):
    category = "unavailable"
