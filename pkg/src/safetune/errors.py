"""Exception types shared across the toolkit.

Grouped by the CLI exit code they map to: configuration/usage problems
exit 1, data and schema problems exit 2, provider/network problems exit 3.
"""


class SafetuneError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(SafetuneError):
    """Invalid configuration value or flag combination."""


# -- data / schema ----------------------------------------------------------

class SchemaError(SafetuneError):
    """Malformed dataset record; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DataError(SafetuneError):
    """Input data unusable for the requested operation."""


class LexError(SafetuneError):
    def __init__(self, message, line, col):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class ParseError(SafetuneError):
    def __init__(self, message, line=None, col=None):
        if line is not None:
            message = f"{line}:{col}: {message}"
        super().__init__(message)
        self.line = line
        self.col = col


class UnsupportedConstructError(SafetuneError):
    """Verilog construct outside the supported synthesizable subset."""

    def __init__(self, construct, line=None):
        msg = f"unsupported construct: {construct}"
        if line is not None:
            msg = f"line {line}: {msg}"
        super().__init__(msg)
        self.construct = construct
        self.line = line


class ResolveError(SafetuneError):
    """Reference to an undeclared signal, port, or parameter."""


class StructureError(SafetuneError):
    """Data-flow graph violates a structural invariant (combinational cycle)."""


class ShapeError(SafetuneError):
    """Matrix or vector dimensions inconsistent with the model."""


class DivergenceError(SafetuneError):
    """Training loss became non-finite."""


class FormatError(SafetuneError):
    """Model file has a bad magic, version, or is truncated."""


class ScoreError(SafetuneError):
    """Scoring a sample failed; wraps frontend/builder errors."""

    def __init__(self, message, sample_id=None):
        if sample_id is not None:
            message = f"sample {sample_id!r}: {message}"
        super().__init__(message)
        self.sample_id = sample_id


class DetectError(SafetuneError):
    """Payload detection failed on unparseable RTL."""


class EmptyTextError(SafetuneError):
    """Text input empty after trimming."""


class EmptyCandidateListError(SafetuneError):
    """Candidate list for selection was empty."""


# -- provider / network ------------------------------------------------------

class ProviderError(SafetuneError):
    """Remote embedding/paraphrase/generation service failure."""


class MalformedResponseError(ProviderError):
    """Remote service responded but the payload could not be parsed."""
