"""
Exception hierarchy for the translation toolkit.

Every error carries an ``exit_code`` so the CLI can map failures to
process status: 1 for configuration errors, 2 for data errors and 3 for
training or decoding failures.
"""

from typing import Optional


class NMTError(Exception):
    """Base exception for toolkit errors."""

    exit_code = 3


class ConfigError(NMTError):
    """Invalid configuration, flags or hyper-parameters."""

    exit_code = 1


class DataError(NMTError):
    """Malformed or inconsistent input data."""

    exit_code = 2


class UsageError(NMTError):
    """An API was called in a way its contract forbids."""
    pass


# Tensor errors

class DimensionError(NMTError, ValueError):
    """Tensor shapes do not agree."""
    pass


class NumericError(NMTError, ArithmeticError):
    """A forward op produced NaN or Inf."""
    pass


class GraphUsageError(UsageError):
    """A graph was consumed twice or used with a foreign loss."""
    pass


class NonDeterminismError(UsageError):
    """A function under gradient check returned different values on re-evaluation."""
    pass


class TokenIndexError(NMTError, IndexError):
    """A token id falls outside the vocabulary."""
    pass


# Data errors

class AlignmentError(DataError):
    """Source and target sides do not align."""
    pass


class CorpusIOError(DataError):
    """Reading or writing a corpus file failed."""
    pass


class LengthError(DataError):
    """A sequence exceeds the configured maximum length."""
    pass


class CheckpointFormatError(DataError):
    """Checkpoint file is corrupt, truncated or has a bad magic."""
    pass


# Compatibility errors

class FingerprintError(ConfigError):
    """Vocabulary fingerprints of two artifacts disagree."""
    pass


class TransferError(FingerprintError):
    """Parent checkpoint cannot initialize the child model."""
    pass


class FusionError(FingerprintError):
    """Translation model and language model cannot be fused."""
    pass


class StageError(NMTError):
    """A recipe stage failed; wraps the underlying cause."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 3)
        super().__init__(f"stage '{stage}' failed: {cause}")


def exit_code_for(error: Optional[BaseException]) -> int:
    """Map an exception to a CLI exit status."""
    if error is None:
        return 0
    return getattr(error, "exit_code", 3)
