"""Named errors raised throughout vistaformer.

Errors about values (shapes, configuration, call contracts) derive from `ValueError`,
errors about files derive from `OSError`. The command line maps the former to exit
code 1 and the latter to exit code 2.
"""

__all__ = [
    'ShapeError', 'ConfigurationError', 'ContractError',
    'ChipIOError', 'FormatError', 'ChecksumError', 'TruncatedFileError']


class ShapeError(ValueError):
    """Operand dimensions do not agree."""


class ConfigurationError(ValueError):
    """A configuration value or a derived geometry is invalid."""


class ContractError(ValueError):
    """A function was called in violation of its preconditions."""


class ChipIOError(OSError):
    """Base class for errors reading the binary chip and checkpoint formats."""


class FormatError(ChipIOError):
    """Bad magic, unsupported version or dtype, or an invalid header."""


class ChecksumError(ChipIOError):
    """The trailing CRC32 does not match the content."""


class TruncatedFileError(ChipIOError):
    """The file ends before the payload announced in its header."""
