"""Exception taxonomy shared across the package.

Every error raised by ctcrelax derives from :class:`CtcRelaxError`, so
callers can catch one base class at process boundaries (the CLI maps it
to exit code 1).  NaN/Inf payload rejection uses the builtin
``ValueError`` since it is a plain bad-value condition.
"""


class CtcRelaxError(Exception):
    """Base class for all ctcrelax errors."""


class IoError(CtcRelaxError):
    """Underlying stream read/write failure."""


class FormatError(CtcRelaxError):
    """Binary payload does not start with the expected magic."""


class VersionError(CtcRelaxError):
    """Recognized magic but unsupported format version."""


class TruncationError(CtcRelaxError):
    """Payload ends before the header-declared element count."""


class ParseError(CtcRelaxError):
    """Malformed text input (vocabulary, manifest, or ARPA file)."""


class ShapeError(CtcRelaxError):
    """Operands have incompatible dimensions."""


class ConfigError(CtcRelaxError):
    """Parameter outside its documented range."""


class SizeError(CtcRelaxError):
    """Instance too large for an exhaustive-enumeration guard."""
