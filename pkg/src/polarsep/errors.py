"""Exception types shared across the package.

The command line maps these onto stable exit codes: ``FormatError`` and
other ``ValueError`` subclasses give 2, ``OSError`` gives 3 and
``DomainError`` gives 4.
"""


class FormatError(ValueError):
    """A file or header does not follow its declared format."""


class UnknownLayoutError(FormatError):
    """A mosaic layout id that is not registered."""


class DomainError(ValueError):
    """Input lies outside the numerical domain of an operation."""


class RankError(ValueError):
    """Correspondences do not determine a unique transform."""


class DegenerateInputError(ValueError):
    """Input carries no usable signal (e.g. zero gradients everywhere)."""


class TruncatedFileError(OSError):
    """Payload ended before the number of samples declared in the header."""
