"""Polarization physics, raw decoding, reflection/transmission separation,
DDPM scheduling and image metrics for polarization-based reflection removal.
"""

from .errors import (
    DegenerateInputError,
    DomainError,
    FormatError,
    RankError,
    TruncatedFileError,
    UnknownLayoutError,
)
from .imagecore import RawMosaic, read_image, read_raw, write_image, write_raw
from .layouts import LAYOUTS, MosaicLayout, get_layout
from .stokes import PolarFrame, StokesMap, aolp, compute_stokes, dolp, intensity_at, unpolarized

__version__ = "0.1.0"

__all__ = [
    "DegenerateInputError",
    "DomainError",
    "FormatError",
    "LAYOUTS",
    "MosaicLayout",
    "PolarFrame",
    "RankError",
    "RawMosaic",
    "StokesMap",
    "TruncatedFileError",
    "UnknownLayoutError",
    "aolp",
    "compute_stokes",
    "dolp",
    "get_layout",
    "intensity_at",
    "read_image",
    "read_raw",
    "unpolarized",
    "write_image",
    "write_raw",
]
