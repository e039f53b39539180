"""Image buffers and file I/O.

Images are plain ``float64`` numpy arrays in linear radiance: shape
``(H, W)`` for one channel or ``(H, W, 3)`` for RGB. Row 0 is the top of
the picture. Quantization happens only when writing integer formats.

Supported files:

* binary PGM (P5) / PPM (P6), big-endian 16-bit samples, maxval 65535
* PFM, ``Pf`` (1 channel) or ``PF`` (3 channels), float32, rows bottom-up
* PRAW, the little-endian raw mosaic container (see :func:`write_raw`)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from os import PathLike
from typing import Union

import numpy as np

from .errors import FormatError, TruncatedFileError
from .layouts import get_layout

PathType = Union[str, PathLike]

MAXVAL = 65535
RAW_MAGIC = b"PRAW"
RAW_VERSION = 1
RAW_HEADER = struct.Struct("<4sBBIIB5s")


def check_image(img, name: str = "image") -> np.ndarray:
    """Validate ``img`` and return it as a float64 array.

    Raises ``ValueError`` for a wrong rank, an unsupported channel count or
    any non-finite sample.
    """
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    if arr.ndim not in (2, 3) or (arr.ndim == 3 and arr.shape[2] != 3):
        raise ValueError(f"{name}: expected (H, W) or (H, W, 3), got {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name}: empty image")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: contains NaN or Inf")
    return arr


def channels(img: np.ndarray) -> int:
    return 1 if img.ndim == 2 else img.shape[2]


def same_geometry(*imgs: np.ndarray) -> None:
    shapes = {np.shape(i) for i in imgs}
    if len(shapes) != 1:
        raise ValueError(f"geometry mismatch: {sorted(shapes)}")


def quantize16(img: np.ndarray) -> np.ndarray:
    """Scale [0, 1] to 0..65535, rounding half up."""
    return np.floor(np.asarray(img, dtype=np.float64) * MAXVAL + 0.5).astype(np.uint16)


# ---------------------------------------------------------------- Netpbm / PFM


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Read ``count`` whitespace-separated header tokens, skipping comments.

    Returns the tokens and the offset just past the single whitespace byte
    that terminates the last token.
    """
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("header ended early")
        tokens.append(data[start:pos])
    if pos >= n:
        raise FormatError("missing whitespace after header")
    return tokens, pos + 1


def _positive_int(tok: bytes, what: str) -> int:
    try:
        value = int(tok)
    except ValueError:
        raise FormatError(f"bad {what}: {tok!r}") from None
    if value <= 0:
        raise FormatError(f"bad {what}: {value}")
    return value


def read_image(path: PathType) -> np.ndarray:
    """Read a P5/P6 Netpbm or PFM file into a float64 image.

    Integer samples are divided by the file's maxval (65535 for files
    written here); PFM samples are taken as stored.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    magic = data[:2]
    if magic in (b"P5", b"P6"):
        return _decode_netpbm(data)
    if magic in (b"Pf", b"PF"):
        return _decode_pfm(data)
    raise FormatError(f"{path}: unrecognised magic {magic!r}")


def _decode_netpbm(data: bytes) -> np.ndarray:
    (magic, w, h, mv), offset = _header_tokens(data, 4)
    width = _positive_int(w, "width")
    height = _positive_int(h, "height")
    maxval = _positive_int(mv, "maxval")
    if maxval > MAXVAL:
        raise FormatError(f"maxval {maxval} exceeds 65535")
    nch = 1 if magic == b"P5" else 3
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height * nch
    payload = data[offset:]
    if len(payload) < count * dtype.itemsize:
        raise TruncatedFileError(
            f"expected {count * dtype.itemsize} payload bytes, found {len(payload)}"
        )
    samples = np.frombuffer(payload, dtype=dtype, count=count).astype(np.float64)
    if np.any(samples > maxval):
        raise FormatError("sample exceeds maxval")
    img = samples / maxval
    return img.reshape(height, width) if nch == 1 else img.reshape(height, width, 3)


def _decode_pfm(data: bytes) -> np.ndarray:
    (magic, w, h, sc), offset = _header_tokens(data, 4)
    width = _positive_int(w, "width")
    height = _positive_int(h, "height")
    try:
        scale = float(sc)
    except ValueError:
        raise FormatError(f"bad PFM scale {sc!r}") from None
    if scale == 0.0 or not np.isfinite(scale):
        raise FormatError("PFM scale must be a non-zero finite number")
    nch = 1 if magic == b"Pf" else 3
    dtype = np.dtype("<f4") if scale < 0 else np.dtype(">f4")
    count = width * height * nch
    payload = data[offset:]
    if len(payload) < count * 4:
        raise TruncatedFileError(f"expected {count * 4} payload bytes, found {len(payload)}")
    img = np.frombuffer(payload, dtype=dtype, count=count).astype(np.float64)
    shape = (height, width) if nch == 1 else (height, width, 3)
    img = img.reshape(shape)[::-1].copy()
    if not np.all(np.isfinite(img)):
        raise FormatError("PFM holds NaN or Inf samples")
    return img


def write_image(img, path: PathType, format: str | None = None) -> None:
    """Write ``img`` as ``pgm``, ``ppm`` or ``pfm``.

    ``format`` defaults to the path suffix. Integer formats require samples
    in [0, 1]; out-of-range values raise ``ValueError`` instead of being
    clipped. PFM is written little-endian (scale line ``-1.0``) as float32.
    """
    arr = check_image(img)
    fmt = (format or str(path).rsplit(".", 1)[-1]).lower()
    nch = channels(arr)
    h, w = arr.shape[:2]
    if fmt in ("pgm", "ppm"):
        want = 1 if fmt == "pgm" else 3
        if nch != want:
            raise ValueError(f"{fmt} needs {want} channel(s), image has {nch}")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError(f"{fmt} samples must lie in [0, 1]; clip explicitly first")
        header = b"P5" if fmt == "pgm" else b"P6"
        body = quantize16(arr).astype(">u2").tobytes()
        blob = header + f"\n{w} {h}\n{MAXVAL}\n".encode("ascii") + body
    elif fmt == "pfm":
        header = b"Pf" if nch == 1 else b"PF"
        body = arr[::-1].astype("<f4").tobytes()
        blob = header + f"\n{w} {h}\n-1.0\n".encode("ascii") + body
    else:
        raise ValueError(f"unsupported image format {fmt!r}")
    with open(path, "wb") as fh:
        fh.write(blob)


# ---------------------------------------------------------------- raw mosaic


@dataclass(frozen=True, eq=False)
class RawMosaic:
    """One polarized-CFA sensor readout.

    ``samples`` is an ``(height, width)`` uint16 array; both dimensions are
    multiples of 4 so that whole 4x4 layout tiles fit.
    """

    samples: np.ndarray
    layout_id: int = 0
    bit_depth: int = 16

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.ndim != 2:
            raise ValueError("mosaic samples must be 2-D")
        if s.shape[0] % 4 or s.shape[1] % 4:
            raise ValueError(f"mosaic dimensions must be multiples of 4, got {s.shape}")
        if self.bit_depth != 16:
            raise ValueError("only 16-bit mosaics are supported")
        if s.dtype != np.uint16:
            if np.any(s < 0) or np.any(s >= 2**16) or np.any(s != np.round(s)):
                raise ValueError("mosaic samples must be integers in [0, 65535]")
            s = s.astype(np.uint16)
        get_layout(self.layout_id)
        object.__setattr__(self, "samples", s)

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    def normalized(self) -> np.ndarray:
        return self.samples.astype(np.float64) / MAXVAL


def write_raw(mosaic: RawMosaic, path: PathType) -> None:
    """Write a PRAW file.

    Layout: ``"PRAW"`` | version u8 = 1 | layout_id u8 | width u32 |
    height u32 | bit_depth u8 = 16 | 5 zero bytes | samples as u16, all
    little-endian, row-major.
    """
    header = RAW_HEADER.pack(
        RAW_MAGIC, RAW_VERSION, mosaic.layout_id, mosaic.width, mosaic.height,
        mosaic.bit_depth, bytes(5),
    )
    with open(path, "wb") as fh:
        fh.write(header + mosaic.samples.astype("<u2").tobytes())


def read_raw(path: PathType) -> RawMosaic:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < RAW_HEADER.size:
        raise FormatError("file shorter than the PRAW header")
    magic, version, layout_id, width, height, depth, reserved = RAW_HEADER.unpack_from(data)
    if magic != RAW_MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != RAW_VERSION:
        raise FormatError(f"unsupported PRAW version {version}")
    if depth != 16:
        raise FormatError(f"unsupported bit depth {depth}")
    if reserved != bytes(5):
        raise FormatError("reserved header bytes must be zero")
    get_layout(layout_id)
    if width == 0 or height == 0 or width % 4 or height % 4:
        raise FormatError(f"dimensions {width}x{height} are not positive multiples of 4")
    payload = data[RAW_HEADER.size :]
    if len(payload) != width * height * 2:
        raise FormatError(
            f"payload holds {len(payload)} bytes, header declares {width * height * 2}"
        )
    samples = np.frombuffer(payload, dtype="<u2").reshape(height, width).astype(np.uint16)
    return RawMosaic(samples, layout_id=layout_id)
