"""Binary PGM (P5) reading and writing."""

from dataclasses import dataclass

import numpy as np

from .errors import FormatError, InputError

_WHITESPACE = b" \t\n\r\v\f"


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit grayscale image; ``pixels`` is a read-only (height, width) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.shape[0] == 0 or px.shape[1] == 0:
            raise InputError(f"expected a non-empty 2-D sample grid, got shape {px.shape}")
        if px.dtype != np.uint8:
            if not np.all(np.isfinite(px)) or px.min() < 0 or px.max() > 255 or np.any(px != np.round(px)):
                raise InputError("samples must be integers in [0, 255]")
            px = px.astype(np.uint8)
        px = np.array(px, dtype=np.uint8, copy=True)
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def samples(self):
        return self.pixels.ravel()

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(np.array_equal(self.pixels, other.pixels))

    __hash__ = None


def _header_token(data, pos):
    # Skips whitespace and '#' comments, returns (token, position after it).
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c in _WHITESPACE and c:
            pos += 1
        elif c == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        else:
            break
    start = pos
    while pos < n and data[pos : pos + 1] not in _WHITESPACE and data[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise FormatError("unexpected end of PGM header", start)
    return data[start:pos], pos


def _header_int(data, pos, what):
    tok, end = _header_token(data, pos)
    if not tok.isdigit():
        raise FormatError(f"invalid {what} {tok!r}", end - len(tok))
    return int(tok), end


def read_pgm(data):
    """Parse a binary PGM file held in ``data`` (bytes)."""
    data = bytes(data)
    if len(data) < 2 or data[:2] != b"P5":
        raise FormatError(f"not a binary PGM file (magic {data[:2]!r})", 0)
    pos = 2
    if len(data) <= pos or data[pos : pos + 1] not in _WHITESPACE and data[pos : pos + 1] != b"#":
        raise FormatError("missing separator after magic", pos)
    width, pos = _header_int(data, pos, "width")
    height, pos = _header_int(data, pos, "height")
    maxval, pos = _header_int(data, pos, "maxval")
    if width == 0 or height == 0:
        raise FormatError(f"empty image {width}x{height}", pos)
    if not 0 < maxval <= 255:
        raise FormatError(f"unsupported maxval {maxval}", pos)
    if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE:
        raise FormatError("missing whitespace after maxval", pos)
    pos += 1
    need = width * height
    if len(data) - pos < need:
        raise FormatError(f"short sample data: need {need} bytes, have {len(data) - pos}", len(data))
    px = np.frombuffer(data, dtype=np.uint8, count=need, offset=pos).reshape(height, width)
    if px.max() > maxval:
        raise FormatError(f"sample exceeds maxval {maxval}", pos + int(np.argmax(px.ravel() > maxval)))
    return GrayImage(px)


def write_pgm(image):
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    return header + image.pixels.tobytes()


def load_pgm(path):
    with open(path, "rb") as f:
        return read_pgm(f.read())


def save_pgm(path, image):
    with open(path, "wb") as f:
        f.write(write_pgm(image))
