"""EZW1 container: fixed header followed by one record per coding pass.

All multi-byte integers are little-endian. Each pass stores its dominant
symbols (2 bits each, first symbol in the high bits of the first byte) and its
refinement bits (MSB first), each prefixed by a u32 count and padded to a byte.
"""

from dataclasses import dataclass, field
import math
import struct

import numpy as np

from .errors import FormatError
from .wavelet import BANKS_BY_ID

MAGIC = b"EZW1"
HEADER = struct.Struct("<4sIIBBBBhB")
COUNT = struct.Struct("<I")
SCHEMES = ("A", "B", "C")
MAX_DIM = 1 << 15
MAX_PIXELS = 1 << 24


def pack_symbols(symbols):
    sym = np.asarray(symbols, dtype=np.uint8)
    bits = np.empty(2 * len(sym), dtype=np.uint8)
    bits[0::2] = sym >> 1
    bits[1::2] = sym & 1
    return np.packbits(bits).tobytes()


def unpack_symbols(data, count):
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))[: 2 * count]
    return (bits[0::2] << 1) | bits[1::2]


def pack_bits(bits):
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


def unpack_bits(data, count):
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8))[:count]


def symbol_bytes(count):
    return (2 * count + 7) // 8


def bit_bytes(count):
    return (count + 7) // 8


@dataclass
class PassRecord:
    symbols: np.ndarray  # uint8 codes, Symbol values
    bits: np.ndarray  # uint8 0/1 refinement bits

    def nbytes(self):
        return 2 * COUNT.size + symbol_bytes(len(self.symbols)) + bit_bytes(len(self.bits))

    def to_bytes(self):
        return b"".join(
            (
                COUNT.pack(len(self.symbols)),
                pack_symbols(self.symbols),
                COUNT.pack(len(self.bits)),
                pack_bits(self.bits),
            )
        )


@dataclass
class EzwBitstream:
    width: int
    height: int
    levels: int
    bank_id: int
    scheme: str
    drp: int
    t0_exponent: int
    passes: list = field(default_factory=list)
    # set by from_bytes when the data ended inside a pass record
    truncated: bool = False
    declared_passes: int = None

    @property
    def num_passes(self):
        return len(self.passes)

    def header_bytes(self, num_passes=None):
        n = self.num_passes if num_passes is None else num_passes
        return HEADER.pack(
            MAGIC,
            self.width,
            self.height,
            self.levels,
            self.bank_id,
            SCHEMES.index(self.scheme),
            self.drp,
            self.t0_exponent,
            n,
        )

    def to_bytes(self, num_passes=None):
        """Serialize; ``num_passes`` keeps only that many leading passes."""
        n = self.num_passes if num_passes is None else min(num_passes, self.num_passes)
        return self.header_bytes(n) + b"".join(p.to_bytes() for p in self.passes[:n])

    def pass_boundaries(self):
        """Byte offsets where each pass record ends, in order."""
        pos = HEADER.size
        out = []
        for p in self.passes:
            pos += p.nbytes()
            out.append(pos)
        return out

    @classmethod
    def from_bytes(cls, data):
        """Parse a stream, keeping every complete pass of a truncated one."""
        data = bytes(data)
        if len(data) < HEADER.size:
            raise FormatError(f"stream shorter than the {HEADER.size}-byte header", len(data))
        magic, width, height, levels, bank_id, scheme_id, drp, t0_exp, npass = HEADER.unpack_from(data)
        hdr = parse_header_fields(magic, width, height, levels, bank_id, scheme_id, drp, t0_exp, npass)
        stream = cls(width, height, levels, bank_id, hdr, drp, t0_exp, declared_passes=npass)
        pos = HEADER.size
        for k in range(npass):
            rec = _read_pass(data, pos, width * height)
            if rec is None:
                stream.truncated = True
                return stream
            record, pos = rec
            stream.passes.append(record)
        if pos != len(data):
            raise FormatError(f"{len(data) - pos} trailing bytes after pass {npass}", pos)
        return stream


def parse_header_fields(magic, width, height, levels, bank_id, scheme_id, drp, t0_exp, npass):
    """Validate raw header values; returns the scheme letter."""
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}", 0)
    if not (0 < width <= MAX_DIM and 0 < height <= MAX_DIM) or width * height > MAX_PIXELS:
        raise FormatError(f"unsupported dimensions {width}x{height}", 4)
    if levels < 1 or width % (1 << levels) or height % (1 << levels) or (1 << levels) > min(width, height):
        raise FormatError(f"{levels} levels incompatible with {width}x{height}", 12)
    if bank_id not in BANKS_BY_ID:
        raise FormatError(f"unknown filter bank id {bank_id}", 13)
    if scheme_id >= len(SCHEMES):
        raise FormatError(f"unknown scheme id {scheme_id}", 14)
    scheme = SCHEMES[scheme_id]
    if scheme == "C" and drp < 1:
        raise FormatError("scheme C requires a detail retaining pass >= 1", 15)
    if scheme != "C" and drp != 0:
        raise FormatError(f"drp {drp} set for scheme {scheme}", 15)
    # |coef| <= 128 * sqrt(pixels) for centered 8-bit input under an orthonormal transform
    bound = math.floor(math.log2(128 * math.sqrt(width * height)))
    if t0_exp > bound:
        raise FormatError(f"threshold exponent {t0_exp} exceeds {bound}", 16)
    if npass > max(t0_exp + 1, 0):
        raise FormatError(f"{npass} passes would take the threshold below 1 (exponent {t0_exp})", 18)
    return scheme


def _read_pass(data, pos, max_symbols):
    """Returns (PassRecord, new position) or None when the record is cut short."""
    if len(data) - pos < COUNT.size:
        return None
    (nsym,) = COUNT.unpack_from(data, pos)
    if nsym > max_symbols:
        raise FormatError(f"symbol count {nsym} exceeds coefficient count {max_symbols}", pos)
    pos += COUNT.size
    nb = symbol_bytes(nsym)
    if len(data) - pos < nb:
        return None
    symbols = unpack_symbols(data[pos : pos + nb], nsym)
    pos += nb
    if len(data) - pos < COUNT.size:
        return None
    (nbits,) = COUNT.unpack_from(data, pos)
    if nbits > max_symbols:
        raise FormatError(f"refinement bit count {nbits} exceeds coefficient count {max_symbols}", pos)
    pos += COUNT.size
    nb = bit_bytes(nbits)
    if len(data) - pos < nb:
        return None
    bits = unpack_bits(data[pos : pos + nb], nbits)
    pos += nb
    return PassRecord(symbols, bits), pos
