"""EZW encoder and decoder with the A/B/C dominant-pass schedules.

Scheme B is plain EZW: each pass rescans every insignificant coefficient,
pruning only the descendants of zerotree roots found in that same pass.
Scheme A also remembers those descendants in a skip set and never scans
them again. Scheme C runs as B up to and including the detail retaining
pass (DRP); zerotree roots found from the DRP onward feed the skip set, so
every later pass behaves as A.
"""

from dataclasses import dataclass, field
import math
import time
import warnings

import numpy as np

from .bitstream import HEADER, SCHEMES, EzwBitstream, PassRecord
from .errors import FormatError, InputError
from .imageio import GrayImage
from .metrics import PassStats
from .wavelet import BANKS_BY_ID, CoeffPyramid, forward_dwt_2d, get_bank, inverse_dwt_2d
from .zerotree import Geometry, Symbol, classify_array, descendant_max_plane, expand_to_children, parent_band, subbands


@dataclass(frozen=True)
class EncoderConfig:
    scheme: str = "B"
    drp: int = None
    num_passes: int = 10
    levels: int = 5
    bank: str = "haar"

    def __post_init__(self):
        scheme = str(self.scheme).upper()
        if scheme not in SCHEMES:
            raise InputError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        object.__setattr__(self, "scheme", scheme)
        if not isinstance(self.num_passes, (int, np.integer)) or not 1 <= self.num_passes <= 255:
            raise InputError(f"num_passes must be in 1..255, got {self.num_passes!r}")
        if not isinstance(self.levels, (int, np.integer)) or not 1 <= self.levels <= 15:
            raise InputError(f"levels must be in 1..15, got {self.levels!r}")
        get_bank(self.bank)
        if scheme == "C":
            if self.drp is None or not 1 <= self.drp <= self.num_passes:
                raise InputError(f"scheme C needs 1 <= drp <= num_passes ({self.num_passes}), got {self.drp!r}")
        else:
            # ignored outside scheme C
            object.__setattr__(self, "drp", None)

    @property
    def bank_id(self):
        return get_bank(self.bank).ident

    @property
    def label(self):
        return f"C{self.drp}" if self.scheme == "C" else self.scheme


def tracks_skips(scheme, drp, pass_index):
    """Whether zerotree descendants found in this pass join the permanent skip set."""
    return scheme == "A" or (scheme == "C" and pass_index >= drp)


def initial_threshold(pyramid):
    """Returns (T0, exponent) with T0 = 2**floor(log2 max|c|); (1, 0) for an all-zero pyramid."""
    plane = pyramid.plane if isinstance(pyramid, CoeffPyramid) else np.asarray(pyramid)
    if plane.size == 0:
        raise InputError("empty pyramid")
    peak = float(np.max(np.abs(plane)))
    if peak == 0.0:
        return 1.0, 0
    _, e = math.frexp(peak)
    return math.ldexp(1.0, e - 1), e - 1


@dataclass
class EncoderState:
    """Coder state shared by both ends; the decoder never sees magnitudes."""

    geometry: Geometry
    threshold: float
    pass_index: int = 0
    significant: np.ndarray = None
    skip: np.ndarray = None
    recon: np.ndarray = None
    # subordinate list, discovery order
    sub_index: np.ndarray = None
    sub_sign: np.ndarray = None
    sub_low: np.ndarray = None
    sub_width: np.ndarray = None
    sub_mag: np.ndarray = None

    def __post_init__(self):
        shape = self.geometry.shape
        if self.significant is None:
            self.significant = np.zeros(shape, dtype=bool)
        if self.skip is None:
            self.skip = np.zeros(shape, dtype=bool)
        if self.recon is None:
            self.recon = np.zeros(shape)
        if self.sub_index is None:
            self.sub_index = np.zeros(0, dtype=np.int64)
            self.sub_sign = np.zeros(0)
            self.sub_low = np.zeros(0)
            self.sub_width = np.zeros(0)
            self.sub_mag = np.zeros(0)

    @property
    def subordinate_list(self):
        """(flat plane index, magnitude) pairs; magnitudes are NaN on the decoder side."""
        return list(zip(self.sub_index.tolist(), self.sub_mag.tolist()))

    def copy(self):
        return EncoderState(
            self.geometry,
            self.threshold,
            self.pass_index,
            self.significant.copy(),
            self.skip.copy(),
            self.recon.copy(),
            self.sub_index.copy(),
            self.sub_sign.copy(),
            self.sub_low.copy(),
            self.sub_width.copy(),
            self.sub_mag.copy(),
        )


def _walk_dominant(state, track, band_symbols):
    """Shared dominant-pass walk.

    ``band_symbols(key, region, coded)`` returns the symbol array (uint8) for
    the coordinates flagged in the boolean mask ``coded``, in raster order.
    Returns (emitted symbols, visits, newly significant flat indices, signs).
    """
    geom = state.geometry
    levels = geom.levels
    # prune[x]: x's descendants are not scanned for the rest of this pass
    prune = np.zeros(geom.shape, dtype=bool)
    blocked_all = np.zeros(geom.shape, dtype=bool)
    flat = np.arange(geom.height * geom.width).reshape(geom.shape)
    emitted, new_idx, new_sign = [], [], []
    visits = 0
    for key in subbands(levels):
        region = geom.region(*key)
        pkey = parent_band(key[0], key[1], levels)
        if pkey is None:
            blocked = np.zeros(geom.band_shape(levels), dtype=bool)
        else:
            blocked = expand_to_children(prune[geom.region(*pkey)], key[0], key[1], levels)
        reached = ~blocked & ~state.skip[region]
        visits += int(reached.sum())
        coded = reached & ~state.significant[region]
        syms = band_symbols(key, region, coded)
        emitted.append(syms)
        band_sym = np.full(coded.shape, 255, dtype=np.uint8)
        band_sym[coded] = syms
        prune[region] = blocked | (band_sym == Symbol.ZTR)
        blocked_all[region] = blocked
        sig = (band_sym == Symbol.POS) | (band_sym == Symbol.NEG)
        if sig.any():
            new_idx.append(flat[region][sig])
            new_sign.append(np.where(band_sym[sig] == Symbol.POS, 1.0, -1.0))
    if track:
        state.skip |= blocked_all
    return _concat(emitted, np.uint8), visits, _concat(new_idx, np.int64), _concat(new_sign, np.float64)


def _concat(parts, dtype):
    return np.concatenate(parts).astype(dtype, copy=False) if parts else np.zeros(0, dtype=dtype)


def _admit(state, idx, sign, mag=None):
    t = state.threshold
    state.significant.ravel()[idx] = True
    state.recon.ravel()[idx] = sign * 1.5 * t
    state.sub_index = np.concatenate([state.sub_index, idx])
    state.sub_sign = np.concatenate([state.sub_sign, sign])
    state.sub_low = np.concatenate([state.sub_low, np.full(len(idx), t)])
    state.sub_width = np.concatenate([state.sub_width, np.full(len(idx), t)])
    state.sub_mag = np.concatenate([state.sub_mag, np.full(len(idx), np.nan) if mag is None else mag])


def dominant_pass(state, pyramid, scheme, cfg=None, desc_max=None):
    """Run one dominant pass at ``state.threshold``, mutating ``state``.

    ``cfg`` supplies the DRP for scheme C. Returns (symbols, newly significant
    flat indices, PassStats with the dominant-pass fields filled in).
    """
    drp = cfg.drp if cfg is not None else None
    if scheme == "C" and drp is None:
        raise InputError("scheme C needs a drp")
    if desc_max is None:
        desc_max = descendant_max_plane(pyramid)
    plane = pyramid.plane
    t = state.threshold
    state.pass_index += 1

    def band_symbols(key, region, coded):
        return classify_array(plane[region][coded], desc_max[region][coded], t)

    start = time.perf_counter()
    symbols, visits, idx, sign = _walk_dominant(state, tracks_skips(scheme, drp, state.pass_index), band_symbols)
    _admit(state, idx, sign, np.abs(plane.ravel()[idx]))
    wall = time.perf_counter() - start
    counts = np.bincount(symbols, minlength=4)
    stats = PassStats(
        pass_index=state.pass_index,
        threshold=t,
        coefficient_visits=visits,
        symbols={s.name: int(counts[s]) for s in Symbol},
        dominant_wall_time=wall,
    )
    return symbols, idx, stats


def _refine(state, bits):
    mid = state.sub_low + state.sub_width / 2
    state.sub_low = np.where(bits.astype(bool), mid, state.sub_low)
    state.sub_width = state.sub_width / 2
    state.recon.ravel()[state.sub_index] = state.sub_sign * (state.sub_low + state.sub_width / 2)


def subordinate_pass(state):
    """Emit one refinement bit per subordinate-list entry, halving each interval.

    A magnitude exactly at the interval midpoint goes to the upper half.
    """
    bits = (state.sub_mag >= state.sub_low + state.sub_width / 2).astype(np.uint8)
    _refine(state, bits)
    return bits


@dataclass
class RunStats:
    passes: list = field(default_factory=list)
    t0: float = 1.0
    # coefficient-domain reconstruction after each pass, when traced
    reconstructions: list = None

    @property
    def total_visits(self):
        return sum(p.coefficient_visits for p in self.passes)


def encode(image, cfg, trace=False):
    """Encode a GrayImage; returns (EzwBitstream, RunStats)."""
    if not isinstance(image, GrayImage):
        image = GrayImage(image)
    bank = get_bank(cfg.bank)
    pyramid = forward_dwt_2d(image, cfg.levels, bank)
    return encode_pyramid(pyramid, cfg, trace=trace)


def encode_pyramid(pyramid, cfg, trace=False):
    geom = Geometry.of(pyramid)
    t0, exp = initial_threshold(pyramid)
    stream = EzwBitstream(geom.width, geom.height, geom.levels, cfg.bank_id, cfg.scheme, cfg.drp or 0, exp)
    run = RunStats(t0=t0, reconstructions=[] if trace else None)
    state = EncoderState(geom, t0)
    desc_max = descendant_max_plane(pyramid)
    size = HEADER.size
    for k in range(cfg.num_passes):
        if state.threshold < 1:
            break
        symbols, _, stats = dominant_pass(state, pyramid, cfg.scheme, cfg, desc_max)
        bits = subordinate_pass(state)
        record = PassRecord(symbols, bits)
        stream.passes.append(record)
        size += record.nbytes()
        stats.subordinate_bits = len(bits)
        stats.cumulative_stream_bytes = size
        run.passes.append(stats)
        if trace:
            run.reconstructions.append(state.recon.copy())
        state.threshold /= 2
    return stream, run


@dataclass
class DecodeResult:
    image: GrayImage
    pyramid: CoeffPyramid
    passes: int
    # stream ended inside a pass record; only complete passes were used
    truncated: bool = False
    # coefficient planes after each pass, when requested
    planes: list = None
    bank: object = None

    def images(self):
        """Decoded image after each pass (needs ``per_pass=True``)."""
        if self.planes is None:
            raise InputError("decode was run without per_pass=True")
        return [inverse_dwt_2d(CoeffPyramid(p, self.pyramid.levels), self.bank) for p in self.planes]


def decode(stream, max_passes=None, per_pass=False):
    """Decode an EzwBitstream (or its serialized bytes) from its first passes."""
    if not isinstance(stream, EzwBitstream):
        stream = EzwBitstream.from_bytes(stream)
    bank = BANKS_BY_ID.get(stream.bank_id)
    if bank is None:
        raise FormatError(f"unknown filter bank id {stream.bank_id}")
    geom = Geometry(stream.height, stream.width, stream.levels)
    n = stream.num_passes
    if max_passes is not None:
        if max_passes < 0:
            raise InputError("max_passes must be >= 0")
        if max_passes > n:
            warnings.warn(f"requested {max_passes} passes but the stream holds {n}; decoding all")
        n = min(n, max_passes)
    if stream.truncated:
        warnings.warn(f"stream truncated inside pass {stream.num_passes + 1}; decoded {n} complete passes")
    state = EncoderState(geom, math.ldexp(1.0, stream.t0_exponent))
    planes = [] if per_pass else None
    for k in range(n):
        record = stream.passes[k]
        _decode_pass(state, record, stream.scheme, stream.drp)
        if per_pass:
            planes.append(state.recon.copy())
        state.threshold /= 2
    pyramid = CoeffPyramid(state.recon, geom.levels)
    return DecodeResult(inverse_dwt_2d(pyramid, bank), pyramid, n, stream.truncated, planes, bank)


def _decode_pass(state, record, scheme, drp):
    symbols = record.symbols
    pos = 0
    state.pass_index += 1

    def band_symbols(key, region, coded):
        nonlocal pos
        need = int(coded.sum())
        if pos + need > len(symbols):
            raise FormatError(f"pass {state.pass_index}: dominant symbols exhausted")
        out = symbols[pos : pos + need].astype(np.uint8)
        pos += need
        return out

    _, _, idx, sign = _walk_dominant(state, tracks_skips(scheme, drp, state.pass_index), band_symbols)
    if pos != len(symbols):
        raise FormatError(f"pass {state.pass_index}: {len(symbols) - pos} unused dominant symbols")
    _admit(state, idx, sign)
    if len(record.bits) != len(state.sub_index):
        raise FormatError(
            f"pass {state.pass_index}: {len(record.bits)} refinement bits for {len(state.sub_index)} coefficients"
        )
    _refine(state, record.bits)
