"""Multilevel 2-D orthogonal wavelet transform with periodic extension.

Analysis correlates a signal with the low/high-pass taps and keeps the even
samples; synthesis zero-stuffs each branch and circularly convolves it with
the same taps. For orthonormal banks the two are exact transposes, so the
transform preserves energy and inverts perfectly.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import InputError
from .imageio import GrayImage

CENTER = 128.0

ORIENTATIONS = ("LL", "HL", "LH", "HH")


@dataclass(frozen=True, eq=False)
class FilterBank:
    name: str
    ident: int
    h: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=np.float64)
        if h.ndim != 1 or len(h) < 2 or len(h) % 2:
            raise InputError("filter length must be even and at least 2")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @property
    def g(self):
        """High-pass taps from the quadrature-mirror relation g[k] = (-1)^k h[N-1-k]."""
        n = len(self.h)
        g = np.array([(-1) ** k * self.h[n - 1 - k] for k in range(n)])
        g.setflags(write=False)
        return g

    def __len__(self):
        return len(self.h)


_s3 = math.sqrt(3.0)
HAAR = FilterBank("haar", 0, [1 / math.sqrt(2), 1 / math.sqrt(2)])
DAUB4 = FilterBank(
    "daub4",
    1,
    np.array([1 + _s3, 3 + _s3, 3 - _s3, 1 - _s3]) / (4 * math.sqrt(2)),
)
BANKS = {HAAR.name: HAAR, DAUB4.name: DAUB4}
BANKS_BY_ID = {HAAR.ident: HAAR, DAUB4.ident: DAUB4}


def get_bank(bank):
    if isinstance(bank, FilterBank):
        return bank
    try:
        return BANKS[str(bank).lower()]
    except KeyError:
        raise InputError(f"unknown filter bank {bank!r}; choose from {sorted(BANKS)}") from None


@dataclass(eq=False)
class CoeffPyramid:
    """Wavelet coefficients in the nested (Mallat) layout.

    LL of the coarsest level sits in the top-left corner; at level ``n`` the
    HL band is to the right of the level's low-pass region, LH below it and
    HH diagonal. ``plane`` has shape (height, width).
    """

    plane: np.ndarray
    levels: int

    def __post_init__(self):
        self.plane = np.asarray(self.plane, dtype=np.float64)
        check_geometry(self.plane.shape, self.levels)
        if not np.all(np.isfinite(self.plane)):
            raise InputError("pyramid coefficients must be finite")

    @property
    def height(self):
        return self.plane.shape[0]

    @property
    def width(self):
        return self.plane.shape[1]

    @property
    def shape(self):
        return self.plane.shape

    def region(self, level, orient):
        return subband_region(self.plane.shape, self.levels, level, orient)

    def band(self, level, orient):
        return self.plane[self.region(level, orient)]

    def subbands(self):
        return subbands(self.levels)

    def energy(self):
        return float(np.sum(self.plane * self.plane))


def check_geometry(shape, levels):
    if len(shape) != 2:
        raise InputError(f"expected 2-D data, got shape {shape}")
    if not isinstance(levels, (int, np.integer)) or levels < 1:
        raise InputError(f"levels must be an integer >= 1, got {levels!r}")
    h, w = shape
    step = 1 << int(levels)
    if h < step or w < step or h % step or w % step:
        raise InputError(f"dimensions {w}x{h} are not divisible by 2^{levels}")


def subbands(levels):
    """(level, orientation) pairs, coarse to fine: LL_L, HL_L, LH_L, HH_L, HL_{L-1}, ..."""
    out = [(levels, "LL")]
    for n in range(levels, 0, -1):
        out.extend((n, o) for o in ORIENTATIONS[1:])
    return out


def subband_region(shape, levels, level, orient):
    """Slices of the plane covered by subband ``orient`` at ``level``."""
    h, w = shape
    if orient not in ORIENTATIONS:
        raise InputError(f"unknown orientation {orient!r}")
    if orient == "LL" and level != levels or not 1 <= level <= levels:
        raise InputError(f"no subband {orient}_{level} in a {levels}-level pyramid")
    bh, bw = h >> level, w >> level
    r0 = bh if orient in ("LH", "HH") else 0
    c0 = bw if orient in ("HL", "HH") else 0
    return slice(r0, r0 + bh), slice(c0, c0 + bw)


def dyadic_resample(signal, direction):
    """Keep even-indexed samples (``"down"``) or insert a zero after each sample (``"up"``)."""
    x = np.asarray(signal)
    if x.ndim != 1:
        raise InputError("dyadic_resample works on 1-D sequences")
    if direction == "down":
        if len(x) % 2:
            raise InputError(f"cannot downsample odd length {len(x)}")
        return x[::2].copy()
    if direction == "up":
        out = np.zeros(2 * len(x), dtype=np.result_type(x, np.float64))
        out[::2] = x
        return out
    raise InputError(f"direction must be 'down' or 'up', got {direction!r}")


def _analyze(x, taps, axis):
    # sum_k taps[k] * x[(2n + k) mod N] along axis
    n = x.shape[axis]
    out = None
    for k, t in enumerate(taps):
        idx = (np.arange(0, n, 2) + k) % n
        term = t * np.take(x, idx, axis=axis)
        out = term if out is None else out + term
    return out


def _synthesize(lo, hi, h, g, axis):
    # out[m] = sum_n lo[n] h[(m - 2n) mod N] + hi[n] g[(m - 2n) mod N]
    half = lo.shape[axis]
    n = 2 * half
    lo = np.moveaxis(lo, axis, 0)
    hi = np.moveaxis(hi, axis, 0)
    out = np.zeros((n,) + lo.shape[1:])
    base = 2 * np.arange(half)
    for k in range(len(h)):
        # distinct within one k, so fancy-index accumulation is safe
        out[(base + k) % n] += h[k] * lo + g[k] * hi
    return np.moveaxis(out, 0, axis)


def analysis_step(block, bank):
    """One decomposition level: returns (LL, HL, LH, HH) from a real 2-D block."""
    h, g = bank.h, bank.g
    lo = _analyze(block, h, axis=1)  # low-pass along rows
    hi = _analyze(block, g, axis=1)
    ll = _analyze(lo, h, axis=0)
    lh = _analyze(lo, g, axis=0)  # high-pass over columns
    hl = _analyze(hi, h, axis=0)  # high-pass over rows
    hh = _analyze(hi, g, axis=0)
    return ll, hl, lh, hh


def synthesis_step(ll, hl, lh, hh, bank):
    h, g = bank.h, bank.g
    lo = _synthesize(ll, lh, h, g, axis=0)
    hi = _synthesize(hl, hh, h, g, axis=0)
    return _synthesize(lo, hi, h, g, axis=1)


def forward_dwt_real(data, levels, bank=HAAR):
    """Transform an already-real 2-D array (no centering)."""
    bank = get_bank(bank)
    plane = np.array(data, dtype=np.float64, copy=True)
    check_geometry(plane.shape, levels)
    h, w = plane.shape
    for n in range(1, levels + 1):
        bh, bw = h >> n, w >> n
        ll, hl, lh, hh = analysis_step(plane[: 2 * bh, : 2 * bw], bank)
        plane[:bh, :bw] = ll
        plane[:bh, bw : 2 * bw] = hl
        plane[bh : 2 * bh, :bw] = lh
        plane[bh : 2 * bh, bw : 2 * bw] = hh
    return CoeffPyramid(plane, levels)


def inverse_dwt_real(pyramid, bank=HAAR):
    bank = get_bank(bank)
    plane = np.array(pyramid.plane, dtype=np.float64, copy=True)
    h, w = plane.shape
    for n in range(pyramid.levels, 0, -1):
        bh, bw = h >> n, w >> n
        plane[: 2 * bh, : 2 * bw] = synthesis_step(
            plane[:bh, :bw],
            plane[:bh, bw : 2 * bw],
            plane[bh : 2 * bh, :bw],
            plane[bh : 2 * bh, bw : 2 * bw],
            bank,
        )
    return plane


def forward_dwt_2d(image, levels, bank=HAAR):
    """Center the samples on zero and decompose ``levels`` times."""
    if not isinstance(image, GrayImage):
        image = GrayImage(image)
    check_geometry(image.pixels.shape, levels)
    return forward_dwt_real(image.pixels.astype(np.float64) - CENTER, levels, bank)


def to_samples(real):
    """Round half away from zero and clamp to 8 bits."""
    r = np.sign(real) * np.floor(np.abs(real) + 0.5)
    return np.clip(r, 0, 255).astype(np.uint8)


def inverse_dwt_2d(pyramid, bank=HAAR):
    if not isinstance(pyramid, CoeffPyramid):
        raise InputError("inverse_dwt_2d expects a CoeffPyramid")
    check_geometry(pyramid.plane.shape, pyramid.levels)
    return GrayImage(to_samples(inverse_dwt_real(pyramid, bank) + CENTER))
