"""Parent/descendant structure, scan order and symbol classification.

Coordinates are plane positions in the nested pyramid layout. A detail
coefficient at level n > 1 has four children at level n - 1 in the same
orientation; each coarsest LL coefficient parents the co-located coefficient
in HL_L, LH_L and HH_L. Level-1 detail coefficients are leaves.
"""

from dataclasses import dataclass
import enum

import numpy as np

from .errors import InputError
from .wavelet import check_geometry, subband_region, subbands


class Symbol(enum.IntEnum):
    ZTR = 0
    IZ = 1
    POS = 2
    NEG = 3


@dataclass(frozen=True)
class Geometry:
    height: int
    width: int
    levels: int

    def __post_init__(self):
        check_geometry((self.height, self.width), self.levels)

    @classmethod
    def of(cls, pyramid):
        if isinstance(pyramid, Geometry):
            return pyramid
        return cls(pyramid.height, pyramid.width, pyramid.levels)

    @property
    def shape(self):
        return (self.height, self.width)

    def region(self, level, orient):
        return subband_region(self.shape, self.levels, level, orient)

    def band_shape(self, level):
        return (self.height >> level, self.width >> level)

    def band_of(self, row, col):
        """(level, orientation) of the subband containing plane position (row, col)."""
        if not (0 <= row < self.height and 0 <= col < self.width):
            raise InputError(f"coordinate ({row}, {col}) outside {self.width}x{self.height} plane")
        for level in range(1, self.levels + 1):
            bh, bw = self.band_shape(level)
            low_r, low_c = row < bh, col < bw
            if low_r and low_c:
                continue
            if low_r:
                return level, "HL"
            if low_c:
                return level, "LH"
            return level, "HH"
        return self.levels, "LL"


@dataclass(frozen=True)
class Coord:
    row: int
    col: int
    level: int
    orient: str

    @classmethod
    def at(cls, row, col, geometry):
        level, orient = Geometry.of(geometry).band_of(row, col)
        return cls(row, col, level, orient)


def _check(c, geom):
    level, orient = geom.band_of(c.row, c.col)
    if (level, orient) != (c.level, c.orient):
        raise InputError(f"{c} does not lie in subband {c.orient}_{c.level}")


def children(c, geometry):
    geom = Geometry.of(geometry)
    _check(c, geom)
    if c.orient == "LL":
        bh, bw = geom.band_shape(geom.levels)
        return [
            Coord(c.row, c.col + bw, geom.levels, "HL"),
            Coord(c.row + bh, c.col, geom.levels, "LH"),
            Coord(c.row + bh, c.col + bw, geom.levels, "HH"),
        ]
    if c.level == 1:
        return []
    rs, cs = geom.region(c.level, c.orient)
    fine_r, fine_c = geom.region(c.level - 1, c.orient)
    r = 2 * (c.row - rs.start) + fine_r.start
    q = 2 * (c.col - cs.start) + fine_c.start
    lvl = c.level - 1
    return [Coord(r + i, q + j, lvl, c.orient) for i in (0, 1) for j in (0, 1)]


def descendants(c, geometry):
    out = []
    stack = list(children(c, geometry))
    while stack:
        d = stack.pop()
        out.append(d)
        stack.extend(children(d, geometry))
    return out


def descendant_max_abs(c, pyramid):
    """Largest |coefficient| strictly below ``c`` in its tree (0 for leaves)."""
    plane = pyramid.plane
    best = 0.0
    for d in descendants(c, pyramid):
        best = max(best, abs(float(plane[d.row, d.col])))
    return best


def classify(c, threshold, pyramid, desc_max=None):
    if not threshold > 0:
        raise InputError(f"threshold must be positive, got {threshold}")
    value = float(pyramid.plane[c.row, c.col])
    if abs(value) >= threshold:
        return Symbol.POS if value > 0 else Symbol.NEG
    if desc_max is None:
        desc_max = descendant_max_abs(c, pyramid)
    return Symbol.ZTR if desc_max < threshold else Symbol.IZ


def scan_order(geometry):
    """Subbands coarse to fine (LL first, then HL, LH, HH per level), raster within each."""
    geom = Geometry.of(geometry)
    order = []
    for level, orient in subbands(geom.levels):
        rs, cs = geom.region(level, orient)
        order.extend(Coord(r, q, level, orient) for r in range(rs.start, rs.stop) for q in range(cs.start, cs.stop))
    return order


# Array helpers used by the codec. Everything below works on whole subbands.


def parent_band(level, orient, levels):
    """Subband holding the parents of ``orient``_``level``, or None for LL."""
    if orient == "LL":
        return None
    if level == levels:
        return (levels, "LL")
    return (level + 1, orient)


def expand_to_children(parent_values, level, orient, levels):
    """Broadcast a per-parent array onto the child subband's grid."""
    if level == levels:
        return parent_values
    return np.repeat(np.repeat(parent_values, 2, axis=0), 2, axis=1)


def descendant_max_plane(pyramid):
    """Per-coefficient maximum |descendant| for the whole plane, built fine to coarse."""
    geom = Geometry.of(pyramid)
    mag = np.abs(pyramid.plane)
    out = np.zeros_like(mag)
    for level in range(1, geom.levels):
        for orient in ("HL", "LH", "HH"):
            child = geom.region(level, orient)
            cmax = np.maximum(mag[child], out[child])
            h, w = cmax.shape
            pooled = cmax.reshape(h // 2, 2, w // 2, 2).max(axis=(1, 3))
            out[geom.region(level + 1, orient)] = pooled
    ll = geom.region(geom.levels, "LL")
    acc = np.zeros(geom.band_shape(geom.levels))
    for orient in ("HL", "LH", "HH"):
        r = geom.region(geom.levels, orient)
        acc = np.maximum(acc, np.maximum(mag[r], out[r]))
    out[ll] = acc
    return out


def classify_array(values, desc_max, threshold):
    """Vectorized ``classify`` over matching arrays of coefficients and descendant maxima."""
    out = np.where(desc_max < threshold, Symbol.ZTR, Symbol.IZ).astype(np.uint8)
    out[values >= threshold] = Symbol.POS
    out[values <= -threshold] = Symbol.NEG
    return out
