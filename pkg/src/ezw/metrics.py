"""Image quality, compression ratio and per-pass cost records."""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import InputError

PEAK = 255.0

CSV_FIELDS = (
    "scheme",
    "drp",
    "pass",
    "threshold",
    "visits",
    "ztr",
    "iz",
    "pos",
    "neg",
    "sub_bits",
    "bytes_cum",
    "wall_s",
    "psnr_db",
)


@dataclass
class PassStats:
    pass_index: int
    threshold: float
    coefficient_visits: int
    symbols: dict = field(default_factory=dict)
    dominant_wall_time: float = 0.0
    subordinate_bits: int = 0
    cumulative_stream_bytes: int = 0

    @property
    def symbol_total(self):
        return sum(self.symbols.values())


def _pixels(image):
    return np.asarray(getattr(image, "pixels", image), dtype=np.float64)


def mse(reference, test):
    a, b = _pixels(reference), _pixels(test)
    if a.shape != b.shape:
        raise InputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def psnr(reference, test):
    """Peak signal-to-noise ratio in dB for 8-bit images; ``math.inf`` when identical."""
    err = mse(reference, test)
    if err == 0:
        return math.inf
    return 10 * math.log10(PEAK * PEAK / err)


def compression_ratio(original_bytes, stream_bytes):
    if stream_bytes <= 0:
        raise InputError("stream size must be positive")
    return original_bytes / stream_bytes


def format_psnr(value):
    return "inf" if math.isinf(value) else f"{value:.4f}"


def csv_row(label_scheme, drp, stats, psnr_db):
    """One row of the benchmark CSV, as strings in CSV_FIELDS order."""
    s = stats.symbols
    return [
        label_scheme,
        "" if drp is None else str(drp),
        str(stats.pass_index),
        repr(float(stats.threshold)),
        str(stats.coefficient_visits),
        str(s.get("ZTR", 0)),
        str(s.get("IZ", 0)),
        str(s.get("POS", 0)),
        str(s.get("NEG", 0)),
        str(stats.subordinate_bits),
        str(stats.cumulative_stream_bytes),
        f"{stats.dominant_wall_time:.6f}",
        format_psnr(psnr_db),
    ]
