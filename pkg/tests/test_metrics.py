import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ezw import EncoderConfig, GrayImage, InputError, compression_ratio, encode, psnr
from ezw.metrics import CSV_FIELDS, PassStats, csv_row, mse

from conftest import smooth_image


def test_identical_images_are_infinite():
    img = GrayImage(np.full((4, 4), 9, np.uint8))
    assert psnr(img, img) == math.inf


def test_off_by_one_everywhere():
    a = GrayImage(np.full((8, 8), 100, np.uint8))
    b = GrayImage(np.full((8, 8), 101, np.uint8))
    assert mse(a, b) == 1.0
    assert psnr(a, b) == pytest.approx(10 * math.log10(65025))
    assert psnr(a, b) == pytest.approx(48.1308, abs=5e-5)


def test_black_versus_white():
    assert psnr(GrayImage(np.zeros((3, 3), np.uint8)), GrayImage(np.full((3, 3), 255, np.uint8))) == 0.0


def test_dimension_mismatch():
    with pytest.raises(InputError):
        psnr(GrayImage(np.zeros((2, 2), np.uint8)), GrayImage(np.zeros((2, 3), np.uint8)))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_psnr_symmetric_and_decreasing_in_mse(seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 256, (6, 6)).astype(np.uint8)
    b = rng.integers(0, 256, (6, 6)).astype(np.uint8)
    assert psnr(a, b) == psnr(b, a)
    c = np.where(a == b, a, b)
    farther = np.clip(b.astype(int) + np.sign(b.astype(int) - a.astype(int)) * 5, 0, 255).astype(np.uint8)
    if mse(a, farther) > mse(a, c):
        assert psnr(a, farther) < psnr(a, c)


def test_compression_ratio():
    assert compression_ratio(262144, 65536) == 4.0
    assert compression_ratio(1000, 1000) == 1.0
    with pytest.raises(InputError):
        compression_ratio(10, 0)


def test_ratio_a_at_least_b(rng):
    img = GrayImage(smooth_image(rng, 64, 64))
    sizes = {}
    for scheme in "AB":
        stream, _ = encode(img, EncoderConfig(scheme, None, 10, 4))
        sizes[scheme] = len(stream.to_bytes())
    assert compression_ratio(64 * 64, sizes["A"]) >= compression_ratio(64 * 64, sizes["B"])


def test_pass_stats_invariants(rng):
    img = GrayImage(smooth_image(rng, 32, 32))
    runs = [encode(img, EncoderConfig("C", 3, 8, 3))[1] for _ in range(2)]
    prev = 0
    for p in runs[0].passes:
        assert p.coefficient_visits >= p.symbol_total
        assert p.cumulative_stream_bytes >= prev
        prev = p.cumulative_stream_bytes
    strip = lambda r: [(p.coefficient_visits, p.symbols, p.subordinate_bits, p.cumulative_stream_bytes) for p in r.passes]
    assert strip(runs[0]) == strip(runs[1])


def test_csv_row_schema():
    stats = PassStats(3, 64.0, 100, {"ZTR": 5, "IZ": 4, "POS": 2, "NEG": 1}, 0.5, 7, 99)
    row = csv_row("C", 4, stats, math.inf)
    assert len(row) == len(CSV_FIELDS)
    assert dict(zip(CSV_FIELDS, row)) == {
        "scheme": "C",
        "drp": "4",
        "pass": "3",
        "threshold": "64.0",
        "visits": "100",
        "ztr": "5",
        "iz": "4",
        "pos": "2",
        "neg": "1",
        "sub_bits": "7",
        "bytes_cum": "99",
        "wall_s": "0.500000",
        "psnr_db": "inf",
    }
    assert csv_row("A", None, stats, 30.0)[1] == ""
