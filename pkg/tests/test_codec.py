import json
import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ezw import CoeffPyramid, EncoderConfig, GrayImage, InputError, decode, encode, psnr
from ezw.bitstream import HEADER, EzwBitstream
from ezw.codec import (
    EncoderState,
    dominant_pass,
    encode_pyramid,
    initial_threshold,
    subordinate_pass,
)
from ezw.zerotree import Geometry, Symbol

import oracles
from conftest import DATA, smooth_image


def load_fixture():
    with open(os.path.join(DATA, "shapiro_8x8.json")) as f:
        return json.load(f)


def payload(stream):
    return stream.to_bytes()[HEADER.size :]


def run(img, scheme, drp=None, passes=10, levels=3, bank="haar", trace=False):
    return encode(img, EncoderConfig(scheme, drp, passes, levels, bank), trace=trace)


# initial threshold


@pytest.mark.parametrize("peak,want", [(57.0, 32.0), (64.0, 64.0), (1.0, 1.0), (0.75, 0.5), (1023.9, 512.0)])
def test_initial_threshold(peak, want):
    plane = np.zeros((4, 4))
    plane[2, 3] = -peak
    t0, exp = initial_threshold(CoeffPyramid(plane, 1))
    assert t0 == want and 2.0**exp == want


def test_all_zero_pyramid():
    pyr = CoeffPyramid(np.zeros((8, 8)), 3)
    assert initial_threshold(pyr) == (1.0, 0)
    stream, stats = encode_pyramid(pyr, EncoderConfig("B", None, 10, 3))
    # T0 = 1, so the second pass would fall below 1
    assert stream.num_passes == 1
    assert stream.passes[0].symbols.tolist() == [Symbol.ZTR]
    assert len(stream.passes[0].bits) == 0
    assert np.all(decode(stream).image.pixels == 128)


# subordinate pass


def state_with(mags, t):
    st_ = EncoderState(Geometry(2, 2, 1), t)
    st_.sub_index = np.arange(len(mags))
    st_.sub_sign = np.ones(len(mags))
    st_.sub_low = np.full(len(mags), float(t))
    st_.sub_width = np.full(len(mags), float(t))
    st_.sub_mag = np.asarray(mags, dtype=float)
    return st_


def test_refinement_of_forty_at_32():
    s = state_with([40.0], 32)
    assert subordinate_pass(s).tolist() == [0]
    assert s.recon.ravel()[0] == 40.0
    assert s.sub_low[0] == 32 and s.sub_width[0] == 16
    # interval-halving by hand: [32,48) -> 40 >= 40 -> [40,48), estimate 44
    assert subordinate_pass(s).tolist() == [1]
    assert s.recon.ravel()[0] == 44.0


def test_empty_subordinate_list():
    assert len(subordinate_pass(EncoderState(Geometry(2, 2, 1), 8.0))) == 0


def test_midpoint_tie_goes_up():
    s = state_with([48.0], 32)
    assert subordinate_pass(s).tolist() == [1]
    assert s.recon.ravel()[0] == 56.0


# dominant pass


def test_golden_fixture_scheme_b_pass_one():
    fx = load_fixture()
    plane = np.array(fx["coefficients"], dtype=float)
    pyr = CoeffPyramid(plane, fx["levels"])
    t0, _ = initial_threshold(pyr)
    assert t0 == fx["threshold"]
    state = EncoderState(Geometry.of(pyr), t0)
    symbols, newly, stats = dominant_pass(state, pyr, "B")
    got = [Symbol(s).name for s in symbols]
    assert got == fx["pass1_symbols"]
    T0, ref = oracles.reference_encode(plane, fx["levels"], "B", None, 1)
    assert ref[0][0] == fx["pass1_symbols"]
    assert sorted(plane.ravel()[newly].tolist()) == [-34.0, 47.0, 49.0, 63.0]
    assert stats.symbol_total == len(fx["pass1_symbols"])
    assert stats.coefficient_visits == 20


def test_significant_coefficients_are_silent_later():
    fx = load_fixture()
    pyr = CoeffPyramid(np.array(fx["coefficients"], dtype=float), 3)
    state = EncoderState(Geometry.of(pyr), 32.0)
    _, first, _ = dominant_pass(state, pyr, "B")
    subordinate_pass(state)
    state.threshold = 16.0
    second, _, stats = dominant_pass(state, pyr, "B")
    assert len(second) == stats.coefficient_visits - len(first)
    assert np.all(state.recon.ravel()[first] != 0)


@pytest.mark.parametrize("scheme,drp", [("A", None), ("B", None), ("C", 1), ("C", 2), ("C", 4)])
@pytest.mark.parametrize("bank", ["haar", "daub4"])
def test_matches_scalar_reference_encoder(scheme, drp, bank, rng):
    for _ in range(3):
        img = GrayImage(smooth_image(rng, 16, 32, sigma=1.5))
        stream, stats = run(img, scheme, drp, passes=8, levels=3, bank=bank, trace=True)
        from ezw.wavelet import forward_dwt_2d

        plane = forward_dwt_2d(img, 3, bank).plane
        t0, ref = oracles.reference_encode(plane, 3, scheme, drp, 8)
        assert stats.t0 == t0
        assert len(ref) == stream.num_passes
        for record, recon, (syms, bits, ref_recon) in zip(stream.passes, stats.reconstructions, ref):
            assert [Symbol(s).name for s in record.symbols] == syms
            assert record.bits.tolist() == bits
            assert np.array_equal(recon, ref_recon)


# scheme relations


def test_scheme_c_degenerate_cases(rng):
    img = GrayImage(smooth_image(rng, 32, 32))
    a, _ = run(img, "A")
    b, _ = run(img, "B")
    assert payload(run(img, "C", 10)[0]) == payload(b)
    assert payload(run(img, "C", 1)[0]) == payload(a)


def test_c_equals_b_up_to_the_drp(camera):
    b, bs = run(camera, "B", levels=5)
    c, cs = run(camera, "C", 3, levels=5)
    for k in range(3):
        assert np.array_equal(b.passes[k].symbols, c.passes[k].symbols)
        assert bs.passes[k].coefficient_visits == cs.passes[k].coefficient_visits
    # skip set from pass 3 only takes effect from pass 4
    assert bs.passes[3].coefficient_visits > cs.passes[3].coefficient_visits


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_per_pass_ordering(seed, drp):
    img = GrayImage(smooth_image(np.random.default_rng(seed), 32, 32))
    runs = {k: run(img, *k, passes=8) for k in [("A", None), ("C", drp), ("B", None)]}
    (sa, ra), (sc, rc), (sb, rb) = runs[("A", None)], runs[("C", drp)], runs[("B", None)]
    for pa, pc, pb in zip(ra.passes, rc.passes, rb.passes):
        assert pa.coefficient_visits <= pc.coefficient_visits <= pb.coefficient_visits
        assert pa.symbol_total <= pc.symbol_total <= pb.symbol_total
        assert pa.cumulative_stream_bytes <= pc.cumulative_stream_bytes <= pb.cumulative_stream_bytes
    for k in range(1, sb.num_passes + 1):
        pa, pc, pb = (psnr(img, decode(s, max_passes=k).image) for s in (sa, sc, sb))
        assert pa <= pc + 0.01 <= pb + 0.02


def test_skip_and_significance_are_disjoint(camera):
    from ezw.codec import descendant_max_plane
    from ezw.wavelet import forward_dwt_2d

    pyr = forward_dwt_2d(camera, 5)
    state = EncoderState(Geometry.of(pyr), initial_threshold(pyr)[0])
    dmax = descendant_max_plane(pyr)
    for _ in range(10):
        dominant_pass(state, pyr, "A", desc_max=dmax)
        subordinate_pass(state)
        assert not np.any(state.skip & state.significant)
        state.threshold /= 2


# encode / decode


def test_determinism(rng):
    img = GrayImage(smooth_image(rng, 32, 64))
    for scheme, drp in [("A", None), ("B", None), ("C", 2)]:
        s1, r1 = run(img, scheme, drp)
        s2, r2 = run(img, scheme, drp)
        assert s1.to_bytes() == s2.to_bytes()
        assert [p.coefficient_visits for p in r1.passes] == [p.coefficient_visits for p in r2.passes]


@pytest.mark.parametrize("scheme,drp", [("A", None), ("B", None), ("C", 2)])
def test_constant_image(scheme, drp):
    img = GrayImage(np.full((16, 16), 201, np.uint8))
    stream, stats = run(img, scheme, drp, passes=20, levels=2)
    first = stream.passes[0]
    # LL coefficients found at pass 1; every detail root is a zerotree
    assert stats.passes[0].symbols["POS"] == 16
    assert stats.passes[0].symbols["ZTR"] == 48
    for rec in stream.passes[1:]:
        assert set(rec.symbols.tolist()) <= {Symbol.ZTR}
    assert decode(stream).image == img
    assert len(first.bits) == 16


@pytest.mark.parametrize("bank", ["haar", "daub4"])
def test_decoder_mirrors_encoder(bank, rng):
    img = GrayImage(smooth_image(rng, 32, 32))
    for scheme, drp in [("A", None), ("B", None), ("C", 3)]:
        stream, stats = run(img, scheme, drp, bank=bank, trace=True)
        res = decode(stream.to_bytes(), per_pass=True)
        assert len(res.planes) == len(stats.reconstructions)
        for dec, enc in zip(res.planes, stats.reconstructions):
            assert np.array_equal(dec, enc)
        for k in range(1, stream.num_passes + 1):
            part = decode(stream, max_passes=k)
            assert np.array_equal(part.pyramid.plane, stats.reconstructions[k - 1])


def test_converged_decode_is_near_lossless(camera):
    stream, stats = run(camera, "B", passes=30, levels=5)
    # runs until the threshold reaches 1
    assert stats.passes[-1].threshold == 1.0
    assert psnr(camera, decode(stream).image) >= 45


@pytest.mark.parametrize("bank", ["haar", "daub4"])
def test_random_images_converge(bank, rng):
    for _ in range(3):
        img = GrayImage(rng.integers(0, 256, (16, 16)).astype(np.uint8))
        stream, _ = run(img, "B", passes=40, levels=2, bank=bank)
        assert psnr(img, decode(stream).image) >= 45


def test_refinement_error_bound_halves(camera):
    from ezw.wavelet import forward_dwt_2d

    plane = forward_dwt_2d(camera, 5).plane
    for scheme, drp in [("A", None), ("B", None), ("C", 4)]:
        stream, stats = run(camera, scheme, drp, levels=5, trace=True)
        prev = None
        for p, recon in zip(stats.passes, stats.reconstructions):
            found = recon != 0
            # every significant coefficient lies within half the current interval width
            assert np.all(np.abs(plane - recon)[found] <= p.threshold / 2)
            err = np.sum((plane - recon) ** 2)
            assert prev is None or err <= prev
            prev = err


def test_stops_when_threshold_falls_below_one():
    plane = np.zeros((4, 4))
    plane[0, 0] = 5.0
    stream, stats = encode_pyramid(CoeffPyramid(plane, 2), EncoderConfig("B", None, 10, 2))
    assert [p.threshold for p in stats.passes] == [4.0, 2.0, 1.0]
    assert EzwBitstream.from_bytes(stream.to_bytes()).num_passes == 3


def test_config_validation():
    with pytest.raises(InputError):
        EncoderConfig("C", None, 10)
    with pytest.raises(InputError):
        EncoderConfig("C", 11, 10)
    with pytest.raises(InputError):
        EncoderConfig("B", None, 0)
    with pytest.raises(InputError):
        EncoderConfig("D")
    with pytest.raises(InputError):
        EncoderConfig("A", bank="db8")
    assert EncoderConfig("a", 4).drp is None
    with pytest.raises(InputError):
        encode(GrayImage(np.zeros((12, 12), np.uint8)), EncoderConfig("B", levels=3))


def test_size_a_not_larger_than_b(rng):
    img = GrayImage(smooth_image(rng, 64, 64))
    a, ra = run(img, "A", levels=4)
    b, rb = run(img, "B", levels=4)
    assert sum(p.symbol_total for p in ra.passes) <= sum(p.symbol_total for p in rb.passes)
    assert len(a.to_bytes()) <= len(b.to_bytes())
