import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pitesg.transforms import (N_BITS, N_LEVELS, VIX_CODEC, BinaryCodec, MinMaxScaler, TransformError,
                               binarize, bits_to_int, debinarize, discretize_vix, int_to_bits, quantize,
                               scale, unscale, vix_filter)

CODEC = BinaryCodec(-0.1, 0.1)


def test_boundaries():
    assert binarize(CODEC, -0.1).tolist() == [0] * 16
    assert binarize(CODEC, 0.1).tolist() == [1] * 16
    assert bits_to_int(binarize(CODEC, 0.1)) == 65535


def test_midpoint_is_32767():
    assert int(bits_to_int(binarize(CODEC, 0.0))) == 32767
    assert int(quantize(BinaryCodec(0.0, 1.0), 0.5)) == 32767


def test_debinarize_extremes():
    assert debinarize(CODEC, np.zeros(16, dtype=int)) == -0.1
    assert debinarize(CODEC, np.ones(16, dtype=int)) == pytest.approx(0.1, abs=1e-17)


def test_out_of_range_raises():
    with pytest.raises(TransformError):
        binarize(CODEC, 0.1000001)
    with pytest.raises(TransformError):
        binarize(CODEC, np.nan)


def test_wrong_width():
    with pytest.raises(TransformError):
        debinarize(CODEC, np.zeros(15, dtype=int))
    with pytest.raises(TransformError):
        bits_to_int(np.full(16, 2))


def test_grid_roundtrip_exact():
    k = np.arange(N_LEVELS + 1)
    codec = BinaryCodec.fit([-0.0731, 0.0912])
    grid = codec.x_min + k * (codec.x_max - codec.x_min) / N_LEVELS
    assert np.array_equal(bits_to_int(binarize(codec, grid)), k)
    assert np.array_equal(debinarize(codec, binarize(codec, grid)), grid)


def test_fit_margin():
    c = BinaryCodec.fit([0.0, 1.0])
    assert c.x_min == pytest.approx(-1e-6)
    assert c.x_max == pytest.approx(1 + 1e-6)
    assert BinaryCodec.from_dict(c.to_dict()) == c


@settings(max_examples=200, deadline=None)
@given(st.floats(-0.1, 0.1), st.floats(-0.1, 0.1))
def test_property_monotone_and_error(x, y):
    a, b = sorted((x, y))
    qa, qb = quantize(CODEC, a), quantize(CODEC, b)
    assert qa <= qb
    err = abs(debinarize(CODEC, binarize(CODEC, x)) - x)
    assert err <= CODEC.step * (1 + 1e-9)


def test_int_bits_roundtrip():
    k = np.arange(0, 65536, 37)
    assert np.array_equal(bits_to_int(int_to_bits(k)), k)
    assert int_to_bits(1).tolist() == [0] * 15 + [1]


def test_vix_filter_examples():
    assert vix_filter(0.01, 20, 40) == pytest.approx(0.02)
    assert vix_filter(-0.03, 30, 10) == pytest.approx(-0.01)
    r = np.array([0.01, -0.02, 0.003])
    v = np.array([15.0, 15.0, 15.0])
    np.testing.assert_array_equal(vix_filter(r, v, 15.0), r)
    with pytest.raises(TransformError):
        vix_filter(r, np.array([15.0, 0.0, 1.0]), 10.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-1, 1), st.floats(1, 80), st.floats(1, 80), st.floats(-5, 5))
def test_property_filter_linear(r, v, target, c):
    assert vix_filter(c * r, v, target) == pytest.approx(c * vix_filter(r, v, target), abs=1e-12)


def test_discretize_examples():
    assert discretize_vix(23.7) == 23
    assert discretize_vix(8.5) == 10
    assert discretize_vix(55.0) == 40
    with pytest.raises(TransformError):
        discretize_vix(0.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 200))
def test_property_discretize_idempotent(v):
    d = discretize_vix(v)
    assert 10 <= d <= 40
    assert discretize_vix(d) == d


def test_scaler_examples(rng):
    s = MinMaxScaler(-2.0, 3.0)
    assert scale(s, -2.0) == 0.0
    assert scale(s, 3.0) == 1.0
    x = rng.uniform(-2, 3, 1000)
    assert np.max(np.abs(unscale(s, scale(s, x)) - x)) < 1e-12
    with pytest.raises(TransformError):
        scale(s, 3.5)
    with pytest.raises(TransformError):
        unscale(s, 1.5)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=30))
def test_property_scaled_in_unit_interval(xs):
    s = MinMaxScaler.fit(xs)
    y = scale(s, xs)
    assert np.all((y >= 0) & (y <= 1))


def test_vix_codec_layout():
    assert VIX_CODEC.x_min == 10 and VIX_CODEC.x_max == 40
    assert binarize(VIX_CODEC, 40.0).sum() == N_BITS
