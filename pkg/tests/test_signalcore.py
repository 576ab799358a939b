import numpy as np
import pytest
from hypothesis import given, strategies as st

from fdrelay.signalcore import (
    RandomStream,
    complex_frame_to_real,
    complex_to_real_matrix,
    complex_to_real_pair,
    real_frame_to_complex,
    real_pair_to_complex,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


def test_pair_examples():
    assert np.array_equal(complex_to_real_pair(0), [0.0, 0.0])
    assert np.array_equal(complex_to_real_pair(1), [1.0, 0.0])
    assert np.array_equal(complex_to_real_pair(0.3 - 0.7j), [0.3, -0.7])
    assert real_pair_to_complex([0, 0]) == 0
    assert real_pair_to_complex([1, -1]) == 1 - 1j


@given(finite, finite)
def test_roundtrip_bit_exact(re, im):
    x = complex(re, im)
    assert real_pair_to_complex(complex_to_real_pair(x)) == x


@given(finite, finite)
def test_norm_preservation(re, im):
    p = complex_to_real_pair(complex(re, im))
    assert np.dot(p, p) == pytest.approx(abs(complex(re, im)) ** 2, rel=1e-12)


def test_matrix_examples():
    assert np.allclose(complex_to_real_matrix(1, 1.0), np.eye(2))
    assert np.allclose(complex_to_real_matrix(1j, 1.0), [[0, -1], [1, 0]])
    with pytest.raises(ValueError):
        complex_to_real_matrix(1, -1.0)


def test_matrix_multiplication_homomorphism():
    # matrix(h1*h2) == matrix(h1) @ matrix(h2): the conversion realizes
    # complex multiplication
    rng = np.random.default_rng(7)
    for _ in range(200):
        h1 = complex(*rng.normal(size=2))
        h2 = complex(*rng.normal(size=2))
        lhs = complex_to_real_matrix(h1 * h2, 1.0)
        rhs = complex_to_real_matrix(h1, 1.0) @ complex_to_real_matrix(h2, 1.0)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_matrix_action_matches_complex_product():
    rng = np.random.default_rng(8)
    h = complex(*rng.normal(size=2))
    x = complex(*rng.normal(size=2))
    acted = complex_to_real_matrix(h, 2.5) @ complex_to_real_pair(x)
    assert real_pair_to_complex(acted) == pytest.approx(2.5 * h * x)


def test_frame_conversions_roundtrip():
    rng = np.random.default_rng(9)
    frame = rng.normal(size=32) + 1j * rng.normal(size=32)
    pairs = complex_frame_to_real(frame)
    assert pairs.shape == (32, 2)
    assert np.array_equal(real_frame_to_complex(pairs), frame)


def test_random_stream_reproducible_and_distinct():
    a = RandomStream(123, 5).generator().standard_normal(16)
    b = RandomStream(123, 5).generator().standard_normal(16)
    c = RandomStream(123, 6).generator().standard_normal(16)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_random_stream_child():
    s = RandomStream(1, 0)
    assert s.child(3) == RandomStream(1, 3)
