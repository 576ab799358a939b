import numpy as np
import pytest

from fdrelay.modem import (
    LLR_CLAMP,
    make_constellation,
    make_qpsk,
    hard_demodulate,
    modulate,
    selection_threshold,
    soft_demodulate,
    soft_demodulate_frame,
)


def llr_reference(y, h, gain, var, spec):
    # independent two-term enumeration, the definition itself
    out = []
    for i in range(spec.bits_per_symbol):
        s0 = sum(np.exp(-abs(y - gain * h * spec.points[k]) ** 2 / var)
                 for k in range(spec.order) if spec.labels[k, i] == 0)
        s1 = sum(np.exp(-abs(y - gain * h * spec.points[k]) ** 2 / var)
                 for k in range(spec.order) if spec.labels[k, i] == 1)
        out.append(np.clip(np.log(s0) - np.log(s1), -LLR_CLAMP, LLR_CLAMP))
    return np.array(out)


def test_qpsk_gray_map_convention():
    spec = make_qpsk()
    sym = modulate([0, 0], spec)
    assert sym[0] == pytest.approx((1 + 1j) / np.sqrt(2))
    assert modulate([1, 0], spec)[0] == pytest.approx((-1 + 1j) / np.sqrt(2))
    assert modulate([0, 1], spec)[0] == pytest.approx((1 - 1j) / np.sqrt(2))


def test_unit_energy_all_orders():
    rng = np.random.default_rng(0)
    for q in (2, 4, 16):
        spec = make_constellation(q)
        bits = rng.integers(0, 2, 3000 * spec.bits_per_symbol)
        sym = modulate(bits, spec)
        assert np.mean(np.abs(sym) ** 2) == pytest.approx(1.0, abs=2e-2)
        assert np.mean(np.abs(spec.points) ** 2) == pytest.approx(1.0, rel=1e-12)


def test_hard_roundtrip():
    rng = np.random.default_rng(1)
    for q in (2, 4, 16):
        spec = make_constellation(q)
        bits = rng.integers(0, 2, 64 * spec.bits_per_symbol).astype(np.uint8)
        assert np.array_equal(hard_demodulate(modulate(bits, spec), spec), bits)


def test_modulate_length_mismatch():
    with pytest.raises(ValueError):
        modulate([0, 1, 0], make_qpsk())


def test_gray_adjacency():
    # nearest neighbours differ in exactly one label bit
    for q in (4, 16):
        spec = make_constellation(q)
        d = np.abs(spec.points[:, None] - spec.points[None, :])
        d_min = d[d > 0].min()
        for a in range(q):
            for b in range(q):
                if a != b and d[a, b] < d_min * 1.001:
                    assert np.sum(spec.labels[a] != spec.labels[b]) == 1


def test_soft_demod_on_point_high_snr():
    spec = make_qpsk()
    y = spec.points[2]
    llr = soft_demodulate(y, 1.0, 1.0, 1e-9, spec)
    want = spec.labels[2]
    assert np.all(np.sign(llr) == np.where(want == 0, 1, -1))
    assert np.all(np.abs(llr) == LLR_CLAMP)


def test_soft_demod_zero_observation_symmetric():
    # holds when every bit splits the constellation into mirror halves
    # (BPSK/QPSK); 16-QAM amplitude bits legitimately see nonzero LLRs at 0
    for q in (2, 4):
        spec = make_constellation(q)
        assert np.allclose(soft_demodulate(0.0, 1.0, 1.0, 0.5, spec), 0.0)


def test_soft_demod_matches_enumeration():
    rng = np.random.default_rng(2)
    spec = make_qpsk()
    for _ in range(300):
        y = complex(*rng.normal(size=2))
        h = complex(*rng.normal(size=2))
        gain = rng.uniform(0.1, 3.0)
        var = rng.uniform(0.05, 2.0)
        got = soft_demodulate(y, h, gain, var, spec)
        want = llr_reference(y, h, gain, var, spec)
        assert np.max(np.abs(got - want)) < 1e-9


def test_soft_demod_quadrant_sign_flip():
    # reflecting y across an axis complements the corresponding label bit
    spec = make_qpsk()
    rng = np.random.default_rng(3)
    for _ in range(50):
        y = complex(*rng.normal(size=2))
        base = soft_demodulate(y, 1.0, 1.0, 0.7, spec)
        mirrored = soft_demodulate(np.conj(y), 1.0, 1.0, 0.7, spec)
        assert base[0] == pytest.approx(mirrored[0], abs=1e-12)
        assert base[1] == pytest.approx(-mirrored[1], abs=1e-12)


def test_per_symbol_variance_vector():
    spec = make_qpsk()
    y = np.array([0.3 + 0.1j, -0.2 + 0.9j])
    var = np.array([0.3, 1.1])
    framed = soft_demodulate_frame(y, 1.0, 1.0, var, spec)
    for m in range(2):
        single = soft_demodulate(y[m], 1.0, 1.0, var[m], spec)
        assert np.allclose(framed[m], single)


def test_selection_thresholds():
    assert selection_threshold(make_constellation(2)) == pytest.approx(1.0)
    assert selection_threshold(make_qpsk()) == pytest.approx(0.5)
    assert selection_threshold(make_constellation(16)) == pytest.approx(0.1)


def test_var_must_be_positive():
    with pytest.raises(ValueError):
        soft_demodulate(0.1, 1.0, 1.0, 0.0, make_qpsk())
