import numpy as np
import pytest
from scipy import stats

from fdrelay.analysis import detection_error_variance, selection_probability
from fdrelay.channel import NoiseModel
from fdrelay.fec import CodecConfig, sccc_encode
from fdrelay.modem import make_qpsk, modulate
from fdrelay.relay import (
    RelayContext,
    RelaySlotState,
    mmse_matrix,
    relay_slot,
    select_symbol,
    square_deviation,
)
from fdrelay.signalcore import complex_to_real_matrix, complex_to_real_pair


def test_mmse_zero_noise_limit():
    h = 0.7 - 0.4j
    w = mmse_matrix(h, p_s=2.0, p_r=1.0, sigma_rr_sq=0.0, sigma0_sq=1e-12)
    h_mat = complex_to_real_matrix(h, np.sqrt(2.0))
    assert np.max(np.abs(w @ h_mat - np.eye(2))) < 1e-6


def test_mmse_zero_channel():
    w = mmse_matrix(0.0, 1.0, 1.0, 0.5, 0.3)
    assert np.all(w == 0)


def test_mmse_scalar_example():
    # P_S=1, h=1, sx=1, srr=0, s0=0.1 -> W = (1/1.1) I
    w = mmse_matrix(1.0, 1.0, 0.0, 0.0, 0.1)
    assert np.allclose(w, np.eye(2) / 1.1, atol=1e-12)


def test_mmse_matches_generic_solve():
    rng = np.random.default_rng(0)
    for _ in range(50):
        h = complex(*rng.normal(size=2))
        p_s, p_r = rng.uniform(0.1, 5, 2)
        srr, s0, sx = rng.uniform(0.01, 2, 3)
        w = mmse_matrix(h, p_s, p_r, srr, s0, sx)
        h_mat = complex_to_real_matrix(h, np.sqrt(p_s))
        bracket = (sx / 2 * h_mat @ h_mat.T
                   + (p_r * sx * srr / 2 + s0 / 2) * np.eye(2))
        want = np.linalg.solve(bracket.T, (sx / 2 * h_mat.T).T).T
        assert np.max(np.abs(w - want)) < 1e-10


def test_square_deviation_examples():
    assert square_deviation(np.eye(2), [0.4, -0.2], [0.4, -0.2]) == 0.0
    assert square_deviation(np.eye(2), [0.3, 0.4], [0.0, 0.0]) == pytest.approx(0.25)


def test_square_deviation_random_oracle():
    rng = np.random.default_rng(1)
    for _ in range(200):
        w = rng.normal(size=(2, 2))
        y = rng.normal(size=2)
        x = rng.normal(size=2)
        got = square_deviation(w, y, x)
        v0 = w[0, 0] * y[0] + w[0, 1] * y[1] - x[0]
        v1 = w[1, 0] * y[0] + w[1, 1] * y[1] - x[1]
        assert got == pytest.approx(v0 * v0 + v1 * v1, rel=1e-12)


def test_select_symbol_boundary():
    assert select_symbol(0.0, 0.5)
    assert select_symbol(0.5, 0.5)       # boundary inclusive
    assert not select_symbol(0.5 + 1e-12, 0.5)
    with pytest.raises(ValueError):
        select_symbol(0.1, -1.0)


def _context(p_s=4.0, p_r=4.0, sigma_rr_sq=0.0, sigma0_sq=1.0, m=64, seed=3):
    codec = CodecConfig.make(m, seed=seed)
    spec = make_qpsk()
    return RelayContext(
        codec=codec, spec=spec, p_s=p_s, p_r=p_r,
        noise=NoiseModel(sigma0_sq=sigma0_sq, sigma_rr_sq=sigma_rr_sq),
        epsilon=0.5,
    )


def test_relay_slot_noiseless_forwards_everything():
    ctx = _context(sigma0_sq=1e-9)
    rng = np.random.default_rng(4)
    info = rng.integers(0, 2, 64).astype(np.uint8)
    x = modulate(sccc_encode(info, ctx.codec), ctx.spec)
    h = 0.8 + 0.3j
    y = np.sqrt(ctx.p_s) * h * x
    state = RelaySlotState.initial(x.size)
    x_next, mask, info_hat = relay_slot(y, h, state, ctx)
    assert np.all(mask)
    assert np.array_equal(info_hat, info)
    assert np.allclose(x_next, x, atol=1e-4)


def test_relay_slot_zero_channel_discards_everything():
    # h=0: the detector output is 0, so the deviation is |x_hat|^2 = 1 > eps
    ctx = _context()
    rng = np.random.default_rng(5)
    y = rng.normal(size=64) + 1j * rng.normal(size=64)
    state = RelaySlotState.initial(64)
    x_next, mask, _ = relay_slot(y, 0.0, state, ctx)
    assert not np.any(mask)
    assert np.all(x_next == 0)


def test_relay_slot_zero_power_on_discards():
    ctx = _context(sigma0_sq=2.0)
    rng = np.random.default_rng(6)
    info = rng.integers(0, 2, 64).astype(np.uint8)
    x = modulate(sccc_encode(info, ctx.codec), ctx.spec)
    h = 0.5 + 0.1j
    noise = (rng.standard_normal(64) + 1j * rng.standard_normal(64))
    y = np.sqrt(ctx.p_s) * h * x + noise
    x_next, mask, _ = relay_slot(y, h, RelaySlotState.initial(64), ctx)
    assert np.all(x_next[~mask] == 0)
    assert np.all(x_next[mask] != 0)


def test_empirical_selection_rate_matches_closed_form():
    # forced-correct reconstruction at fixed h: the deviation is chi-square
    # with two degrees of freedom scaled by the detection error variance
    rng = np.random.default_rng(7)
    n = 100_000
    h = 0.9 + 0.5j
    p_s, p_r, srr, s0 = 10.0, 10.0, 0.1, 1.0
    eps = 0.5
    spec = make_qpsk()
    bits = rng.integers(0, 2, (n, 2)).astype(np.uint8)
    x = modulate(bits.reshape(-1), spec)
    h_rr = np.sqrt(srr / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    xr = modulate(rng.integers(0, 2, (n, 2)).reshape(-1).astype(np.uint8), spec)
    v = np.sqrt(s0 / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    y = np.sqrt(p_s) * h * x + np.sqrt(p_r) * h_rr * xr + v
    w = mmse_matrix(h, p_s, p_r, srr, s0)
    deltas = np.empty(n)
    for m in range(n):
        deltas[m] = square_deviation(w, complex_to_real_pair(y[m]),
                                     complex_to_real_pair(x[m]))
    var = detection_error_variance(p_s, abs(h) ** 2, p_r, srr, s0,
                                   si_active=True)
    want = selection_probability(eps, var)
    got = float(np.mean(deltas <= eps))
    assert got == pytest.approx(want, rel=0.02)


def test_deviation_chi_square_fit():
    # KS test of delta / var against chi2(2) at a comfortably high S-R SNR
    rng = np.random.default_rng(8)
    n = 10_000
    h = 1.0 + 0.0j
    p_s, s0 = 31.6, 1.0  # ~15 dB
    spec = make_qpsk()
    x = modulate(rng.integers(0, 2, 2 * n).astype(np.uint8), spec)
    v = np.sqrt(s0 / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    y = np.sqrt(p_s) * h * x + v
    w = mmse_matrix(h, p_s, 0.0, 0.0, s0)
    deltas = np.array([
        square_deviation(w, complex_to_real_pair(y[m]),
                         complex_to_real_pair(x[m]))
        for m in range(n)
    ])
    var = detection_error_variance(p_s, 1.0, 0.0, 0.0, s0, si_active=False)
    res = stats.kstest(deltas / var, "chi2", args=(2,))
    assert res.pvalue > 0.01


def test_selection_accuracy_decreases_with_snr():
    from fdrelay.harness import SimConfig, run_selection_accuracy

    cfg = SimConfig(info_bits=128, accuracy_frames=60, sigma_rr_sq=0.0,
                    snr_db=(0.0,))
    rows = run_selection_accuracy(cfg, snr_db_list=[0.0, 5.0, 10.0, 20.0])
    wrong = [r.value for r in rows if r.metric == "selected_and_wrong"]
    assert all(b <= a + 1e-9 for a, b in zip(wrong, wrong[1:]))
    assert wrong[-1] < 1e-3
