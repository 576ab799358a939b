"""Per-slot processing pipeline of the full-duplex relay.

Each received frame is demodulated/decoded and re-encoded/re-modulated,
while in parallel a linear MMSE detector cleans the raw observation. The
squared distance between the two, per symbol, drives the keep/discard
decision: symbols whose deviation exceeds the threshold are transmitted
with zero power in the next slot.

The relay knows the instantaneous S-R gain, the statistical strength of its
residual self-interference loop, and the noise power; it also knows its own
previous-slot mask, so the per-symbol presence of self-interference is
deterministic from its point of view.
"""
from dataclasses import dataclass

import numpy as np

from .channel import NoiseModel, effective_noise_variance
from .fec import CodecConfig, sccc_decode, sccc_encode
from .modem import ConstellationSpec, modulate, soft_demodulate_frame
from .signalcore import complex_frame_to_real, complex_to_real_matrix


@dataclass
class RelaySlotState:
    """Relay memory between slots: what it transmitted, and where."""

    x_prev: np.ndarray      # (M,) complex, all-zero before the first slot
    mask_prev: np.ndarray   # (M,) bool

    @classmethod
    def initial(cls, n_symbols):
        return cls(
            x_prev=np.zeros(n_symbols, dtype=complex),
            mask_prev=np.zeros(n_symbols, dtype=bool),
        )


@dataclass(frozen=True)
class RelayContext:
    """Static configuration of the relay pipeline for one run."""

    codec: CodecConfig
    spec: ConstellationSpec
    p_s: float
    p_r: float
    noise: NoiseModel
    epsilon: float
    sigma_x_sq: float = 1.0


def mmse_matrix(h_sr, p_s, p_r, sigma_rr_sq, sigma0_sq, sigma_x_sq=1.0):
    """Linear MMSE detection matrix for the real-equivalent S-R channel.

    W = (sx/2) H^T [ (sx/2) H H^T + (P_R sx srr/2) I + (s0/2) I ]^-1
    with H the real 2x2 equivalent of sqrt(P_S) h_sr. The bracket is always
    invertible for positive noise power.
    """
    if sigma0_sq <= 0:
        raise ValueError("sigma0_sq must be positive")
    h_mat = complex_to_real_matrix(h_sr, np.sqrt(p_s))
    half_sx = sigma_x_sq / 2.0
    bracket = (
        half_sx * (h_mat @ h_mat.T)
        + (p_r * sigma_x_sq * sigma_rr_sq / 2.0) * np.eye(2)
        + (sigma0_sq / 2.0) * np.eye(2)
    )
    return half_sx * h_mat.T @ np.linalg.inv(bracket)


def square_deviation(w, y_pair, x_hat_pair) -> float:
    """Squared distance between the MMSE-detected pair and the rebuilt one."""
    d = w @ np.asarray(y_pair, dtype=float) - np.asarray(x_hat_pair, dtype=float)
    return float(d @ d)


def select_symbol(delta: float, epsilon: float) -> bool:
    """Keep the symbol iff its square deviation is within the threshold
    (boundary inclusive)."""
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    return delta <= epsilon


def _deviations(w, y_pairs, x_hat_pairs):
    d = y_pairs @ w.T - x_hat_pairs
    return np.einsum("ij,ij->i", d, d)


def relay_slot(y_frame, h_sr, state: RelaySlotState, ctx: RelayContext):
    """Process one received frame; build the next transmit frame.

    Returns (x_next, mask, info_hat): the masked complex frame for the next
    slot, the per-symbol keep decisions, and the relay's hard info-bit
    estimates. Symbols with mask False are exactly zero in x_next.
    """
    y_frame = np.asarray(y_frame, dtype=complex)
    m_sym = y_frame.size
    if state.mask_prev.size != m_sym:
        raise ValueError("state mask length does not match the frame")

    # demap with the per-symbol interference-plus-noise variance implied by
    # the relay's own previous mask
    var_si = effective_noise_variance(ctx.noise, ctx.p_r, True, ctx.sigma_x_sq)
    var_free = effective_noise_variance(ctx.noise, ctx.p_r, False, ctx.sigma_x_sq)
    var = np.where(state.mask_prev, var_si, var_free)
    chan_llr = soft_demodulate_frame(
        y_frame, h_sr, np.sqrt(ctx.p_s), var, ctx.spec
    ).reshape(-1)

    info_hat, _ = sccc_decode(chan_llr, ctx.codec)
    x_hat = modulate(sccc_encode(info_hat, ctx.codec), ctx.spec)

    # per-symbol MMSE matrix: the self-interference term is kept only where
    # the previous symbol was actually forwarded
    w_si = mmse_matrix(h_sr, ctx.p_s, ctx.p_r, ctx.noise.sigma_rr_sq,
                       ctx.noise.sigma0_sq, ctx.sigma_x_sq)
    w_free = mmse_matrix(h_sr, ctx.p_s, ctx.p_r, 0.0,
                         ctx.noise.sigma0_sq, ctx.sigma_x_sq)
    y_pairs = complex_frame_to_real(y_frame)
    x_hat_pairs = complex_frame_to_real(x_hat)
    delta = np.where(
        state.mask_prev,
        _deviations(w_si, y_pairs, x_hat_pairs),
        _deviations(w_free, y_pairs, x_hat_pairs),
    )
    mask = delta <= ctx.epsilon
    x_next = np.where(mask, x_hat, 0.0 + 0.0j)
    return x_next, mask, info_hat
