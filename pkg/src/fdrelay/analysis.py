"""Closed-form performance of symbol-selective relaying.

Capacity events use the natural logarithm throughout, so a target rate R
enters the outage expressions through exp(R); rates supplied in the
experiment configs are passed through unchanged.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

# relative |X-Y| tolerance below which the equal-mean branch is used;
# the distinct-mean branch cancels catastrophically as Y -> X
EQUAL_MEAN_RTOL = 1e-9


@dataclass(frozen=True)
class OutageParams:
    """Inputs of the overall outage expression.

    x, y are the mean received powers P_S*var(h_SD) and P_R*var(h_RD);
    rate is the target rate (natural-log units); p_c the average
    probability that a symbol is predicted correct and forwarded.
    """

    x: float
    y: float
    rate: float
    p_c: float

    def __post_init__(self):
        if self.x <= 0 or self.y < 0:
            raise ValueError("need x > 0 and y >= 0")
        if self.rate <= 0:
            raise ValueError("rate must be positive")
        if not 0 <= self.p_c <= 1:
            raise ValueError("p_c must be a probability")


@dataclass(frozen=True)
class MarkovSelectModel:
    """Per-symbol selection probabilities with (p1) and without (p0)
    self-interference, over n_frames slots."""

    p1: float
    p0: float
    n_frames: int

    def __post_init__(self):
        if not (0 <= self.p1 <= 1 and 0 <= self.p0 <= 1):
            raise ValueError("probabilities must lie in [0, 1]")
        if self.n_frames < 1:
            raise ValueError("need at least one frame")


class Protocol(Enum):
    PROPOSED = "proposed"
    CRC_SDF = "crc_sdf"
    THRESHOLD_SDF = "threshold_sdf"
    PERFECT_RELAY = "perfect_relay"


@dataclass(frozen=True)
class BaselineConfig:
    protocol: Protocol = Protocol.PROPOSED
    gamma_t: float = 3.0  # SINR threshold (linear) of the threshold scheme

    def __post_init__(self):
        if self.protocol is Protocol.THRESHOLD_SDF and self.gamma_t <= 0:
            raise ValueError("threshold scheme needs gamma_t > 0")


def detection_error_variance(p_s, gain_sr_sq, p_r, sigma_rr_sq, sigma0_sq,
                             sigma_x_sq=1.0, si_active=True) -> float:
    """Per-dimension variance of the MMSE detection error at the relay.

    sx/2 - P_S sx^2 g / (2 P_S sx g + 2 P_R sx srr [si] + 2 s0); the
    self-interference term is dropped when the previous symbol was not
    forwarded. gain_sr_sq may be the instantaneous |h_SR|^2 or its mean.
    """
    if sigma0_sq <= 0:
        raise ValueError("sigma0_sq must be positive")
    if min(p_s, gain_sr_sq, p_r, sigma_rr_sq, sigma_x_sq) < 0:
        raise ValueError("inputs must be nonnegative")
    den = 2 * p_s * sigma_x_sq * gain_sr_sq + 2 * sigma0_sq
    if si_active:
        den += 2 * p_r * sigma_x_sq * sigma_rr_sq
    val = sigma_x_sq / 2 - p_s * sigma_x_sq ** 2 * gain_sr_sq / den
    return max(float(val), 0.0)  # exact formula is positive; guard rounding


def selection_probability(epsilon, error_var) -> float:
    """Probability that a symbol's square deviation stays within epsilon.

    The deviation is chi-squared with two degrees of freedom and scale
    error_var, giving 1 - exp(-eps / (2 var)).
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if epsilon == 0:
        return 0.0
    if error_var <= 0:
        return 1.0
    return float(1.0 - np.exp(-epsilon / (2.0 * error_var)))


def transition_matrix(model: MarkovSelectModel) -> np.ndarray:
    """4-state chain over (selected?, self-interference?) combinations.

    States: A selected/SI, B selected/no-SI, C not-selected/SI,
    D not-selected/no-SI. Forwarding a symbol turns self-interference on
    for the same symbol position in the next slot.
    """
    p1, p0 = model.p1, model.p0
    return np.array([
        [p1, 0.0, 1.0 - p1, 0.0],
        [p1, 0.0, 1.0 - p1, 0.0],
        [0.0, p0, 0.0, 1.0 - p0],
        [0.0, p0, 0.0, 1.0 - p0],
    ])


def avg_forward_probability(model: MarkovSelectModel) -> float:
    """Average per-symbol forwarding probability over the frame sequence.

    (1/L) sum_{l=1..L} u T^(l-1) v with start vector u = [0, p0, 0, 1-p0]
    (the first frame sees no self-interference) and v summing the selected
    states. Symbols are i.i.d., so the per-symbol average equals the
    per-frame one.
    """
    t = transition_matrix(model)
    u = np.array([0.0, model.p0, 0.0, 1.0 - model.p0])
    v = np.array([1.0, 1.0, 0.0, 0.0])
    acc = 0.0
    w = u.copy()
    for _ in range(model.n_frames):
        acc += w @ v
        w = w @ t
    return float(acc / model.n_frames)


def forward_probabilities(epsilon, p_s, sigma_sr_sq, p_r, sigma_rr_sq,
                          sigma0_sq, sigma_x_sq=1.0):
    """(p1, p0) selection probabilities of the proposed scheme in
    expected-gain mode (instantaneous |h_SR|^2 replaced by its mean)."""
    var1 = detection_error_variance(p_s, sigma_sr_sq, p_r, sigma_rr_sq,
                                    sigma0_sq, sigma_x_sq, si_active=True)
    var0 = detection_error_variance(p_s, sigma_sr_sq, p_r, sigma_rr_sq,
                                    sigma0_sq, sigma_x_sq, si_active=False)
    return (selection_probability(epsilon, var1),
            selection_probability(epsilon, var0))


def avg_forward_probability_mc(epsilon, p_s, sigma_sr_sq, p_r, sigma_rr_sq,
                               sigma0_sq, n_frames, rng, n_draws=1000,
                               sigma_x_sq=1.0):
    """Per-realization mode: average the chain over drawn S-R gains."""
    gains = rng.exponential(sigma_sr_sq, n_draws)
    acc = 0.0
    for g in gains:
        var1 = detection_error_variance(p_s, g, p_r, sigma_rr_sq, sigma0_sq,
                                        sigma_x_sq, si_active=True)
        var0 = detection_error_variance(p_s, g, p_r, sigma_rr_sq, sigma0_sq,
                                        sigma_x_sq, si_active=False)
        acc += avg_forward_probability(MarkovSelectModel(
            selection_probability(epsilon, var1),
            selection_probability(epsilon, var0),
            n_frames,
        ))
    return acc / n_draws


def _outage_forwarded(x, y, rate):
    # Pr[ln(1 + X_exp + Y_exp) < rate] for independent exponentials
    q = np.expm1(rate)
    if abs(x - y) < EQUAL_MEAN_RTOL * max(x, y):
        return 1.0 - (q + x) / x * np.exp(-q / x)
    ey = np.exp(-q / y) if y > 0 else 0.0
    return 1.0 - (y * ey - x * np.exp(-q / x)) / (y - x)


def outage_full_duplex(p: OutageParams) -> float:
    """Overall outage: forwarded symbols see the two-branch sum event,
    non-forwarded ones only the direct link."""
    q = np.expm1(p.rate)
    non_fw = 1.0 - np.exp(-q / p.x)
    out = p.p_c * _outage_forwarded(p.x, p.y, p.rate) + (1.0 - p.p_c) * non_fw
    return float(min(max(out, 0.0), 1.0))


def outage_half_duplex(p: OutageParams) -> float:
    """Half-duplex counterpart: halved capacity (rate doubled inside the
    events) and no self-interference, so p_c is the SI-free selection
    probability p0."""
    return outage_full_duplex(OutageParams(p.x, p.y, 2.0 * p.rate, p.p_c))


def baseline_selection_probability(cfg: BaselineConfig, p_s, sigma_sr_sq,
                                   p_r, sigma_rr_sq, rate) -> float:
    """Frame-forwarding probability of the classic S-DF baselines.

    CRC scheme: probability the S-R capacity clears the rate, under the
    Rayleigh/SINR model 1/(1 + P_R srr q / (P_S ssr)) * exp(-q/(P_S ssr))
    with q = exp(R)-1; threshold scheme: same with q = gamma_t; a perfect
    relay always forwards. Pass sigma_rr_sq = 0 for the SI-free variant.
    """
    if cfg.protocol is Protocol.PERFECT_RELAY:
        return 1.0
    if cfg.protocol is Protocol.CRC_SDF:
        q = float(np.expm1(rate))
    elif cfg.protocol is Protocol.THRESHOLD_SDF:
        q = cfg.gamma_t
    else:
        raise ValueError(f"no closed-form selection rule for {cfg.protocol}")
    if p_s <= 0 or sigma_sr_sq <= 0:
        return 0.0
    mean_sr = p_s * sigma_sr_sq
    return float(np.exp(-q / mean_sr) / (1.0 + p_r * sigma_rr_sq * q / mean_sr))


def sum_of_exponentials_pdf(z, x, y):
    """Density of the sum of independent exponentials with means x and y
    (test oracle for the forwarded-branch outage integral)."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("density defined on z >= 0")
    if abs(x - y) < EQUAL_MEAN_RTOL * max(x, y):
        return z / x ** 2 * np.exp(-z / x)
    return (np.exp(-z / y) - np.exp(-z / x)) / (y - x)
