"""Gray-labeled square constellations and exact soft demapping.

Label convention (fixed for reproducibility): the Z bits of a symbol are
split half to the real axis, half to the imaginary axis (all of them to the
real axis for BPSK), each half Gray-coded per axis. For QPSK this reduces to
bit pair (b1, b0) -> ((1-2*b1) + 1j*(1-2*b0)) / sqrt(2).
"""
from dataclasses import dataclass

import numpy as np

LLR_CLAMP = 50.0

# 2^k-level Gray ladders per axis, most positive level first.
_GRAY_AXES = {
    1: np.array([+1.0, -1.0]),                       # bit 0 -> +1
    2: np.array([+3.0, +1.0, -1.0, -3.0]),           # 00,01,11,10
}
_GRAY_ORDER = {
    1: [0, 1],
    2: [0b00, 0b01, 0b11, 0b10],
}


@dataclass(frozen=True)
class ConstellationSpec:
    """Unit-average-energy constellation with per-point bit labels.

    points[i] carries the label whose bits are stored in labels[i]; the
    first half of a label indexes the real axis, the second half the
    imaginary axis.
    """

    order: int
    points: np.ndarray          # (Q,) complex
    labels: np.ndarray          # (Q, Z) uint8

    @property
    def bits_per_symbol(self):
        return self.labels.shape[1]

    def point_for_bits(self, bits):
        idx = 0
        for b in bits:
            idx = (idx << 1) | int(b)
        return self.points[self._index_by_label[idx]]

    def __post_init__(self):
        # label -> point-row lookup, built once
        z = self.labels.shape[1]
        lut = np.empty(2 ** z, dtype=np.int64)
        for i, lab in enumerate(self.labels):
            idx = 0
            for b in lab:
                idx = (idx << 1) | int(b)
            lut[idx] = i
        object.__setattr__(self, "_index_by_label", lut)


def make_constellation(order: int) -> ConstellationSpec:
    """Gray-labeled BPSK/QPSK/square-QAM with average symbol energy 1."""
    if order < 2 or order & (order - 1):
        raise ValueError("order must be a power of two >= 2")
    z = int(np.log2(order))
    if z == 1:
        levels = np.array([+1.0, -1.0])
        points = levels.astype(complex)
        labels = np.array([[0], [1]], dtype=np.uint8)
        return ConstellationSpec(order, points, labels)
    if z % 2:
        raise ValueError("odd bits/symbol beyond BPSK not supported")
    zh = z // 2
    if zh not in _GRAY_AXES:
        raise ValueError(f"unsupported order {order}")
    axis = _GRAY_AXES[zh]
    axis_labels = _GRAY_ORDER[zh]
    pts, labs = [], []
    for li, lvl_i in zip(axis_labels, axis):
        for lq, lvl_q in zip(axis_labels, axis):
            pts.append(lvl_i + 1j * lvl_q)
            lab = (li << zh) | lq
            labs.append([(lab >> (z - 1 - k)) & 1 for k in range(z)])
    points = np.array(pts, dtype=complex)
    points /= np.sqrt(np.mean(np.abs(points) ** 2))
    return ConstellationSpec(order, points, np.array(labs, dtype=np.uint8))


def make_qpsk() -> ConstellationSpec:
    return make_constellation(4)


def modulate(coded_bits, spec: ConstellationSpec) -> np.ndarray:
    """Map coded bits (length divisible by Z) to complex symbols."""
    bits = np.asarray(coded_bits, dtype=np.uint8)
    z = spec.bits_per_symbol
    if bits.size % z:
        raise ValueError(f"bit count {bits.size} not divisible by {z}")
    groups = bits.reshape(-1, z)
    idx = np.zeros(groups.shape[0], dtype=np.int64)
    for k in range(z):
        idx = (idx << 1) | groups[:, k]
    return spec.points[spec._index_by_label[idx]]


def hard_demodulate(symbols, spec: ConstellationSpec) -> np.ndarray:
    """Nearest-point decisions back to bits."""
    symbols = np.asarray(symbols, dtype=complex)
    d = np.abs(symbols[:, None] - spec.points[None, :]) ** 2
    return spec.labels[np.argmin(d, axis=1)].reshape(-1)


def soft_demodulate_frame(y, h, gain, var_total, spec: ConstellationSpec):
    """Exact (sum-form) bit LLRs for a frame of received symbols.

    LLR_i = log sum_{x: b_i=0} exp(-|y - gain*h*x|^2 / var) - log sum_{b_i=1},
    where var is the total complex-sample variance of interference plus
    noise; var may be scalar or per-symbol. Output is clamped to +-LLR_CLAMP
    and has shape (M, Z).
    """
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    var = np.broadcast_to(np.asarray(var_total, dtype=float), y.shape)
    if np.any(var <= 0):
        raise ValueError("var_total must be positive")
    ref = gain * complex(h) * spec.points                      # (Q,)
    metric = -np.abs(y[:, None] - ref[None, :]) ** 2 / var[:, None]
    metric -= metric.max(axis=1, keepdims=True)                # stability
    w = np.exp(metric)                                         # (M, Q)
    z = spec.bits_per_symbol
    llr = np.empty((y.size, z))
    for i in range(z):
        mask1 = spec.labels[:, i].astype(bool)
        s0 = w[:, ~mask1].sum(axis=1)
        s1 = w[:, mask1].sum(axis=1)
        with np.errstate(divide="ignore"):
            llr[:, i] = np.log(s0) - np.log(s1)
    return np.clip(llr, -LLR_CLAMP, LLR_CLAMP)


def soft_demodulate(y, h, gain, var_total, spec: ConstellationSpec):
    """Single-symbol variant of soft_demodulate_frame; returns (Z,) LLRs."""
    return soft_demodulate_frame(np.array([y]), h, gain, var_total, spec)[0]


def selection_threshold(spec: ConstellationSpec) -> float:
    """Square of half the minimum distance between constellation points."""
    if spec.order < 2:
        raise ValueError("need at least two points")
    d = np.abs(spec.points[:, None] - spec.points[None, :])
    d_min = d[d > 0].min()
    return float((d_min / 2.0) ** 2)
