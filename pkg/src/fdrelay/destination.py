"""Destination-side joint detection and decoding.

Every middle slot superposes the source's current frame with the relay's
previous one. The detector enumerates all (source symbol, relay symbol)
hypotheses per received symbol, with the relay alternatives augmented by
the all-zero "discarded" entry, and emits bit LLRs for both transmitters.
A relay symbol whose best two-way bit posterior falls below the discard
posterior is declared discarded and contributes all-zero LLRs, which act
as the additive identity in the later combining step.

Observations and channel matrices are pre-scaled by sqrt(2 / sigma0_sq) so
the hypothesis weights are exp(-||y - H x||^2) verbatim; the same scaling
is applied consistently on both sides of every ratio.

After all slots are detected, the coded-bit LLRs of frame l are the sum of
the direct-path LLRs (slot l) and the relayed-path LLRs (slot l+1), and
each frame is decoded independently.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._accel import USE_NUMBA
from ._kernels import map_detect_kernel
from .fec import CodecConfig, sccc_decode
from .modem import LLR_CLAMP, ConstellationSpec
from .signalcore import complex_frame_to_real, complex_to_real_matrix


class SlotKind(Enum):
    FIRST = "first"     # relay structurally silent
    MIDDLE = "middle"
    LAST = "last"       # source structurally silent


@dataclass(frozen=True)
class HypothesisSet:
    """Trial (source, relay) symbol pairs with their bit labels."""

    xs: np.ndarray        # (H,) complex source trial symbols
    xr: np.ndarray        # (H,) complex relay trial symbols (0 on discard rows)
    src_bits: np.ndarray  # (H, Zs) uint8
    rel_bits: np.ndarray  # (H, Zr) uint8
    discard: np.ndarray   # (H,) uint8

    @property
    def size(self):
        return self.xs.size


def build_hypotheses(spec: ConstellationSpec, source_active: bool,
                     relay_active: bool) -> HypothesisSet:
    """Hypothesis set for a slot: Q*(Q+1) entries when both transmitters are
    on (the +1 being the relay-discard entry per source symbol), Q or Q+1
    when one side is structurally silent."""
    q = spec.order
    z = spec.bits_per_symbol
    src_pts = spec.points if source_active else np.array([0.0 + 0.0j])
    src_lab = spec.labels if source_active else np.zeros((1, 0), dtype=np.uint8)
    if relay_active:
        rel_pts = np.concatenate([spec.points, [0.0 + 0.0j]])
        rel_lab = np.vstack([spec.labels, np.zeros((1, z), dtype=np.uint8)])
        rel_disc = np.array([0] * q + [1], dtype=np.uint8)
    else:
        rel_pts = np.array([0.0 + 0.0j])
        rel_lab = np.zeros((1, 0), dtype=np.uint8)
        rel_disc = np.zeros(1, dtype=np.uint8)
    ns, nr = src_pts.size, rel_pts.size
    si = np.repeat(np.arange(ns), nr)
    ri = np.tile(np.arange(nr), ns)
    return HypothesisSet(
        xs=src_pts[si],
        xr=rel_pts[ri],
        src_bits=src_lab[si],
        rel_bits=rel_lab[ri],
        discard=rel_disc[ri],
    )


def _hypothesis_means(hyp: HypothesisSet, h_s_mat, h_r_mat):
    xs_pairs = complex_frame_to_real(hyp.xs)
    xr_pairs = complex_frame_to_real(hyp.xr)
    return xs_pairs @ np.asarray(h_s_mat).T + xr_pairs @ np.asarray(h_r_mat).T


def _logsumexp_rows(a, mask):
    # log sum over columns selected by mask; NEG-safe via the row max
    sel = np.where(mask[None, :], a, -np.inf)
    m = sel.max(axis=1)
    out = np.full(a.shape[0], -np.inf)
    ok = np.isfinite(m)
    if np.any(ok):
        out[ok] = m[ok] + np.log(
            np.exp(sel[ok] - m[ok][:, None]).sum(axis=1)
        )
    return out


def _detect_frame_numpy(y_pairs, means, hyp: HypothesisSet):
    g = -(((y_pairs[:, None, :] - means[None, :, :]) ** 2).sum(axis=2))
    g = g - g.max(axis=1, keepdims=True)
    m_sym = y_pairs.shape[0]
    zs = hyp.src_bits.shape[1]
    zr = hyp.rel_bits.shape[1]
    src_llr = np.zeros((m_sym, zs))
    for i in range(zs):
        num = _logsumexp_rows(g, hyp.src_bits[:, i] == 0)
        den = _logsumexp_rows(g, hyp.src_bits[:, i] == 1)
        src_llr[:, i] = np.clip(num - den, -LLR_CLAMP, LLR_CLAMP)
    rel_llr = np.zeros((m_sym, zr))
    rel_disc = np.zeros(m_sym, dtype=np.uint8)
    if zr:
        active = hyp.discard == 0
        disc_mass = _logsumexp_rows(g, hyp.discard == 1)
        num = np.empty((m_sym, zr))
        den = np.empty((m_sym, zr))
        for i in range(zr):
            num[:, i] = _logsumexp_rows(g, active & (hyp.rel_bits[:, i] == 0))
            den[:, i] = _logsumexp_rows(g, active & (hyp.rel_bits[:, i] == 1))
        best_two_way = np.maximum(num.max(axis=1), den.max(axis=1))
        rel_disc = (best_two_way < disc_mass).astype(np.uint8)
        keep = rel_disc == 0
        rel_llr[keep] = np.clip(num[keep] - den[keep], -LLR_CLAMP, LLR_CLAMP)
    return src_llr, rel_llr, rel_disc


def detect_frame(y_pairs, h_s_mat, h_r_mat, hyp: HypothesisSet):
    """Per-symbol LLRs for one frame of noise-normalized observations.

    Returns (source LLRs (M, Zs), relay LLRs (M, Zr), discard flags (M,)).
    """
    y_pairs = np.ascontiguousarray(y_pairs, dtype=np.float64)
    means = np.ascontiguousarray(_hypothesis_means(hyp, h_s_mat, h_r_mat))
    if USE_NUMBA:
        return map_detect_kernel(
            y_pairs, means,
            np.ascontiguousarray(hyp.src_bits),
            np.ascontiguousarray(hyp.rel_bits),
            np.ascontiguousarray(hyp.discard),
            LLR_CLAMP,
        )
    return _detect_frame_numpy(y_pairs, means, hyp)


def llr_source_bits(y_pair, h_s_mat, h_r_mat, spec: ConstellationSpec):
    """Source-bit LLRs of one symbol, summed over the full hypothesis set
    (discard entry included). Inputs must be noise-normalized."""
    hyp = build_hypotheses(spec, source_active=True, relay_active=True)
    src, _, _ = detect_frame(np.asarray(y_pair, float)[None, :],
                             h_s_mat, h_r_mat, hyp)
    return src[0]


def llr_relay_bits(y_pair, h_s_mat, h_r_mat, spec: ConstellationSpec):
    """Relay-bit LLRs of one symbol under the discard rule (zero vector when
    the discard hypothesis dominates every two-way bit posterior)."""
    hyp = build_hypotheses(spec, source_active=True, relay_active=True)
    _, rel, _ = detect_frame(np.asarray(y_pair, float)[None, :],
                             h_s_mat, h_r_mat, hyp)
    return rel[0]


@dataclass
class SlotDetection:
    """LLR frames produced by one slot, tagged with their provenance."""

    kind: SlotKind
    src_llr: np.ndarray | None   # coded-bit LLRs of the frame sent in this slot
    rel_llr: np.ndarray | None   # coded-bit LLRs of the previous frame, relayed
    rel_discarded: np.ndarray | None = None


def detect_slot(y_frame, h_sd, h_rd, p_s, p_r, sigma0_sq, kind: SlotKind,
                spec: ConstellationSpec) -> SlotDetection:
    """Detect one received frame at the destination.

    First slot yields only source LLRs, the last slot only relay LLRs,
    middle slots both. Channel gains are the raw per-slot coefficients; the
    transmit powers and the noise normalization are applied here.
    """
    kind = SlotKind(kind)
    y_pairs = complex_frame_to_real(np.asarray(y_frame, dtype=complex))
    scale = np.sqrt(2.0 / sigma0_sq)
    h_s_mat = complex_to_real_matrix(h_sd, scale * np.sqrt(p_s))
    h_r_mat = complex_to_real_matrix(h_rd, scale * np.sqrt(p_r))
    y_pairs = y_pairs * scale
    hyp = build_hypotheses(
        spec,
        source_active=kind != SlotKind.LAST,
        relay_active=kind != SlotKind.FIRST,
    )
    src, rel, disc = detect_frame(y_pairs, h_s_mat, h_r_mat, hyp)
    return SlotDetection(
        kind=kind,
        src_llr=src.reshape(-1) if kind != SlotKind.LAST else None,
        rel_llr=rel.reshape(-1) if kind != SlotKind.FIRST else None,
        rel_discarded=disc if kind != SlotKind.FIRST else None,
    )


def combine_and_decode(detections, codec: CodecConfig):
    """Combine both observation paths of every frame and decode.

    detections must cover slots 1..L+1 in order (first, middle*, last).
    Frame l is decoded from direct-path LLRs of slot l plus relayed-path
    LLRs of slot l+1. Returns (info bits (L, M) uint8, combined coded-bit
    LLRs (L, 2M)).
    """
    n_slots = len(detections)
    if n_slots < 2:
        raise ValueError("need at least two slots (one frame)")
    expected = [SlotKind.FIRST] + [SlotKind.MIDDLE] * (n_slots - 2) + [SlotKind.LAST]
    kinds = [d.kind for d in detections]
    if kinds != expected:
        raise ValueError(f"slot kinds {kinds} do not form first/middle*/last")
    n_frames = n_slots - 1
    decoded = np.empty((n_frames, codec.info_bits), dtype=np.uint8)
    combined = np.empty((n_frames, codec.coded_bits))
    for l in range(n_frames):
        direct = detections[l].src_llr
        relayed = detections[l + 1].rel_llr
        if direct is None or relayed is None:
            raise ValueError(f"missing LLR frame around slot {l + 1}")
        combined[l] = direct + relayed
        decoded[l], _ = sccc_decode(combined[l], codec)
    return decoded, combined
