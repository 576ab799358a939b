"""Rate-1/2 serial concatenated convolutional code with doped accumulator.

Outer code: memory-1 non-recursive non-systematic convolution, octal
generator pair (3, 2) read LSB-as-current-input-tap, i.e. the two output
bits per step are (u[t] ^ u[t-1], u[t-1]). Inner code: rate-1 accumulator
s[t] = s[t-1] ^ v[t] whose emitted bit is replaced by the systematic input
v[t] at positions t = 0 mod doping_rate. The interleaver between them is a
seeded pseudo-random permutation fixed per configuration.

The outer trellis is left unterminated (uniform final-state weight in the
decoder): terminating with a tail bit would add two coded bits and break
the exact M/k frame-length contract.
"""
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._kernels import NEG, bcjr_kernel
from .modem import LLR_CLAMP

CRC_POLY = 0x1021  # CRC-16/XMODEM
CRC_BITS = 16


@dataclass(frozen=True)
class Trellis:
    """Binary-input trellis with (possibly time-varying) branch output bits."""

    next_state: np.ndarray   # (S, 2) int64
    out_bits: np.ndarray     # (T, S, 2, K) uint8
    init_alpha: np.ndarray   # (S,) log-domain
    final_beta: np.ndarray   # (S,)

    @property
    def n_steps(self):
        return self.out_bits.shape[0]

    @property
    def n_out(self):
        return self.out_bits.shape[3]


def outer_trellis(n_steps: int) -> Trellis:
    """Memory-1 (3,2)_8 code: outputs (u ^ prev, prev), state = prev bit."""
    next_state = np.array([[0, 1], [0, 1]], dtype=np.int64)
    out = np.zeros((n_steps, 2, 2, 2), dtype=np.uint8)
    for s in range(2):
        for u in range(2):
            out[:, s, u, 0] = u ^ s
            out[:, s, u, 1] = s
    return Trellis(
        next_state=next_state,
        out_bits=out,
        init_alpha=np.array([0.0, NEG]),
        final_beta=np.zeros(2),
    )


def accumulator_trellis(n_steps: int, doping_rate: int) -> Trellis:
    """Doped accumulator: state s^=v, emits v at doped steps, s otherwise."""
    next_state = np.array([[0, 1], [1, 0]], dtype=np.int64)
    out = np.zeros((n_steps, 2, 2, 1), dtype=np.uint8)
    for t in range(n_steps):
        doped = t % doping_rate == 0
        for s in range(2):
            for u in range(2):
                out[t, s, u, 0] = u if doped else (s ^ u)
    return Trellis(
        next_state=next_state,
        out_bits=out,
        init_alpha=np.array([0.0, NEG]),
        final_beta=np.zeros(2),
    )


@dataclass(frozen=True)
class CodecConfig:
    info_bits: int
    rate: Fraction = Fraction(1, 2)
    generator_octal: tuple = (3, 2)
    doping_rate: int = 2
    n_iterations: int = 8
    interleaver: np.ndarray = None
    llr_clamp: float = LLR_CLAMP

    @property
    def coded_bits(self):
        return int(self.info_bits / self.rate)

    def __post_init__(self):
        if self.rate != Fraction(1, 2) or self.generator_octal != (3, 2):
            raise ValueError("only the (3,2)_8 rate-1/2 construction is wired")
        if self.doping_rate < 1:
            raise ValueError("doping_rate must be >= 1")
        perm = self.interleaver
        if perm is None:
            raise ValueError("interleaver required; use CodecConfig.make")
        if sorted(perm.tolist()) != list(range(self.coded_bits)):
            raise ValueError("interleaver is not a permutation of coded-bit indices")
        object.__setattr__(self, "_deinterleaver", np.argsort(perm))
        object.__setattr__(self, "_outer", outer_trellis(self.info_bits))
        object.__setattr__(
            self, "_inner", accumulator_trellis(self.coded_bits, self.doping_rate)
        )

    @classmethod
    def make(cls, info_bits: int, seed: int = 0, n_iterations: int = 8,
             doping_rate: int = 2):
        perm = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(0xC0DE,))
        ).permutation(2 * info_bits)
        return cls(info_bits=info_bits, interleaver=perm,
                   n_iterations=n_iterations, doping_rate=doping_rate)


def _outer_encode(info):
    u = np.asarray(info, dtype=np.uint8)
    prev = np.concatenate(([0], u[:-1])).astype(np.uint8)
    c = np.empty(2 * u.size, dtype=np.uint8)
    c[0::2] = u ^ prev
    c[1::2] = prev
    return c


def _doped_accumulate(v, doping_rate):
    acc = np.bitwise_xor.accumulate(v.astype(np.uint8))
    out = acc.copy()
    out[::doping_rate] = v[::doping_rate]
    return out


def sccc_encode(info, cfg: CodecConfig) -> np.ndarray:
    """Encode one frame of info bits to coded_bits = info_bits / rate bits."""
    info = np.asarray(info, dtype=np.uint8)
    if info.size != cfg.info_bits:
        raise ValueError(f"expected {cfg.info_bits} info bits, got {info.size}")
    outer = _outer_encode(info)
    return _doped_accumulate(outer[cfg.interleaver], cfg.doping_rate)


def bcjr_decode(chan_llr, prior_llr, trellis: Trellis):
    """Exact a-posteriori decoding of one trellis component.

    chan_llr holds observation LLRs for the branch output bits (length
    n_steps * n_out), prior_llr the a-priori LLRs for the input bits.
    Returns (posterior LLRs of the input bits, extrinsic LLRs of the output
    bits); the output-bit extrinsic is posterior minus the channel
    contribution, unclamped so it stays exact.
    """
    chan = np.asarray(chan_llr, dtype=np.float64).reshape(trellis.n_steps,
                                                          trellis.n_out)
    prior = np.asarray(prior_llr, dtype=np.float64)
    if prior.size != trellis.n_steps:
        raise ValueError("prior length does not match trellis steps")
    post_in, post_out = bcjr_kernel(
        trellis.next_state, trellis.out_bits, chan, prior,
        trellis.init_alpha, trellis.final_beta,
    )
    ext_out = post_out - chan
    return post_in, ext_out.reshape(-1)


def bcjr_posteriors(chan_llr, prior_llr, trellis: Trellis):
    """Like bcjr_decode but returns (input posteriors, output posteriors)."""
    chan = np.asarray(chan_llr, dtype=np.float64).reshape(trellis.n_steps,
                                                          trellis.n_out)
    prior = np.asarray(prior_llr, dtype=np.float64)
    post_in, post_out = bcjr_kernel(
        trellis.next_state, trellis.out_bits, chan, prior,
        trellis.init_alpha, trellis.final_beta,
    )
    return post_in, post_out.reshape(-1)


def sccc_decode(chan_llr, cfg: CodecConfig):
    """Iterative inner/outer decoding of one frame.

    Runs n_iterations of accumulator <-> outer BCJR exchanges through the
    interleaver. Returns (hard info decisions, final coded-bit posterior
    LLRs); posterior ties decode to bit 0.
    """
    chan = np.asarray(chan_llr, dtype=np.float64)
    if chan.size != cfg.coded_bits:
        raise ValueError(f"expected {cfg.coded_bits} channel LLRs, got {chan.size}")
    clamp = cfg.llr_clamp
    perm = cfg.interleaver
    deperm = cfg._deinterleaver
    apri_v = np.zeros(cfg.coded_bits)
    zeros_info = np.zeros(cfg.info_bits)
    post_info = zeros_info
    coded_post = chan
    for _ in range(cfg.n_iterations):
        post_v, post_e = bcjr_kernel(
            cfg._inner.next_state, cfg._inner.out_bits,
            chan.reshape(-1, 1), apri_v,
            cfg._inner.init_alpha, cfg._inner.final_beta,
        )
        ext_v = np.clip(post_v - apri_v, -clamp, clamp)
        prior_c = ext_v[deperm]
        post_info, post_c = bcjr_kernel(
            cfg._outer.next_state, cfg._outer.out_bits,
            prior_c.reshape(-1, 2), zeros_info,
            cfg._outer.init_alpha, cfg._outer.final_beta,
        )
        ext_c = np.clip(post_c.reshape(-1) - prior_c, -clamp, clamp)
        apri_v = ext_c[perm]
        coded_post = post_e.reshape(-1)
    info_hat = (post_info < 0).astype(np.uint8)
    return info_hat, coded_post


def _crc16(bits) -> int:
    reg = 0
    for b in bits:
        reg ^= int(b) << (CRC_BITS - 1)
        msb = reg & (1 << (CRC_BITS - 1))
        reg = (reg << 1) & 0xFFFF
        if msb:
            reg ^= CRC_POLY
    return reg


def crc_attach(data_bits) -> np.ndarray:
    """Append the 16 CRC bits to a data-bit frame."""
    data = np.asarray(data_bits, dtype=np.uint8)
    reg = _crc16(data)
    crc = np.array([(reg >> (CRC_BITS - 1 - i)) & 1 for i in range(CRC_BITS)],
                   dtype=np.uint8)
    return np.concatenate([data, crc])


def crc_check(frame_bits) -> bool:
    """True when the trailing 16 bits match the CRC of the preceding data."""
    frame = np.asarray(frame_bits, dtype=np.uint8)
    if frame.size <= CRC_BITS:
        raise ValueError("frame shorter than the CRC field")
    tail = 0
    for b in frame[-CRC_BITS:]:
        tail = (tail << 1) | int(b)
    return _crc16(frame[:-CRC_BITS]) == tail
