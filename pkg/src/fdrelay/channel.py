"""Block-fading channel model of the three-node relay link.

All links are zero-mean complex Gaussian, redrawn independently per time
slot, with total variance d^(-v) from the simplified path-loss model. The
residual self-interference loop at the relay is modelled the same way with
variance sigma_rr_sq (no explicit cancellation circuitry, only the residue).
"""
from dataclasses import dataclass, field

import numpy as np

from .signalcore import RandomStream

LINKS = ("SR", "SD", "RD")


@dataclass(frozen=True)
class LinkGeometry:
    """Node placement on the S-D line, distances in normalized units."""

    d_sd: float
    d_sr: float
    d_rd: float
    v: float = 2.0

    def __post_init__(self):
        if min(self.d_sd, self.d_sr, self.d_rd) <= 0:
            raise ValueError("all distances must be positive")

    @classmethod
    def collinear(cls, d_sd, d_sr, v=2.0):
        """Relay on the straight S-D line: d_sr + d_rd = d_sd."""
        return cls(d_sd=d_sd, d_sr=d_sr, d_rd=d_sd - d_sr, v=v)

    @classmethod
    def preset_l1(cls, d_sd=1.0, v=2.0):
        """Relay near the source: d_sr = 0.4 d, d_rd = 0.6 d."""
        return cls(d_sd=d_sd, d_sr=0.4 * d_sd, d_rd=0.6 * d_sd, v=v)

    @classmethod
    def preset_l2(cls, d_sd=1.0, v=2.0):
        """Relay near the destination: d_sr = 0.8 d, d_rd = 0.2 d."""
        return cls(d_sd=d_sd, d_sr=0.8 * d_sd, d_rd=0.2 * d_sd, v=v)


@dataclass(frozen=True)
class PowerAllocation:
    p_s: float
    p_r: float
    p_tot: float | None = None

    def __post_init__(self):
        if self.p_s < 0 or self.p_r < 0:
            raise ValueError("powers must be nonnegative")
        if self.p_tot is not None and self.p_s + self.p_r > self.p_tot * (1 + 1e-12):
            raise ValueError("p_s + p_r exceeds the total power cap")

    @classmethod
    def equal_split(cls, p_tot):
        return cls(p_s=p_tot / 2, p_r=p_tot / 2, p_tot=p_tot)


@dataclass(frozen=True)
class NoiseModel:
    """sigma0_sq: AWGN power per complex sample (same at relay and
    destination); sigma_rr_sq: variance of the residual self-interference
    channel."""

    sigma0_sq: float
    sigma_rr_sq: float = 0.0

    def __post_init__(self):
        if self.sigma0_sq <= 0:
            raise ValueError("sigma0_sq must be positive")
        if self.sigma_rr_sq < 0:
            raise ValueError("sigma_rr_sq must be nonnegative")


@dataclass
class ChannelRealization:
    """Per-slot gains for slots 1..n_slots (0-based array index = slot-1)."""

    h_sr: np.ndarray
    h_sd: np.ndarray
    h_rd: np.ndarray
    h_rr: np.ndarray

    @property
    def n_slots(self):
        return self.h_sr.size


def link_variance(geom: LinkGeometry, link: str) -> float:
    """Path-loss variance d^(-v) of the named link (SR, SD or RD)."""
    d = {"SR": geom.d_sr, "SD": geom.d_sd, "RD": geom.d_rd}[link]
    if d <= 0:
        raise ValueError(f"zero distance for link {link}: path loss singular")
    return float(d ** -geom.v)


def _draw_cn(rng, var, n):
    # complex Gaussian, total variance var (var/2 per dimension)
    s = np.sqrt(var / 2.0)
    return s * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def draw_channel(geom: LinkGeometry, noise: NoiseModel, n_slots: int,
                 stream: RandomStream) -> ChannelRealization:
    """Independent gains per slot and per link for n_slots slots."""
    if n_slots < 1:
        raise ValueError("need at least one slot")
    rng = stream.generator()
    return ChannelRealization(
        h_sr=_draw_cn(rng, link_variance(geom, "SR"), n_slots),
        h_sd=_draw_cn(rng, link_variance(geom, "SD"), n_slots),
        h_rd=_draw_cn(rng, link_variance(geom, "RD"), n_slots),
        h_rr=_draw_cn(rng, noise.sigma_rr_sq, n_slots),
    )


def effective_noise_variance(noise: NoiseModel, p_r: float, si_active: bool,
                             sigma_x_sq: float = 1.0) -> float:
    """Total interference+noise variance per complex sample at the relay.

    With self-interference present this is P_R * sigma_x^2 * sigma_rr^2 +
    sigma0^2; a discarded previous symbol leaves only sigma0^2.
    """
    if p_r < 0 or sigma_x_sq < 0:
        raise ValueError("inputs must be nonnegative")
    if si_active:
        return p_r * sigma_x_sq * noise.sigma_rr_sq + noise.sigma0_sq
    return noise.sigma0_sq
