"""Experiment drivers and result emission.

The sweep axis of the outage/BER experiments is the total average links
SNR: the source SNR plus the relay SNR, divided by two, where each node's
SNR is its transmit power over the noise power. Under the equal-power
default this equals P_S / sigma0^2, so a point at s dB uses
P_S = P_R = 10^(s/10) * sigma0^2.

Throughput rows report rate * (1 - outage) for both duplex modes (the
half-duplex outage already embeds its doubled in-slot rate); this
definition is an interpretation, chosen so the two curves converge once
both outages vanish.
"""
import json
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .analysis import (
    BaselineConfig,
    MarkovSelectModel,
    OutageParams,
    Protocol,
    avg_forward_probability,
    baseline_selection_probability,
    forward_probabilities,
    outage_full_duplex,
    outage_half_duplex,
)
from .channel import LinkGeometry, NoiseModel, link_variance
from .destination import SlotKind, combine_and_decode, detect_slot
from .fec import CRC_BITS, CodecConfig, crc_attach, crc_check, sccc_decode, sccc_encode
from .modem import (
    make_constellation,
    modulate,
    selection_threshold,
    soft_demodulate_frame,
)
from .relay import RelayContext, RelaySlotState, relay_slot
from .signalcore import RandomStream

GEOMETRY_PRESETS = {
    "L1": LinkGeometry.preset_l1,
    "L2": LinkGeometry.preset_l2,
}


@dataclass(frozen=True)
class SimConfig:
    """One experiment configuration; mirrors the JSON config schema."""

    n_frames: int = 20            # frames per chain, sent over n_frames+1 slots
    info_bits: int = 512          # info bits per frame
    modulation_order: int = 4
    epsilon: float | None = None  # None: (d_min/2)^2 of the constellation
    geometry: str = "L1"
    d_sd: float = 1.0
    path_loss_exp: float = 2.0
    sigma_rr_sq: float = 1.0
    sigma0_sq: float = 1.0
    rate: float = 1.0
    gamma_t: float = 3.0
    protocol: str = "proposed"
    snr_db: tuple = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    n_trials: int = 10_000        # event-level Monte Carlo draws per point
    ber_frames: int = 1_000       # frames per BER point
    accuracy_frames: int = 200    # frames per selection-accuracy point
    seed: int = 0
    mode: str = "both"            # analytic | mc | both
    self_check: bool = False      # fail on MC vs analytic beyond 3 sigma
    si_sweep_snr_db: float = 3.0
    sigma_rr_max: float = 5.0
    si_sweep_points: int = 21

    def __post_init__(self):
        if self.n_frames < 2 or self.n_frames % 2:
            raise ValueError("n_frames must be even and >= 2")
        if self.info_bits < 1 or self.n_trials < 1 or self.ber_frames < 1:
            raise ValueError("counts must be positive")
        if self.geometry not in GEOMETRY_PRESETS:
            raise ValueError(f"unknown geometry preset {self.geometry!r}")
        if self.mode not in ("analytic", "mc", "both"):
            raise ValueError(f"unknown mode {self.mode!r}")
        Protocol(self.protocol)

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "snr_db" in data:
            data = {**data, "snr_db": tuple(data["snr_db"])}
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "SimConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def link_geometry(self) -> LinkGeometry:
        return GEOMETRY_PRESETS[self.geometry](self.d_sd, self.path_loss_exp)

    def constellation(self):
        return make_constellation(self.modulation_order)

    def threshold(self) -> float:
        if self.epsilon is not None:
            return self.epsilon
        return selection_threshold(self.constellation())


@dataclass(frozen=True)
class ResultRow:
    sweep: float
    metric: str
    value: float
    ci_half_width: float = 0.0
    n_trials: int = 0

    def __post_init__(self):
        if self.metric.startswith(("outage", "ber", "p_c", "selected", "selection")):
            if not -1e-12 <= self.value <= 1 + 1e-12:
                raise ValueError(f"{self.metric} value {self.value} outside [0, 1]")


def wilson_halfwidth(successes: int, n: int, z: float = 1.959964) -> float:
    """Half-width of the 95% Wilson score interval for a proportion."""
    if n == 0:
        return 0.0
    p = successes / n
    denom = 1.0 + z * z / n
    return float(z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom)


def emit_results(rows, path) -> None:
    """Write rows as CSV: header sweep,metric,value,ci_half_width,n_trials,
    UTF-8, LF endings, full %.10e precision. Deterministic bytes."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("sweep,metric,value,ci_half_width,n_trials\n")
            for r in rows:
                fh.write(f"{r.sweep:.10e},{r.metric},{r.value:.10e},"
                         f"{r.ci_half_width:.10e},{r.n_trials}\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def parse_results(path):
    rows = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "sweep,metric,value,ci_half_width,n_trials":
            raise ValueError(f"unexpected header {header!r} in {path}")
        for line in fh:
            sweep, metric, value, ci, n = line.strip().split(",")
            rows.append(ResultRow(float(sweep), metric, float(value),
                                  float(ci), int(n)))
    return rows


# ---------------------------------------------------------------------------
# analytic operating point


def _point_params(cfg: SimConfig, snr_db: float, sigma_rr_sq=None):
    """Equal-power operating point at one total-average-SNR value."""
    geom = cfg.link_geometry()
    s_lin = 10.0 ** (snr_db / 10.0) * cfg.sigma0_sq
    p_s = p_r = s_lin
    srr = cfg.sigma_rr_sq if sigma_rr_sq is None else sigma_rr_sq
    return {
        "p_s": p_s,
        "p_r": p_r,
        "sigma_sr_sq": link_variance(geom, "SR"),
        "sigma_sd_sq": link_variance(geom, "SD"),
        "sigma_rd_sq": link_variance(geom, "RD"),
        "sigma_rr_sq": srr,
    }


def analytic_point(cfg: SimConfig, snr_db: float, sigma_rr_sq=None):
    """(outage_fd, outage_hd, p_c, p0) at one sweep point."""
    pt = _point_params(cfg, snr_db, sigma_rr_sq)
    eps = cfg.threshold()
    p1, p0 = forward_probabilities(
        eps, pt["p_s"], pt["sigma_sr_sq"], pt["p_r"], pt["sigma_rr_sq"],
        cfg.sigma0_sq,
    )
    p_c = avg_forward_probability(MarkovSelectModel(p1, p0, cfg.n_frames))
    x = pt["p_s"] * pt["sigma_sd_sq"]
    y = pt["p_r"] * pt["sigma_rd_sq"]
    fd = outage_full_duplex(OutageParams(x, y, cfg.rate, p_c))
    hd = outage_half_duplex(OutageParams(x, y, cfg.rate, p0))
    return fd, hd, p_c, p0


def baseline_analytic_point(cfg: SimConfig, snr_db: float, protocol: Protocol):
    """Analytic outage of a frame-level S-DF baseline at one sweep point."""
    pt = _point_params(cfg, snr_db)
    bl = BaselineConfig(protocol=protocol, gamma_t=cfg.gamma_t)
    if protocol is Protocol.PERFECT_RELAY:
        p_c = 1.0
    else:
        p1 = baseline_selection_probability(
            bl, pt["p_s"], pt["sigma_sr_sq"], pt["p_r"], pt["sigma_rr_sq"],
            cfg.rate)
        p0 = baseline_selection_probability(
            bl, pt["p_s"], pt["sigma_sr_sq"], pt["p_r"], 0.0, cfg.rate)
        p_c = avg_forward_probability(MarkovSelectModel(p1, p0, cfg.n_frames))
    x = pt["p_s"] * pt["sigma_sd_sq"]
    y = pt["p_r"] * pt["sigma_rd_sq"]
    return outage_full_duplex(OutageParams(x, y, cfg.rate, p_c))


def mc_outage_point(cfg: SimConfig, snr_db: float, stream: RandomStream,
                    half_duplex=False):
    """Event-level Monte Carlo of the outage composition: draw the two
    Rayleigh branch powers, flip the forwarding coin, test the capacity
    event."""
    fd, hd, p_c, p0 = analytic_point(cfg, snr_db)
    pt = _point_params(cfg, snr_db)
    rng = stream.generator()
    n = cfg.n_trials
    x = pt["p_s"] * pt["sigma_sd_sq"]
    y = pt["p_r"] * pt["sigma_rd_sq"]
    rate = cfg.rate * (2.0 if half_duplex else 1.0)
    prob = p0 if half_duplex else p_c
    xe = rng.exponential(x, n)
    ye = rng.exponential(y, n)
    fwd = rng.random(n) < prob
    q = np.expm1(rate)
    hits = int(np.where(fwd, xe + ye < q, xe < q).sum())
    return hits / n, wilson_halfwidth(hits, n)


def _self_check(cfg, analytic, mc_value, label):
    n = cfg.n_trials
    sigma = np.sqrt(max(analytic * (1 - analytic), 1e-12) / n)
    if abs(mc_value - analytic) > 3 * sigma + 1e-12:
        raise RuntimeError(
            f"self-check failed for {label}: analytic {analytic:.6g} vs "
            f"MC {mc_value:.6g} (3 sigma = {3 * sigma:.3g})")


def run_outage_experiment(cfg: SimConfig):
    """Analytic (and optionally Monte Carlo) outage and throughput over the
    configured SNR sweep."""
    rows = []
    for i, snr in enumerate(cfg.snr_db):
        fd, hd, p_c, p0 = analytic_point(cfg, snr)
        if cfg.mode in ("analytic", "both"):
            rows.append(ResultRow(snr, "outage_fd_analytic", fd))
            rows.append(ResultRow(snr, "outage_hd_analytic", hd))
            rows.append(ResultRow(snr, "p_c", p_c))
            rows.append(ResultRow(snr, "throughput_fd", cfg.rate * (1 - fd)))
            rows.append(ResultRow(snr, "throughput_hd", cfg.rate * (1 - hd)))
        if cfg.mode in ("mc", "both"):
            v, ci = mc_outage_point(cfg, snr, RandomStream(cfg.seed, 2 * i))
            rows.append(ResultRow(snr, "outage_fd_mc", v, ci, cfg.n_trials))
            if cfg.self_check:
                _self_check(cfg, fd, v, f"outage_fd at {snr} dB")
            v, ci = mc_outage_point(cfg, snr, RandomStream(cfg.seed, 2 * i + 1),
                                    half_duplex=True)
            rows.append(ResultRow(snr, "outage_hd_mc", v, ci, cfg.n_trials))
            if cfg.self_check:
                _self_check(cfg, hd, v, f"outage_hd at {snr} dB")
    return rows


def run_si_sweep(cfg: SimConfig):
    """Outage versus the normalized self-interference variance at a fixed
    SNR (analytic)."""
    rows = []
    for t in np.linspace(0.0, 1.0, cfg.si_sweep_points):
        fd, hd, _, _ = analytic_point(cfg, cfg.si_sweep_snr_db,
                                      sigma_rr_sq=t * cfg.sigma_rr_max)
        rows.append(ResultRow(t, "outage_fd_analytic", fd))
        rows.append(ResultRow(t, "outage_hd_analytic", hd))
    return rows


# ---------------------------------------------------------------------------
# full transmission chain


def _chain_context(cfg: SimConfig, snr_db: float):
    pt = _point_params(cfg, snr_db)
    codec = CodecConfig.make(cfg.info_bits, seed=cfg.seed)
    spec = cfg.constellation()
    noise = NoiseModel(sigma0_sq=cfg.sigma0_sq, sigma_rr_sq=pt["sigma_rr_sq"])
    ctx = RelayContext(codec=codec, spec=spec, p_s=pt["p_s"], p_r=pt["p_r"],
                       noise=noise, epsilon=cfg.threshold())
    return pt, codec, spec, noise, ctx


def _draw_trial(cfg: SimConfig, pt, codec, stream: RandomStream):
    """All randomness of one chain trial, drawn up-front in a fixed order so
    different protocols can be compared on common draws."""
    rng = stream.generator()
    n_slots = cfg.n_frames + 1
    m_sym = codec.coded_bits // int(np.log2(cfg.modulation_order))

    def cn(var, shape):
        return np.sqrt(var / 2) * (rng.standard_normal(shape)
                                   + 1j * rng.standard_normal(shape))

    return {
        "h_sr": cn(pt["sigma_sr_sq"], n_slots),
        "h_sd": cn(pt["sigma_sd_sq"], n_slots),
        "h_rd": cn(pt["sigma_rd_sq"], n_slots),
        "h_rr": cn(pt["sigma_rr_sq"], n_slots),
        "v_r": cn(cfg.sigma0_sq, (cfg.n_frames, m_sym)),
        "v_d": cn(cfg.sigma0_sq, (n_slots, m_sym)),
        "data": rng.integers(0, 2, (cfg.n_frames, cfg.info_bits)).astype(np.uint8),
    }


def _source_frames(cfg: SimConfig, codec, spec, draws, protocol: Protocol):
    """Info bits and modulated frames; the CRC protocol reserves the tail
    of each frame for its checksum."""
    info = draws["data"].copy()
    if protocol is Protocol.CRC_SDF:
        for l in range(cfg.n_frames):
            info[l] = crc_attach(info[l, :cfg.info_bits - CRC_BITS])
    xs = np.stack([modulate(sccc_encode(info[l], codec), spec)
                   for l in range(cfg.n_frames)])
    return info, xs


def _relay_pass(cfg: SimConfig, ctx: RelayContext, draws, xs,
                protocol: Protocol, info):
    """Run the relay across slots 1..L; returns its transmitted frames."""
    l_frames = cfg.n_frames
    m_sym = xs.shape[1]
    xr = np.zeros((l_frames, m_sym), dtype=complex)
    state = RelaySlotState.initial(m_sym)
    for l in range(1, l_frames + 1):
        transmitted = xr[l - 2] if l >= 2 else np.zeros(m_sym, dtype=complex)
        y_r = (np.sqrt(ctx.p_s) * draws["h_sr"][l - 1] * xs[l - 1]
               + np.sqrt(ctx.p_r) * draws["h_rr"][l - 1] * transmitted
               + draws["v_r"][l - 1])
        if protocol is Protocol.PROPOSED:
            x_next, mask, _ = relay_slot(y_r, draws["h_sr"][l - 1], state, ctx)
        elif protocol is Protocol.PERFECT_RELAY:
            x_next = xs[l - 1].copy()
            mask = np.ones(m_sym, dtype=bool)
        else:
            si_on = bool(state.mask_prev.any())
            forward = True
            if protocol is Protocol.THRESHOLD_SDF:
                sinr = (ctx.p_s * abs(draws["h_sr"][l - 1]) ** 2
                        / (ctx.p_r * ctx.noise.sigma_rr_sq * si_on
                           + ctx.noise.sigma0_sq))
                forward = sinr >= cfg.gamma_t
            if forward:
                var = (ctx.p_r * ctx.noise.sigma_rr_sq * si_on
                       + ctx.noise.sigma0_sq)
                llr = soft_demodulate_frame(
                    y_r, draws["h_sr"][l - 1], np.sqrt(ctx.p_s), var, ctx.spec
                ).reshape(-1)
                info_hat, _ = sccc_decode(llr, ctx.codec)
                if protocol is Protocol.CRC_SDF and not crc_check(info_hat):
                    forward = False
                if forward:
                    x_next = modulate(sccc_encode(info_hat, ctx.codec), ctx.spec)
                    mask = np.ones(m_sym, dtype=bool)
            if not forward:
                x_next = np.zeros(m_sym, dtype=complex)
                mask = np.zeros(m_sym, dtype=bool)
        xr[l - 1] = x_next
        state = RelaySlotState(x_prev=x_next, mask_prev=mask)
    return xr


def _destination_pass(cfg: SimConfig, pt, codec, spec, draws, xs, xr):
    l_frames = cfg.n_frames
    m_sym = xs.shape[1]
    detections = []
    for l in range(1, l_frames + 2):
        y = draws["v_d"][l - 1].copy()
        if l <= l_frames:
            y += np.sqrt(pt["p_s"]) * draws["h_sd"][l - 1] * xs[l - 1]
        if l >= 2:
            y += np.sqrt(pt["p_r"]) * draws["h_rd"][l - 1] * xr[l - 2]
        kind = (SlotKind.FIRST if l == 1
                else SlotKind.LAST if l == l_frames + 1
                else SlotKind.MIDDLE)
        detections.append(detect_slot(
            y, draws["h_sd"][l - 1], draws["h_rd"][l - 1],
            pt["p_s"], pt["p_r"], cfg.sigma0_sq, kind, spec))
    decoded, _ = combine_and_decode(detections, codec)
    return decoded


def run_chain_trial(cfg: SimConfig, snr_db: float, protocol: Protocol,
                    stream: RandomStream):
    """One end-to-end trial; returns (bit errors, bits counted)."""
    pt, codec, spec, noise, ctx = _chain_context(cfg, snr_db)
    draws = _draw_trial(cfg, pt, codec, stream)
    info, xs = _source_frames(cfg, codec, spec, draws, protocol)
    xr = _relay_pass(cfg, ctx, draws, xs, protocol, info)
    decoded = _destination_pass(cfg, pt, codec, spec, draws, xs, xr)
    errors = int(np.sum(decoded != info))
    return errors, info.size


def run_ber_experiment(cfg: SimConfig, protocols=None):
    """Full-chain BER over the SNR sweep for each protocol, on common
    channel/noise/data draws so the protocols are compared pairwise."""
    if protocols is None:
        protocols = [Protocol.PROPOSED, Protocol.CRC_SDF,
                     Protocol.THRESHOLD_SDF, Protocol.PERFECT_RELAY]
    protocols = [Protocol(p) for p in protocols]
    n_trials = max(1, cfg.ber_frames // cfg.n_frames)
    rows = []
    for i, snr in enumerate(cfg.snr_db):
        for proto in protocols:
            errors = 0
            bits = 0
            for t in range(n_trials):
                stream = RandomStream(cfg.seed, 1_000_000 + i * 10_000 + t)
                e, b = run_chain_trial(cfg, snr, proto, stream)
                errors += e
                bits += b
            rows.append(ResultRow(snr, f"ber_{proto.value}", errors / bits,
                                  wilson_halfwidth(errors, bits), bits))
    return rows


def run_selection_accuracy(cfg: SimConfig, snr_db_list=None, orders=None):
    """Joint probabilities of (selected, reconstruction wrong/right) at the
    relay versus the S-R link SNR, on a unit-gain S-R channel with no
    self-interference; optionally repeated across modulation orders with
    the transmit power rescaled to hold the accept-radius-to-noise ratio."""
    if snr_db_list is None:
        snr_db_list = list(np.arange(0.0, 21.0, 2.0))
    rows = []
    base = replace(cfg, sigma_rr_sq=0.0)
    for snr in snr_db_list:
        sel_wrong, sel_right, n = _accuracy_point(
            base, cfg.modulation_order, 10.0 ** (snr / 10.0) * cfg.sigma0_sq)
        rows.append(ResultRow(snr, "selected_and_wrong", sel_wrong,
                              wilson_halfwidth(int(sel_wrong * n), n), n))
        rows.append(ResultRow(snr, "selected_and_correct", sel_right,
                              wilson_halfwidth(int(sel_right * n), n), n))
    if orders:
        spec_ref = make_constellation(cfg.modulation_order)
        eps_ref = selection_threshold(spec_ref)
        p_ref = 10.0 ** (snr_db_list[-1] / 10.0) * cfg.sigma0_sq
        for q in orders:
            eps_q = selection_threshold(make_constellation(q))
            sel_wrong, _, n = _accuracy_point(base, q, p_ref * eps_ref / eps_q)
            rows.append(ResultRow(q, "selected_and_wrong_vs_order", sel_wrong,
                                  wilson_halfwidth(int(sel_wrong * n), n), n))
    return rows


def _accuracy_point(cfg: SimConfig, order: int, p_s: float):
    spec = make_constellation(order)
    eps = selection_threshold(spec) if cfg.epsilon is None else cfg.epsilon
    codec = CodecConfig.make(cfg.info_bits, seed=cfg.seed)
    noise = NoiseModel(sigma0_sq=cfg.sigma0_sq, sigma_rr_sq=0.0)
    ctx = RelayContext(codec=codec, spec=spec, p_s=p_s, p_r=0.0,
                       noise=noise, epsilon=eps)
    m_sym = codec.coded_bits // spec.bits_per_symbol
    state = RelaySlotState.initial(m_sym)
    rng = RandomStream(cfg.seed, 777).generator()
    h_sr = 1.0 + 0.0j
    n_sel_wrong = 0
    n_sel_right = 0
    n_sym = 0
    for _ in range(cfg.accuracy_frames):
        info = rng.integers(0, 2, cfg.info_bits).astype(np.uint8)
        x = modulate(sccc_encode(info, codec), spec)
        y = np.sqrt(p_s) * h_sr * x + np.sqrt(cfg.sigma0_sq / 2) * (
            rng.standard_normal(m_sym) + 1j * rng.standard_normal(m_sym))
        x_next, mask, _ = relay_slot(y, h_sr, state, ctx)
        wrong = x_next != x
        n_sel_wrong += int(np.sum(mask & wrong))
        n_sel_right += int(np.sum(mask & ~wrong))
        n_sym += m_sym
    return n_sel_wrong / n_sym, n_sel_right / n_sym, n_sym
