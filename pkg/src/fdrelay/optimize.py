"""Outage-minimizing power allocation and relay placement.

The outage surface has no closed-form derivative, so stationary points are
located by bisecting sign changes of a central-difference derivative. The
equal-received-power mode ties the power split to the relay location and
optimizes the single remaining variable on a numerically-verified convex
slice; the other modes fix one variable, scan the other for derivative
brackets, bisect each, and return the best of the stationary points and
the (slightly inset) interval endpoints.
"""
from dataclasses import dataclass, field

import numpy as np

from .analysis import (
    MarkovSelectModel,
    OutageParams,
    avg_forward_probability,
    forward_probabilities,
    outage_full_duplex,
)

# fraction of the search interval kept clear of the singular endpoints
EDGE = 1e-6
SCAN_POINTS = 64
DERIV_STEP = 1e-5  # central-difference step, relative to the variable range


@dataclass(frozen=True)
class OptimizeConfig:
    p_tot: float
    d_sd: float = 1.0
    v: float = 2.0
    rate: float = 2.0
    epsilon: float = 1.0
    sigma_rr_sq: float = 0.1
    sigma0_sq: float = 1.0
    n_frames: int = 20
    tolerance: float = 1e-4   # on the optimization variable, relative to range
    max_iter: int = 20

    def __post_init__(self):
        if self.p_tot <= 0 or self.d_sd <= 0:
            raise ValueError("p_tot and d_sd must be positive")
        if self.tolerance <= 0 or self.max_iter < 1:
            raise ValueError("bad tolerance/max_iter")


@dataclass
class OptimumReport:
    p_s: float
    p_r: float
    d_sr: float
    d_rd: float
    outage: float
    iterations: int
    sign_change_found: bool
    convex_slice: bool | None = None
    n_brackets: int = 0
    derivative_consistent: bool = True


def outage_at(cfg: OptimizeConfig, p_s, p_r, d_sr) -> float:
    """Full outage objective at an arbitrary (power, location) point."""
    p_s = max(float(p_s), EDGE * cfg.p_tot)
    p_r = max(float(p_r), 0.0)
    d_sr = min(max(float(d_sr), EDGE * cfg.d_sd), (1 - EDGE) * cfg.d_sd)
    d_rd = max(cfg.d_sd - d_sr, EDGE * cfg.d_sd)
    var_sd = cfg.d_sd ** -cfg.v
    var_sr = d_sr ** -cfg.v
    var_rd = d_rd ** -cfg.v
    p1, p0 = forward_probabilities(cfg.epsilon, p_s, var_sr, p_r,
                                   cfg.sigma_rr_sq, cfg.sigma0_sq)
    p_c = avg_forward_probability(MarkovSelectModel(p1, p0, cfg.n_frames))
    return outage_full_duplex(OutageParams(
        x=p_s * var_sd, y=p_r * var_rd, rate=cfg.rate, p_c=p_c,
    ))


def equal_gain_power_split(cfg: OptimizeConfig, d_sr) -> float:
    """Source power making both mean received powers equal at the
    destination for a relay at d_sr, under the total power budget:
    P_S = P_tot d_sd^v / (d_rd^v + d_sd^v)."""
    d_rd = cfg.d_sd - d_sr
    return cfg.p_tot * cfg.d_sd ** cfg.v / (d_rd ** cfg.v + cfg.d_sd ** cfg.v)


def _central_diff(f, x, h):
    return (f(x + h) - f(x - h)) / (2.0 * h)


def _derivative_consistency(f, x, h):
    d1 = _central_diff(f, x, h)
    d2 = _central_diff(f, x, h / 2.0)
    scale = max(abs(d1), abs(d2), 1e-12)
    return abs(d1 - d2) <= 0.5 * scale + 1e-12


def _bisect_derivative(f, lo, hi, rng_span, tol, max_iter):
    """Bisect the sign change of f' on [lo, hi]; returns (x, iters, found)."""
    h = DERIV_STEP * rng_span
    dlo = _central_diff(f, lo, h)
    dhi = _central_diff(f, hi, h)
    if np.sign(dlo) == np.sign(dhi):
        return (lo if f(lo) <= f(hi) else hi), 0, False
    it = 0
    while hi - lo > tol * rng_span and it < max_iter:
        mid = 0.5 * (lo + hi)
        dmid = _central_diff(f, mid, h)
        if dmid == 0.0:
            return mid, it + 1, True
        if np.sign(dmid) == np.sign(dlo):
            lo, dlo = mid, dmid
        else:
            hi = mid
        it += 1
    return 0.5 * (lo + hi), it, True


def _scan_and_bisect(f, lo, hi, cfg: OptimizeConfig):
    """All stationary candidates from a SCAN_POINTS bracket sweep, plus the
    inset endpoints. Returns (candidates, max iterations, n_brackets)."""
    xs = np.linspace(lo, hi, SCAN_POINTS)
    h = DERIV_STEP * (hi - lo)
    ds = np.array([_central_diff(f, x, h) for x in xs])
    candidates = [lo, hi]
    iters_max = 0
    n_brackets = 0
    for i in range(SCAN_POINTS - 1):
        if np.sign(ds[i]) != np.sign(ds[i + 1]):
            n_brackets += 1
            x, it, found = _bisect_derivative(f, xs[i], xs[i + 1],
                                              hi - lo, cfg.tolerance,
                                              cfg.max_iter)
            iters_max = max(iters_max, it)
            if found:
                candidates.append(x)
    return candidates, iters_max, n_brackets


def optimize_location_equal_gain(cfg: OptimizeConfig) -> OptimumReport:
    """Relay placement with the power split slaved to the location so both
    mean received powers match; single-variable bisection over d_sr."""
    lo, hi = EDGE * cfg.d_sd, (1 - EDGE) * cfg.d_sd

    def f(d):
        p_s = equal_gain_power_split(cfg, d)
        return outage_at(cfg, p_s, cfg.p_tot - p_s, d)

    grid = np.linspace(lo, hi, 33)
    vals = np.array([f(d) for d in grid])
    convex = bool(np.all(np.diff(vals, 2) > -1e-12))
    d_opt, iters, found = _bisect_derivative(f, lo, hi, cfg.d_sd,
                                             cfg.tolerance, cfg.max_iter)
    if not found:
        d_opt = grid[int(np.argmin(vals))]
    consistent = _derivative_consistency(f, 0.5 * (lo + hi),
                                         DERIV_STEP * cfg.d_sd)
    p_s = equal_gain_power_split(cfg, d_opt)
    return OptimumReport(
        p_s=p_s, p_r=cfg.p_tot - p_s, d_sr=d_opt, d_rd=cfg.d_sd - d_opt,
        outage=f(d_opt), iterations=iters, sign_change_found=found,
        convex_slice=convex, n_brackets=1 if found else 0,
        derivative_consistent=consistent,
    )


def optimize_power_given_location(cfg: OptimizeConfig, d_sr) -> OptimumReport:
    """Best P_S in (0, P_tot) with P_R = P_tot - P_S and the relay fixed."""
    if not 0 <= d_sr <= cfg.d_sd:
        raise ValueError("relay must sit between source and destination")
    lo, hi = EDGE * cfg.p_tot, (1 - EDGE) * cfg.p_tot

    def f(p_s):
        return outage_at(cfg, p_s, cfg.p_tot - p_s, d_sr)

    candidates, iters, n_br = _scan_and_bisect(f, lo, hi, cfg)
    best = min(candidates, key=f)
    consistent = _derivative_consistency(f, 0.5 * (lo + hi),
                                         DERIV_STEP * cfg.p_tot)
    return OptimumReport(
        p_s=best, p_r=cfg.p_tot - best, d_sr=d_sr, d_rd=cfg.d_sd - d_sr,
        outage=f(best), iterations=iters, sign_change_found=n_br > 0,
        n_brackets=n_br, derivative_consistent=consistent,
    )


def optimize_location_given_power(cfg: OptimizeConfig, p_s) -> OptimumReport:
    """Best relay location on [0, d_sd] for a fixed power split."""
    if not 0 <= p_s <= cfg.p_tot:
        raise ValueError("p_s must respect the total power budget")
    p_r = cfg.p_tot - p_s
    lo, hi = EDGE * cfg.d_sd, (1 - EDGE) * cfg.d_sd

    def f(d):
        return outage_at(cfg, p_s, p_r, d)

    candidates, iters, n_br = _scan_and_bisect(f, lo, hi, cfg)
    best = min(candidates, key=f)
    consistent = _derivative_consistency(f, 0.5 * (lo + hi),
                                         DERIV_STEP * cfg.d_sd)
    return OptimumReport(
        p_s=p_s, p_r=p_r, d_sr=best, d_rd=cfg.d_sd - best,
        outage=f(best), iterations=iters, sign_change_found=n_br > 0,
        n_brackets=n_br, derivative_consistent=consistent,
    )


def optimize_power_separate_constraints(cfg: OptimizeConfig, p_s_max, p_r_max,
                                        d_sr) -> OptimumReport:
    """Per-node power caps: the outage is monotone decreasing in P_S, so
    the source transmits at its cap; the relay power is the stationary
    point of the outage (self-interference pulls against received power),
    capped at its own limit."""
    if p_s_max <= 0 or p_r_max <= 0:
        raise ValueError("caps must be positive")
    p_s = p_s_max
    lo, hi = EDGE * p_r_max, p_r_max

    def f(p_r):
        return outage_at(cfg, p_s, p_r, d_sr)

    candidates, iters, n_br = _scan_and_bisect(f, lo, hi, cfg)
    # stationary points below the cap, the cap itself, and the inset floor
    best = min(candidates, key=f)
    consistent = _derivative_consistency(f, 0.5 * (lo + hi),
                                         DERIV_STEP * p_r_max)
    return OptimumReport(
        p_s=p_s, p_r=best, d_sr=d_sr, d_rd=cfg.d_sd - d_sr,
        outage=f(best), iterations=iters, sign_change_found=n_br > 0,
        n_brackets=n_br, derivative_consistent=consistent,
    )


def contour_grid(cfg: OptimizeConfig, resolution: int):
    """Outage over the unit square of normalized source power and relay
    location. Returns rows of (p_s_frac, d_sr_frac, outage)."""
    if resolution < 2:
        raise ValueError("need at least 2 points per axis")
    fracs = np.linspace(0.0, 1.0, resolution)
    rows = np.empty((resolution * resolution, 3))
    k = 0
    for pf in fracs:
        p_s = pf * cfg.p_tot
        for df in fracs:
            d_sr = df * cfg.d_sd
            rows[k] = (pf, df, outage_at(cfg, p_s, cfg.p_tot - p_s, d_sr))
            k += 1
    return rows
