"""Independent reference implementations used as test oracles.

Everything here is deliberately written from first principles (straight-line
code, brute-force enumeration) and must stay independent of the package
internals it checks.
"""
from itertools import product

import numpy as np


def reference_sccc_encode(info, perm, doping=2):
    """Straight-line serial encoder: memory-1 outer code emitting
    (current ^ previous, previous), explicit interleave, explicit doped
    accumulator."""
    reg = 0
    outer = []
    for b in info:
        outer.append(int(b) ^ reg)
        outer.append(reg)
        reg = int(b)
    v = [outer[int(p)] for p in perm]
    acc = 0
    out = []
    for j, b in enumerate(v):
        acc ^= b
        out.append(b if j % doping == 0 else acc)
    return np.array(out, dtype=np.uint8)


def _logsumexp_pair(a, b):
    if a == -np.inf:
        return b
    if b == -np.inf:
        return a
    m = max(a, b)
    return m + np.log(np.exp(a - m) + np.exp(b - m))


def exhaustive_outer_posteriors(chan_llr, prior_llr):
    """Brute-force MAP bit marginals of the memory-1 outer code.

    chan_llr: (2M,) LLRs on the coded bits, prior_llr: (M,) LLRs on the
    info bits, both log P0/P1. Returns (info posteriors, coded posteriors)
    by summing exp-weights over all 2^M codewords.
    """
    m = len(prior_llr)
    num_in = np.full(m, -np.inf)
    den_in = np.full(m, -np.inf)
    num_out = np.full(2 * m, -np.inf)
    den_out = np.full(2 * m, -np.inf)
    for bits in product((0, 1), repeat=m):
        u = np.array(bits, dtype=float)
        reg = 0
        c = []
        for b in bits:
            c.append(b ^ reg)
            c.append(reg)
            reg = b
        c = np.array(c, dtype=float)
        lp = float(np.sum(0.5 * (1 - 2 * u) * prior_llr)
                   + np.sum(0.5 * (1 - 2 * c) * chan_llr))
        for t in range(m):
            if bits[t] == 0:
                num_in[t] = _logsumexp_pair(num_in[t], lp)
            else:
                den_in[t] = _logsumexp_pair(den_in[t], lp)
        for j in range(2 * m):
            if c[j] == 0:
                num_out[j] = _logsumexp_pair(num_out[j], lp)
            else:
                den_out[j] = _logsumexp_pair(den_out[j], lp)
    return num_in - den_in, num_out - den_out


def map_detector_reference(y_pair, h_s_mat, h_r_mat, points, labels,
                           clamp=50.0):
    """Brute-force joint MAP over the Q*(Q+1) hypothesis set.

    Returns (source LLRs, relay LLRs, discarded flag). Follows the
    published rule set: source LLRs sum over the full set including the
    relay-discard entry; relay LLRs compare per-bit two-way posteriors
    against the discard posterior and zero out when the discard mass
    dominates, otherwise sum over the non-discard entries only.
    """
    q = len(points)
    z = labels.shape[1]
    y = np.asarray(y_pair, dtype=float)
    weights = {}
    for si in range(q):
        for ri in range(q + 1):
            xr = points[ri] if ri < q else 0.0
            xs = points[si]
            mean = (h_s_mat @ np.array([xs.real, xs.imag])
                    + h_r_mat @ np.array([np.real(xr), np.imag(xr)]))
            weights[(si, ri)] = -float(np.sum((y - mean) ** 2))

    def lse(vals):
        vals = list(vals)
        if not vals:
            return -np.inf
        m = max(vals)
        return m + np.log(sum(np.exp(v - m) for v in vals))

    src_llr = np.empty(z)
    for i in range(z):
        num = lse(w for (si, ri), w in weights.items() if labels[si, i] == 0)
        den = lse(w for (si, ri), w in weights.items() if labels[si, i] == 1)
        src_llr[i] = np.clip(num - den, -clamp, clamp)

    disc = lse(w for (si, ri), w in weights.items() if ri == q)
    num_r = np.empty(z)
    den_r = np.empty(z)
    for i in range(z):
        num_r[i] = lse(w for (si, ri), w in weights.items()
                       if ri < q and labels[ri, i] == 0)
        den_r[i] = lse(w for (si, ri), w in weights.items()
                       if ri < q and labels[ri, i] == 1)
    best_two_way = max(num_r.max(), den_r.max())
    if best_two_way < disc:
        rel_llr = np.zeros(z)
        discarded = True
    else:
        rel_llr = np.clip(num_r - den_r, -clamp, clamp)
        discarded = False
    return src_llr, rel_llr, discarded


def simulate_forward_chain(p1, p0, n_frames, n_runs, rng):
    """Direct simulation of the selected/self-interference process: the
    first slot is interference-free; forwarding a symbol switches
    interference on for the next slot. Returns the average selection rate
    over slots and runs."""
    selected = np.zeros(n_runs, dtype=bool)
    si = np.zeros(n_runs, dtype=bool)
    total = 0.0
    for l in range(n_frames):
        p = np.where(si, p1, p0)
        selected = rng.random(n_runs) < p
        total += selected.mean()
        si = selected.copy()
    return total / n_frames


def outage_mc(x, y, rate, p_c, n, rng, half_duplex=False):
    """Monte Carlo of the outage composition from raw exponential draws."""
    r = rate * (2.0 if half_duplex else 1.0)
    xe = rng.exponential(x, n)
    ye = rng.exponential(y, n)
    fwd = rng.random(n) < p_c
    q = np.expm1(r)
    return float(np.where(fwd, xe + ye < q, xe < q).mean())
