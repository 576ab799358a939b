"""Hot inner loops, numba-compiled unless FDRELAY_PURE_NUMPY=1.

Kernels are written as plain loops over small state spaces so the same
source runs under numba and as the uncompiled fallback. Each compiled
function keeps its original Python version reachable via ``.py_func`` for
the path-comparison benchmark.
"""
import numpy as np

from ._accel import njit

NEG = -1.0e30  # log-domain "impossible" marker, safe under add/subtract


@njit(cache=True)
def _max_star(a, b):
    # exact log(e^a + e^b)
    if a < b:
        a, b = b, a
    if b <= NEG / 2:
        return a
    return a + np.log1p(np.exp(b - a))


@njit(cache=True)
def bcjr_kernel(next_state, out_bits, chan_llr, prior_llr, init_alpha, final_beta):
    """Exact log-domain forward-backward pass over a binary-input trellis.

    next_state : (S, 2) int64, successor state per (state, input bit)
    out_bits   : (T, S, 2, K) uint8, branch output bits (time-varying)
    chan_llr   : (T, K) observation LLRs on output bits, log P0/P1
    prior_llr  : (T,) a-priori LLRs on input bits
    init_alpha / final_beta : (S,) log-domain boundary conditions

    Returns (post_in (T,), post_out (T, K)) a-posteriori LLRs.
    """
    T, S, _, K = out_bits.shape
    gamma = np.empty((T, S, 2))
    for t in range(T):
        for s in range(S):
            for u in range(2):
                g = 0.5 * (1.0 - 2.0 * u) * prior_llr[t]
                for k in range(K):
                    g += 0.5 * (1.0 - 2.0 * out_bits[t, s, u, k]) * chan_llr[t, k]
                gamma[t, s, u] = g

    alpha = np.full((T + 1, S), NEG)
    for s in range(S):
        alpha[0, s] = init_alpha[s]
    for t in range(T):
        for s in range(S):
            a = alpha[t, s]
            if a <= NEG / 2:
                continue
            for u in range(2):
                ns = next_state[s, u]
                alpha[t + 1, ns] = _max_star(alpha[t + 1, ns], a + gamma[t, s, u])
        m = alpha[t + 1, 0]
        for s in range(1, S):
            if alpha[t + 1, s] > m:
                m = alpha[t + 1, s]
        for s in range(S):
            alpha[t + 1, s] -= m

    beta = np.full((T + 1, S), NEG)
    for s in range(S):
        beta[T, s] = final_beta[s]
    for t in range(T - 1, -1, -1):
        for s in range(S):
            b = NEG
            for u in range(2):
                nb = beta[t + 1, next_state[s, u]]
                if nb > NEG / 2:
                    b = _max_star(b, gamma[t, s, u] + nb)
            beta[t, s] = b
        m = beta[t, 0]
        for s in range(1, S):
            if beta[t, s] > m:
                m = beta[t, s]
        for s in range(S):
            beta[t, s] -= m

    post_in = np.empty(T)
    post_out = np.empty((T, K))
    for t in range(T):
        num_in = NEG
        den_in = NEG
        num_out = np.full(K, NEG)
        den_out = np.full(K, NEG)
        for s in range(S):
            a = alpha[t, s]
            if a <= NEG / 2:
                continue
            for u in range(2):
                m = a + gamma[t, s, u] + beta[t + 1, next_state[s, u]]
                if u == 0:
                    num_in = _max_star(num_in, m)
                else:
                    den_in = _max_star(den_in, m)
                for k in range(K):
                    if out_bits[t, s, u, k] == 0:
                        num_out[k] = _max_star(num_out[k], m)
                    else:
                        den_out[k] = _max_star(den_out[k], m)
        post_in[t] = num_in - den_in
        for k in range(K):
            post_out[t, k] = num_out[k] - den_out[k]
    return post_in, post_out


@njit(cache=True)
def map_detect_kernel(y_pairs, means, src_bits, rel_bits, discard, llr_clamp):
    """Joint MAP bit LLRs over the (source, relay) hypothesis set per symbol.

    y_pairs : (M, 2) noise-normalized received pairs
    means   : (H, 2) noise-normalized predicted pairs, one per hypothesis
    src_bits: (H, Zs) source-bit labels per hypothesis
    rel_bits: (H, Zr) relay-bit labels (ignored on discard rows)
    discard : (H,) uint8, 1 where the hypothesis has the relay symbol zeroed

    Returns (src_llr (M, Zs), rel_llr (M, Zr), rel_discarded (M,) uint8).
    Relay LLRs follow the discard rule: when even the best two-way bit
    posterior is below the discard-hypothesis posterior the symbol is
    declared discarded and its LLRs are all zero; otherwise the two-way
    LLRs are computed over the non-discard hypotheses only.
    """
    M = y_pairs.shape[0]
    H = means.shape[0]
    Zs = src_bits.shape[1]
    Zr = rel_bits.shape[1]
    src_llr = np.zeros((M, Zs))
    rel_llr = np.zeros((M, Zr))
    rel_disc = np.zeros(M, dtype=np.uint8)
    g = np.empty(H)
    for m in range(M):
        gmax = NEG
        for h in range(H):
            d0 = y_pairs[m, 0] - means[h, 0]
            d1 = y_pairs[m, 1] - means[h, 1]
            g[h] = -(d0 * d0 + d1 * d1)
            if g[h] > gmax:
                gmax = g[h]
        # source bits: sum over the full set, discard rows included
        for i in range(Zs):
            num = NEG
            den = NEG
            for h in range(H):
                w = g[h] - gmax
                if src_bits[h, i] == 0:
                    num = _max_star(num, w)
                else:
                    den = _max_star(den, w)
            v = num - den
            if v > llr_clamp:
                v = llr_clamp
            elif v < -llr_clamp:
                v = -llr_clamp
            src_llr[m, i] = v
        if Zr == 0:
            continue
        # relay bits: two-way masses per bit plus the discard mass
        disc_mass = NEG
        for h in range(H):
            if discard[h] == 1:
                disc_mass = _max_star(disc_mass, g[h] - gmax)
        best_two_way = NEG
        num_r = np.full(Zr, NEG)
        den_r = np.full(Zr, NEG)
        for h in range(H):
            if discard[h] == 1:
                continue
            w = g[h] - gmax
            for i in range(Zr):
                if rel_bits[h, i] == 0:
                    num_r[i] = _max_star(num_r[i], w)
                else:
                    den_r[i] = _max_star(den_r[i], w)
        for i in range(Zr):
            if num_r[i] > best_two_way:
                best_two_way = num_r[i]
            if den_r[i] > best_two_way:
                best_two_way = den_r[i]
        if best_two_way < disc_mass:
            rel_disc[m] = 1  # LLRs stay zero: symbol declared discarded
            continue
        for i in range(Zr):
            v = num_r[i] - den_r[i]
            if v > llr_clamp:
                v = llr_clamp
            elif v < -llr_clamp:
                v = -llr_clamp
            rel_llr[m, i] = v
    return src_llr, rel_llr, rel_disc
