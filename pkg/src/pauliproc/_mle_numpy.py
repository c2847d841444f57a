"""NumPy implementation of the diluted R-chi-R fixed-point iteration.

Reference kernel; the compiled Cython version in ``_mle_core`` runs the
same algorithm.  Both accept a stack of measurement effects E_m, counts
n_m and an initial matrix, and iterate

    chi <- N(R chi R),   R = sum_m (n_m / p_m) E_m,   p_m = Tr(chi E_m)

accepting a step only if it does not decrease the log-likelihood
sum_m n_m log p_m.  A rejected step is replaced by the diluted update
N((1 - eps) chi + eps N(R chi R)) with eps backed off geometrically.
"""

from __future__ import annotations

import numpy as np


def iterate(
    effects: np.ndarray,
    counts: np.ndarray,
    chi0: np.ndarray,
    max_iter: int = 100_000,
    tol: float = 1e-10,
    epsilon: float = 0.1,
    p_floor: float = 1e-12,
    track_likelihood: bool = False,
):
    """Run the fixed-point iteration; returns (chi, iterations, loglik, converged, history)."""
    effects = np.ascontiguousarray(effects, dtype=complex)
    counts = np.ascontiguousarray(counts, dtype=float)
    chi = np.array(chi0, dtype=complex)
    history = [] if track_likelihood else None

    def probs(c):
        return np.maximum(np.einsum("mij,ji->m", effects, c).real, p_floor)

    def loglik(p):
        return float(np.dot(counts, np.log(p)))

    p = probs(chi)
    ll = loglik(p)
    if history is not None:
        history.append(ll)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        r = np.einsum("m,mij->ij", counts / p, effects)
        t = r @ chi @ r
        cand = t / np.trace(t).real
        cand = 0.5 * (cand + cand.conj().T)
        p_new = probs(cand)
        ll_new = loglik(p_new)
        slack = 1e-12 * max(1.0, abs(ll))
        if ll_new < ll - slack:
            eps = epsilon
            accepted = False
            for _ in range(7):
                mix = (1.0 - eps) * chi + eps * cand
                mix = 0.5 * (mix + mix.conj().T)
                p_mix = probs(mix)
                ll_mix = loglik(p_mix)
                if ll_mix >= ll - slack:
                    cand, p_new, ll_new = mix, p_mix, ll_mix
                    accepted = True
                    break
                eps *= 0.1
            if not accepted:
                converged = True  # no ascent step available: at a fixed point
                break
        delta = np.abs(cand - chi).max()
        chi, p, ll = cand, p_new, ll_new
        if history is not None:
            history.append(ll)
        if delta < tol:
            converged = True
            break
    return chi, it, ll, converged, history
