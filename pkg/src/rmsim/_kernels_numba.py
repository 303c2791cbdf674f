"""numba lane for the random-walk kernels."""

from __future__ import annotations

import numpy as np
from numba import njit

LANE = "numba"

_JIT = {"nogil": True, "cache": True}


@njit(**_JIT)
def first_passage_below(increments):
    n_walks, n_steps = increments.shape
    out = np.empty(n_walks, dtype=np.int64)
    for w in range(n_walks):
        acc = 0.0
        hit = n_steps + 1
        for k in range(n_steps):
            acc += increments[w, k]
            if acc < 0.0:
                hit = k + 1
                break
        out[w] = hit
    return out


@njit(**_JIT)
def plane_walk(
    tau0, s0, inc_tau, inc_s, detect_s, reset_s, tau_out, s_out, det_steps, det_taus
):
    n = inc_tau.size
    tau_out[0] = tau0
    s_out[0] = s0
    tau = tau0
    s = s0
    n_det = 0
    cap = det_steps.size
    for k in range(n):
        tau += inc_tau[k]
        tau_out[k + 1] = tau
        s += inc_s[k]
        s_out[k + 1] = s
        if s <= detect_s:
            if n_det < cap:
                det_steps[n_det] = k + 1
                det_taus[n_det] = tau
            n_det += 1
            s = reset_s
    return n_det
