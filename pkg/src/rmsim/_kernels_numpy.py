"""Pure-numpy lane for the random-walk kernels.

Semantics match the numba lane step for step; the accumulation order inside
cumsum is the same sequential order as the explicit loops, so first-passage
indices agree exactly and trajectories agree to rounding.
"""

from __future__ import annotations

import numpy as np

LANE = "numpy"


def first_passage_below(increments: np.ndarray) -> np.ndarray:
    """First 1-based step at which each walk's partial sum drops below 0.

    increments: (n_walks, n_steps).  Walks that never cross get n_steps + 1.
    """
    walks = np.cumsum(increments, axis=1)
    below = walks < 0.0
    crossed = below.any(axis=1)
    first = np.argmax(below, axis=1) + 1
    first[~crossed] = increments.shape[1] + 1
    return first.astype(np.int64)


def plane_walk(
    tau0: float,
    s0: float,
    inc_tau: np.ndarray,
    inc_s: np.ndarray,
    detect_s: float,
    reset_s: float,
    tau_out: np.ndarray,
    s_out: np.ndarray,
    det_steps: np.ndarray,
    det_taus: np.ndarray,
) -> int:
    """Drifted walk in tau, detection-and-reset walk in s.

    The s trace keeps the crossing value at a detection step; the walk then
    resumes from reset_s.  Returns the number of detections recorded.
    """
    n = inc_tau.size
    tau_out[0] = tau0
    np.cumsum(inc_tau, out=tau_out[1:])
    tau_out[1:] += tau0
    s_out[0] = s0

    n_det = 0
    start = 0
    s_curr = s0
    while start < n:
        segment = s_curr + np.cumsum(inc_s[start:])
        hit = segment <= detect_s
        if not hit.any():
            s_out[start + 1 :] = segment
            break
        j = int(np.argmax(hit))
        s_out[start + 1 : start + j + 2] = segment[: j + 1]
        if n_det < det_steps.size:
            det_steps[n_det] = start + j + 1
            det_taus[n_det] = tau_out[start + j + 1]
        n_det += 1
        s_curr = reset_s
        start = start + j + 1
    return n_det
