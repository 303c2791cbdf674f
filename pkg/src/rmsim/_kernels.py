"""Kernel lane selection.

The hot random-walk loops run through numba by default.  Setting the
environment variable RMSIM_NO_NUMBA=1 (before import) selects the pure-numpy
fallback lane; the fallback is also used automatically when numba is not
importable.  bench/benchmark_kernels.py compares the two lanes.
"""

from __future__ import annotations

import os


def _select():
    flag = os.environ.get("RMSIM_NO_NUMBA", "").strip().lower()
    if flag in ("1", "true", "yes"):
        from . import _kernels_numpy as lane

        return lane
    try:
        from . import _kernels_numba as lane
    except ImportError:
        from . import _kernels_numpy as lane
    return lane


_lane = _select()

first_passage_below = _lane.first_passage_below
plane_walk = _lane.plane_walk


def active_lane() -> str:
    return _lane.LANE
