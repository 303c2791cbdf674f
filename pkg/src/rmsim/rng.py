"""Deterministic random-stream derivation.

All stochastic operations take an explicit numpy Generator.  Ensemble runs
derive one independent stream per run from (master_seed, run_index) using the
counter-based Philox generator, so results do not depend on how runs are
distributed over workers.  A stream must never be shared between concurrent
workers.
"""

from __future__ import annotations

import numpy as np

_U64 = 1 << 64


def derive_stream(master_seed: int, run_index: int = 0) -> np.random.Generator:
    """Return the Philox stream keyed by (master_seed, run_index)."""
    if not 0 <= master_seed < _U64:
        raise ValueError("master_seed must fit in 64 bits")
    if run_index < 0:
        raise ValueError("run_index must be non-negative")
    key = (master_seed % _U64) * _U64 + run_index
    return np.random.Generator(np.random.Philox(key=key))
