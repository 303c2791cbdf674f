"""GUE sampling and random Hamiltonian kicks.

Normalization convention: off-diagonal entries are complex Gaussians with
E|H_jk|^2 = scale^2 (each real component std scale/sqrt(2)); diagonal entries
are real Gaussians with std scale.  This ratio is what makes the ensemble
invariant under unitary conjugation, which in turn makes the kick step-length
distribution identical for every normalized state.

A kick applies exp(-i H dt / hbar) through a full Hermitian eigendecomposition;
at the dimensions used here (N <= 256) this is the dominant per-step cost and
is exactly unitary to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CalibrationDiverged, DimensionMismatch
from .statespace import Grid, GridState, PacketParams, fs_distance, make_packet

# Mean Fubini-Study kick length is close to scale*dt*sqrt(N)/hbar; measured
# prefactor for the convention above (used only to seed the calibration).
_MEAN_STEP_PREFACTOR = 0.99


@dataclass(frozen=True)
class GueSample:
    dimension: int
    entries: np.ndarray
    scale: float

    def __post_init__(self):
        if self.entries.shape != (self.dimension, self.dimension):
            raise ValueError("entry matrix shape does not match dimension")


@dataclass(frozen=True)
class KickConfig:
    dt: float
    scale: float
    dimension: int
    seed: int | None = None
    hbar: float = 1.0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("kick dt must be positive")
        if self.scale < 0:
            raise ValueError("kick scale must be non-negative")


def sample_gue(N: int, scale: float, rng: np.random.Generator) -> GueSample:
    """Fresh GUE draw; Hermitian by construction, real diagonal."""
    if N < 2:
        raise ValueError("GUE dimension must be at least 2")
    h = np.zeros((N, N), dtype=np.complex128)
    iu = np.triu_indices(N, k=1)
    n_off = iu[0].size
    re = rng.standard_normal(n_off)
    im = rng.standard_normal(n_off)
    h[iu] = (re + 1j * im) / np.sqrt(2.0)
    h += h.conj().T
    h[np.diag_indices(N)] = rng.standard_normal(N)
    return GueSample(dimension=N, entries=h * scale, scale=scale)


def kick_unitary(sample: GueSample, dt: float, hbar: float = 1.0) -> np.ndarray:
    """exp(-i H dt / hbar) via Hermitian eigendecomposition."""
    w, v = np.linalg.eigh(sample.entries)
    phases = np.exp(-1j * w * dt / hbar)
    return (v * phases) @ v.conj().T


def rm_kick(state: GridState, cfg: KickConfig, rng: np.random.Generator) -> GridState:
    """One random-Hamiltonian step exp(-i H dt / hbar) with fresh H.

    Unitary to 1e-10 by construction; the output is not renormalized.
    """
    if cfg.dimension != state.grid.n_points:
        raise DimensionMismatch(
            f"kick dimension {cfg.dimension} != grid points {state.grid.n_points}"
        )
    sample = sample_gue(cfg.dimension, cfg.scale, rng)
    w, v = np.linalg.eigh(sample.entries)
    coeffs = v.conj().T @ state.amplitudes
    coeffs *= np.exp(-1j * w * cfg.dt / cfg.hbar)
    return GridState(v @ coeffs, state.grid)


def reference_packet(N: int) -> GridState:
    """Unit-width Gaussian on a centered grid with dx = L/N, L = N/4.

    Kick statistics are state-independent for the GUE, so any normalized
    reference works; a resolvable packet keeps the helper reusable in tests.
    """
    grid = Grid(n_points=N, length=N / 4.0, origin=-N / 8.0)
    return make_packet(PacketParams(center=0.0, width=1.0), grid)


def mean_kick_length(
    state: GridState,
    cfg: KickConfig,
    rng: np.random.Generator,
    n_trials: int,
) -> float:
    """Monte Carlo mean of the Fubini-Study kick length."""
    total = 0.0
    for _ in range(n_trials):
        total += fs_distance(state, rm_kick(state, cfg, rng))
    return total / n_trials


def calibrate_step(
    N: int,
    target_eps: float,
    dt: float,
    rng: np.random.Generator,
    n_trials: int = 1000,
    rel_tol: float = 0.02,
) -> float:
    """Scale such that the mean FS kick length equals target_eps.

    Bisection on the (monotone) mean step length, measured over n_trials
    kicks on a reference Gaussian state; the bracket is seeded from the
    linear-regime estimate eps ~ 0.99 scale dt sqrt(N).
    """
    if not 0.0 < target_eps < 0.5:
        raise ValueError("target_eps must lie in (0, 0.5)")
    state = reference_packet(N)

    def measure(scale: float) -> float:
        cfg = KickConfig(dt=dt, scale=scale, dimension=N)
        return mean_kick_length(state, cfg, rng, n_trials)

    guess = target_eps / (_MEAN_STEP_PREFACTOR * dt * np.sqrt(N))
    lo, hi = guess / 1.5, guess * 1.5
    f_lo, f_hi = measure(lo), measure(hi)
    for _ in range(8):
        if f_lo <= target_eps:
            break
        lo /= 2.0
        f_lo = measure(lo)
    for _ in range(8):
        if f_hi >= target_eps:
            break
        hi *= 2.0
        f_hi = measure(hi)
    if not (f_lo <= target_eps <= f_hi):
        raise CalibrationDiverged("could not bracket the target step length")

    for _ in range(40):
        mid = 0.5 * (lo + hi)
        f_mid = measure(mid)
        if abs(f_mid - target_eps) <= rel_tol * target_eps:
            return mid
        if f_mid < target_eps:
            lo = mid
        else:
            hi = mid
    raise CalibrationDiverged("bisection failed to converge")
