"""Random-kick measurement walks and their first-passage statistics.

A collapse run iterates random-Hamiltonian kicks and stops the first time the
state enters one of the detector classes (position expectation inside the
detection bin, spread at or below the detector resolution).  Born statistics
aggregate many independent runs; survival statistics compare symmetric-walk
first passage against the exact law C(2n, n) / 2^(2n); the reduced-plane walk
and renewal cycles realize the same picture directly on the (tau, s) plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np
from scipy import stats as sstats

from . import _kernels
from .ensembles import KickConfig, sample_gue
from .errors import DetectorOverlap, TimeoutFractionExceeded
from .estimates import EnvironmentParams, collision_window, diffusion_coefficients, return_time
from .geometry import ClassSpec, FoliationPoint
from .rng import derive_stream
from .statespace import (
    DIMENSIONLESS,
    Grid,
    GridState,
    PacketParams,
    PhysicalConstants,
    make_packet,
)

DETECTOR_SEPARATION_SIGMAS = 6.0
TIMEOUT_INVALID_FRACTION = 0.05


# --- full-space collapse runs -------------------------------------------------


@dataclass(frozen=True)
class CollapseRun:
    seed: int | None
    outcome: int | None
    hitting_step: int | None
    timeout: bool
    n_steps_max: int
    trace_tau: np.ndarray | None
    trace_s: np.ndarray | None


def _check_detectors(detectors: list[ClassSpec]) -> None:
    if not detectors:
        raise ValueError("need at least one detector class")
    for i in range(len(detectors)):
        for j in range(i + 1, len(detectors)):
            floor = DETECTOR_SEPARATION_SIGMAS * max(
                detectors[i].resolution, detectors[j].resolution
            )
            if abs(detectors[i].center - detectors[j].center) < floor:
                raise DetectorOverlap(
                    f"detectors {i} and {j} closer than "
                    f"{DETECTOR_SEPARATION_SIGMAS:g} sigma"
                )


def _observables(amps: np.ndarray, z: np.ndarray, dx: float) -> tuple[float, float]:
    dens = (amps.real**2 + amps.imag**2) * dx
    mean = float(np.dot(z, dens))
    var = float(np.dot((z - mean) ** 2, dens))
    return mean, math.sqrt(max(var, 0.0))


def _match(mean: float, spread: float, detectors, mu_tols) -> int | None:
    # same rounding-closure slack as geometry.class_membership
    for i, det in enumerate(detectors):
        if (
            abs(mean - det.center) <= mu_tols[i]
            and spread <= det.resolution * (1.0 + 1e-9)
        ):
            return i
    return None


def run_collapse(
    initial: GridState,
    detectors: list[ClassSpec],
    kick: KickConfig,
    n_steps_max: int,
    rng: np.random.Generator,
    mu_tol: float | None = None,
    record_trace: bool = True,
    seed: int | None = None,
) -> CollapseRun:
    """Kick until the state first enters a detector class, or give up.

    Membership is evaluated before the first kick (an initial state already
    inside a class hits at step 0) and after every kick.  The foliation trace
    holds (mu_z, ln delta_z) for every state visited, steps + 1 entries.
    """
    _check_detectors(detectors)
    mu_tols = [mu_tol if mu_tol is not None else d.default_mu_tol for d in detectors]
    grid = initial.grid
    z = grid.points
    dx = grid.dx
    # eigendecomposition path inlined from rm_kick to keep per-step overhead low
    amps = initial.amplitudes.copy()

    trace_tau = [] if record_trace else None
    trace_s = [] if record_trace else None

    mean, spread = _observables(amps, z, dx)
    if record_trace:
        trace_tau.append(mean)
        trace_s.append(math.log(spread) if spread > 0 else -math.inf)
    outcome = _match(mean, spread, detectors, mu_tols)
    hitting_step: int | None = 0 if outcome is not None else None

    step = 0
    while outcome is None and step < n_steps_max:
        step += 1
        h = sample_gue(kick.dimension, kick.scale, rng).entries
        w, v = np.linalg.eigh(h)
        coeffs = v.conj().T @ amps
        coeffs *= np.exp(-1j * w * kick.dt / kick.hbar)
        amps = v @ coeffs
        mean, spread = _observables(amps, z, dx)
        if record_trace:
            trace_tau.append(mean)
            trace_s.append(math.log(spread) if spread > 0 else -math.inf)
        outcome = _match(mean, spread, detectors, mu_tols)
        if outcome is not None:
            hitting_step = step

    return CollapseRun(
        seed=seed,
        outcome=outcome,
        hitting_step=hitting_step,
        timeout=outcome is None,
        n_steps_max=n_steps_max,
        trace_tau=np.asarray(trace_tau) if record_trace else None,
        trace_s=np.asarray(trace_s) if record_trace else None,
    )


# --- Born statistics ----------------------------------------------------------


@dataclass(frozen=True)
class RunRecord:
    seed: int
    outcome: int | None
    hitting_step: int | None
    timeout: bool


@dataclass(frozen=True)
class BornReport:
    weights: tuple[float, ...]
    counts: tuple[int, ...]
    n_runs: int
    chi2_p: float
    n_timeouts: int
    records: tuple[RunRecord, ...]

    def __post_init__(self):
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("Born weights must sum to 1")


# Detector geometry (centers >= 6 sigma apart) cannot coexist with the strict
# 8 sigma edge margin on a 64-point grid, so collapse initial states accept a
# reduced margin; the residual edge tail is far below the kick-injected
# background the walk itself carries.
_COLLAPSE_MARGIN_SIGMAS = 3.0


def superposition_state(
    amplitudes: list[complex],
    centers: list[float],
    sigma: float,
    grid: Grid,
    consts: PhysicalConstants = DIMENSIONLESS,
) -> GridState:
    """Normalized sum of weighted Gaussian packets at the given centers."""
    total = np.zeros(grid.n_points, dtype=np.complex128)
    for c, center in zip(amplitudes, centers):
        packet = make_packet(
            PacketParams(center, sigma),
            grid,
            consts,
            margin_sigmas=_COLLAPSE_MARGIN_SIGMAS,
        )
        total += c * packet.amplitudes
    return GridState(total, grid).normalized()


def _born_single(args) -> RunRecord:
    (
        master_seed,
        idx,
        amplitudes,
        centers,
        sigma,
        n_points,
        length,
        origin,
        kick_dt,
        kick_scale,
        kick_hbar,
        n_steps_max,
        mu_tol,
    ) = args
    grid = Grid(n_points=n_points, length=length, origin=origin)
    initial = superposition_state(amplitudes, centers, sigma, grid)
    detectors = [ClassSpec(center=c, resolution=sigma) for c in centers]
    kick = KickConfig(dt=kick_dt, scale=kick_scale, dimension=n_points, hbar=kick_hbar)
    run = run_collapse(
        initial,
        detectors,
        kick,
        n_steps_max,
        derive_stream(master_seed, idx),
        mu_tol=mu_tol,
        record_trace=False,
        seed=idx,
    )
    return RunRecord(
        seed=idx,
        outcome=run.outcome,
        hitting_step=run.hitting_step,
        timeout=run.timeout,
    )


def chi_square_pvalue(counts: list[int], weights: list[float]) -> float:
    """Goodness of fit of outcome counts against probability weights.

    Zero-weight cells carry no degrees of freedom: a hit there means p = 0,
    otherwise they are dropped before the chi-square.  A single effective cell
    is a trivially perfect fit.
    """
    n_valid = sum(counts)
    if any(w == 0 and c > 0 for w, c in zip(weights, counts)):
        return 0.0
    kept_counts = [c for c, w in zip(counts, weights) if w > 0]
    kept_weights = [w for w in weights if w > 0]
    if len(kept_counts) < 2:
        return 1.0
    expected = [w / sum(kept_weights) * n_valid for w in kept_weights]
    return float(sstats.chisquare(kept_counts, f_exp=expected).pvalue)


def born_statistics(
    amplitudes: list[complex],
    centers: list[float],
    sigma: float,
    kick: KickConfig,
    n_runs: int,
    master_seed: int,
    grid: Grid,
    n_steps_max: int,
    mu_tol: float | None = None,
    n_workers: int = 1,
) -> BornReport:
    """Outcome frequencies over independent collapse runs vs the |c_i|^2 weights.

    Each run draws its kick stream from (master_seed, run_index), so the
    report is a pure function of the arguments regardless of n_workers.
    Timeouts are excluded from the chi-square; more than 5% of them raises
    TimeoutFractionExceeded with the partial report attached.
    """
    weights = [abs(c) ** 2 for c in amplitudes]
    if abs(sum(weights) - 1.0) > 1e-9:
        raise ValueError("squared amplitudes must sum to 1")
    _check_detectors([ClassSpec(center=c, resolution=sigma) for c in centers])

    tasks = [
        (
            master_seed,
            i,
            tuple(complex(c) for c in amplitudes),
            tuple(float(c) for c in centers),
            float(sigma),
            grid.n_points,
            grid.length,
            grid.origin,
            kick.dt,
            kick.scale,
            kick.hbar,
            int(n_steps_max),
            mu_tol,
        )
        for i in range(n_runs)
    ]
    if n_workers > 1:
        with get_context("fork").Pool(n_workers) as pool:
            records = pool.map(_born_single, tasks, chunksize=8)
    else:
        records = [_born_single(t) for t in tasks]
    records.sort(key=lambda r: r.seed)

    counts = [0] * len(centers)
    n_timeouts = 0
    for rec in records:
        if rec.timeout:
            n_timeouts += 1
        else:
            counts[rec.outcome] += 1
    n_valid = n_runs - n_timeouts

    if n_valid > 0 and n_timeouts / n_runs <= TIMEOUT_INVALID_FRACTION:
        chi2_p = chi_square_pvalue(counts, weights)
    else:
        chi2_p = float("nan")
    report = BornReport(
        weights=tuple(weights),
        counts=tuple(counts),
        n_runs=n_runs,
        chi2_p=chi2_p,
        n_timeouts=n_timeouts,
        records=tuple(records),
    )
    if n_runs > 0 and n_timeouts / n_runs > TIMEOUT_INVALID_FRACTION:
        raise TimeoutFractionExceeded(
            f"{n_timeouts}/{n_runs} runs timed out "
            f"(> {TIMEOUT_INVALID_FRACTION:.0%}); statistics invalid",
            report=report,
        )
    return report


# --- Sparre Andersen survival ---------------------------------------------------

_EXACT_RECURSION_CUTOFF = 4096


def sparre_andersen_exact(n: int) -> float:
    """P(no passage below the start within n steps) = C(2n, n) / 2^(2n).

    Exact ratio recursion for small n; log-gamma beyond, stable up to n ~ 1e9.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n <= _EXACT_RECURSION_CUTOFF:
        p = 1.0
        for k in range(n):
            p *= (2 * k + 1) / (2 * k + 2)
        return p
    log_p = (
        math.lgamma(2 * n + 1)
        - 2.0 * math.lgamma(n + 1)
        - 2.0 * n * math.log(2.0)
    )
    return math.exp(log_p)


@dataclass(frozen=True)
class SurvivalReport:
    n_values: np.ndarray
    empirical_survival: np.ndarray
    exact_survival: np.ndarray
    n_walks: int
    step_distribution: str
    max_abs_deviation: float

    def __post_init__(self):
        emp = np.asarray(self.empirical_survival)
        if np.any(emp < 0) or np.any(emp > 1):
            raise ValueError("survival probabilities must lie in [0, 1]")
        if np.any(np.diff(emp) > 0):
            raise ValueError("survival must be non-increasing")


def survival_simulation(
    step_distribution: str,
    n_walks: int,
    n_max: int,
    rng: np.random.Generator,
) -> SurvivalReport:
    """First passage of a symmetric walk below its start vs the exact law.

    'gaussian' steps satisfy the law at walk time n directly.  '+-1' lattice
    steps satisfy it at walk time 2n (the walk can only cross at a -1 level,
    which doubles the time index); the report's empirical column is sampled at
    the matching times so both columns share the n grid.
    """
    if step_distribution not in ("gaussian", "pm1"):
        raise ValueError("step_distribution must be 'gaussian' or 'pm1'")
    dilation = 1 if step_distribution == "gaussian" else 2
    horizon = dilation * n_max

    taus = np.empty(n_walks, dtype=np.int64)
    chunk = max(1, (1 << 22) // max(horizon, 1))
    done = 0
    while done < n_walks:
        m = min(chunk, n_walks - done)
        if step_distribution == "gaussian":
            inc = rng.standard_normal((m, horizon))
        else:
            inc = (rng.integers(0, 2, size=(m, horizon)) * 2 - 1).astype(np.float64)
        taus[done : done + m] = _kernels.first_passage_below(inc)
        done += m

    n_values = np.arange(1, n_max + 1)
    empirical = np.array([(taus > dilation * n).mean() for n in n_values])
    exact = np.array([sparre_andersen_exact(int(n)) for n in n_values])
    return SurvivalReport(
        n_values=n_values,
        empirical_survival=empirical,
        exact_survival=exact,
        n_walks=n_walks,
        step_distribution=step_distribution,
        max_abs_deviation=float(np.max(np.abs(empirical - exact))),
    )


# --- reduced (tau, s) plane walk ------------------------------------------------


@dataclass(frozen=True)
class PlaneWalkResult:
    tau: np.ndarray
    s: np.ndarray
    detection_steps: np.ndarray
    detection_taus: np.ndarray
    detect_s: float


def reduced_plane_walk(
    start: FoliationPoint,
    drift_tau: float,
    step_std: tuple[float, float],
    detect_s: float,
    n_max: int,
    rng: np.random.Generator,
    reset_s: float | None = None,
) -> PlaneWalkResult:
    """Gaussian walk on the (tau, s) plane with detection at s <= detect_s.

    tau gains drift_tau per step plus noise; s is driftless.  On detection the
    trace keeps the crossing value, tau is kept (the walk restarts from the
    recorded position), and s resumes from reset_s (default: the starting
    offset).
    """
    std_tau, std_s = step_std
    if std_tau < 0 or std_s < 0:
        raise ValueError("step standard deviations must be non-negative")
    if reset_s is None:
        reset_s = start.s
    inc_tau = drift_tau + std_tau * rng.standard_normal(n_max)
    inc_s = std_s * rng.standard_normal(n_max)

    tau_out = np.empty(n_max + 1)
    s_out = np.empty(n_max + 1)
    det_steps = np.empty(n_max, dtype=np.int64)
    det_taus = np.empty(n_max)
    n_det = _kernels.plane_walk(
        start.tau,
        start.s,
        inc_tau,
        inc_s,
        detect_s,
        reset_s,
        tau_out,
        s_out,
        det_steps,
        det_taus,
    )
    return PlaneWalkResult(
        tau=tau_out,
        s=s_out,
        detection_steps=det_steps[:n_det].copy(),
        detection_taus=det_taus[:n_det].copy(),
        detect_s=detect_s,
    )


# --- renewal cycles ---------------------------------------------------------------


@dataclass(frozen=True)
class RenewalCycleStats:
    return_steps: np.ndarray
    cycle_times: np.ndarray
    displacements: np.ndarray
    cumulative_deviation: np.ndarray
    dt: float
    d_a: float
    q: float
    n_truncation: int
    truncated_mass: float
    n_clamped: int
    displacement_at_q: float


_SA_TABLE_SIZE = 1024


def _sample_return_steps(
    n_cycles: int, rng: np.random.Generator, n_trunc: int
) -> tuple[np.ndarray, int]:
    """Inverse-CDF draws of the first-return time, clamped at n_trunc."""
    table = np.empty(_SA_TABLE_SIZE + 1)
    table[0] = 1.0
    for k in range(1, _SA_TABLE_SIZE + 1):
        table[k] = table[k - 1] * (2 * k - 1) / (2 * k)
    u = rng.uniform(size=n_cycles)
    steps = np.empty(n_cycles, dtype=np.int64)
    small = u > table[_SA_TABLE_SIZE]
    # table[n] = P(tau > n) is decreasing; first n with table[n] < u
    steps[small] = np.searchsorted(-table, -u[small], side="right")
    big = ~small
    steps[big] = np.ceil(1.0 / (np.pi * u[big] ** 2) - 0.25).astype(np.int64)
    clamped = steps > n_trunc
    steps[clamped] = n_trunc
    return steps, int(clamped.sum())


def renewal_cycle(
    env: EnvironmentParams,
    n_cycles: int,
    rng: np.random.Generator,
    q: float = 0.999968,
    dt: float | None = None,
    d_a: float | None = None,
) -> RenewalCycleStats:
    """Spread-detect-reset cycles: return times from the exact first-return law,
    positional diffusion sqrt(D_a T) accrued per cycle, reset on detection.

    The heavy-tailed return law is truncated at its q-quantile (the mass
    beyond it is reported), matching how the environmental estimates reason.
    """
    if dt is None:
        dt = collision_window(env.interaction_range, env.thermal_velocity)
    if d_a is None:
        _, _, d_a = diffusion_coefficients(env, dt)
    n_trunc, _ = return_time(q, dt)
    steps, n_clamped = _sample_return_steps(n_cycles, rng, n_trunc)
    times = steps.astype(np.float64) * dt
    displacements = np.sqrt(d_a * times) * rng.standard_normal(n_cycles)
    return RenewalCycleStats(
        return_steps=steps,
        cycle_times=times,
        displacements=displacements,
        cumulative_deviation=np.cumsum(displacements),
        dt=dt,
        d_a=d_a,
        q=q,
        n_truncation=n_trunc,
        truncated_mass=sparre_andersen_exact(n_trunc),
        n_clamped=n_clamped,
        displacement_at_q=math.sqrt(d_a * n_trunc * dt),
    )
