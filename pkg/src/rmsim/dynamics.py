"""Free Schrodinger evolution and its alternation with random kicks.

The free propagator is split-step spectral (half potential phase, exact
kinetic step in momentum space, half potential phase), so kinetic dispersion
is treated exactly and the only propagator error is the O(dt^2) splitting
term, which vanishes for V = 0.  The FFT's implicit periodicity is reconciled
with the hard-truncation observable convention by the edge-leakage budget.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .ensembles import KickConfig, kick_unitary, rm_kick, sample_gue
from .errors import LeakageDetected, NotLocalized
from .geometry import FoliationPoint
from .statespace import (
    DIMENSIONLESS,
    LEAKAGE_TOL,
    EDGE_BAND_FRACTION,
    Grid,
    GridState,
    PacketParams,
    PhysicalConstants,
    delta_z,
    edge_leakage,
    fs_distance,
    make_packet,
    momentum_mean,
    mu_z,
)


@dataclass(frozen=True)
class FreeHamiltonian:
    """Kinetic term plus an optional time-independent potential on a grid."""

    grid: Grid
    consts: PhysicalConstants = DIMENSIONLESS
    potential: np.ndarray | None = None
    force_fn: object = None  # optional callable a -> -V'(a) for the classical path

    def __post_init__(self):
        if self.potential is not None:
            v = np.asarray(self.potential, dtype=np.float64)
            if v.shape != (self.grid.n_points,):
                raise ValueError("potential length does not match grid")
            if not np.all(np.isfinite(v)):
                raise ValueError("potential must be finite everywhere")
            object.__setattr__(self, "potential", v)

    def potential_values(self) -> np.ndarray:
        if self.potential is None:
            return np.zeros(self.grid.n_points)
        return self.potential

    def force(self, a: float) -> float:
        """-dV/dz at a; spline derivative of the sampled potential."""
        if self.force_fn is not None:
            return float(self.force_fn(a))
        if self.potential is None:
            return 0.0
        spline = CubicSpline(self.grid.points, self.potential)
        return -float(spline(a, 1))

    def potential_curvature(self, a: float) -> float:
        if self.potential is None:
            return 0.0
        spline = CubicSpline(self.grid.points, self.potential)
        return float(spline(a, 2))


@dataclass(frozen=True)
class EvolutionConfig:
    """One schedule window = n_free_substeps * dt_free of free flow, then a kick."""

    dt_free: float
    n_free_substeps: int
    kick: KickConfig

    def __post_init__(self):
        if self.dt_free < 0 or self.n_free_substeps < 0:
            raise ValueError("schedule entries must be non-negative")

    @property
    def window_time(self) -> float:
        return self.dt_free * self.n_free_substeps


@dataclass(frozen=True)
class ClassicalState:
    a: float
    p: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.p)):
            raise ValueError("classical state must be finite")


@dataclass(frozen=True)
class ClassicalTrajectory:
    times: np.ndarray
    positions: np.ndarray
    momenta: np.ndarray

    def state(self, i: int) -> ClassicalState:
        return ClassicalState(float(self.positions[i]), float(self.momenta[i]))


def free_step(
    state: GridState,
    hamiltonian: FreeHamiltonian,
    dt: float,
    n_substeps: int = 1,
    leakage_tol: float = LEAKAGE_TOL,
) -> GridState:
    """Advance by n_substeps * dt of free Schrodinger evolution.

    Norm is preserved to rounding; edge leakage is checked on entry and exit.
    """
    if state.grid != hamiltonian.grid:
        raise ValueError("state and Hamiltonian grids differ")
    if edge_leakage(state) > leakage_tol:
        raise LeakageDetected(f"input leakage {edge_leakage(state):.3e}")
    hbar, mass = hamiltonian.consts.hbar, hamiltonian.consts.mass
    k = state.grid.wavenumbers()
    kinetic_phase = np.exp(-1j * hbar * k**2 * dt / (2.0 * mass))
    v = hamiltonian.potential_values()
    half_v_phase = np.exp(-1j * v * dt / (2.0 * hbar))
    amps = state.amplitudes
    for _ in range(n_substeps):
        amps = half_v_phase * amps
        amps = np.fft.ifft(kinetic_phase * np.fft.fft(amps))
        amps = half_v_phase * amps
    out = GridState(amps, state.grid)
    if edge_leakage(out) > leakage_tol:
        raise LeakageDetected(f"output leakage {edge_leakage(out):.3e}")
    return out


def energy_mean(state: GridState, hamiltonian: FreeHamiltonian) -> float:
    """<H> = <p^2/2m> + <V> via the spectral kinetic term."""
    hbar, mass = hamiltonian.consts.hbar, hamiltonian.consts.mass
    n = state.grid.n_points
    k = state.grid.wavenumbers()
    ft = np.fft.fft(state.amplitudes)
    kinetic = np.sum(hbar**2 * k**2 / (2.0 * mass) * np.abs(ft) ** 2)
    kinetic *= state.grid.dx / n
    dens = np.abs(state.amplitudes) ** 2
    potential = np.sum(hamiltonian.potential_values() * dens) * state.grid.dx
    return float(kinetic.real + potential)


def newtonian_reference(
    init: ClassicalState,
    hamiltonian: FreeHamiltonian,
    t_final: float,
    dt: float,
) -> ClassicalTrajectory:
    """Leapfrog (kick-drift-kick) integration of da/dt = p/m, dp/dt = -V'(a)."""
    if dt <= 0 or t_final < 0:
        raise ValueError("need dt > 0 and t_final >= 0")
    mass = hamiltonian.consts.mass
    n_steps = int(round(t_final / dt))
    times = np.arange(n_steps + 1) * dt
    a = np.empty(n_steps + 1)
    p = np.empty(n_steps + 1)
    a[0], p[0] = init.a, init.p
    force = hamiltonian.force
    f = force(a[0])
    for i in range(n_steps):
        p_half = p[i] + 0.5 * dt * f
        a[i + 1] = a[i] + dt * p_half / mass
        f = force(a[i + 1])
        p[i + 1] = p_half + 0.5 * dt * f
    return ClassicalTrajectory(times=times, positions=a, momenta=p)


@dataclass(frozen=True)
class VelocityDecomposition:
    """Squared Fubini-Study speed of a packet, split into its three parts."""

    v_term: float       # v^2 / 4 sigma^2           (classical velocity, tangent)
    w_term: float       # m^2 w^2 sigma^2 / hbar^2  (classical acceleration, tangent)
    spread_term: float  # hbar^2 / 32 sigma^4 m^2   (packet spreading, normal)
    total_analytic: float
    total_numeric: float
    precondition_ratio: float
    precondition_violated: bool


# |V''| sigma^2 must be small against |V'| sigma + hbar^2 / m sigma^2 for the
# packet to see a locally linear potential.
_LINEARITY_RATIO_MAX = 0.1


def velocity_decomposition(
    params: PacketParams,
    hamiltonian: FreeHamiltonian,
) -> VelocityDecomposition:
    """Check the three-part decomposition of the Schrodinger speed.

    The numeric side is (fs_distance(phi(0), phi(dt)) / dt)^2 with the step
    halved once and Richardson-combined, which cancels both the quadratic
    Fubini-Study expansion error and the quadratic splitting error.
    """
    hbar, mass = hamiltonian.consts.hbar, hamiltonian.consts.mass
    sigma = params.width
    v = params.momentum / mass
    w = hamiltonian.force(params.center) / mass
    v_term = v**2 / (4.0 * sigma**2)
    w_term = mass**2 * w**2 * sigma**2 / hbar**2
    spread_term = hbar**2 / (32.0 * sigma**4 * mass**2)
    total = v_term + w_term + spread_term

    curvature = abs(hamiltonian.potential_curvature(params.center))
    ratio = curvature * sigma**2 / (
        abs(hamiltonian.force(params.center)) * sigma + hbar**2 / (mass * sigma**2)
    )

    phi0 = make_packet(params, hamiltonian.grid, hamiltonian.consts)
    h = 0.02 / np.sqrt(total)

    def speed(step: float) -> float:
        return fs_distance(phi0, free_step(phi0, hamiltonian, step)) / step

    numeric = (4.0 * speed(h / 2.0) - speed(h)) / 3.0
    return VelocityDecomposition(
        v_term=v_term,
        w_term=w_term,
        spread_term=spread_term,
        total_analytic=total,
        total_numeric=float(numeric**2),
        precondition_ratio=float(ratio),
        precondition_violated=bool(ratio > _LINEARITY_RATIO_MAX),
    )


@dataclass(frozen=True)
class CommutatorEpsilon:
    measured: float        # ||(U_free U_kick - U_kick U_free) phi||
    analytic_bound: float  # v tau / sigma + tau / T_spr


def commutator_epsilon_analytic(
    v: float, tau: float, sigma: float, mass: float, hbar: float
) -> float:
    """v tau / sigma + tau hbar / (m sigma^2): the two suppression ratios."""
    t_spread = mass * sigma**2 / hbar
    return v * tau / sigma + tau / t_spread


def commutator_epsilon(
    state: GridState,
    hamiltonian: FreeHamiltonian,
    kick: KickConfig,
    tau: float,
    rng: np.random.Generator,
    sigma_localized: float,
) -> CommutatorEpsilon:
    """Norm of the ordering difference between a free segment and one kick.

    Draws a single random Hamiltonian, then applies free-then-kick and
    kick-then-free to the same state; the norm of the difference is linear in
    tau for small tau.  Also returns the analytic bound built from the state's
    mean velocity and the localization scale.
    """
    spread = delta_z(state)
    if spread > sigma_localized:
        raise NotLocalized(
            f"state spread {spread:g} exceeds localization scale {sigma_localized:g}"
        )
    if tau == 0.0:
        return CommutatorEpsilon(measured=0.0, analytic_bound=0.0)
    sample = sample_gue(kick.dimension, kick.scale, rng)
    u_kick = kick_unitary(sample, kick.dt, kick.hbar)

    # the kicked state carries an O(eps^2) spread background; budget for it
    eps_sq = (kick.scale * kick.dt * np.sqrt(kick.dimension) / kick.hbar) ** 2
    budget = max(LEAKAGE_TOL, 20.0 * EDGE_BAND_FRACTION * eps_sq)
    kicked = GridState(u_kick @ state.amplitudes, state.grid)
    path_a = free_step(kicked, hamiltonian, tau, leakage_tol=budget)
    freed = free_step(state, hamiltonian, tau, leakage_tol=budget)
    path_b = GridState(u_kick @ freed.amplitudes, state.grid)
    diff = path_a.amplitudes - path_b.amplitudes
    measured = float(np.sqrt(np.sum(np.abs(diff) ** 2) * state.grid.dx))

    v = abs(momentum_mean(state, hamiltonian.consts)) / hamiltonian.consts.mass
    bound = commutator_epsilon_analytic(
        v, tau, sigma_localized, hamiltonian.consts.mass, hamiltonian.consts.hbar
    )
    return CommutatorEpsilon(measured=measured, analytic_bound=bound)


@dataclass(frozen=True)
class FoliationTrace:
    """Per-window record of an alternating evolution."""

    times: np.ndarray
    tau: np.ndarray
    s: np.ndarray
    norm: np.ndarray
    energy: np.ndarray

    def points(self) -> list[FoliationPoint]:
        return [FoliationPoint(float(t), float(s)) for t, s in zip(self.tau, self.s)]


def _kick_leakage_budget(cfg: EvolutionConfig, n_windows: int, base: float) -> float:
    # Each kick scatters ~eps^2 of mass across the grid; allow that background
    # in the outer bands on top of the truncation budget.
    n = cfg.kick.dimension
    eps_sq = (cfg.kick.scale * cfg.kick.dt * np.sqrt(n) / cfg.kick.hbar) ** 2
    return max(base, 20.0 * EDGE_BAND_FRACTION * max(n_windows, 1) * eps_sq)


def alternating_evolve(
    state: GridState,
    hamiltonian: FreeHamiltonian,
    cfg: EvolutionConfig,
    t_final: float,
    rng: np.random.Generator,
    n_windows: int | None = None,
) -> tuple[GridState, FoliationTrace]:
    """Alternate free segments with single kicks, recording (t, tau, s).

    The kick follows each free segment (sequential interleaving).  With kick
    scale 0 the result is bitwise the pure free evolution; with a zero-length
    free segment the walk degenerates to pure kicks (pass n_windows then).
    Records one row per window plus the initial point.
    """
    if n_windows is None:
        if cfg.window_time <= 0:
            raise ValueError("zero-length windows need an explicit n_windows")
        n_windows = int(round(t_final / cfg.window_time))
    budget = _kick_leakage_budget(cfg, n_windows, LEAKAGE_TOL)

    times = np.zeros(n_windows + 1)
    tau = np.zeros(n_windows + 1)
    s = np.zeros(n_windows + 1)
    norm = np.zeros(n_windows + 1)
    energy = np.zeros(n_windows + 1)

    def record(i: int, t: float, st: GridState) -> None:
        times[i] = t
        tau[i] = mu_z(st)
        s[i] = np.log(delta_z(st))
        norm[i] = st.norm
        energy[i] = energy_mean(st, hamiltonian)

    current = state
    record(0, 0.0, current)
    t = 0.0
    for w in range(1, n_windows + 1):
        if cfg.n_free_substeps > 0 and cfg.dt_free > 0:
            current = free_step(
                current,
                hamiltonian,
                cfg.dt_free,
                n_substeps=cfg.n_free_substeps,
                leakage_tol=budget,
            )
            t += cfg.window_time
        if cfg.kick.scale > 0:
            current = rm_kick(current, cfg.kick, rng)
        record(w, t, current)
    trace = FoliationTrace(times=times, tau=tau, s=s, norm=norm, energy=energy)
    return current, trace
