"""Closed-form environmental order-of-magnitude estimates.

Every formula is transcribed through unit-tagged scalars (units.Quantity), so
a wrongly wired expression fails at construction time rather than producing a
plausible-looking number.  Values are returned as plain SI floats.

One deliberate seam: the position diffusion coefficient is taken as
D_a = D_p / M^2 per the source relation even though that quotient carries
m^2/s^3; it is re-tagged as m^2/s (the coarse-graining absorbs one time
scale).  Everything downstream of D_a treats it as m^2/s.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction

from . import units
from .units import Quantity

HBAR_ROUNDED = 1e-34          # the rounding the source arithmetic uses
HBAR_CODATA = 1.054571817e-34
LIGHT_SPEED = 3e8             # m/s
RADIATION_RANGE = 1e-6        # interaction range for photon scattering, m
DEFAULT_COARSE_DT = 1e-12     # coarse-grained walk step, s
DEFAULT_RETURN_QUANTILE = 0.999968


@dataclass(frozen=True)
class EnvironmentParams:
    """Physical inputs for the estimate chain (SI units)."""

    gas_number_density: float = 2.4e25   # m^-3, standard conditions
    thermal_velocity: float = 5e2        # m/s
    interaction_range: float = 1e-9      # m
    body_radius: float = 1e-3            # m
    body_mass: float = 1e-6              # kg
    body_speed: float = 1.0              # m/s
    resolution: float = 1e-6             # m
    gas_particle_mass: float = 5e-26     # kg
    hbar: float = HBAR_ROUNDED           # J s

    def __post_init__(self):
        for name, val in asdict(self).items():
            if not val > 0:
                raise ValueError(f"{name} must be strictly positive")


def collision_window(interaction_range: float, v_rel: float) -> float:
    """Duration of one scattering event, range / relative speed."""
    tau = units.meters(interaction_range) / units.meters_per_second(v_rel)
    assert tau.dims == (Fraction(0), Fraction(0), Fraction(1))
    return tau.value


def collision_rate(number_density: float, v_th: float, radius: float) -> float:
    """Flux n v_th / 4 times the geometric cross section pi R^2."""
    flux = units.per_cubic_meter(number_density) * units.meters_per_second(v_th) / 4.0
    rate = flux * math.pi * units.meters(radius) ** 2
    assert rate.dims == (Fraction(0), Fraction(0), Fraction(-1))
    return rate.value


def molecular_flux(number_density: float, v_th: float) -> float:
    return (
        units.per_cubic_meter(number_density) * units.meters_per_second(v_th) / 4.0
    ).value


def kick_momentum(env: EnvironmentParams) -> float:
    """Momentum transferred by one gas collision, m_gas * v_th."""
    p = units.kilograms(env.gas_particle_mass) * units.meters_per_second(
        env.thermal_velocity
    )
    return p.value


def diffusion_coefficients(
    env: EnvironmentParams, dt: float
) -> tuple[float, float, float]:
    """(kicks per coarse step, momentum diffusion D_p, position diffusion D_a).

    N = Gamma dt, D_p = Gamma p_kick^2, D_a = D_p / M^2 (re-tagged to m^2/s,
    see module docstring).
    """
    gamma = collision_rate(
        env.gas_number_density, env.thermal_velocity, env.body_radius
    )
    n_kicks = gamma * dt
    p_kick = kick_momentum(env)
    d_p = (Quantity(gamma, (Fraction(0), Fraction(0), Fraction(-1)))
           * units.momentum(p_kick) ** 2)
    assert d_p.dims == (Fraction(2), Fraction(2), Fraction(-3))
    d_a_value = d_p.value / env.body_mass**2
    return n_kicks, d_p.value, d_a_value


def kick_to_momentum_ratio(env: EnvironmentParams, dt: float) -> float:
    """Accumulated random momentum p_kick sqrt(N) against the body's M v."""
    n_kicks, _, _ = diffusion_coefficients(env, dt)
    if n_kicks == 0:
        return 0.0
    p_random = units.momentum(kick_momentum(env)) * math.sqrt(n_kicks)
    p_macro = units.kilograms(env.body_mass) * units.meters_per_second(env.body_speed)
    return float(p_random / p_macro)


def spreading_time(mass: float, sigma: float, hbar: float) -> float:
    """Free-spreading time scale M sigma^2 / hbar."""
    t = (
        units.kilograms(mass)
        * units.meters(sigma) ** 2
        / units.joule_seconds(hbar)
    )
    assert t.dims == (Fraction(0), Fraction(0), Fraction(1))
    return t.value


def epsilon_bound(env: EnvironmentParams, tau: float) -> float:
    """Commutation-defect bound v tau / sigma + tau / T_spr."""
    t_spr = spreading_time(env.body_mass, env.resolution, env.hbar)
    eps = (
        units.meters_per_second(env.body_speed)
        * units.seconds(tau)
        / units.meters(env.resolution)
        + units.seconds(tau) / units.seconds(t_spr)
    )
    return float(eps)


def return_time(q: float, dt: float) -> tuple[int, float]:
    """Steps (and time) for first return below start with confidence q.

    Inverts the 1/sqrt(pi n) survival tail: n = ceil(1 / (pi (1-q)^2)).
    """
    if not 0.0 < q < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    n = math.ceil(1.0 / (math.pi * (1.0 - q) ** 2))
    return n, n * dt


def displacement_per_cycle(d_a: float, t: float) -> float:
    """Positional diffusion accumulated over one cycle, sqrt(D_a T)."""
    if d_a < 0 or t < 0:
        raise ValueError("inputs must be non-negative")
    return math.sqrt(d_a * t)


def free_spreading_ratio(mass: float, sigma: float, hbar: float, t: float) -> float:
    """Dimensionless expansion parameter hbar T / (2 M sigma^2) = T / (2 T_spr).

    This is the figure the source arithmetic reports for packet spreading over
    a cycle; the absolute width change is sigma/2 times its square and is far
    smaller still.
    """
    return float(
        units.seconds(t) / (2.0 * units.seconds(spreading_time(mass, sigma, hbar)))
    )


@dataclass(frozen=True)
class EstimateReport:
    tau_collision: float            # air collision window, s
    tau_collision_radiation: float  # photon window, s
    flux: float                     # molecular flux, m^-2 s^-1
    gamma: float                    # collision rate, s^-1
    n_kicks: float                  # collisions per coarse step
    p_kick: float                   # momentum per collision, kg m/s
    d_p: float                      # momentum diffusion, kg^2 m^2 / s^3
    d_a: float                      # position diffusion, m^2 / s
    dp_ratio: float                 # random-to-classical momentum ratio
    t_spread: float                 # free spreading time, s
    tau_over_t_spread: float
    tau_over_t_spread_radiation: float
    epsilon: float                  # commutation defect, air
    epsilon_radiation: float
    n_return: int                   # steps to return at confidence q
    t_return: float                 # return time, s
    da_cycle: float                 # displacement per renewal cycle, m
    spread_ratio_cycle: float       # free-spreading parameter over one cycle
    dt: float                       # coarse step used, s
    q: float                        # return-time confidence

    def __post_init__(self):
        numeric = {k: v for k, v in asdict(self).items()}
        for name, val in numeric.items():
            if val < 0:
                raise ValueError(f"{name} must be non-negative")
        if not math.isclose(self.n_kicks, self.gamma * self.dt, rel_tol=1e-12):
            raise ValueError("n_kicks must equal gamma * dt")


def full_report(
    env: EnvironmentParams | None = None,
    dt: float = DEFAULT_COARSE_DT,
    q: float = DEFAULT_RETURN_QUANTILE,
) -> EstimateReport:
    """Assemble the whole estimate chain from the environment inputs."""
    if env is None:
        env = EnvironmentParams()
    tau_air = collision_window(env.interaction_range, env.thermal_velocity)
    tau_rad = collision_window(RADIATION_RANGE, LIGHT_SPEED)
    gamma = collision_rate(
        env.gas_number_density, env.thermal_velocity, env.body_radius
    )
    n_kicks, d_p, d_a = diffusion_coefficients(env, dt)
    t_spr = spreading_time(env.body_mass, env.resolution, env.hbar)
    n_ret, t_ret = return_time(q, dt)
    return EstimateReport(
        tau_collision=tau_air,
        tau_collision_radiation=tau_rad,
        flux=molecular_flux(env.gas_number_density, env.thermal_velocity),
        gamma=gamma,
        n_kicks=n_kicks,
        p_kick=kick_momentum(env),
        d_p=d_p,
        d_a=d_a,
        dp_ratio=kick_to_momentum_ratio(env, dt),
        t_spread=t_spr,
        tau_over_t_spread=tau_air / t_spr,
        tau_over_t_spread_radiation=tau_rad / t_spr,
        epsilon=epsilon_bound(env, tau_air),
        epsilon_radiation=epsilon_bound(env, tau_rad),
        n_return=n_ret,
        t_return=t_ret,
        da_cycle=displacement_per_cycle(d_a, t_ret),
        spread_ratio_cycle=free_spreading_ratio(
            env.body_mass, env.resolution, env.hbar, t_ret
        ),
        dt=dt,
        q=q,
    )


_TABLE_LABELS = {
    "tau_collision": ("collision window, air", "s"),
    "tau_collision_radiation": ("collision window, radiation", "s"),
    "flux": ("molecular flux", "m^-2 s^-1"),
    "gamma": ("collision rate", "s^-1"),
    "n_kicks": ("collisions per coarse step", ""),
    "p_kick": ("momentum per collision", "kg m/s"),
    "d_p": ("momentum diffusion D_p", "kg^2 m^2 s^-3"),
    "d_a": ("position diffusion D_a", "m^2/s"),
    "dp_ratio": ("random/classical momentum", ""),
    "t_spread": ("free spreading time", "s"),
    "tau_over_t_spread": ("window / spreading time, air", ""),
    "tau_over_t_spread_radiation": ("window / spreading time, radiation", ""),
    "epsilon": ("commutation defect, air", ""),
    "epsilon_radiation": ("commutation defect, radiation", ""),
    "n_return": ("return steps at confidence q", ""),
    "t_return": ("return time", "s"),
    "da_cycle": ("displacement per cycle", "m"),
    "spread_ratio_cycle": ("free-spreading parameter per cycle", ""),
    "dt": ("coarse step", "s"),
    "q": ("return-time confidence", ""),
}


def report_as_json(report: EstimateReport) -> str:
    return json.dumps(asdict(report), indent=2, sort_keys=True) + "\n"


def report_as_table(report: EstimateReport) -> str:
    rows = []
    for key, value in asdict(report).items():
        label, unit = _TABLE_LABELS[key]
        value_str = f"{value:d}" if isinstance(value, int) else f"{value:.6g}"
        rows.append((label, value_str, unit))
    width_label = max(len(r[0]) for r in rows)
    width_value = max(len(r[1]) for r in rows)
    lines = [
        f"{label:<{width_label}}  {value:>{width_value}}  {unit}".rstrip()
        for label, value, unit in rows
    ]
    return "\n".join(lines) + "\n"
