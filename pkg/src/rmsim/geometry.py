"""Detector-resolution equivalence classes and the translation-scaling plane.

A class (c, sigma) is the set of states with position expectation c and
spread at most sigma; such states are indistinguishable to a detector with
resolution sigma.  Membership is decided directly through (mu_z, delta_z).
Distances between classes have the closed form arccos(exp(-(c-d)^2/8 sigma^2)),
attained by the Gaussian representatives, and the map from class centers to
states is an isometry up to the constant 1/(2 sigma) - which isometry_check
verifies numerically against grid quadrature.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    DegenerateSpread,
    MixedResolutions,
    MixedWidths,
    ScaledBelowResolution,
    TranslatedOffGrid,
)
from .statespace import (
    DIMENSIONLESS,
    LEAKAGE_TOL,
    Grid,
    GridState,
    PacketParams,
    PhysicalConstants,
    delta_z,
    edge_leakage,
    fs_distance,
    inner,
    make_packet,
    mu_z,
)

MU_TOL_FACTOR = 0.5  # default detection bin is sigma/2 either side of center
DEGENERATE_SPREAD_CELLS = 2.0


@dataclass(frozen=True)
class ClassSpec:
    """Equivalence class of states with mu_z = center and delta_z <= resolution."""

    center: float
    resolution: float

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError("class resolution must be positive")

    @property
    def default_mu_tol(self) -> float:
        return MU_TOL_FACTOR * self.resolution


@dataclass(frozen=True)
class FoliationPoint:
    """Coordinates (tau, s) = (mu_z, ln delta_z) on the translation-scaling plane."""

    tau: float
    s: float


@dataclass(frozen=True)
class IsometryReport:
    max_abs_error: float
    samples: int
    small_sep_ratio: float  # fs_distance / (da / 2 sigma) at da = sigma/100

    def __post_init__(self):
        if self.max_abs_error < 0:
            raise ValueError("max_abs_error must be non-negative")


# Classes are closed sets; the spread comparison carries a relative slack so
# that an exact Gaussian representative (delta_z = sigma up to rounding) is
# not excluded by the last floating-point bit.
_MEMBERSHIP_SLACK = 1e-9


def class_membership(
    state: GridState, spec: ClassSpec, mu_tol: float | None = None
) -> bool:
    """True iff |mu_z - center| <= mu_tol and delta_z <= resolution."""
    if mu_tol is None:
        mu_tol = spec.default_mu_tol
    mean = mu_z(state)
    if abs(mean - spec.center) > mu_tol:
        return False
    return delta_z(state) <= spec.resolution * (1.0 + _MEMBERSHIP_SLACK)


def class_distance(spec1: ClassSpec, spec2: ClassSpec) -> float:
    """arccos(exp(-(c-d)^2 / 8 sigma^2)); realized by Gaussian representatives."""
    if not np.isclose(spec1.resolution, spec2.resolution, rtol=1e-12, atol=0.0):
        raise MixedResolutions("class distance requires equal resolutions")
    sep = spec1.center - spec2.center
    return float(np.arccos(np.exp(-(sep**2) / (8.0 * spec1.resolution**2))))


def class_distance_diagnostic(
    state: GridState, spec: ClassSpec, mu_tol: float | None = None
) -> float:
    """Surrogate distance max(0, |mu_z - c| - mu_tol) / sigma.

    Diagnostic only: cheap, monotone in center mismatch, but not a metric and
    blind to the spread condition.
    """
    if mu_tol is None:
        mu_tol = spec.default_mu_tol
    return max(0.0, abs(mu_z(state) - spec.center) - mu_tol) / spec.resolution


def phase_space_overlap(
    p1: PacketParams,
    p2: PacketParams,
    consts: PhysicalConstants = DIMENSIONLESS,
) -> float:
    """cos^2 of the Fubini-Study distance between two equal-width packets.

    Closed form exp(-da^2/4 sigma^2 - dp^2 sigma^2 / hbar^2); factorizes
    exactly into a position factor and a momentum factor.
    """
    if not np.isclose(p1.width, p2.width, rtol=1e-12, atol=0.0):
        raise MixedWidths("phase-space overlap requires equal widths")
    sigma = p1.width
    da = p1.center - p2.center
    dp = p1.momentum - p2.momentum
    return float(
        np.exp(-(da**2) / (4.0 * sigma**2) - dp**2 * sigma**2 / consts.hbar**2)
    )


def _resample(state: GridState, tau: float, lam: float) -> np.ndarray:
    """Evaluate sqrt(lam) phi(lam (z - mu - tau) + mu) on the grid.

    Cubic-spline interpolation of the stored amplitudes; points mapped outside
    the grid contribute zero.
    """
    z = state.grid.points
    mean = mu_z(state)
    zeta = lam * (z - mean - tau) + mean
    re = CubicSpline(z, state.amplitudes.real, extrapolate=False)(zeta)
    im = CubicSpline(z, state.amplitudes.imag, extrapolate=False)(zeta)
    vals = np.nan_to_num(re) + 1j * np.nan_to_num(im)
    return np.sqrt(lam) * vals


def scale_translate(state: GridState, tau: float, lam: float) -> GridState:
    """Translate mu_z by tau and shrink delta_z by the factor lam.

    The result is resampled onto the same grid by cubic interpolation and
    renormalized, so inner products with other states stay well defined.
    """
    if lam <= 0:
        raise ValueError("scaling factor must be positive")
    spread = delta_z(state)
    if spread / lam < DEGENERATE_SPREAD_CELLS * state.grid.dx:
        raise ScaledBelowResolution(
            f"target spread {spread / lam:g} below "
            f"{DEGENERATE_SPREAD_CELLS:g}*dx"
        )
    out = GridState(_resample(state, tau, lam), state.grid).normalized()
    if edge_leakage(out) > LEAKAGE_TOL:
        raise TranslatedOffGrid(
            f"outer-band mass {edge_leakage(out):.3e} exceeds {LEAKAGE_TOL:g}"
        )
    return out


def foliation_coords(state: GridState) -> FoliationPoint:
    """(mu_z, ln delta_z); rejects spreads below the 2*dx singular floor."""
    spread = delta_z(state)
    if spread < DEGENERATE_SPREAD_CELLS * state.grid.dx:
        raise DegenerateSpread(
            f"spread {spread:g} below {DEGENERATE_SPREAD_CELLS:g}*dx"
        )
    return FoliationPoint(tau=mu_z(state), s=float(np.log(spread)))


def tangent_orthogonality(state: GridState, step: float = 1e-4) -> float:
    """Normalized overlap of the translation and scaling tangent vectors.

    Central finite differences of the translation-scaling map, with the
    horizontal-lift correction (component along the state itself removed)
    before the inner product.  Expected below 1e-3 for real equal-width
    multi-peak states; for boosted (complex) states the returned value is
    informational only.
    """
    spread = delta_z(state)
    if spread < DEGENERATE_SPREAD_CELLS * state.grid.dx:
        raise DegenerateSpread("state spread too close to the grid floor")
    plus_t = _resample(state, +step, 1.0)
    minus_t = _resample(state, -step, 1.0)
    t_tau = (plus_t - minus_t) / (2.0 * step)
    plus_s = _resample(state, 0.0, float(np.exp(+step)))
    minus_s = _resample(state, 0.0, float(np.exp(-step)))
    t_s = (plus_s - minus_s) / (2.0 * step)

    dx = state.grid.dx
    phi = state.amplitudes

    def _horizontal(t: np.ndarray) -> np.ndarray:
        return t - (np.vdot(phi, t) * dx) * phi

    t_tau = _horizontal(t_tau)
    t_s = _horizontal(t_s)
    num = abs(np.vdot(t_tau, t_s) * dx)
    den = np.sqrt(np.vdot(t_tau, t_tau).real * np.vdot(t_s, t_s).real) * dx
    return float(num / den)


def isometry_check(
    grid: Grid,
    sigma: float,
    n_samples: int,
    max_sep: float,
    consts: PhysicalConstants = DIMENSIONLESS,
    csv_sink: io.TextIOBase | None = None,
) -> IsometryReport:
    """Compare cos^2 of the grid Fubini-Study distance with the Gaussian closed form.

    Samples n_samples separations evenly in (0, max_sep], packets centered
    symmetrically about the grid midpoint.  Also checks the local metric
    scaling fs_distance ~ da / (2 sigma) at da = sigma/100.
    """
    if n_samples < 1:
        raise ValueError("need at least one sample")
    mid = grid.origin + grid.length / 2.0
    seps = np.linspace(max_sep / n_samples, max_sep, n_samples)
    if csv_sink is not None:
        csv_sink.write("separation,cos2_numeric,cos2_closed_form,abs_error\n")
    max_err = 0.0
    for sep in seps:
        a, b = mid - sep / 2.0, mid + sep / 2.0
        ga = make_packet(PacketParams(a, sigma), grid, consts)
        gb = make_packet(PacketParams(b, sigma), grid, consts)
        cos2_num = float(np.cos(fs_distance(ga, gb)) ** 2)
        cos2_ref = float(np.exp(-(sep**2) / (4.0 * sigma**2)))
        err = abs(cos2_num - cos2_ref)
        max_err = max(max_err, err)
        if csv_sink is not None:
            csv_sink.write(f"{float(sep)!r},{cos2_num!r},{cos2_ref!r},{err!r}\n")

    da = sigma / 100.0
    ga = make_packet(PacketParams(mid - da / 2.0, sigma), grid, consts)
    gb = make_packet(PacketParams(mid + da / 2.0, sigma), grid, consts)
    ratio = fs_distance(ga, gb) / (da / (2.0 * sigma))
    return IsometryReport(
        max_abs_error=max_err, samples=n_samples, small_sep_ratio=float(ratio)
    )


def overlap_vs_quadrature(
    p1: PacketParams,
    p2: PacketParams,
    grid: Grid,
    consts: PhysicalConstants = DIMENSIONLESS,
) -> tuple[float, float]:
    """(closed-form cos^2 rho, |<phi,psi>|^2 by grid quadrature)."""
    closed = phase_space_overlap(p1, p2, consts)
    phi = make_packet(p1, grid, consts)
    psi = make_packet(p2, grid, consts)
    return closed, float(abs(inner(phi, psi)) ** 2)
