"""Discretized one-dimensional state space.

States are complex amplitude vectors on a uniform grid, normalized under the
rectangle-rule inner product <phi, psi> = sum conj(phi_k) psi_k dx.  The grid
is a hard truncation of the line: observables assume no wraparound, which is
protected by the edge-leakage invariant.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import (
    GridMismatch,
    NotNormalized,
    PacketTouchesBoundary,
    WidthUnresolvable,
)

NORM_TOL = 1e-10          # post-normalize guarantee
OBSERVABLE_NORM_TOL = 1e-6  # precondition for mu_z / delta_z
LEAKAGE_TOL = 1e-8        # mass allowed in the outer bands
EDGE_BAND_FRACTION = 0.05  # width of each outer band, as a fraction of L
MIN_WIDTH_CELLS = 4.0     # sigma >= 4 dx resolvability floor
BOUNDARY_MARGIN_SIGMAS = 8.0


@dataclass(frozen=True)
class Grid:
    """Uniform grid of n_points cells covering [origin, origin + length)."""

    n_points: int
    length: float
    origin: float = 0.0

    def __post_init__(self):
        if self.n_points < 64:
            raise ValueError("grid needs at least 64 points")
        if not self.length > 0:
            raise ValueError("grid length must be positive")

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def points(self) -> np.ndarray:
        """Cell midpoints; symmetric grids have sum(z) == 0 exactly."""
        return self.origin + (np.arange(self.n_points) + 0.5) * self.dx

    @property
    def edges(self) -> tuple[float, float]:
        return (self.origin, self.origin + self.length)

    def wavenumbers(self) -> np.ndarray:
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)


def symmetric_grid(n_points: int, half_length: float) -> Grid:
    """Grid covering [-half_length, half_length)."""
    return Grid(n_points=n_points, length=2.0 * half_length, origin=-half_length)


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.0
    mass: float = 1.0

    def __post_init__(self):
        if self.hbar <= 0 or self.mass <= 0:
            raise ValueError("hbar and mass must be positive")


DIMENSIONLESS = PhysicalConstants()


@dataclass(frozen=True)
class PacketParams:
    """Gaussian packet: center, width (position std), mean momentum."""

    center: float
    width: float
    momentum: float = 0.0

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("packet width must be positive")


@dataclass(frozen=True, eq=False)
class GridState:
    """Immutable amplitude vector on a grid."""

    amplitudes: np.ndarray
    grid: Grid

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.grid.n_points,):
            raise ValueError("amplitude length does not match grid")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2) * self.grid.dx))

    def normalized(self) -> "GridState":
        n = self.norm
        if n == 0.0:
            raise ValueError("cannot normalize the zero state")
        return GridState(self.amplitudes / n, self.grid)


def inner(phi: GridState, psi: GridState) -> complex:
    if phi.grid != psi.grid:
        raise GridMismatch("states live on different grids")
    return complex(np.vdot(phi.amplitudes, psi.amplitudes) * phi.grid.dx)


def _require_normalized(state: GridState, tol: float = OBSERVABLE_NORM_TOL) -> None:
    if abs(state.norm - 1.0) > tol:
        raise NotNormalized(f"norm deviates from 1 by {abs(state.norm - 1.0):.3e}")


def edge_leakage(state: GridState) -> float:
    """Probability mass in the outer EDGE_BAND_FRACTION of each side."""
    n = state.grid.n_points
    band = max(1, int(np.ceil(EDGE_BAND_FRACTION * n)))
    dens = np.abs(state.amplitudes) ** 2 * state.grid.dx
    return float(dens[:band].sum() + dens[-band:].sum())


def make_packet(
    params: PacketParams,
    grid: Grid,
    consts: PhysicalConstants = DIMENSIONLESS,
    margin_sigmas: float = BOUNDARY_MARGIN_SIGMAS,
) -> GridState:
    """Normalized Gaussian packet with a plane-wave momentum phase.

    Density is the Gaussian with mean ``center`` and std ``width``; the phase
    factor exp(i p z / hbar) carries the mean momentum and leaves the density,
    mu_z and delta_z untouched.  ``margin_sigmas`` relaxes the boundary
    precondition for callers (detector-class geometry) that deliberately trade
    edge margin for separation; the default is the strict 8 sigma rule.
    """
    if params.width < MIN_WIDTH_CELLS * grid.dx:
        raise WidthUnresolvable(
            f"width {params.width:g} below {MIN_WIDTH_CELLS:g}*dx = "
            f"{MIN_WIDTH_CELLS * grid.dx:g}"
        )
    lo, hi = grid.edges
    margin = margin_sigmas * params.width
    if params.center - lo < margin or hi - params.center < margin:
        raise PacketTouchesBoundary(
            f"center {params.center:g} within {margin_sigmas:g} sigma "
            f"of a grid edge"
        )
    z = grid.points
    envelope = (2.0 * np.pi * params.width**2) ** -0.25 * np.exp(
        -((z - params.center) ** 2) / (4.0 * params.width**2)
    )
    amps = envelope * np.exp(1j * params.momentum * z / consts.hbar)
    return GridState(amps, grid).normalized()


def mu_z(state: GridState) -> float:
    """Position expectation sum(z |phi|^2) dx."""
    _require_normalized(state)
    dens = np.abs(state.amplitudes) ** 2
    return float(np.sum(state.grid.points * dens) * state.grid.dx)


def delta_z(state: GridState) -> float:
    """Position standard deviation about mu_z."""
    _require_normalized(state)
    dens = np.abs(state.amplitudes) ** 2 * state.grid.dx
    mean = float(np.sum(state.grid.points * dens))
    var = float(np.sum((state.grid.points - mean) ** 2 * dens))
    return float(np.sqrt(max(var, 0.0)))


def momentum_mean(state: GridState, consts: PhysicalConstants = DIMENSIONLESS) -> float:
    """<-i hbar d/dz> via the spectral derivative."""
    _require_normalized(state)
    k = state.grid.wavenumbers()
    dphi = np.fft.ifft(1j * k * np.fft.fft(state.amplitudes))
    val = np.vdot(state.amplitudes, -1j * consts.hbar * dphi) * state.grid.dx
    return float(val.real)


def fs_distance(phi: GridState, psi: GridState) -> float:
    """Fubini-Study distance arccos|<phi, psi>|, in [0, pi/2].

    Invariant under independent global phases of either argument.
    """
    _require_normalized(phi)
    _require_normalized(psi)
    overlap = abs(inner(phi, psi))
    return float(np.arccos(np.clip(overlap, 0.0, 1.0)))


# --- serialization -----------------------------------------------------------

_CSV_HEADER = "index,z,re,im"


def state_to_csv(state: GridState) -> str:
    """Text form: one metadata line with the grid, then (index, z, re, im)."""
    g = state.grid
    buf = io.StringIO()
    buf.write(f"# grid n_points={g.n_points} length={g.length!r} origin={g.origin!r}\n")
    buf.write(_CSV_HEADER + "\n")
    z = g.points
    for k, (zk, ak) in enumerate(zip(z, state.amplitudes)):
        buf.write(f"{k},{float(zk)!r},{float(ak.real)!r},{float(ak.imag)!r}\n")
    return buf.getvalue()


def state_from_csv(text: str) -> GridState:
    lines = text.strip().splitlines()
    if not lines or not lines[0].startswith("# grid"):
        raise ValueError("missing grid metadata line")
    meta = dict(item.split("=") for item in lines[0][len("# grid") :].split())
    grid = Grid(
        n_points=int(meta["n_points"]),
        length=float(meta["length"]),
        origin=float(meta["origin"]),
    )
    if lines[1] != _CSV_HEADER:
        raise ValueError(f"expected header {_CSV_HEADER!r}")
    amps = np.zeros(grid.n_points, dtype=np.complex128)
    for line in lines[2:]:
        idx, _z, re, im = line.split(",")
        amps[int(idx)] = float(re) + 1j * float(im)
    return GridState(amps, grid)
