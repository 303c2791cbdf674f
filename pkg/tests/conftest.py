import numpy as np
import pytest

from rmsim import Grid, PacketParams, make_packet
from rmsim.ensembles import GueSample


@pytest.fixture(scope="session")
def grid512():
    return Grid(n_points=512, length=40.0, origin=-20.0)


@pytest.fixture(scope="session")
def grid64():
    return Grid(n_points=64, length=16.0, origin=-8.0)


@pytest.fixture()
def unit_packet(grid512):
    return make_packet(PacketParams(center=0.0, width=1.0), grid512)


def random_state(grid, rng):
    amps = rng.standard_normal(grid.n_points) + 1j * rng.standard_normal(grid.n_points)
    from rmsim import GridState

    return GridState(amps, grid).normalized()


def sample_goe(n, scale, rng):
    """GOE draw, test-suite only: the isotropy proxy must fail for it.

    Orthogonal-invariant convention: E H_jk^2 = scale^2 off-diagonal,
    E H_jj^2 = 2 scale^2.
    """
    x = rng.standard_normal((n, n))
    h = (x + x.T) / np.sqrt(2.0)
    return GueSample(dimension=n, entries=(h * scale).astype(np.complex128), scale=scale)
