"""rmsim: random-kick Schrodinger dynamics on a one-dimensional grid.

Subpackages follow the pipeline: statespace (grids, packets, observables),
geometry (equivalence classes, the (tau, s) plane, isometry checks),
ensembles (GUE sampling and kicks), dynamics (free evolution and alternation),
collapse (first-passage measurement statistics), estimates (environmental
orders of magnitude), cli (scenario runner).
"""

from .statespace import (
    Grid,
    GridState,
    PacketParams,
    PhysicalConstants,
    DIMENSIONLESS,
    delta_z,
    fs_distance,
    make_packet,
    momentum_mean,
    mu_z,
    symmetric_grid,
)
from .geometry import (
    ClassSpec,
    FoliationPoint,
    IsometryReport,
    class_distance,
    class_membership,
    foliation_coords,
    isometry_check,
    phase_space_overlap,
    scale_translate,
    tangent_orthogonality,
)
from .ensembles import GueSample, KickConfig, calibrate_step, rm_kick, sample_gue
from .dynamics import (
    ClassicalState,
    EvolutionConfig,
    FreeHamiltonian,
    alternating_evolve,
    commutator_epsilon,
    free_step,
    newtonian_reference,
    velocity_decomposition,
)
from .collapse import (
    BornReport,
    CollapseRun,
    SurvivalReport,
    born_statistics,
    reduced_plane_walk,
    renewal_cycle,
    run_collapse,
    sparre_andersen_exact,
    survival_simulation,
)
from .estimates import EnvironmentParams, EstimateReport, full_report
from .rng import derive_stream

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
