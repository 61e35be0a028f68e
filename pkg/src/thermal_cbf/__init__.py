"""Safety fields from occupancy grids via the steady-state heat equation.

Obstacle boundaries are pinned at -a and safe boundaries at +b; the interior
of the margin band solves the discrete Laplace equation, giving a smooth
per-cell safety value whose zero level set separates safe from unsafe space.
A closed-form QP filter turns any nominal planar velocity into a safe one,
and a small simulator closes the loop on geometric worlds.

Hot kernels (distance transform, stencil assembly, GMRES/BiCGSTAB) run on a
compiled Cython core when available, with a numpy fallback selected at
import (THERMAL_CBF_BACKEND overrides).
"""

from ._kernels import backend_name
from .errors import (
    ContractError,
    OracleCapError,
    OutOfBoundsError,
    PgmParseError,
    ScenarioError,
    SingularSystemError,
    SolverFailure,
    ThermalCbfError,
)
from .field import (
    SafetyField,
    SynthesisParams,
    SynthesisStats,
    gradient_at,
    harmonic_residual,
    synthesize,
    value_at,
    write_field_csv,
    write_field_sidecar,
)
from .krylov import SolveStats, SolverConfig, bicgstab, gmres, jacobi_oracle, spmv
from .laplace import (
    BoundaryValues,
    LinearSystem,
    UnknownIndex,
    assemble,
    dense_oracle_solve,
    index_unknowns,
    to_matrix_market,
)
from .ogm import (
    DistanceField,
    GridMap,
    Region,
    RegionLabels,
    classify_regions,
    distance_transform,
    extract_boundaries,
    grid_to_csv,
    inflate,
    load_pgm,
)
from .robot import (
    DiffeoParams,
    NominalParams,
    RobotState,
    integrate_single,
    integrate_unicycle,
    nominal_control,
    unicycle_from_velocity,
    wrap_angle,
)
from .safety_filter import ControlInput2D, FilterOutcome, FilterParams, alpha
from .safety_filter import filter as filter_control
from .sim import (
    Circle,
    EpisodeLog,
    Metrics,
    Rect,
    Scenario,
    SenseConfig,
    load_scenario,
    metrics,
    rasterize_world,
    run_episode,
    run_multi_episode,
    scenario_from_dict,
    sense_local,
    write_episode_outputs,
)

__version__ = "0.1.0"
