"""Moving-mesh finite-difference solver for the two-temperature model of
multi-material, non-equilibrium radiation diffusion on the unit square.

The package is organized by concern:

- grid: reference grids, moving meshes, metric terms, refinement
- physics: model coefficients, materials, boundary kinds, initial states
- operators: semi-discrete assembly of the coupled (E, T) system
- linalg: sparse storage and the direct-solve contract
- stepping: SDIRK predictor-corrector integration and the positivity cutoff
- adaptation: monitor construction and MMPDE mesh motion
- driver: presets, the simulation loop, snapshots, timing reports
- diagnostics: front-position and mesh-concentration probes
"""

from .adaptation import (
    HessianField,
    MeshingParams,
    MonitorField,
    absolute_hessian,
    advance_mesh,
    build_monitor,
    compute_alpha,
    coordinate_gradient,
    functional_gradient,
    functional_value,
    mmpde_step,
    monitor_function,
    move_boundary_points,
    recover_hessian,
    smooth_monitor,
    two_level_cycle,
)
from .driver import (
    RunArtifacts,
    SimulationConfig,
    parse_config_file,
    preset,
    run_simulation,
    timing_report,
    write_snapshot,
)
from .errors import ConfigError, MeshFoldedError, SingularMatrixError
from .grid import (
    MeshMotion,
    MetricTerms,
    MovingMesh,
    ReferenceGrid,
    compute_metrics,
    mesh_at_time,
    min_jacobian,
    refine_uniform,
    uniform_mesh,
)
from .operators import (
    CoupledOperator,
    apply_boundary_conditions,
    build_coupled_operator,
    gradient_magnitude,
)
from .physics import (
    BoundarySpec,
    MaterialMap,
    PhysicsParams,
    StateFields,
    atomic_number_at,
    coupling_source,
    initial_state,
    material_conduction_coeff,
    opacity,
    radiation_diffusion_coeff,
)
from .stepping import (
    CutoffPolicy,
    SdirkTableau,
    StepSchedule,
    apply_cutoff,
    cutoff_threshold,
    predictor_corrector_step,
    sdirk2_step,
)

__version__ = "0.1.0"
