"""Wave-ray multigrid solvers for the 1D Helmholtz equation."""

from .basis import (
    BasisPair,
    OpticsCoefficients,
    constant_basis,
    continuous_adapted_basis,
    discontinuous_naive,
    geometric_optics_basis,
    optics_coefficients,
    optics_solutions,
    presmooth_basis,
)
from .errors import (
    AlignmentError,
    ConfigurationError,
    DegenerateBasisError,
    DimensionError,
    InvalidGridError,
    RelaxationBreakdown,
    SingularMatrixError,
    WaveRayError,
)
from .hierarchy import WaveHierarchy, build_amg_hierarchy, build_gmg_hierarchy, wave_cycle
from .kernels import BACKEND
from .mesh import ConstantK, CosineK, Grid1D, PiecewiseConstantK, WaveNumberField
from .operators import (
    BandedOperator,
    assemble_helmholtz,
    direct_solve,
    prolongate,
    residual,
    restrict_full_weighting,
    restrict_transpose,
)
from .rays import (
    RayCorrection,
    RaySystem,
    SeparatedResiduals,
    assemble_ray_algebraic,
    assemble_ray_geometric,
    interface_corrected_ray_row,
    ray_cycle,
    separate_residual,
    separate_residual_two_scale,
)
from .relaxation import RelaxScheme, directional_gs, gauss_seidel_sweep, kaczmarz_sweep
from .solver import (
    ConvergenceReport,
    SolverConfig,
    WaveRaySolver,
    build,
    choose_scales,
    solve,
    solve_best_of,
    wave_ray_cycle,
)

discontinuous_naive_basis = discontinuous_naive

__version__ = "0.1.0"
