"""Optimal thermal insulation of a heat-conducting body by a free-boundary layer.

Finite-element state and eigenvalue solvers on star-shaped domains, a
derivative-free optimizer over layer shapes, closed-form radial oracles, and a
verifier for the explicit bounds satisfied by minimizers.
"""

__version__ = "0.1.0"

from .bessel import bessel_disk_eigenvalue, j0, j1
from .bounds import (
    BoundsReport,
    diffineq_threshold,
    l2_norm_bound,
    linf_check,
    lower_bound_check,
    stampacchia_threshold,
    sublevel_volume_scan,
    support_measure_bound,
    verify_state,
)
from .fem import (
    SourceField,
    assemble_boundary_mass,
    assemble_load,
    assemble_mass,
    assemble_stiffness,
    solve_spd,
)
from .geometry import (
    Boundary,
    LayerShape,
    Mesh,
    RadialShape,
    Region,
    mesh_disk,
    mesh_layered,
    mesh_polygon,
    tubular_volume,
)
from .optimize import (
    OptimizationTrace,
    evaluate_shape_energy,
    n2_existence_guard,
    optimize_shape,
    radial_profile_search,
)
from .radial import radial_energy, radial_optimal_radius, radial_state
from .spectral import EigenResult, faber_krahn_gap, rayleigh_quotient, robin_eigenvalue, scaling_bound_check
from .state import (
    EnergyReport,
    StateSolution,
    energy,
    maximum_principle_check,
    reduced_energy_residual,
    solve_dirichlet,
    solve_state,
)
