"""Numerical toolkit for singular Trudinger-Moser extremals on plane domains.

P1 finite elements on disks and polygons, a weighted-quadrature evaluation of
TM(u) = int |x|^(-2 beta) exp(gamma u^2), normalized gradient ascent for the
subcritical maximizers, Green's functions with the logarithmic singularity
subtracted, blow-up diagnostics, and the glued test-function family whose
functional values exceed the closed-form upper bound.
"""

from .bubble import (
    bubble_energy,
    bubble_energy_asymptotic,
    bubble_mass,
    liouville_mass,
    liouville_solution,
    phi0,
)
from .functional import OVERFLOW_CAP, TMParams, tm_value, tm_value_ex
from .geometry import (
    DomainSpec,
    Mesh,
    SingularQuadrature,
    build_mesh,
    integrate_singular,
    load_field_values,
    load_mesh,
    save_field_values,
    save_mesh,
)
from .green import GreenFunction, solve_green, weighted_g_squared
from .maximizer import (
    MaximizerOptions,
    MaximizerResult,
    continuation_sweep,
    maximize_subcritical,
)
from .spectral import Field, SpectralData, eigenpairs, l2_inner, norm_1alpha
from .bounds import (
    BoundReport,
    TestFunction,
    build_test_function,
    capacity_energy,
    project_test_function,
    upper_bound,
    verify_exceeds,
)
from .blowup import (
    blowup_scale,
    concentration_report,
    rescaled_profile,
    sweep_diagnostics,
    truncation_energy,
    weak_limit_compare,
)

__version__ = "0.1.0"

__all__ = [
    "OVERFLOW_CAP",
    "BoundReport",
    "DomainSpec",
    "Field",
    "GreenFunction",
    "MaximizerOptions",
    "MaximizerResult",
    "Mesh",
    "SingularQuadrature",
    "SpectralData",
    "TMParams",
    "TestFunction",
    "blowup_scale",
    "bubble_energy",
    "bubble_energy_asymptotic",
    "bubble_mass",
    "build_mesh",
    "build_test_function",
    "capacity_energy",
    "concentration_report",
    "continuation_sweep",
    "eigenpairs",
    "integrate_singular",
    "l2_inner",
    "liouville_mass",
    "liouville_solution",
    "load_field_values",
    "load_mesh",
    "maximize_subcritical",
    "norm_1alpha",
    "phi0",
    "project_test_function",
    "rescaled_profile",
    "save_field_values",
    "save_mesh",
    "solve_green",
    "sweep_diagnostics",
    "tm_value",
    "tm_value_ex",
    "truncation_energy",
    "upper_bound",
    "verify_exceeds",
    "weak_limit_compare",
    "weighted_g_squared",
]
