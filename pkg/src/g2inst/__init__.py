"""Invariant exterior calculus and instanton ODE toolkit on R4 x S3.

The package implements, at desk scale, the cohomogeneity-one reduction of
the 7-dimensional instanton equation over the two explicit special-holonomy
profiles on R4 x S3: exact structure-constant exterior algebra on the
principal orbit, the metric and connection evolution systems with their
closed-form solutions, series seeds at the singular orbit, long-time
adaptive integration with event detection, physical diagnostics (curvature
norms, energy concentration, holonomy at infinity, bubbling comparison),
and parallel classification sweeps over seed-parameter planes.
"""

from .analysis import (
    CurvatureReport,
    ENERGY_LIMIT,
    Verdict,
    asymptotic_rate,
    bubbling_compare,
    classify,
    curvature_norm_bs,
    curvature_norm_full,
    energy_difference,
    holonomy_brackets,
    holonomy_infinity,
    q_expansion,
)
from .instanton_systems import (
    AbelianState,
    GeneralState,
    StateFG,
    StateFull,
    StateSU23,
    abelian_solution,
    alim_closed_form,
    clarke_closed_form,
    h_of_r,
    integrate_fg,
    integrate_full,
    integrate_su23,
    rhs_fg,
    rhs_full,
    rhs_general,
    rhs_su23,
)
from .integrator import StepControl, StopReason, Trajectory, detect_growth, integrate
from .invariant_calculus import (
    DomainError,
    InvariantForm,
    LieValue,
    SpacetimeForm,
    bracket_wedge,
    coframe,
    curvature,
    d_invariant,
    hitchin_residual,
    hodge_star,
    instanton_residual,
    sasaki_einstein_check,
    su3_structure,
    wedge,
)
from .metrics import (
    CoordinateMap,
    MetricProfile,
    bggg_profile,
    bs_profile,
    coordinate_map,
    integrate_metric,
    metric_ode_rhs,
    taylor_seed_metric,
)
from .moduli_scan import Axis, ScanResult, ScanSpec, frontier, scan
from .singular_ivp import (
    SingularSeed,
    extension_check,
    indicial_data,
    seed_p1,
    seed_pid,
    seed_su23_p1,
    seed_su23_pid,
)

__version__ = "0.1.0"
