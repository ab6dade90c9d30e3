"""blowlab: numerical laboratory for finite-time blow-up in abstract wave
equations P u_tt + A u = F(u).

The package provides condition checkers for blow-up with arbitrary positive
initial energy, a constructive initial-data builder hitting any prescribed
energy, discretized model problems (Klein-Gordon, generalized Boussinesq,
plate/beam, wave with nonlinear boundary flux, and a scalar oracle), an
energy-respecting leapfrog integrator with adaptive stepping near the
singularity, and concavity/energy diagnostics that turn the supporting
inequalities into runtime assertions.
"""

from .algebra import (
    DiscreteSpace,
    GeneralizedEigResult,
    SpdOperator,
    build_bilaplacian,
    build_laplacian,
    directional_laplacian,
    identity_operator,
    inner,
    interval_dirichlet,
    interval_flux,
    min_generalized_eig,
    op_apply,
    op_solve,
    quad_form,
    rectangle_dirichlet,
)
from .criteria import (
    CriteriaReport,
    GrowthCurve,
    check_kg_condition,
    check_levine_conditions,
    check_nb_condition,
    energy,
    levine_time_bound,
    psi_lower_bound,
    t_star_threshold,
)
from .data_builder import (
    BuiltData,
    SeedPair,
    build_positive_energy_data,
    c1_threshold,
    normalize_pair,
    solve_H_root,
)
from .diagnostics import (
    Trajectory,
    check_growth_vs_bound,
    check_inf1,
    concavity_defect,
    ddpsi_eq,
    dpsi,
    energy_drift,
    first_threshold_index,
    psi,
)
from .integrator import (
    ABORTED,
    BLEW_UP,
    SURVIVED,
    BlowupVerdict,
    RunConfig,
    State,
    adapt_dt,
    run,
    step,
)
from .models import (
    ModelSpec,
    make_boussinesq,
    make_klein_gordon,
    make_nonlinear_boundary,
    make_plate,
    make_scalar_ode,
)
from .nonlinearity import (
    FgCertificate,
    Nonlinearity,
    boundary_nl,
    certify_FG,
    eval_F,
    eval_G,
    kirchhoff_nl,
    pointwise_r0,
    polynomial_nl,
    power_nl,
    zero_nl,
)
from .scenario import (
    RunReport,
    Scenario,
    ScenarioError,
    parse_scenario,
    run_scenario,
    serialize_scenario,
    write_outputs,
)

__version__ = "0.1.0"
