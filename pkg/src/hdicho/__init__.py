"""hdicho: numerical analysis of uniform h-dichotomies of x' = A(t) x.

Decides and quantifies dichotomies of nonautonomous linear ODE systems
measured against a growth rate h: builds the ordered abelian group h
induces on time, verifies/estimates dichotomy constants against the
transition matrices, relates dichotomy to noncriticality and
expansiveness, splices half-line dichotomies through the index, and
applies the generalized Floquet criterion via the monodromy matrix.

The transition engine runs on a compiled adaptive Runge-Kutta core with
a pure-Python fallback selected at import (see ``hdicho.integrate``).
"""

__version__ = "0.1.0"

from .dichotomy import (  # noqa: F401
    AuditSettings,
    ConstantProjector,
    bounded_solution_search,
    bounded_subspace,
    combine_projectors,
    constant_projector,
    equivalence_audit,
    estimate_constants,
    expansive_check,
    extend_projector,
    full_line_decide,
    growth_bound,
    index,
    noncritical_check,
    projector_compat,
    split_solution,
    verify_dichotomy,
)
from .evaluator import TransitionEvaluator  # noqa: F401
from .floquet import (  # noqa: F401
    FloquetContext,
    floquet_constants,
    gfs_residual,
    hyperbolicity_decide,
    monodromy,
    periodicity_residuals,
    spectral_projector,
    stability_audit,
)
from .growth import (  # noqa: F401
    GrowthRate,
    PartitionSpec,
    abs_star,
    dist,
    growth_rate,
    identity_element,
    in_ball,
    partition,
    star,
    star_inverse,
    star_power,
)
from .systems import LinearSystem, expression_system, make_builtin  # noqa: F401
