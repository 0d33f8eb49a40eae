"""Fixed points of generalized nonexpansive single- and multivalued maps on
finite-dimensional l_p spaces: condition checkers, Krasnoselskii iterations,
asymptotic centers and a common-fixed-point solver for commuting pairs."""
from .asymptotic import AsymptoticResult, RegularityReport, asymptotic_radius_center, regularity_probe
from .conditions import (
    ConditionReport,
    PairSample,
    Witness,
    check_C,
    check_Clambda,
    check_E,
    check_nonexpansive,
    minimal_mu,
    monotonicity_probe,
)
from .iteration import (
    FixSetApproximation,
    GoebelKirkReport,
    IterationTrace,
    approximate_fix_set,
    goebel_kirk_check,
    krasnoselskii_multi,
    krasnoselskii_single,
)
from .maps import (
    MapError,
    MultiValuedMap,
    SingleValuedMap,
    affine,
    constant_set,
    garcia_example,
    identity,
    interval_scaling,
    map_from_spec,
    multivalued_example,
    suzuki_example,
    with_exception,
)
from .solver import (
    CommonFixedPointProblem,
    CommonFixedPointResult,
    CommutingFailure,
    IntersectionFailure,
    SolverAbort,
    check_commuting,
    solve_common,
)
from .spaces import (
    INF,
    FinitePointSet,
    Interval,
    NearestPoint,
    NormedSpace,
    Polytope,
    distance_point_set,
    hausdorff,
    nearest_point,
    norm,
    set_from_literal,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
