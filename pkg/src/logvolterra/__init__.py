"""Third-kind Chebyshev collocation for Volterra equations with log kernels.

Solves y(x) = f(x) + int_0^x ln(x - s) k(x, s, y(s)) ds on a mesh of
subintervals, using product-integration weights that integrate the
logarithmic factor exactly against the local polynomial expansion.
"""

from logvolterra.chebpoly import (
    ChebSeries3,
    MonomialPoly,
    discrete_transform,
    eval_expansion,
    eval_fourth_kind,
    eval_third_kind,
    fourth_kind_monomials,
)
from logvolterra.mesh import (
    CollocationGrid,
    Partition,
    build_partition,
    collocation_fractions,
    grid_point,
)
from logvolterra.quadweights import (
    HistoryWeights,
    LocalWeightMatrix,
    LogMomentTable,
    b_vector,
    c_matrix,
    i_vector,
    log_moment_table,
    q_vector,
)
from logvolterra.problems import (
    ProblemConfig,
    builtin_problems,
    eval_expression,
    get_problem,
    load_problem,
    parse_expression,
)
from logvolterra.solver import (
    ErrorReport,
    ProblemSpec,
    Solution,
    SolverError,
    error_report,
    eval_solution,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "ChebSeries3",
    "CollocationGrid",
    "ErrorReport",
    "HistoryWeights",
    "LocalWeightMatrix",
    "LogMomentTable",
    "MonomialPoly",
    "Partition",
    "ProblemConfig",
    "ProblemSpec",
    "Solution",
    "SolverError",
    "b_vector",
    "build_partition",
    "builtin_problems",
    "c_matrix",
    "collocation_fractions",
    "discrete_transform",
    "error_report",
    "eval_expansion",
    "eval_expression",
    "eval_fourth_kind",
    "eval_solution",
    "eval_third_kind",
    "fourth_kind_monomials",
    "get_problem",
    "grid_point",
    "i_vector",
    "load_problem",
    "log_moment_table",
    "parse_expression",
    "q_vector",
    "solve",
]
