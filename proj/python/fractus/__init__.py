"""Multi-order fractional Cauchy problems, transition matrices and Duhamel formulas."""

from ._core import (
    ConvergenceError,
    DomainExitError,
    FractusError,
    ParseError,
    UnsupportedOrderError,
    caputo_derivative,
    default_grading,
    evaluate,
    frac_integral,
    gamma,
    grid,
    mittag_leffler,
    mittag_leffler_matrix,
    run,
    solve_caputo,
    solve_rl,
    theta_bound,
    transition,
)

__all__ = [
    "ConvergenceError",
    "DomainExitError",
    "FractusError",
    "ParseError",
    "UnsupportedOrderError",
    "caputo_derivative",
    "default_grading",
    "evaluate",
    "frac_integral",
    "gamma",
    "grid",
    "mittag_leffler",
    "mittag_leffler_matrix",
    "run",
    "solve_caputo",
    "solve_rl",
    "theta_bound",
    "transition",
]
