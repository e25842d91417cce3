"""Newton and Newton-Shamanskii solvers for the quadratic matrix equation
``A X^2 + B X + C = 0`` of discrete-time quasi-birth-death chains."""

__version__ = "0.1.0"

from .core import (
    QbdProblem,
    SolveReport,
    drift_rate,
    frechet_apply,
    q_apply,
    residual_nres,
    second_derivative_apply,
    stationary_vector,
    validate_problem,
)
from .problems import (
    make_delta_example,
    make_scalar_problem,
    random_problem,
    read_problem,
    write_problem,
)
from .solvers import (
    SolverOptions,
    fixed_point_solve,
    mmatrix_certificate,
    newton_shamanskii_solve,
    newton_solve,
    solve,
)

__all__ = [
    "QbdProblem",
    "SolveReport",
    "SolverOptions",
    "drift_rate",
    "fixed_point_solve",
    "frechet_apply",
    "make_delta_example",
    "make_scalar_problem",
    "mmatrix_certificate",
    "newton_shamanskii_solve",
    "newton_solve",
    "q_apply",
    "random_problem",
    "read_problem",
    "residual_nres",
    "second_derivative_apply",
    "solve",
    "stationary_vector",
    "validate_problem",
    "write_problem",
]
