"""Fixed-point computation on cone-ordered vector spaces."""

from .delta_distance import PointSet, delta, delta_continuity_probe, membership_residual
from .errors import (ConeExitError, ConefixError, DimensionMismatchError, DomainNotClosedError,
                     KernelValidationError, NegativeCoordinateError, NotAChainError,
                     PreconditionError, QuadratureError)
from .integral_eq import (GridFunction, IntegralProblem, IntegralSolution, Quadrature,
                          apply_operator, builtin_problem, compute_g, solve, validate_kernel)
from .order_core import (ConeOrder, NormalityEstimate, OrderInterval, chain_sup,
                         estimate_normality_constant, interval_contains, leq)
from .solvers import (DecreasingResult, FiniteSetValuedMap, FixedPointResult, IterationTrace,
                      PosetAnalysis, Selector, Termination, check_h1, check_h2_equivalence,
                      enumerate_fixed_points, iterate_decreasing, iterate_increasing,
                      iterate_setvalued, track_arbitrary_start)

__version__ = "0.1.0"
