"""Discontinuous Galerkin time stepping for Volterra integro-differential equations

    u'(t) + a(t) u(t) + int_0^t b(s) c(t) (t-s)^(alpha-1) u(s) ds = f(t),  u(0) = u0,

with weakly singular (0 < alpha < 1) or smooth (integer alpha) kernels on graded meshes.
"""

from .functions import FactoredFunction, constant, zero
from .kernel_engine import (HistoryAccumulator, KernelWeight, frac_moment, history_memory_block,
                            local_memory_block, tensor_gauss_block)
from .mesh import GradingReport, Mesh, MeshError, build_graded, check_grading_assumptions, step_size_condition
from .polyspace import (DgSolution, LocalBasis, QuadRule, SolutionError, gauss_jacobi, gauss_legendre,
                        legendre_values, pi_minus_project)
from .problems import (BUILTINS, ProblemSchemaError, builtin, ex1_case1, ex1_case2, ex2_fractional_wave,
                       load_problem)
from .solver import (NumericalError, ProblemSpec, SolveOptions, backward_euler_solve, dg_solve, dual_solve,
                     l2_error, nodal_error)
from .special import SeriesError, SeriesEvalPolicy, mittag_leffler, source_series
from .study import ConvergenceReport, StudyPlan, emit, predicted_order, run_dual_study, run_study

__version__ = "0.1.0"
