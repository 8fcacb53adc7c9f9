"""Nonlocal elliptic operators with rough kernels: evaluation, Dirichlet solvers, Hölder diagnostics."""
from .errors import (BadMeasure, DivergentTail, IntegerOrder, MaxIterations, NoContraction,
                     NonDominantMatrix, NonHolderKernel, NonlocalError, OutOfDomain, OutOfStencil,
                     SingularArgument, Unsupported)
from .grid import (EllipticityParams, GridFunction, HolderExponents, TailExpr, TailPiece, TailSpec,
                   delta2, derivative_array, finite_diff_derivative, weighted_l1_norm)
from .kernels import (KernelSpec, MollifierSpec, check_L0, check_x_holder, check_y_holder_tail,
                      kernel_eval, kernel_from_json, mollified_ellipticity, mollify_coeff,
                      mollify_kernel, oscillating_kernel)
from .operators import (OperatorFamily, QuadratureConfig, average_difference_apply, bellman_apply,
                        extremal_apply, linear_apply, positive_negative_parts,
                        translation_difference_apply)
from .holder import (SeminormQuery, adimensional_seminorm, alpha_prime, growth_control_check,
                     interpolation_claim_check, l2_poly_fit, seminorm)
from .solver import (DirichletProblem, SolveReport, ball_update_sweep, barrier_check,
                     enumerate_policies, solve_bellman_dirichlet, solve_contraction,
                     solve_linear_dirichlet, solve_tiny_ball_direct)
from .liouville import (LiouvilleInput, check_comparability, check_hypotheses, compute_P_N,
                        polynomial_conclusion_residual)
from .counterexamples import (BlowupReport, CounterexampleConfig, blowup_sweep,
                              nonlinear_identities, oscillation_identities)

__version__ = "0.1.0"
