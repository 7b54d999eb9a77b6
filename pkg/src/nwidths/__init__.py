"""Certified bounds on widths and s-numbers of matrices restricted to convex bodies."""
from .lp import InfeasibleError, LpError, LpProblem, LpResult, UnboundedError, lp_solve
from .numerics import (ChebyshevResult, InconsistentObservationError, InscribedBall,
                       NotInjectiveError, SearchConfig, SectionResult, chebyshev_center,
                       inscribed_ball, max_seminorm_on_section, nullspace, svd)
from .recovery import (InformationMap, MonteCarloResult, RecoveryReport, best_information,
                       optimal_recovery, sphere_mc_lower_bound, worst_case_error)
from .spaces import (ConvexBody, Functional, HPolytope, Instance, LpBall, NormTag, Operator,
                     Shifted, Simplex, Subspace, VPolytope, half_difference_body, membership,
                     norm_eval, norming_functional, support_value)
from .verify import (InequalityReport, RateReport, check_carl, check_geometric_mean,
                     check_hilbert_target, check_kolmogorov_relations, check_ordering,
                     check_regularity, check_superpolynomial, default_suite, fit_rate,
                     run_suite)
from .widths import (ALL_LINEAR, AllLinear, Bounds, FiniteSet, WidthKind, approximation,
                     bernstein, compute_width, gelfand, hilbert, kolmogorov, singular_widths,
                     standard_information)
from .witness import (ChainCertificate, ChainStep, ChainVariant, UncertifiedError,
                      WitnessChain, build_chain, certify_chain, chain_gelfand_lower)

__version__ = "0.1.0"
