"""Certificates of polynomial nonnegativity via perturbed sums of squares.

The package certifies nonnegativity on boxes and on basic closed
semialgebraic sets by computing, for a chosen perturbation family, the
minimal weight at which the perturbed polynomial becomes a sum of squares
(or a member of the truncated preordering), together with explicit square
decompositions.  A dense primal-dual interior-point solver is embedded;
no external SDP solver is required.
"""

from .errors import (ConvergenceFailureError, DegreeTooLowError,
                     DimensionMismatchError, HypothesisUnmetError,
                     IncompleteMomentsError, NoSamplesAcceptedError,
                     NotFoundWithinRMaxError, NotPsdError, ParseError,
                     SolverFailureError, TooManyGeneratorsError,
                     VariableOutOfRangeError)
from .moments import (MomentMatrix, MomentVector, cauchy_schwarz_check,
                      check_lemma1, check_lemma3, moment_matrix, psd_check)
from .parsing import parse, unparse
from .polynomials import (MonomialBasis, Multidegree, Polynomial, basis_size,
                          grlex_key, multidegrees_upto, scale_box, theta_big,
                          theta_small)
from .preorder import (PreorderCertificate, PreorderTerm, SemialgebraicSystem,
                       build_preorder_sdp, dump_system, enumerate_products,
                       epsilon_star_preorder, load_system, membership,
                       verify_preorder_obj)
from .probe import ProbeReport, run_probe
from .rng import SplitMix64
from .sdp import (SdpProblem, SdpSolution, SolveStatus, SolverSettings,
                  ConstraintRow, dump_problem, eigendecompose, min_eigenvalue,
                  solve)
from .sos import (ApproximationResult, GramCertificate, THETA_BIG, THETA_SMALL,
                  approximate_on_box, build_gram_system, build_moment_system,
                  epsilon_star, extract_certificate, gram_polynomial, is_sos,
                  minimal_r, perturbation_polynomial, verify_certificate,
                  verify_certificate_obj)

__version__ = "0.1.0"
