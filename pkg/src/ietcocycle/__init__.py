"""Interval exchanges, renormalization and twisted cocycles."""
from .combinatorics import (Permutation, RauzyDiagram, genus_and_singularities, omega, parse_permutation,
                            path_matrix, rauzy_class, rauzy_matrix, rauzy_move, roof_vector,
                            standard_zipping_vector)
from .errors import IetError
from .experiments import (ResultRecord, RunConfig, run, run_discrepancy, run_kz_ratio,
                          run_positivity_fibers, run_spectral_dim)
from .iet import (IetMap, TwistParameter, birkhoff_sum, build_iet, compose_power, discrepancy,
                  twisted_birkhoff_sum)
from .lyapunov import (EstimatorConfig, TwistedLyapunov, ZorichLyapunov, top_exponent_twisted,
                       top_exponents_zorich, twisted_sum_growth)
from .renorm import rauzy_step, zorich_orbit, zorich_step
from .suspension import build_suspension, cover_check, surface_profile, untwist_operator
from .twisted import TwistedMatrix, twisted_rauzy_matrix, twisted_zorich_matrix

__version__ = "0.1.0"
