"""Fisher information and Bayesian estimation from repeated projective
measurements on small open quantum systems."""

__version__ = "0.1.0"

from .quantum import (LindbladModel, build_liouvillian, propagate, pure_state,
                      two_level_model)
from .measurement import (MeasurementBasis, MeasurementRecord, TransitionKernel,
                          eigenbasis, outcome_probabilities, project,
                          simulate_schedule, simulate_trajectory,
                          stationary_distribution, transition_kernel)
from .fisher import (FisherScan, ZenoCoefficients, analytic_fisher, analytic_pgg,
                     fisher_binary, fisher_general, optimal_tau, sensitivity_profile,
                     short_tau_fisher, strong_drive_fisher_rate, zeno_coefficients)
from .bayes import (HybridPlan, PosteriorGrid, ambiguous_candidates, bayes_update,
                    plan_hybrid, posterior_stats, run_filter, state_distance)
