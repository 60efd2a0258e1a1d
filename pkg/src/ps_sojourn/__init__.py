"""Sojourn times and relaxation rates of the finite-capacity M/M/1 processor-sharing queue."""

__version__ = "0.1.0"

from ._backend import NAME as backend
from .errors import (CoalescentRoots, ContourCollision, ContourError, ConvergenceError,
                     DegenerateAlpha, DomainError, IllConditioned, InvalidInitial, NearPole,
                     NoBracket, RegimeError, SingularSystem, SojournError, StepUnderflow,
                     WindowTooEarly)
from .model import (GeneratorMatrix, ModelParams, RootData, characteristic_roots,
                    generator_matrix, initial_density, root_data)
from .special import (AiryValue, airy, airy_max_root, airy_prime_max_root, gamma_fn,
                      r1_residual, solve_r1)
from .green import delta_g, delta_h, g_integral, h_branch_cut, h_contour, h_recurrence, wronskian_check
from .transform import (TransformVector, conditional_moments, resolvent_solve,
                        transform_theorem21)
from .spectrum import (AsymptoticEstimate, Spectrum, asymp_critical, asymp_subcritical,
                       asymp_supercritical, asymptotic_estimate, delta_h_roots, dominant_pole,
                       eigen_spectrum, theta_s_auto, theta_s_via_deltaH)
from .timedomain import (TimeGridSolution, invert_transform, inversion_solution, ode_evolve,
                         spectral_expand, tail_fit)
from .simulator import (RunningStats, SojournSamples, admission_weights, simulate_conditional,
                        simulate_stationary)

__all__ = [name for name in dir() if not name.startswith("_")]
