"""Occupation times of spectrally negative Levy processes and step options.

Hyper-exponential jump-diffusion models get closed forms for the scale
functions, the joint Laplace-domain law of the process and its occupation
time of an interval, and the Laplace transform of a down-and-out step call.
A Monte Carlo oracle validates all of them.
"""

from .errors import (AbscissaTooSmall, BracketFailure, ConvergenceError, DegenerateRoots, DomainError,
                     InversionUnstable, ModelError, NumericalError, ScaleOverflow)
from .identities import IdentityResult, run_identity_suite
from .inversion import gaver_stehfest, invert_laplace, talbot
from .levy_model import HyperExpModel, RootSet, laplace_exponent, model_from_params, phi, psi_divdiff, roots
from .mc_oracle import (SimConfig, estimate_exit, estimate_first_passage, estimate_joint, estimate_option,
                        estimate_option_curve)
from .occupation import (DensitySlice, Finite, HalfLineBelow, TransformQuery, density_slice, evaluate,
                         h_kernel, joint_density_halfline, joint_density_interval, joint_density_unit,
                         one_sided_limits, potential_density, w_curly)
from .pricing import PriceCurve, StepOptionContract, price_step_option, step_option_lt_general, step_option_lt_hejd
from .scale_fn import ScaleEvaluator, scale_w, scale_z

__version__ = "0.1.0"
