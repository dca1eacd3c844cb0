"""Precoder and radar-covariance design for joint radar-communication arrays.

Two transmission designs trade weighted sum rate against probing power at a
radar target under per-antenna power constraints:

* separated deployment, solved by WMMSE alternation with exact convex block
  solves (``sep_solver``);
* shared deployment, solved by WMMSE alternation with a
  majorization-minimization precoder step (``shared_solver``).

``baselines`` provides the frequency/time-division reference systems and
``harness`` the seeded Monte Carlo experiments behind the ``radcom`` CLI.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND as kernel_backend
from .baselines import (BaselineLabel, BaselinePoint, frequency_division_point,
                        mulp_wmmse, radar_max_power_covariance,
                        time_division_point)
from .model import (ArrayGeometry, ChannelRealization, Deployment,
                    DeploymentSpec, beampattern, dbm_to_linear,
                    linear_to_dbm, probing_power_separated,
                    probing_power_shared, sample_channels, steering_vector,
                    wsr_separated, wsr_shared)
from .sep_solver import (InitStrategy, SepSolution, SepSolverConfig, build_Z,
                         run_wmmse_sdp, solve_covariance_subproblem,
                         solve_precoder_subproblem)
from .shared_solver import (MmConfig, QuadraticModel, SharedSolution,
                            SpectralMethod, assemble_quadratic_model,
                            devectorize, mm_update, run_mm_inner,
                            run_wmmse_mm, spectral_bound, vectorize)
from .wmmse import (SurrogateObjective, WmmseState,
                    surrogate_objective_separated, surrogate_objective_shared,
                    update_wg_separated, update_wg_shared)
