"""Mixed-membership estimation for noisy 3-mode tensors.

Pipeline: diagonal-deletion spectral initialization, higher-order orthogonal
iteration (HOOI), then successive projection on each mode's factor to read
off membership matrices.
"""

__version__ = "0.1.0"

from .evaluation import (align_memberships, kmedians, misclustering, perfect_recovery,
                         sintheta_report)
from .hooi import (FactorSet, HooiOptions, core_estimate, dd_init, default_iters, estimate_snr,
                   hooi)
from .linalg import (hollow, incoherence, procrustes_sign, sin_theta, svd_left_top,
                     sym_eig_top, tensor_kappa, tensor_lambda_min, two_inf_norm)
from .model import (MixedModel, NoiseSpec, make_rng, sample_blockmodel,
                    sample_blockmodel_membership,
                    sample_core, sample_membership, sample_mixed_model, sample_noise,
                    synth_tensor)
from .rank import select_ranks
from .simulate import ExperimentConfig, load_config, run_sweep
from .spa import clean_memberships, estimate_all, memberships_from_factors, spa_corners
from .tensor_core import (matricize, mode_product, multilinear, read_tensor, refold,
                          write_tensor)
