"""Minimum-description-length feature selection: multi-task, class-aware and transfer codes."""

from .codes import (CodeCosts, MicCostParams, c_h, cost_table, l_h_subset, log_star,
                    mic_model_cost)
from .fit import Dataset, FitState, delta_se, refit_logistic, residual_bits
from .ledger import recompute_tdl
from .mic import MicSearchConfig, best_subset_for_feature, lower_bound_prune, run_mic
from .model import SelectionModel, Step
from .synth import GroundTruth, ScenarioSpec, cross_validate, generate, precision_recall
from .tpc import (TpcConfig, TpcState, run_tpc, run_tpc_forward_backward, run_tpc_streamwise,
                  tpc_model_bits, tpc_savings)
from .transfer import (TransferPrior, build_prior, run_transfer_tpc, transfer_model_bits)

__version__ = "0.1.0"
