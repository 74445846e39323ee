"""Reproducible benchmark harness for single-image HDR reconstruction.

Simulates LDR captures from HDR scenes, builds reference reconstructions, scores them
with display-anchored perceptually uniform metrics and ranks methods with t-tests.
"""

from .baselines import baseline_naive, baseline_plin, baseline_prec, saturation_mask
from .camsim import CameraConfig, NoiseParams, SimulationMeta, simulate
from .crf import Crf, CrfDatabase, apply_crf, clahe_crf, invert_crf, load_dorf, mean_crf, parse_dorf
from .images import HdrImage, LdrImage, load_hdr, save_hdr
from .metrics import DisplayModel, PuEncoding, linear_psnr, masked_score, pu_psnr, pu_ssim, score
from .scores import ScoreTable
from .stats import ranking_groups, welch_t_test

__version__ = "0.1.0"
