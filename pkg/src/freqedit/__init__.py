"""Wavelet-domain velocity-field correction for multi-turn rectified-flow
image editing, verified against analytically defined synthetic flows."""

from .corrector import (CompBuffer, FreqEditConfig, FreqEditCorrector, accumulate,
                        alpha_map, apply_compensation, freqedit_corrector,
                        inject_adaptive, inject_uniform, quality_velocity)
from .editsim import (EditSession, Scene, Sprite, Texture, TurnRecord, ablation_grid,
                      apply_edit_ground_truth, default_scene, render_scene, run_session)
from .flow import (Degradation, EditCondition, OracleModel, SamplerState, Schedule,
                   VelocityModel, euler_step, lossy_model, lossy_target, oracle_model,
                   reference_velocity, sample, uniform_schedule)
from .grids import (avg_pool2, bilateral_filter, channel_l2_map, combine, gaussian_blur,
                    load_png, minmax_invert, save_png, unsharp_mask)
from .metrics import MetricSet, hf_ratio, l1, measure, psnr, ssim
from .wavelet import FilterBank, Pyramid2, band_energy, db4_filters, dwt2, hf_energy, idwt2

__version__ = "0.1.0"
