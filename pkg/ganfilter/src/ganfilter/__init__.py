"""Learned adversarial post-filter for sampled light-field frames."""

from .data import FramePairDataset, Splits, split_indices
from .infer import filter_frame, load_generator
from .losses import content_loss, ssim
from .models import Discriminator, UNetGenerator
from .train import DivergenceError, GanConfig, train

__all__ = [
    "Discriminator",
    "DivergenceError",
    "FramePairDataset",
    "GanConfig",
    "Splits",
    "UNetGenerator",
    "content_loss",
    "filter_frame",
    "load_generator",
    "split_indices",
    "ssim",
    "train",
]
