"""Differentiable SSIM, the weighted content loss and the relativistic
mean-squared adversarial objective."""

import math

import torch
import torch.nn.functional as F

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
_K1, _K2 = 0.01, 0.03


def _gaussian_kernel(device, dtype):
    half = SSIM_WINDOW // 2
    coords = torch.arange(-half, half + 1, device=device, dtype=dtype)
    g = torch.exp(-(coords ** 2) / (2.0 * SSIM_SIGMA ** 2))
    g = g / g.sum()
    return (g[:, None] * g[None, :])[None, None]


def ssim(a, b, data_range=1.0):
    """Mean SSIM between two (B, C, H, W) batches in [0, data_range].

    Gaussian 11x11 window, sigma 1.5, channel-wise then averaged. Fully
    differentiable; returns a scalar tensor.
    """
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {tuple(a.shape)} vs {tuple(b.shape)}")
    channels = a.shape[1]
    kernel = _gaussian_kernel(a.device, a.dtype).expand(channels, 1, -1, -1)
    c1 = (_K1 * data_range) ** 2
    c2 = (_K2 * data_range) ** 2

    def blur(x):
        return F.conv2d(x, kernel, groups=channels)

    mu_a, mu_b = blur(a), blur(b)
    var_a = blur(a * a) - mu_a * mu_a
    var_b = blur(b * b) - mu_b * mu_b
    cov = blur(a * b) - mu_a * mu_b
    numerator = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    denominator = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    return (numerator / denominator).mean()


def content_loss(output, target, alpha=0.84, beta=0.16):
    """Weighted structural/photometric loss: alpha * (1 - SSIM) + beta * L2."""
    if alpha < 0 or beta < 0 or not math.isfinite(alpha + beta):
        raise ValueError("alpha and beta must be finite and non-negative")
    if alpha + beta <= 0:
        raise ValueError("alpha + beta must be positive")
    loss = output.new_zeros(())
    if alpha > 0:
        loss = loss + alpha * (1.0 - ssim(output, target))
    if beta > 0:
        loss = loss + beta * F.mse_loss(output, target)
    return loss


def relativistic_d_loss(real_scores, fake_scores):
    """Discriminator half of the relativistic average least-squares GAN:
    real samples should score one unit above the average fake and vice
    versa."""
    real_rel = real_scores - fake_scores.mean()
    fake_rel = fake_scores - real_scores.mean()
    return 0.5 * (((real_rel - 1.0) ** 2).mean()
                  + ((fake_rel + 1.0) ** 2).mean())


def relativistic_g_loss(real_scores, fake_scores):
    """Generator half: the roles of real and fake are swapped."""
    real_rel = real_scores - fake_scores.mean()
    fake_rel = fake_scores - real_scores.mean()
    return 0.5 * (((fake_rel - 1.0) ** 2).mean()
                  + ((real_rel + 1.0) ** 2).mean())
