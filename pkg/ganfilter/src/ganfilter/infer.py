"""Checkpointed inference with exact masked passthrough.

Pixels outside the coverage mask are returned bit-for-bit from the input:
the network only ever replaces covered pixels. Arbitrary frame sizes are
reflect-padded to the U-Net's stride (8) and cropped back.
"""

from pathlib import Path

import torch
import torch.nn.functional as F

from .models import UNET_DEPTH, UNetGenerator

STRIDE = 2 ** UNET_DEPTH


def load_generator(checkpoint_path, device="cpu"):
    state = torch.load(checkpoint_path, map_location=device,
                       weights_only=True)
    generator = UNetGenerator(base_channels=state["base_channels"])
    generator.load_state_dict(state["generator"])
    generator.to(device).eval()
    return generator


def filter_frame(generator, frame, mask):
    """Apply the post-filter to one (C, H, W) frame with a (1, H, W) mask.

    Returns a tensor of the same shape; ``output[mask == 0] == frame[mask
    == 0]`` exactly.
    """
    if frame.dim() != 3 or mask.dim() != 3 or mask.shape[0] != 1:
        raise ValueError("expected (C, H, W) frame and (1, H, W) mask")
    if frame.shape[1:] != mask.shape[1:]:
        raise ValueError(f"frame {tuple(frame.shape)} and mask "
                         f"{tuple(mask.shape)} dimensions differ")
    _, h, w = frame.shape
    pad_h = (-h) % STRIDE
    pad_w = (-w) % STRIDE
    batch = frame.unsqueeze(0)
    if pad_h or pad_w:
        batch = F.pad(batch, (0, pad_w, 0, pad_h), mode="reflect")
    with torch.no_grad():
        filtered = generator(batch)[0, :, :h, :w]
    keep = mask >= 0.5
    return torch.where(keep, filtered, frame)


def filter_png(checkpoint_path, in_path, mask_path, out_path, device="cpu"):
    """PNG-to-PNG convenience wrapper used by the CLI."""
    import numpy as np
    from PIL import Image

    from .data import _load_mask, _load_rgb

    generator = load_generator(checkpoint_path, device)
    frame = _load_rgb(in_path)
    mask = _load_mask(mask_path)
    out = filter_frame(generator, frame.to(device), mask.to(device)).cpu()
    arr = (out.permute(1, 2, 0).numpy() * 255.0 + 0.5).astype(np.uint8)
    alpha = (mask[0].numpy() * 255.0 + 0.5).astype(np.uint8)
    rgba = np.dstack([arr, alpha])
    Image.fromarray(rgba, mode="RGBA").save(Path(out_path))
