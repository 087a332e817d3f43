"""PNG encode/decode with the linear <-> sRGB transfer at the boundary.

All in-memory radiance is linear RGB; files are 8-bit sRGB PNGs with the
coverage mask in the alpha channel. One encoder path serves both the CLI
and the frame server so their outputs are byte-identical.
"""

import io

import numpy as np
from PIL import Image


def linear_to_srgb(x):
    x = np.clip(x, 0.0, 1.0)
    return np.where(x <= 0.0031308, 12.92 * x,
                    1.055 * np.power(x, 1.0 / 2.4) - 0.055)


def srgb_to_linear(x):
    x = np.clip(x, 0.0, 1.0)
    return np.where(x <= 0.04045, x / 12.92,
                    np.power((x + 0.055) / 1.055, 2.4))


def encode_u8(linear_rgb):
    return np.round(linear_to_srgb(linear_rgb) * 255.0).astype(np.uint8)


def frame_png_bytes(frame):
    """Encode a FrameResult as PNG bytes (sRGB, alpha = coverage)."""
    h, w, _ = frame.image.shape
    rgba = np.empty((h, w, 4), dtype=np.uint8)
    rgba[:, :, :3] = encode_u8(frame.image)
    rgba[:, :, 3] = np.where(frame.coverage, 255, 0).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(rgba, mode="RGBA").save(buf, format="PNG")
    return buf.getvalue()


def save_frame_png(frame, path):
    data = frame_png_bytes(frame)
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


def save_image_png(linear_rgb, path):
    """Encode a plain linear RGB image (no mask) as an opaque PNG."""
    rgb = encode_u8(linear_rgb)
    Image.fromarray(rgb, mode="RGB").save(path, format="PNG")


def load_png(path):
    """Returns (values in [0,1] as stored, i.e. sRGB-encoded, and alpha mask).

    Alpha is all-true for images without an alpha channel.
    """
    img = Image.open(path)
    arr = np.asarray(img)
    if arr.ndim == 2:
        arr = arr[:, :, None].repeat(3, axis=2)
    if arr.shape[2] == 4:
        alpha = arr[:, :, 3] > 0
        rgb = arr[:, :, :3]
    else:
        alpha = np.ones(arr.shape[:2], dtype=bool)
        rgb = arr[:, :, :3]
    return rgb.astype(np.float64) / 255.0, alpha
