import json

import numpy as np
import pytest
from PIL import Image


def write_pairs(root, count, size=32, seed=0, pattern_amplitude=0.25,
                mask_fraction=0.85):
    """Synthetic frame-pair corpus: target images are smooth random blobs,
    inputs are the targets plus one fixed additive artifact pattern, masks
    carve out a deterministic uncovered border region.

    Returns the fixed pattern so tests can reason about it.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:size, 0:size]
    pattern = pattern_amplitude * np.sin(xx * 1.3)[..., None] \
        * np.cos(yy * 0.7)[..., None] * np.ones((1, 1, 3))
    mask = np.ones((size, size), dtype=bool)
    border = max(1, int(size * (1.0 - mask_fraction) / 2.0))
    mask[:border, :] = False
    mask[:, -border:] = False

    views = []
    for v in range(count):
        base = rng.uniform(0.2, 0.8, size=(4, 4, 3))
        target = np.kron(base, np.ones((size // 4, size // 4, 1)))
        target = np.clip(target, 0.0, 1.0)
        inp = np.clip(target + pattern, 0.0, 1.0)
        stem = f"{v:04d}"
        Image.fromarray((inp * 255 + 0.5).astype(np.uint8)).save(
            root / f"{stem}_in.png")
        Image.fromarray((target * 255 + 0.5).astype(np.uint8)).save(
            root / f"{stem}_gt.png")
        Image.fromarray(np.where(mask, 255, 0).astype(np.uint8),
                        mode="L").save(root / f"{stem}_mask.png")
        views.append({"id": stem, "input": f"{stem}_in.png",
                      "target": f"{stem}_gt.png", "mask": f"{stem}_mask.png",
                      "pose": {"eye": [2.5, 0.0, 0.9]}})
    (root / "manifest.json").write_text(
        json.dumps({"field": "synthetic", "scene": "synthetic",
                    "views": views}) + "\n")
    return pattern, mask


@pytest.fixture(scope="session")
def synthetic_pairs(tmp_path_factory):
    root = tmp_path_factory.mktemp("pairs")
    pattern, mask = write_pairs(root, count=40, size=32, seed=0)
    return root, pattern, mask
