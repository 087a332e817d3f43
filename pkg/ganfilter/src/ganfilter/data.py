"""Frame-pair dataset: paired PNGs plus coverage masks from a manifest.

The directory layout is the one emitted by the light-field tooling's
``dataset`` verb: ``NNNN_in.png`` (synthesized frame), ``NNNN_gt.png``
(path-traced reference), ``NNNN_mask.png`` (coverage) and a
``manifest.json`` listing every view with its pose.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image
from torch.utils.data import Dataset

MIN_PAIRS = 30

# Default split proportions: approximately 85 / 8 / 7 percent, expressed as
# exact fractions so a 2619-pair corpus lands on 2220 / 204 / 195.
VAL_FRACTION = 204 / 2619
TEST_FRACTION = 195 / 2619


@dataclass(frozen=True)
class Splits:
    train: list[int]
    val: list[int]
    test: list[int]


def split_indices(count, seed=0, val_fraction=VAL_FRACTION,
                  test_fraction=TEST_FRACTION):
    """Deterministic random train/val/test split of ``count`` pair indices.

    Raises ``ValueError`` for corpora smaller than ``MIN_PAIRS``: splits of a
    handful of images produce meaningless validation scores.
    """
    if count < MIN_PAIRS:
        raise ValueError(
            f"need at least {MIN_PAIRS} pairs to build splits, got {count}")
    n_val = round(count * val_fraction)
    n_test = round(count * test_fraction)
    order = np.random.default_rng(seed).permutation(count)
    return Splits(
        train=sorted(int(i) for i in order[n_val + n_test:]),
        val=sorted(int(i) for i in order[:n_val]),
        test=sorted(int(i) for i in order[n_val:n_val + n_test]),
    )


def _load_rgb(path):
    with Image.open(path) as img:
        arr = np.asarray(img.convert("RGB"), dtype=np.float32) / 255.0
    return torch.from_numpy(arr).permute(2, 0, 1)


def _load_mask(path):
    with Image.open(path) as img:
        arr = np.asarray(img.convert("L"), dtype=np.float32) / 255.0
    return torch.from_numpy(arr >= 0.5).float().unsqueeze(0)


class FramePairDataset(Dataset):
    """Yields ``(input, target, mask)`` CHW float tensors in [0, 1].

    Target pixels outside the coverage mask are zeroed, so losses computed
    against the target never see reference content the synthesized frame
    could not have produced.
    """

    def __init__(self, pairs_dir, indices=None):
        self.root = Path(pairs_dir)
        manifest_path = self.root / "manifest.json"
        if not manifest_path.is_file():
            raise FileNotFoundError(f"no manifest.json in {self.root}")
        manifest = json.loads(manifest_path.read_text())
        self.views = manifest["views"]
        self.indices = list(range(len(self.views))) if indices is None \
            else list(indices)
        for i in self.indices:
            if not 0 <= i < len(self.views):
                raise IndexError(f"pair index {i} outside manifest "
                                 f"({len(self.views)} views)")

    def __len__(self):
        return len(self.indices)

    def __getitem__(self, item):
        view = self.views[self.indices[item]]
        inp = _load_rgb(self.root / view["input"])
        target = _load_rgb(self.root / view["target"])
        mask = _load_mask(self.root / view["mask"])
        if inp.shape != target.shape or inp.shape[1:] != mask.shape[1:]:
            raise ValueError(f"pair {view['id']}: mismatched dimensions")
        return inp, target * mask, mask
