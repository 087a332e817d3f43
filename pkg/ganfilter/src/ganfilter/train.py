"""Training loop: relativistic adversarial fine-tuning of the U-Net
post-filter, with best-validation checkpointing and CSV curves."""

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import torch
from torch.utils.data import DataLoader

from .data import FramePairDataset, split_indices
from .losses import content_loss, relativistic_d_loss, relativistic_g_loss, ssim
from .models import Discriminator, UNetGenerator


@dataclass(frozen=True)
class GanConfig:
    epochs: int = 5
    batch_size: int = 4
    learning_rate: float = 2e-4
    seed: int = 0
    alpha: float = 0.84
    beta: float = 0.16
    adv_weight: float = 0.01
    base_channels: int = 16
    dropout: float = 0.5
    split_seed: int = 0

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")
        if self.alpha + self.beta <= 0:
            raise ValueError("alpha + beta must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")

    @classmethod
    def from_file(cls, path):
        return cls(**json.loads(Path(path).read_text()))


class DivergenceError(RuntimeError):
    """Raised when a loss goes non-finite; the last good checkpoint is kept."""


def _masked_val_ssim(generator, loader, device):
    generator.eval()
    total, count = 0.0, 0
    with torch.no_grad():
        for inp, target, mask in loader:
            inp, target, mask = inp.to(device), target.to(device), mask.to(device)
            out = generator(inp) * mask
            total += ssim(out, target).item() * inp.shape[0]
            count += inp.shape[0]
    generator.train()
    return total / max(count, 1)


def _checkpoint(path, generator, discriminator, config, epoch, val_ssim):
    torch.save({
        "generator": generator.state_dict(),
        "discriminator": discriminator.state_dict(),
        "config": asdict(config),
        "base_channels": config.base_channels,
        "epoch": epoch,
        "val_ssim": val_ssim,
    }, path)


def train(pairs_dir, out_dir, config=GanConfig(), device="cpu", log=print):
    """Train on a frame-pair directory; writes ``checkpoint.pt`` (best
    validation SSIM) and ``curves.csv`` into ``out_dir``.

    Returns the per-epoch history as a list of dicts. Raises
    ``DivergenceError`` on NaN/Inf losses, keeping the last good checkpoint
    on disk.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dataset = FramePairDataset(pairs_dir)
    splits = split_indices(len(dataset.views), seed=config.split_seed)
    train_loader = DataLoader(
        FramePairDataset(pairs_dir, splits.train),
        batch_size=config.batch_size, shuffle=True,
        generator=torch.Generator().manual_seed(config.seed))
    val_loader = DataLoader(FramePairDataset(pairs_dir, splits.val),
                            batch_size=config.batch_size)

    torch.manual_seed(config.seed)
    generator = UNetGenerator(config.base_channels).to(device)
    discriminator = Discriminator(config.base_channels, config.dropout).to(device)
    opt_g = torch.optim.Adam(generator.parameters(), lr=config.learning_rate,
                             betas=(0.5, 0.999))
    opt_d = torch.optim.Adam(discriminator.parameters(),
                             lr=config.learning_rate, betas=(0.5, 0.999))

    checkpoint_path = out / "checkpoint.pt"
    history = []
    best_val = -math.inf
    for epoch in range(config.epochs):
        sums = {"g_loss": 0.0, "d_loss": 0.0, "adv_loss": 0.0}
        batches = 0
        for inp, target, mask in train_loader:
            inp, target, mask = inp.to(device), target.to(device), mask.to(device)
            fake = generator(inp) * mask

            real_scores = discriminator(target)
            fake_scores = discriminator(fake.detach())
            d_loss = relativistic_d_loss(real_scores, fake_scores)
            opt_d.zero_grad()
            d_loss.backward()
            opt_d.step()

            adv = relativistic_g_loss(discriminator(target), discriminator(fake))
            g_loss = content_loss(fake, target, config.alpha, config.beta) \
                + config.adv_weight * adv
            opt_g.zero_grad()
            g_loss.backward()
            opt_g.step()

            if not (torch.isfinite(g_loss) and torch.isfinite(d_loss)):
                raise DivergenceError(
                    f"non-finite loss in epoch {epoch}; last good checkpoint "
                    f"kept at {checkpoint_path}")
            sums["g_loss"] += g_loss.item()
            sums["d_loss"] += d_loss.item()
            sums["adv_loss"] += adv.item()
            batches += 1

        val = _masked_val_ssim(generator, val_loader, device)
        record = {"epoch": epoch,
                  **{k: v / max(batches, 1) for k, v in sums.items()},
                  "val_ssim": val}
        history.append(record)
        log(f"epoch {epoch}: g={record['g_loss']:.4f} "
            f"d={record['d_loss']:.4f} val_ssim={val:.4f}")
        if val > best_val:
            best_val = val
            _checkpoint(checkpoint_path, generator, discriminator, config,
                        epoch, val)

    with open(out / "curves.csv", "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["epoch", "g_loss", "d_loss", "adv_loss", "val_ssim"])
        writer.writeheader()
        writer.writerows(history)
    return history
