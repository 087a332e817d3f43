"""CLI: ``gan train`` and ``gan infer``."""

import functools
import sys

import click


def _fail_cleanly(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except Exception as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
    return wrapper


@click.group()
def main():
    """Adversarial post-filter for sampled light-field frames."""


@main.command("train")
@click.option("--pairs", "pairs_dir", required=True,
              type=click.Path(exists=True, file_okay=False),
              help="frame-pair directory with manifest.json")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="JSON file overriding GanConfig defaults")
@click.option("--device", default="cpu")
@_fail_cleanly
def train_cmd(pairs_dir, out_dir, config_path, device):
    """Train; writes checkpoint.pt (best val SSIM) and curves.csv."""
    from .train import GanConfig, train
    config = GanConfig.from_file(config_path) if config_path else GanConfig()
    history = train(pairs_dir, out_dir, config, device=device,
                    log=click.echo)
    best = max(h["val_ssim"] for h in history)
    click.echo(f"done: best val SSIM {best:.4f}, artifacts in {out_dir}")


@main.command("infer")
@click.option("--checkpoint", required=True, type=click.Path(exists=True))
@click.option("--frame", "in_path", required=True, type=click.Path(exists=True))
@click.option("--mask", "mask_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--device", default="cpu")
@_fail_cleanly
def infer_cmd(checkpoint, in_path, mask_path, out_path, device):
    """Filter one frame; uncovered pixels pass through unchanged."""
    from .infer import filter_png
    filter_png(checkpoint, in_path, mask_path, out_path, device=device)
    click.echo(f"wrote {out_path}")


if __name__ == "__main__":
    main()
