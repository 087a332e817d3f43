import numpy as np
from click.testing import CliRunner
from PIL import Image

from ganfilter.cli import main


def test_train_then_infer_round_trip(synthetic_pairs, tmp_path):
    root, _, _ = synthetic_pairs
    runner = CliRunner()
    config = tmp_path / "config.json"
    config.write_text('{"epochs": 1, "base_channels": 8}\n')
    run = tmp_path / "run"

    result = runner.invoke(main, ["train", "--pairs", str(root),
                                  "--out", str(run),
                                  "--config", str(config)])
    assert result.exit_code == 0, result.output
    assert "best val SSIM" in result.output
    assert (run / "checkpoint.pt").is_file()
    assert (run / "curves.csv").is_file()

    out_png = tmp_path / "filtered.png"
    result = runner.invoke(main, ["infer",
                                  "--checkpoint", str(run / "checkpoint.pt"),
                                  "--frame", str(root / "0000_in.png"),
                                  "--mask", str(root / "0000_mask.png"),
                                  "--out", str(out_png)])
    assert result.exit_code == 0, result.output
    with Image.open(out_png) as img:
        out = np.asarray(img)
    with Image.open(root / "0000_in.png") as img:
        original = np.asarray(img.convert("RGB"))
    with Image.open(root / "0000_mask.png") as img:
        mask = np.asarray(img) >= 128
    assert out.shape[:2] == original.shape[:2]
    np.testing.assert_array_equal(out[~mask][:, :3], original[~mask])


def test_cli_reports_errors_on_one_line(tmp_path):
    runner = CliRunner()
    empty = tmp_path / "empty"
    empty.mkdir()
    result = runner.invoke(main, ["train", "--pairs", str(empty),
                                  "--out", str(tmp_path / "run")])
    assert result.exit_code == 1
    assert "error:" in result.output
    assert len([l for l in result.output.splitlines() if l]) == 1
