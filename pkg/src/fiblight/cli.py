"""Command-line entry points: bake / render / truth / compare / dataset / serve."""

import functools
import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import field as lightfield
from . import metrics, png_io, scenes
from .bake import BakeConfig, bake
from .geometry import Camera
from .scene import load_scene, save_scene


def _fail_cleanly(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except Exception as exc:  # one-line diagnostic, nonzero exit
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)
    return wrapper


def _parse_vec3(text):
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 3:
        raise click.BadParameter(f"expected x,y,z, got {text!r}")
    return tuple(parts)


def _parse_pose(text):
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 9:
        raise click.BadParameter("expected eye,look,up as 9 comma-separated numbers")
    return parts


def _parse_size(text):
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise click.BadParameter(f"expected WxH, got {text!r}")


def _materials_path(scene_path, materials):
    if materials:
        return materials
    return Path(scene_path).with_suffix(".mat")


def _camera_from_options(pose, pose_json, fov, size):
    if pose_json:
        spec = json.loads(Path(pose_json).read_text())
        return Camera(eye=np.array(spec["eye"]), look_at=np.array(spec["look_at"]),
                      up=np.array(spec["up"]), fov=math.radians(spec["fov_deg"]),
                      width=int(spec["width"]), height=int(spec["height"])), \
            spec.get("mode")
    if pose is None:
        raise click.UsageError("either --pose or --pose-json is required")
    p = _parse_pose(pose)
    w, h = _parse_size(size)
    return Camera(eye=np.array(p[0:3]), look_at=np.array(p[3:6]),
                  up=np.array(p[6:9]), fov=math.radians(fov),
                  width=w, height=h), None


@click.group()
def main():
    """Light-field baking and constant-time view synthesis."""


@main.command("bake")
@click.option("--scene", "scene_path", required=True, type=click.Path(exists=True))
@click.option("--materials", type=click.Path(exists=True),
              help="material table; defaults to the scene path with .mat suffix")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--m", "m", required=True, type=int, help="origin cardinality")
@click.option("--n", "n", required=True, type=int, help="direction cardinality")
@click.option("--radius", default=1.0, type=float)
@click.option("--center", default="0,0,0")
@click.option("--hemisphere", is_flag=True, help="store only origins with z > 0")
@click.option("--spp", default=64, type=int)
@click.option("--depth", default=5, type=int)
@click.option("--seed", default=0, type=int)
@click.option("--workers", default=1, type=int)
@_fail_cleanly
def bake_cmd(scene_path, materials, out_path, m, n, radius, center, hemisphere,
             spp, depth, seed, workers):
    """Path-trace the scene into a light-field texture."""
    scene = load_scene(scene_path, _materials_path(scene_path, materials))
    cfg = BakeConfig(m=m, n=n, radius=radius, center=_parse_vec3(center),
                     hemisphere=hemisphere, spp=spp, max_depth=depth, seed=seed)
    total = cfg.rows * cfg.n
    with click.progressbar(length=total, label="baking") as bar:
        lf = bake(scene, cfg, progress=bar.update, workers=workers)
    nbytes = lightfield.save(lf, out_path)
    d = lf.diagnostics
    click.echo(f"wrote {out_path} ({nbytes} bytes, {d.texels} texels, "
               f"{d.degenerate_texels} degenerate, "
               f"{d.nonfinite_samples} non-finite samples, {d.seconds:.1f}s)")


@main.command("render")
@click.option("--field", "field_path", required=True, type=click.Path(exists=True))
@click.option("--pose", help="eye,look,up as 9 comma-separated numbers")
@click.option("--pose-json", type=click.Path(exists=True),
              help="JSON pose request (same schema as the frame server)")
@click.option("--fov", default=45.0, type=float, help="vertical fov, degrees")
@click.option("--size", default="256x256")
@click.option("--mode", default="filtered",
              type=click.Choice(["nearest", "filtered"]))
@click.option("--out", "out_path", required=True, type=click.Path())
@_fail_cleanly
def render_cmd(field_path, pose, pose_json, fov, size, mode, out_path):
    """Synthesize one frame from a baked field."""
    lf = lightfield.load(field_path)
    cam, json_mode = _camera_from_options(pose, pose_json, fov, size)
    result = lightfield.render_frame(lf, cam, mode=json_mode or mode)
    png_io.save_frame_png(result, out_path)
    click.echo(f"wrote {out_path} "
               f"(coverage {result.coverage.mean() * 100.0:.1f}%)")


@main.command("truth")
@click.option("--scene", "scene_path", required=True, type=click.Path(exists=True))
@click.option("--materials", type=click.Path(exists=True))
@click.option("--pose", help="eye,look,up as 9 comma-separated numbers")
@click.option("--pose-json", type=click.Path(exists=True))
@click.option("--fov", default=45.0, type=float)
@click.option("--size", default="256x256")
@click.option("--spp", default=1024, type=int)
@click.option("--depth", default=5, type=int)
@click.option("--seed", default=0, type=int)
@click.option("--out", "out_path", required=True, type=click.Path())
@_fail_cleanly
def truth_cmd(scene_path, materials, pose, pose_json, fov, size, spp, depth,
              seed, out_path):
    """Path-trace a reference image directly."""
    scene = load_scene(scene_path, _materials_path(scene_path, materials))
    cam, _ = _camera_from_options(pose, pose_json, fov, size)
    img = metrics.render_ground_truth(scene, cam, spp=spp, seed=seed,
                                      max_depth=depth)
    png_io.save_image_png(img, out_path)
    click.echo(f"wrote {out_path}")


@main.command("compare")
@click.option("--a", "a_path", required=True, type=click.Path(exists=True))
@click.option("--b", "b_path", required=True, type=click.Path(exists=True))
@click.option("--mask", default="from-alpha",
              type=click.Choice(["from-alpha", "none"]))
@click.option("--out", "out_path", type=click.Path())
@_fail_cleanly
def compare_cmd(a_path, b_path, mask, out_path):
    """SSIM / MAE report between two PNGs over the coverage mask."""
    a, alpha = png_io.load_png(a_path)
    b, _ = png_io.load_png(b_path)
    report = metrics.compare(a, b, mask=alpha if mask == "from-alpha" else None)
    text = json.dumps(report, indent=2)
    if out_path:
        Path(out_path).write_text(text + "\n")
    click.echo(text)


@main.command("dataset")
@click.option("--scene", "scene_path", required=True, type=click.Path(exists=True))
@click.option("--materials", type=click.Path(exists=True))
@click.option("--field", "field_path", required=True, type=click.Path(exists=True))
@click.option("--views", default=300, type=int)
@click.option("--seed", default=0, type=int)
@click.option("--size", default="128x128")
@click.option("--fov", default=45.0, type=float)
@click.option("--truth-spp", default=128, type=int)
@click.option("--depth", default=5, type=int)
@click.option("--out", "out_dir", required=True, type=click.Path())
@_fail_cleanly
def dataset_cmd(scene_path, materials, field_path, views, seed, size, fov,
                truth_spp, depth, out_dir):
    """Emit paired (synthesized, reference, mask) frames for post-filter training.

    Poses orbit the field center with uniformly sampled distances in
    [2.0, 3.5] x radius and view angles within the baked coverage.
    """
    scene = load_scene(scene_path, _materials_path(scene_path, materials))
    lf = lightfield.load(field_path)
    w, h = _parse_size(size)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    elev_lo = math.radians(15.0) if lf.hemisphere else math.radians(-60.0)
    elev_hi = math.radians(60.0)
    manifest = {"field": str(field_path), "scene": str(scene_path), "views": []}
    with click.progressbar(range(views), label="rendering pairs") as bar:
        for v in bar:
            azim = rng.uniform(0.0, 2.0 * math.pi)
            elev = rng.uniform(elev_lo, elev_hi)
            dist = rng.uniform(2.0, 3.5) * lf.radius
            cam = scenes.orbit_camera(azim, elev, dist, center=lf.center,
                                      fov=math.radians(fov), width=w, height=h)
            frame = lightfield.render_frame(lf, cam, mode="filtered")
            truth = metrics.render_ground_truth(scene, cam, spp=truth_spp,
                                                seed=seed + v, max_depth=depth)
            stem = f"{v:04d}"
            png_io.save_frame_png(frame, out / f"{stem}_in.png")
            png_io.save_image_png(truth, out / f"{stem}_gt.png")
            from PIL import Image
            Image.fromarray(np.where(frame.coverage, 255, 0).astype(np.uint8),
                            mode="L").save(out / f"{stem}_mask.png")
            manifest["views"].append({
                "id": stem,
                "input": f"{stem}_in.png",
                "target": f"{stem}_gt.png",
                "mask": f"{stem}_mask.png",
                "pose": {
                    "eye": [float(x) for x in cam.eye],
                    "look_at": [float(x) for x in cam.look_at],
                    "up": [float(x) for x in cam.up],
                    "fov_deg": fov,
                    "width": w,
                    "height": h,
                    "mode": "filtered",
                },
            })
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    click.echo(f"wrote {views} pairs to {out_dir}")


@main.command("serve")
@click.option("--field", "field_path", required=True, type=click.Path(exists=True))
@click.option("--port", default=8090, type=int)
@click.option("--host", default="127.0.0.1")
@click.option("--workers", default=1, type=int)
@click.option("--allow-origin", default="*")
@_fail_cleanly
def serve_cmd(field_path, port, host, workers, allow_origin):
    """Serve /metadata and /frame for a baked field."""
    from .server import serve
    serve(field_path, port=port, workers=workers, allow_origin=allow_origin,
          host=host)


@main.command("demo-scene")
@click.option("--name", default="desk",
              type=click.Choice(sorted(scenes.BUILTIN_SCENES)))
@click.option("--out", "out_prefix", required=True, type=click.Path())
@_fail_cleanly
def demo_scene_cmd(name, out_prefix):
    """Write one of the built-in procedural scenes as OBJ + material table."""
    scene = scenes.BUILTIN_SCENES[name]()
    mesh = Path(str(out_prefix) + ".obj")
    mats = Path(str(out_prefix) + ".mat")
    save_scene(scene, mesh, mats)
    click.echo(f"wrote {mesh} and {mats} ({scene.triangle_count} triangles)")


if __name__ == "__main__":
    main()
