"""Light-field baking over spherical Fibonacci lattices and constant-time
view synthesis from the baked texture."""

from .backend import BACKEND
from .bake import BakeConfig, bake, ray_for, trace
from .errors import ContractError, FormatError
from .field import (FrameResult, LightField, load, payload_size, render_frame,
                    sample_filtered, sample_nearest, save)
from .geometry import Camera, Ray, intersect_sphere
from .metrics import SsimParams, compare, render_ground_truth, ssim
from .scene import Material, Scene, load_scene, save_scene
from .sf import (inverse_nearest, kernel_radius, kernel_weight, neighbors_k,
                 sf_point)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BakeConfig", "Camera", "ContractError", "FormatError",
    "FrameResult", "LightField", "Material", "Ray", "Scene", "SsimParams",
    "bake", "compare", "intersect_sphere", "inverse_nearest", "kernel_radius",
    "kernel_weight", "load", "load_scene", "neighbors_k", "payload_size",
    "ray_for", "render_frame", "render_ground_truth", "sample_filtered",
    "sample_nearest", "save", "save_scene", "sf_point", "ssim", "trace",
]
