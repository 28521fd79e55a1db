"""Synthetic temporally ordered 3D sketches from triangle meshes, plus tokenization and evaluation."""

from .mesh import TriMesh, load_mesh, normalize, sample_surface
from .pipeline import PipelineParams, generate_sketch, run_pipeline
from .sketch import Sketch, Stroke, load_sketch, save_sketch, truncate

__version__ = "0.1.0"

__all__ = [
    "TriMesh", "load_mesh", "normalize", "sample_surface",
    "PipelineParams", "generate_sketch", "run_pipeline",
    "Sketch", "Stroke", "load_sketch", "save_sketch", "truncate",
]
