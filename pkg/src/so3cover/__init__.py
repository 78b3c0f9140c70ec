"""Near-optimal orientation dictionaries on SO(3): symmetric point sets
on the 3-sphere with minimized covering radius."""

from . import bounds, evaluate, optimize, quat, symmetry, triangulation
from .bounds import CoveringReport, lower_bound_radius, make_report
from .optimize import PipelineConfig, generate
from .symmetry import OrientationSet, expand_orbit, laue_group
from .triangulation import covering_radius, triangulate

__version__ = "0.1.0"

__all__ = [
    "bounds",
    "evaluate",
    "optimize",
    "quat",
    "symmetry",
    "triangulation",
    "CoveringReport",
    "lower_bound_radius",
    "make_report",
    "PipelineConfig",
    "generate",
    "OrientationSet",
    "expand_orbit",
    "laue_group",
    "covering_radius",
    "triangulate",
]
