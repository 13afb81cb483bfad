"""Planar specular-reflection laboratory."""
__version__ = "0.1.0"

from .geometry import EPS_GEOM, DirectedLine, Direction, Point, Segment, reflect_direction, ray_segment_hit
from .intervals import IntervalSet
from .scene import Scene
from . import _backend

backend = _backend.name

__all__ = [
    "EPS_GEOM", "DirectedLine", "Direction", "Point", "Segment", "IntervalSet", "Scene",
    "reflect_direction", "ray_segment_hit", "backend", "__version__",
]
