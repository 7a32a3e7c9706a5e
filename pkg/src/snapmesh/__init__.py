"""Procedural map generation by snapping designer-made pieces at matching connectors."""

from .engine import ConnectionRecord, GeneratedMap, GenerationConfig, generate
from .geometry import Obb, TriMesh, Vec3, YawTransform, obb_overlap
from .methods import GenerationMethodConfig, create_method, register_method
from .pieces import ColorMatrix, Connector, MapPiece, MatchingRules, MatchMode
from .validation import NavConfig, ValidationReport, validate_map

__all__ = [
    "ColorMatrix",
    "ConnectionRecord",
    "Connector",
    "GeneratedMap",
    "GenerationConfig",
    "GenerationMethodConfig",
    "MapPiece",
    "MatchMode",
    "MatchingRules",
    "NavConfig",
    "Obb",
    "TriMesh",
    "ValidationReport",
    "Vec3",
    "YawTransform",
    "create_method",
    "generate",
    "obb_overlap",
    "register_method",
    "validate_map",
]
