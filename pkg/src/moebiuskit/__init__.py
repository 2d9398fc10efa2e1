"""Numerical Moebius geometry of hypersurfaces with a principal curvature of multiplicity n-2."""

__version__ = "0.1.0"

from .errors import GeometryError
from .gallery import ExampleSpec, make_example
from .hypersurface import ImmersionPatch, MoebiusTransform, apply_moebius, shape_data, tensor_grid
from .moebius import MoebiusData, moebius_data, moebius_invariants

__all__ = [
    "GeometryError",
    "ExampleSpec",
    "make_example",
    "ImmersionPatch",
    "MoebiusTransform",
    "apply_moebius",
    "shape_data",
    "tensor_grid",
    "MoebiusData",
    "moebius_data",
    "moebius_invariants",
]
