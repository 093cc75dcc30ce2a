"""Numerical toolkit for Hilbert, Thompson and Poincare geometries.

Distances and geodesics on convex domains, nonexpansive maps and their
orbits, horoballs, boundary-axiom checks and Gromov-hyperbolicity
diagnostics, plus a config-driven runner.
"""

from .geometry import ConvexBody, Ellipsoid, PBall, Polytope, SimplexSlice
from .maps import (
    Composition,
    GeodesicPull,
    Identity,
    KleinIsometry,
    MatrixProjective,
    MobiusDisc,
    Rotation,
    apply_map,
    standard_library,
)
from .metrics import MetricSpace, distance, geodesic_point, ray_toward

__all__ = [
    "Composition", "ConvexBody", "Ellipsoid", "GeodesicPull", "Identity", "KleinIsometry",
    "MatrixProjective", "MetricSpace", "MobiusDisc", "PBall", "Polytope", "Rotation",
    "SimplexSlice", "apply_map", "distance", "geodesic_point", "ray_toward", "standard_library",
]
