"""Deterministic laboratory for the cutoff Boltzmann equation in
uniformly local Sobolev spaces."""

from .grid import (DistributionField, SpatialGrid, SphereQuadrature, VelocityGrid,
                   build_spatial_grid, build_sphere_quadrature, build_velocity_grid)
from .kernel import AdmissibilityError, CrossSectionParams
from .norms import NormSpec
from .solver import IterationReport, PicardSolver, picard_solve, select_T, t_star
from .weights import WeightParams

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError", "CrossSectionParams", "DistributionField",
    "IterationReport", "NormSpec", "PicardSolver", "SpatialGrid",
    "SphereQuadrature", "VelocityGrid", "WeightParams", "build_spatial_grid",
    "build_sphere_quadrature", "build_velocity_grid", "picard_solve",
    "select_T", "t_star",
]
