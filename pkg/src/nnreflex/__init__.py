"""Nearest-neighbor reflexivity and species-correspondence tests."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DegenerateConfigurationWarning,
    DegenerateMomentsError,
    SingularCovarianceError,
    UndefinedStatisticError,
)
from .exact import ExactResult, HypergeomSpec, fisher_one_sided, hypergeom_pmf  # noqa: E402
from .geom import NnGraph, PointSet, build_nn_graph, min_interpoint_distance  # noqa: E402
from .stat_tests import TestResult, battery, posthoc_battery, species_moments  # noqa: E402
from .tables import build_nnct, build_nnrct, build_scct, collapse_classes  # noqa: E402

__all__ = [
    "__version__",
    "DegenerateConfigurationWarning",
    "DegenerateMomentsError",
    "SingularCovarianceError",
    "UndefinedStatisticError",
    "ExactResult",
    "HypergeomSpec",
    "fisher_one_sided",
    "hypergeom_pmf",
    "NnGraph",
    "PointSet",
    "build_nn_graph",
    "min_interpoint_distance",
    "TestResult",
    "battery",
    "posthoc_battery",
    "species_moments",
    "build_nnct",
    "build_nnrct",
    "build_scct",
    "collapse_classes",
]
