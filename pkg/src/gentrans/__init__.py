"""Transversality defects of parametrized families and generic transversality checks."""

__version__ = "0.1.0"

from .expr import parse, evaluate, derive, to_str  # noqa: E402
from .linalg import EXACT, FLOAT, Matrix, ScalarBackend, rank, dim_span_union, kernel_basis  # noqa: E402
from .geometry import (  # noqa: E402
    DomainSpec, ParamFamily, PointXA, SubmanifoldSpec, contains, on_submanifold, tangent_of_Z,
)
from .sampling import SamplingPlan  # noqa: E402
from .defect import (  # noqa: E402
    DefectReport, Stratum, classify, delta_family, delta_slice, delta_sup_estimate,
    is_transverse_at, jacobian_family,
)
from .localmodel import LocalModel, build_local_model, verify_local_model, local_grid_plan  # noqa: E402
from .genericity import GenericityReport, preimage_tangent, projection_regularity, scan  # noqa: E402
from .scenario import Scenario, RunRecord, builtin, load_scenario, write_run  # noqa: E402

__all__ = [
    "parse", "evaluate", "derive", "to_str",
    "EXACT", "FLOAT", "Matrix", "ScalarBackend", "rank", "dim_span_union", "kernel_basis",
    "DomainSpec", "ParamFamily", "PointXA", "SubmanifoldSpec", "contains", "on_submanifold",
    "tangent_of_Z",
    "SamplingPlan",
    "DefectReport", "Stratum", "classify", "delta_family", "delta_slice", "delta_sup_estimate",
    "is_transverse_at", "jacobian_family",
    "LocalModel", "build_local_model", "verify_local_model", "local_grid_plan",
    "GenericityReport", "preimage_tangent", "projection_regularity", "scan",
    "Scenario", "RunRecord", "builtin", "load_scenario", "write_run",
]
