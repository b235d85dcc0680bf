"""Numerical Koszul-form calculus on a single chart, for metrics that may
degenerate: radical-stationarity checks, curvature, and residual checks of
the Cartan structural equations."""

from .cartan import ResidualReport, SuiteResult, frame_structure_check, verify_suite
from .catalog import MetricSpec, catalog, catalog_entry, degenerate_const, euclidean, minkowski
from .config import SpecFormatError, load_spec, parse_spec
from .curvature import RiemannEvaluator, classical_riemann, curvature_form, riemann, riemann_table, symmetry_check
from .expr import ParseError, parse, to_text
from .fields import Chart, MetricField, VectorField
from .jet import DomainError, Jet
from .koszul import (
    KoszulEvaluator,
    christoffel_first,
    connection_form,
    kosz,
    kosz_contract,
    radical_stationary_check,
    semi_regular_probe,
)
from .radical import RadicalDecomposition, cocontract, decompose, jacobi_eigh
from .report import RunReport, __version__

__all__ = [
    "Chart", "MetricField", "VectorField", "Jet", "DomainError", "ParseError", "parse", "to_text",
    "RadicalDecomposition", "decompose", "cocontract", "jacobi_eigh",
    "KoszulEvaluator", "kosz", "kosz_contract", "christoffel_first", "connection_form",
    "radical_stationary_check", "semi_regular_probe",
    "RiemannEvaluator", "riemann", "riemann_table", "curvature_form", "classical_riemann", "symmetry_check",
    "ResidualReport", "SuiteResult", "frame_structure_check", "verify_suite",
    "MetricSpec", "catalog", "catalog_entry", "euclidean", "minkowski", "degenerate_const",
    "SpecFormatError", "load_spec", "parse_spec", "RunReport", "__version__",
]
