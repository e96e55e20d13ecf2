"""Exact-arithmetic formal integrability analysis for linear
constant-coefficient PDE systems: symbol tableaux, Spencer cohomology,
prolongation towers, and torsion obstructions, all over the rationals."""

from .errors import InvariantViolation
from .jetpde import (
    IntegrabilityReport,
    LevelRecord,
    PdeSystem,
    finite_type_integrability,
    formal_prolongation,
    goldschmidt_check,
    jet_coords,
    jet_fiber_dim,
    jet_index,
    jet_to_prolongation_point,
    pde_to_relconn,
    prolongation_tower,
    solution_fiber,
    symbol_tableau,
)
from .ratlin import AffineSolution, RatMatrix, Subspace, image, kernel, solve_affine
from .relconn import (
    CompatibilityReport,
    ProlFiber,
    RelConn,
    TorsionResult,
    classical_prolongation_fiber,
    compatible,
    h01_dim,
    prolongation_connection,
    symbol_map,
    torsion_at,
)
from .spencer import (
    AcyclicityVerdict,
    CohomologyReport,
    TableauChain,
    cohomology,
    delta_matrix,
    euler_check,
    is_r_acyclic,
)
from .tableau import (
    StabilizationScan,
    Tableau,
    TableauTower,
    TypeVerdict,
    classify_type,
    prolong,
    stabilization_scan,
    tower,
)

__version__ = "0.1.0"

__all__ = [
    "AcyclicityVerdict",
    "AffineSolution",
    "CohomologyReport",
    "CompatibilityReport",
    "IntegrabilityReport",
    "InvariantViolation",
    "LevelRecord",
    "PdeSystem",
    "ProlFiber",
    "RatMatrix",
    "RelConn",
    "StabilizationScan",
    "Subspace",
    "Tableau",
    "TableauChain",
    "TableauTower",
    "TorsionResult",
    "TypeVerdict",
    "classical_prolongation_fiber",
    "classify_type",
    "cohomology",
    "compatible",
    "delta_matrix",
    "euler_check",
    "finite_type_integrability",
    "formal_prolongation",
    "goldschmidt_check",
    "h01_dim",
    "image",
    "is_r_acyclic",
    "jet_coords",
    "jet_fiber_dim",
    "jet_index",
    "jet_to_prolongation_point",
    "kernel",
    "pde_to_relconn",
    "prolong",
    "prolongation_connection",
    "prolongation_tower",
    "solution_fiber",
    "solve_affine",
    "stabilization_scan",
    "symbol_map",
    "symbol_tableau",
    "torsion_at",
    "tower",
]
