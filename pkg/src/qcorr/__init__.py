"""Classical and quantum correlated equilibria of small games."""

from .classical import (
    CorrelatingDevice,
    EquilibriumReport,
    device_from_choices,
    find_ce,
    verify_ce,
    verify_efce,
    verify_ir_efce,
)
from .games import (
    ExtensiveFormGame,
    NormalFormGame,
    OutcomeDistribution,
    PureStrategy,
    corresponds,
    decision,
    leaf,
    to_normal_form,
    validate_extensive,
)
from .linalg import hermitian_eig, partial_trace, positive_part, tensor_product, trace_norm

__version__ = "0.1.0"

__all__ = [
    "CorrelatingDevice",
    "EquilibriumReport",
    "ExtensiveFormGame",
    "NormalFormGame",
    "OutcomeDistribution",
    "PureStrategy",
    "corresponds",
    "decision",
    "device_from_choices",
    "find_ce",
    "hermitian_eig",
    "leaf",
    "partial_trace",
    "positive_part",
    "tensor_product",
    "to_normal_form",
    "trace_norm",
    "validate_extensive",
    "verify_ce",
    "verify_efce",
    "verify_ir_efce",
]
