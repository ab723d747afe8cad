"""Quantum advice: shared states, circuits, deviations and the constraint system."""

from .constraints import (
    ConstraintReport,
    appendix_d_report,
    abc_residuals,
    deviation_criterion,
    infeasibility_search,
)
from .extensive import (
    ExtensiveQceInstance,
    LookaheadResult,
    MeasurementReuseWarning,
    lookahead_deviation_value,
    simulate_extensive_qce,
    verify_extensive_qce,
)
from .normal import (
    ConditionalStateFamily,
    QceInstance,
    canonical_instance,
    canonicalize,
    conditional_states,
    dual_certificate_check,
    optimal_deviation_binary,
    qce_to_ce,
    simulate_normal_qce,
    verify_canonical_qce,
)
from .state import (
    Gate,
    PlayerCircuit,
    QuantumError,
    QuantumState,
    constant_circuit,
    gate,
    measure_circuit,
    product_state,
    state_from_terms,
    unitary_gate,
)

__all__ = [
    "ConditionalStateFamily",
    "ConstraintReport",
    "ExtensiveQceInstance",
    "Gate",
    "LookaheadResult",
    "MeasurementReuseWarning",
    "PlayerCircuit",
    "QceInstance",
    "QuantumError",
    "QuantumState",
    "abc_residuals",
    "appendix_d_report",
    "canonical_instance",
    "canonicalize",
    "conditional_states",
    "constant_circuit",
    "deviation_criterion",
    "dual_certificate_check",
    "gate",
    "infeasibility_search",
    "lookahead_deviation_value",
    "measure_circuit",
    "optimal_deviation_binary",
    "product_state",
    "qce_to_ce",
    "simulate_extensive_qce",
    "simulate_normal_qce",
    "state_from_terms",
    "unitary_gate",
    "verify_canonical_qce",
    "verify_extensive_qce",
]
