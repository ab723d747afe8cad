"""Shared quantum states as correlating devices in a normal-form game.

Run: python3 demos/03_quantum_normal_form.py
"""
import numpy as np

from qcorr.quantum import (
    canonicalize,
    conditional_states,
    optimal_deviation_binary,
    qce_to_ce,
    simulate_normal_qce,
    verify_canonical_qce,
)
from qcorr.quantum.normal import payoff_table
from qcorr.scenarios.corpus import fig1_instance, hadamard_deviation, naive_instance

# (|01> + |10>)/√2 with each player reading their own qubit.
inst = fig1_instance()
print("induced distribution:", simulate_normal_qce(inst).as_dict())
rep = verify_canonical_qce(inst)
print("verdict:", rep.verdict, "gains", [float(x) for x in rep.gains])
print("as a classical device:", qce_to_ce(inst).as_dict())

# The obvious state for ⅓(TR + BL + BR) leaks information to the row player.
naive = naive_instance()
dev = hadamard_deviation(naive)
print("\nrow plays Hadamard first:", {k: round(v, 6) for k, v in simulate_normal_qce(dev).as_dict().items()})
print("row utility: on path", naive.game.expected_utility(simulate_normal_qce(naive))[0],
      "with Hadamard", naive.game.expected_utility(simulate_normal_qce(dev))[0])
print("canonical form of the deviation (×√6):", np.round(canonicalize(dev).state.amplitudes.real * np.sqrt(6), 6))

# The best possible measurement for the row player.
fam = conditional_states(naive, 0)
value, meas = optimal_deviation_binary(fam, payoff_table(naive.game, fam))
print("best row deviation value:", value, "= 3+√5 =", 3 + np.sqrt(5))
print("optimal projector onto the first action:\n", np.round(meas, 6))
print("verify_canonical_qce:", verify_canonical_qce(naive).verdict)
