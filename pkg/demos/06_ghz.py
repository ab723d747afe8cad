"""The GHZ game: entanglement wins every input, deterministic play at most 3/4.

Run: python3 demos/06_ghz.py
"""
from qcorr.quantum import simulate_extensive_qce
from qcorr.scenarios.corpus import cghz_instance
from qcorr.scenarios.ghz import classical_brute_force, quantum_win_probabilities

for inputs, p in quantum_win_probabilities().items():
    print(f"inputs {inputs}: quantum win probability {p:.12f}")

b = classical_brute_force()
print(f"\n{b.profiles} deterministic profiles; best against uniform inputs {b.max_win_uniform}")
print("every profile loses on some input:", b.all_defeated)
print("some optimal profiles:", b.best_profiles[:4])

# With a referee paid to make the trio fail, the shared GHZ state still wins.
inst = cghz_instance()
print("\ncomplete-information version, expected payoffs:", inst.game.expected_utility(simulate_extensive_qce(inst)))
