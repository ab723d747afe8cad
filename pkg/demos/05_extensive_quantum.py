"""Quantum devices in extensive-form games and the lookahead deviation.

Run: python3 demos/05_extensive_quantum.py
"""
from qcorr.quantum import lookahead_deviation_value, simulate_extensive_qce, verify_extensive_qce
from qcorr.scenarios.corpus import composite_instance, entry_quantum_instance, entry_target

# Entry game with a Bell-pair attempt at ½(IN,a,L) + ½(IN,b,R).
q = entry_quantum_instance()
print("protocol distribution:", simulate_extensive_qce(q).as_dict())
print("target:", entry_target().as_dict())

# Player 1 can run their later circuit first and exit when the readout is bad.
res = lookahead_deviation_value(q, player=0)
print(f"lookahead: value {res.value}, on path {res.on_path}, gain {res.gain}")
print("plan:", res.plan)

# The five-player composite hides the second decision behind another pair of players.
comp = composite_instance()
rep = verify_extensive_qce(comp)
print("\ncomposite distribution matches target:", simulate_extensive_qce(comp).max_difference(entry_target()) < 1e-12)
print("composite verdict:", rep.verdict, "(", rep.details["scope"], ")")
print("gains:", [round(x, 12) for x in rep.gains])
