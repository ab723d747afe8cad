"""Correlated equilibria in normal and extensive form.

Run: python3 demos/02_classical_equilibria.py
"""
from qcorr.classical import find_ce, verify_ce, verify_efce, verify_ir_efce
from qcorr.scenarios.corpus import entry_device, entry_game, envelope_game, third_split

# The three-envelope device on the 7/10 game.
g = envelope_game()
mu = third_split()
rep = verify_ce(g, mu)
print("envelope device:", rep.verdict, "gains", [float(x) for x in rep.gains])
cond = rep.details["conditional"][0]["B"]
print(f"row told B: play T -> {cond['T']:.6g}, play B -> {cond['B']:.6g}")

# An LP finds the welfare-maximizing CE.
best = find_ce(g, "welfare")
print("welfare-optimal CE:", best.as_dict(), "welfare", g.expected_utility(best).sum())

# The entry game: recommendations revealed at each decision pass, but telling
# player 1 the whole plan up front gives them a profitable early exit.
eg = entry_game()
dev = entry_device(eg)
ef = verify_efce(eg, dev)
ir = verify_ir_efce(eg, dev)
print("entry game EFCE:", ef.verdict, "on-path", ef.on_path[0])
print("entry game IR-EFCE:", ir.verdict, "gain", ir.gains[0], "value", ir.best_values[0])
