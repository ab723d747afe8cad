"""Why no shared state implements ⅓(TR + BL + BR) as a quantum equilibrium.

Run: python3 demos/04_impossibility.py
"""
import numpy as np

from qcorr.quantum import conditional_states, deviation_criterion, infeasibility_search, verify_canonical_qce
from qcorr.quantum.constraints import appendix_d_report, trace_cc_bound
from qcorr.scenarios.corpus import attempt_instance, naive_instance, naive_state

# Trace criterion: the row player gains iff Tr|⅓ρ - ⅔σ| > ⅓.
value, incentive = deviation_criterion(conditional_states(naive_instance(), 0))
print(f"naive state: trace value {value:.6f} (√5/3 = {np.sqrt(5) / 3:.6f}), incentive {incentive}")

# A four-qubit attempt that silences the row player but not the column player.
att = attempt_instance()
rep = verify_canonical_qce(att)
print("four-qubit attempt: best values", rep.best_values, "gains", rep.gains)
cr = appendix_d_report(att.state)
print("row block conditions:", cr.row_ok(1e-10), " column block conditions:", cr.col_ok(1e-10))
print("block residuals:", {k: round(v, 6) for k, v in cr.abc_residuals.items()})

# Search for any state meeting every block condition at once.
print("naive state residuals:", {k: round(v, 6) for k, v in appendix_d_report(naive_state()).abc_residuals.items()})
for dims in ((1, 1), (2, 2)):
    res = infeasibility_search(*dims, restarts=100, seed=0)
    print(f"{dims} blocks: smallest summed residual {res.min_residual:.4f} over {len(res.residuals)} starts;"
          f" Tr(CC†) {res.trace_cc:.4f} <= bound {res.trace_cc_bound:.4f}")

# Small residuals force a small C block, far from the required ⅓.
for delta in (1e-6, 1e-3, 1e-2):
    print(f"delta {delta:g}: Tr(CC†) <= {trace_cc_bound(delta, 2):.4g}")
