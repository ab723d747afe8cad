"""Small dense linear algebra: tensor products, partial traces, trace norms.

Run: python3 demos/01_linear_algebra.py
"""
import numpy as np

from qcorr.linalg import hermitian_eig, partial_trace, positive_part, tensor_product, trace_norm

# A two-qubit state with amplitudes on |01>, |10>, |11>.
psi = np.array([0, 1, 1, 1]) / np.sqrt(3)
rho = np.outer(psi, psi.conj())

# Keep qubit 0 (the most significant bit) and trace out qubit 1.
reduced = partial_trace(rho, 2, [0])
print("reduced state of qubit 0:\n", np.round(reduced, 6))

# Distinguishing two weighted states: the trace norm of their difference.
sigma = np.array([[0, 0], [0, 1.0]])
plus = np.full((2, 2), 0.5)
diff = plus / 3 * 2 - sigma / 3
print("trace norm |2/3 |+><+| - 1/3 |1><1|| =", trace_norm(diff), "vs √5/3 =", np.sqrt(5) / 3)

# The positive part keeps the positive spectrum; its trace is the advantage term.
pp = positive_part(diff)
print("Tr(pos) =", np.trace(pp).real)

eig = hermitian_eig(diff)
print("eigenvalues (descending):", eig.eigenvalues)
print("reconstruction residual:", np.abs(eig.reconstruct() - diff).max())

print("|0> ⊗ |+> =", tensor_product(np.array([1.0, 0]), np.array([1, 1]) / np.sqrt(2)).ravel().real)
