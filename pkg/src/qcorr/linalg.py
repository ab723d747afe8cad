"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Qubit ordering
is big-endian: qubit 0 is the leftmost ket symbol, so ``|01>`` is index 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

#: Largest number of qubits a simulated state may hold. Configurable at runtime.
MAX_QUBITS = 14

HERMITIAN_TOL = 1e-9
ZERO_EIGENVALUE_TOL = 1e-12


class StateTooLargeError(ValueError):
    """Raised when an operation would exceed the configured qubit cap."""


class NotHermitianError(ValueError):
    pass


class ConvergenceError(ArithmeticError):
    """Eigensolver failed or its reconstruction residual is too large."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


def set_max_qubits(n: int) -> None:
    global MAX_QUBITS
    if n < 1:
        raise ValueError("max qubits must be positive")
    MAX_QUBITS = int(n)


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def tensor_product(a, b) -> np.ndarray:
    """Kronecker product ``a ⊗ b``.

    Vectors are accepted and treated as column matrices. Raises
    :class:`StateTooLargeError` if the result would exceed ``2**MAX_QUBITS``
    rows or columns.
    """
    a = as_matrix(a)
    b = as_matrix(b)
    limit = 2**MAX_QUBITS
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if rows > limit or cols > limit:
        raise StateTooLargeError(
            f"tensor product of shape {rows}x{cols} exceeds the {MAX_QUBITS}-qubit cap"
        )
    return np.kron(a, b)


def kron_all(factors: Iterable) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = tensor_product(out, f)
    return out


def hermiticity_error(m: np.ndarray) -> float:
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.max(np.abs(m - dagger(m))))


def _check_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise NotHermitianError(f"matrix of shape {m.shape} is not square")
    err = hermiticity_error(m)
    if err > tol:
        raise NotHermitianError(f"matrix is not Hermitian (max |M - M^†| = {err:.3e})")
    return m


@dataclass(frozen=True)
class HermitianEigensystem:
    """Eigenvalues in descending order and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)


def hermitian_eig(m, residual_tol: float = 1e-10) -> HermitianEigensystem:
    """Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.

    The input is symmetrized before solving, and the reconstruction residual
    ``max|M - V diag(w) V^†|`` is checked against ``residual_tol`` scaled by
    the largest entry of ``M`` (absolute for matrices with entries <= 1).
    """
    m = _check_hermitian(m)
    n = m.shape[0]
    if n == 0:
        return HermitianEigensystem(np.zeros(0), np.zeros((0, 0), dtype=complex))
    h = 0.5 * (m + dagger(m))
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceError(f"eigensolver did not converge: {exc}") from exc
    order = np.argsort(-w, kind="stable")
    eig = HermitianEigensystem(w[order].copy(), v[:, order].copy())
    residual = float(np.max(np.abs(h - eig.reconstruct())))
    scale = max(1.0, float(np.max(np.abs(h))))
    if residual > residual_tol * scale:
        raise ConvergenceError(
            f"eigendecomposition residual {residual:.3e} exceeds {residual_tol:.1e}", residual
        )
    return eig


def trace_norm(m) -> float:
    """Sum of singular values; for Hermitian input, the sum of |eigenvalues|."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("trace_norm needs a square matrix")
    if m.size == 0:
        return 0.0
    if hermiticity_error(m) <= HERMITIAN_TOL:
        return float(np.sum(np.abs(hermitian_eig(m).eigenvalues)))
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def positive_part(m) -> np.ndarray:
    """Projection of a Hermitian matrix onto its positive eigenspace, ``Σ_{λ>0} λ v v^†``.

    Eigenvalues within ``ZERO_EIGENVALUE_TOL`` of zero are dropped.
    """
    eig = hermitian_eig(m)
    keep = eig.eigenvalues > ZERO_EIGENVALUE_TOL
    v = eig.eigenvectors[:, keep]
    return (v * eig.eigenvalues[keep]) @ dagger(v)


def positive_projector(m) -> np.ndarray:
    """Orthogonal projector onto the strictly positive eigenspace of ``m``."""
    eig = hermitian_eig(m)
    v = eig.eigenvectors[:, eig.eigenvalues > ZERO_EIGENVALUE_TOL]
    return v @ dagger(v)


def min_eigenvalue(m) -> float:
    eig = hermitian_eig(m)
    return float(eig.eigenvalues[-1]) if eig.eigenvalues.size else 0.0


def partial_trace(rho, qubit_count: int, keep: Iterable[int]) -> np.ndarray:
    """Reduce a ``2**n x 2**n`` operator to the qubits in ``keep``.

    Kept qubits appear in ascending index order in the result.
    """
    rho = as_matrix(rho)
    n = int(qubit_count)
    dim = 2**n
    if rho.shape != (dim, dim):
        raise ValueError(f"operator of shape {rho.shape} does not act on {n} qubits")
    keep = sorted(set(int(k) for k in keep))
    for k in keep:
        if not 0 <= k < n:
            raise IndexError(f"qubit {k} out of range for a {n}-qubit operator")
    traced = [q for q in range(n) if q not in keep]
    t = rho.reshape([2] * (2 * n))
    # row axis q carries label q, column axis q carries n + q unless traced
    cols = [q if q in traced else n + q for q in range(n)]
    out = list(keep) + [n + q for q in keep]
    reduced = np.einsum(t, list(range(n)) + cols, out)
    k = 2 ** len(keep)
    return reduced.reshape(k, k)


def projector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).reshape(-1, 1)
    return v @ dagger(v)
