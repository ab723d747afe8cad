import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcorr import linalg
from qcorr.linalg import hermitian_eig, partial_trace, positive_part, tensor_product, trace_norm

from _support import partial_trace_by_summation, random_density, random_hermitian

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
NAIVE_M = np.array([[-1 / 3, -1 / 3], [-1 / 3, 0]])

seeds = st.integers(0, 2**32 - 1)


def test_tensor_product_examples():
    assert np.allclose(tensor_product(np.eye(2), np.eye(2)), np.eye(4))
    ket = tensor_product(np.array([1, 0]), np.array([0, 1]))
    assert np.allclose(ket.ravel(), [0, 1, 0, 0])
    out = tensor_product(H, np.eye(2)) @ np.array([1, 0, 0, 0])
    assert np.allclose(out, np.array([1, 0, 1, 0]) / np.sqrt(2))


def test_tensor_product_respects_qubit_cap():
    old = linalg.MAX_QUBITS
    try:
        linalg.set_max_qubits(3)
        with pytest.raises(linalg.StateTooLargeError):
            tensor_product(np.eye(4), np.eye(4))
    finally:
        linalg.set_max_qubits(old)


def test_eig_examples():
    assert np.allclose(hermitian_eig(np.diag([3.0, -1.0])).eigenvalues, [3, -1])
    assert np.allclose(hermitian_eig(X).eigenvalues, [1, -1])
    lam = hermitian_eig(NAIVE_M).eigenvalues
    assert np.allclose(lam, [(-1 + np.sqrt(5)) / 6, (-1 - np.sqrt(5)) / 6], atol=1e-12)


def test_eig_rejects_non_hermitian():
    with pytest.raises(linalg.NotHermitianError):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


def test_trace_norm_examples():
    assert trace_norm(np.zeros((3, 3))) == 0
    assert trace_norm(np.eye(2)) == pytest.approx(2)
    assert trace_norm(NAIVE_M) == pytest.approx(np.sqrt(5) / 3, abs=1e-12)
    # non-Hermitian path goes through singular values
    assert trace_norm(np.array([[0, 2], [0, 0]])) == pytest.approx(2)


def test_positive_part_examples():
    assert np.allclose(positive_part(np.diag([1.0, -2.0])), np.diag([1, 0]))
    assert np.allclose(positive_part(np.zeros((2, 2))), 0)
    assert np.allclose(positive_part(X), 0.5 * np.ones((2, 2)))


def test_partial_trace_examples():
    rho = np.kron(np.diag([1, 0]), np.diag([0, 1]))
    assert np.allclose(partial_trace(rho, 2, [0]), np.diag([1, 0]))
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(partial_trace(np.outer(bell, bell), 2, [0]), np.eye(2) / 2)
    naive = np.array([0, 1, 1, 1]) / np.sqrt(3)
    red = partial_trace(np.outer(naive, naive), 2, [0])
    # populations are 1/3, 2/3; the coherence psi(01) psi(11)* = 1/3 survives the trace
    assert np.allclose(np.diag(red), [1 / 3, 2 / 3])
    assert np.allclose(red, partial_trace_by_summation(np.outer(naive, naive), 2, [0]))
    assert np.allclose(red, [[1 / 3, 1 / 3], [1 / 3, 2 / 3]])


def test_partial_trace_rejects_bad_index():
    with pytest.raises(IndexError):
        partial_trace(np.eye(4) / 4, 2, [2])


@settings(max_examples=40, deadline=None)
@given(seed=seeds, n=st.integers(1, 4), data=st.data())
def test_partial_trace_matches_summation(seed, n, data):
    rho = random_density(np.random.default_rng(seed), n)
    keep = data.draw(st.lists(st.integers(0, n - 1), unique=True))
    assert np.allclose(partial_trace(rho, n, keep), partial_trace_by_summation(rho, n, keep), atol=1e-13)


@settings(max_examples=60, deadline=None)
@given(seed=seeds, dim=st.integers(1, 16))
def test_trace_norm_is_sum_of_abs_eigenvalues(seed, dim):
    m = random_hermitian(np.random.default_rng(seed), dim)
    eig = np.linalg.eigvalsh(m)
    assert trace_norm(m) == pytest.approx(float(np.sum(np.abs(eig))), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(seed=seeds, dim=st.integers(1, 16))
def test_positive_part_decomposition(seed, dim):
    m = random_hermitian(np.random.default_rng(seed), dim)
    p, q = positive_part(m), positive_part(-m)
    assert np.max(np.abs(p - q - m)) <= 1e-9
    assert np.linalg.eigvalsh(p).min() >= -1e-10


@settings(max_examples=40, deadline=None)
@given(seed=seeds, n=st.integers(1, 5))
def test_partial_trace_preserves_trace_and_positivity(seed, n):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, n)
    keep = [q for q in range(n) if rng.random() < 0.5]
    red = partial_trace(rho, n, keep)
    assert abs(np.trace(red) - 1) <= 1e-10
    assert np.linalg.eigvalsh(red).min() >= -1e-10


@settings(max_examples=60, deadline=None)
@given(seed=seeds)
def test_tensor_product_associative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rng.standard_normal((rng.integers(1, 5), rng.integers(1, 5)))
               + 1j * rng.standard_normal((1, 1)) for _ in range(3))
    lhs = tensor_product(tensor_product(a, b), c)
    rhs = tensor_product(a, tensor_product(b, c))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(
    a=st.floats(-10, 10), d=st.floats(-10, 10),
    re=st.floats(-10, 10), im=st.floats(-10, 10),
)
def test_two_by_two_eigenvalues_match_characteristic_roots(a, d, re, im):
    m = np.array([[a, re + 1j * im], [re - 1j * im, d]])
    # roots of λ² − (a+d)λ + (ad − |b|²)
    mean, half_gap = (a + d) / 2, np.hypot((a - d) / 2, np.hypot(re, im))
    lam = hermitian_eig(m).eigenvalues
    assert lam[0] == pytest.approx(mean + half_gap, abs=1e-9)
    assert lam[1] == pytest.approx(mean - half_gap, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(seed=seeds, dim=st.integers(1, 64))
def test_eigensystem_invariants(seed, dim):
    m = random_hermitian(np.random.default_rng(seed), dim)
    eig = hermitian_eig(m)
    assert np.all(np.diff(eig.eigenvalues) <= 0)
    v = eig.eigenvectors
    assert np.max(np.abs(v.conj().T @ v - np.eye(dim))) <= 1e-10
    assert np.max(np.abs(m - eig.reconstruct())) <= 1e-10 * max(1.0, np.max(np.abs(m)))
