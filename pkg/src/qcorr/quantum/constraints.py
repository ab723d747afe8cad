"""The density-matrix constraint system for the ⅓(TR + BL + BR) distribution.

For the 2x2 game with payoffs (0,0) (6,6) / (6,6) (0,0), a shared state

    |psi> = sum a_xy |0x>|1y> + b_xy |1x>|0y> + c_xy |1x>|1y>

(row register first, each player's output qubit leading its register) is a
canonical QCE for the distribution exactly when

    Tr AA^† = Tr BB^† = Tr CC^† = 1/3,  AC^† = 0,  B^†C = 0,
    BB^† = CC^†,  A^†A = C^†C.

The last four come from the row and column players' block conditions
(off-diagonal block of the conditioned state vanishes, lower block equals
half the other conditioned state). The system has no solution because
(CC^†)^2 = (CA^†)(AC^†) = 0 forces C = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .. import linalg
from .normal import ConditionalStateFamily
from .state import QuantumError, QuantumState, as_tensor

THIRD = 1.0 / 3.0

ABC_KEYS = ("tr_AA", "tr_BB", "tr_CC", "AC+", "B+C", "BB+-CC+", "A+A-C+C")


# ---------------------------------------------------------------------------
# the trace criterion


def deviation_criterion(family: ConditionalStateFamily, eps: float = 1e-9) -> tuple[float, bool]:
    """``Tr|⅓ρ − ⅔σ|`` and whether it exceeds ⅓ (the row player then gains).

    ``ρ`` is the state conditioned on the advice of probability ⅓, ``σ`` the
    one of probability ⅔.
    """
    if len(family.entries) != 2:
        raise ValueError(f"expected two advice outcomes, got {len(family.entries)}")
    lo, hi = sorted(family.entries, key=lambda e: e.probability)
    if abs(lo.probability - THIRD) > 1e-9 or abs(hi.probability - 2 * THIRD) > 1e-9:
        raise ValueError(
            f"advice probabilities {lo.probability:.6g}, {hi.probability:.6g} are not 1/3 and 2/3"
        )
    value = linalg.trace_norm(THIRD * lo.rho - 2 * THIRD * hi.rho)
    return value, value > THIRD + eps


# ---------------------------------------------------------------------------
# coefficient blocks and residuals


def coefficient_blocks(state: QuantumState, row_output: int | None = None, col_output: int | None = None):
    """Split a two-player state into the ``A``, ``B``, ``C`` (and ``TL``) coefficient matrices.

    Rows of each matrix index the row player's non-output qubits, columns the
    column player's. Output qubits default to the first qubit of each register.
    """
    if set(state.partition) - {0, 1}:
        raise QuantumError("coefficient blocks need a two-player state")
    row_reg, col_reg = state.register(0), state.register(1)
    if not row_reg or not col_reg:
        raise QuantumError("both players need at least one qubit")
    r_out = row_reg[0] if row_output is None else row_output
    c_out = col_reg[0] if col_output is None else col_output
    if r_out not in row_reg or c_out not in col_reg:
        raise QuantumError("output qubits must belong to their players")
    order = [r_out] + [q for q in row_reg if q != r_out] + [c_out] + [q for q in col_reg if q != c_out]
    t = np.transpose(as_tensor(state), order)
    dx, dy = 2 ** (len(row_reg) - 1), 2 ** (len(col_reg) - 1)
    t = t.reshape(2, dx, 2, dy)
    return t[0, :, 1, :], t[1, :, 0, :], t[1, :, 1, :], t[0, :, 0, :]


def abc_residuals(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> dict[str, float]:
    """Max-abs residual of every equation in the system."""
    d = linalg.dagger
    out = {
        "tr_AA": abs(float(np.real(np.trace(a @ d(a)))) - THIRD),
        "tr_BB": abs(float(np.real(np.trace(b @ d(b)))) - THIRD),
        "tr_CC": abs(float(np.real(np.trace(c @ d(c)))) - THIRD),
        "AC+": _maxabs(a @ d(c)),
        "B+C": _maxabs(d(b) @ c),
        "BB+-CC+": _maxabs(b @ d(b) - c @ d(c)),
        "A+A-C+C": _maxabs(d(a) @ a - d(c) @ c),
    }
    return out


def abc_objective(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    """Sum of squared residual entries of the whole system."""
    d = linalg.dagger
    tr = [float(np.real(np.trace(m @ d(m)))) - THIRD for m in (a, b, c)]
    mats = [a @ d(c), d(b) @ c, b @ d(b) - c @ d(c), d(a) @ a - d(c) @ c]
    return float(sum(t * t for t in tr) + sum(np.sum(np.abs(m) ** 2) for m in mats))


def abc_objective_gradient(a: np.ndarray, b: np.ndarray, c: np.ndarray):
    """Gradient of :func:`abc_objective` with respect to the real and imaginary parts,
    returned as complex matrices ``dRe + i dIm`` (twice the conjugate Wirtinger derivative)."""
    d = linalg.dagger
    ta, tb, tc = (float(np.real(np.trace(m @ d(m)))) - THIRD for m in (a, b, c))
    diff_bc = b @ d(b) - c @ d(c)
    diff_ac = d(a) @ a - d(c) @ c
    ga = 2 * ta * a + a @ d(c) @ c + 2 * a @ diff_ac
    gb = 2 * tb * b + c @ d(c) @ b + 2 * diff_bc @ b
    gc = 2 * tc * c + c @ d(a) @ a + b @ d(b) @ c - 2 * diff_bc @ c - 2 * c @ diff_ac
    return 2 * ga, 2 * gb, 2 * gc


def _maxabs(m: np.ndarray) -> float:
    return float(np.max(np.abs(m))) if m.size else 0.0


@dataclass(frozen=True)
class ConstraintReport:
    """Residuals of both players' block conditions and of the A/B/C system.

    ``sigma2_norm``/``sigma3_residual`` describe the row player's state
    conditioned on advice R; the ``col_`` fields are the column player's
    analogues conditioned on advice B.
    """

    sigma2_norm: float
    sigma3_residual: float
    col_sigma2_norm: float
    col_sigma3_residual: float
    abc_residuals: dict[str, float] = field(default_factory=dict)
    distribution_error: float = 0.0

    def row_ok(self, eps: float = 1e-9) -> bool:
        return self.sigma2_norm <= eps and self.sigma3_residual <= eps

    def col_ok(self, eps: float = 1e-9) -> bool:
        return self.col_sigma2_norm <= eps and self.col_sigma3_residual <= eps

    def satisfied(self, eps: float = 1e-9) -> bool:
        return self.row_ok(eps) and self.col_ok(eps) and max(self.abc_residuals.values()) <= eps

    def as_dict(self) -> dict:
        return {
            "sigma2_norm": self.sigma2_norm,
            "sigma3_residual": self.sigma3_residual,
            "col_sigma2_norm": self.col_sigma2_norm,
            "col_sigma3_residual": self.col_sigma3_residual,
            "abc_residuals": dict(self.abc_residuals),
            "distribution_error": self.distribution_error,
        }


def _conditioned_blocks(upper: np.ndarray, lower: np.ndarray, other: np.ndarray) -> tuple[float, float]:
    """Block residuals for one player.

    ``upper`` and ``lower`` are the coefficient matrices (player's extra
    qubits as rows) on the two branches of the ⅔-probability advice, with the
    player's output bit 0 and 1 respectively; ``other`` is the coefficient
    matrix of the ⅓-probability advice.
    """
    d = linalg.dagger
    p_sigma = float(np.real(np.trace(upper @ d(upper) + lower @ d(lower))))
    p_rho = float(np.real(np.trace(other @ d(other))))
    if p_sigma <= 0.0 or p_rho <= 0.0:
        return float("inf"), float("inf")
    sigma2 = upper @ d(lower) / p_sigma
    sigma3 = lower @ d(lower) / p_sigma
    rho_tilde = other @ d(other) / p_rho
    return _maxabs(sigma2), _maxabs(sigma3 - rho_tilde / 2)


def appendix_d_report(
    state: QuantumState,
    row_output: int | None = None,
    col_output: int | None = None,
    support_tol: float = 1e-6,
) -> ConstraintReport:
    """Residual table for a candidate implementation of ⅓(TR + BL + BR).

    Raises :class:`QuantumError` if the state puts weight on TL. A state with
    the right support but wrong weights is reported, with
    ``distribution_error`` set to the largest probability mismatch.
    """
    a, b, c, tl = coefficient_blocks(state, row_output, col_output)
    tl_weight = float(np.sum(np.abs(tl) ** 2))
    if tl_weight > support_tol:
        raise QuantumError(f"state plays TL with probability {tl_weight:.3g}; wrong support")
    weights = [float(np.sum(np.abs(m) ** 2)) for m in (a, b, c)]
    dist_err = max(abs(w - THIRD) for w in weights)
    row = _conditioned_blocks(a, c, b)
    # column player: its extra qubits index the rows, hence the transposes
    col = _conditioned_blocks(b.T, c.T, a.T)
    return ConstraintReport(row[0], row[1], col[0], col[1], abc_residuals(a, b, c), dist_err)


# ---------------------------------------------------------------------------
# the algebraic contradiction


def cc_square_trace(a: np.ndarray, c: np.ndarray) -> float:
    """``Tr((CC^†)^2)``; zero whenever ``AC^† = 0`` and ``A^†A = C^†C``."""
    cc = c @ linalg.dagger(c)
    return float(np.real(np.trace(cc @ cc)))


def cc_square_identity_gap(a: np.ndarray, c: np.ndarray) -> float:
    """Max-abs gap in ``(CC^†)^2 = (CA^†)(AC^†) - C(A^†A - C^†C)C^†`` (exact for all ``A``, ``C``)."""
    d = linalg.dagger
    cc = c @ d(c)
    rhs = (c @ d(a)) @ (a @ d(c)) - c @ (d(a) @ a - d(c) @ c) @ d(c)
    return _maxabs(cc @ cc - rhs)


def trace_cc_bound(delta: float, rank: int) -> float:
    """Upper bound on ``Tr(CC^†)`` when ``||AC^†||_F`` and ``||A^†A - C^†C||_F`` are at most ``delta``.

    From ``Tr((CC^†)^2) <= delta^2 + delta Tr(CC^†)`` and
    ``Tr(CC^†)^2 <= rank Tr((CC^†)^2)``.
    """
    r = float(rank)
    return delta * (r + np.sqrt(r * r + 4.0 * r)) / 2.0


@dataclass(frozen=True, eq=False)
class SearchResult:
    min_residual: float
    best_state: QuantumState
    report: ConstraintReport
    delta: float
    trace_cc: float
    trace_cc_bound: float
    implication_holds: bool
    residuals: tuple[float, ...]


def _unpack(x: np.ndarray, dx: int, dy: int):
    z = x[: x.size // 2] + 1j * x[x.size // 2:]
    z = z / np.linalg.norm(z)
    k = dx * dy
    return z[:k].reshape(dx, dy), z[k:2 * k].reshape(dx, dy), z[2 * k:].reshape(dx, dy)


def _objective_and_gradient(x: np.ndarray, dx: int, dy: int) -> tuple[float, np.ndarray]:
    r = float(np.linalg.norm(x))
    blocks = _unpack(x, dx, dy)
    g = np.concatenate([m.reshape(-1) for m in abc_objective_gradient(*blocks)])
    g = np.concatenate([g.real, g.imag])
    u = x / r
    # chain rule through the normalization x -> x / |x|
    return abc_objective(*blocks), (g - u * (u @ g)) / r


def blocks_to_state(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> QuantumState:
    """Assemble ``sum a|0x>|1y> + b|1x>|0y> + c|1x>|1y>`` (row register first)."""
    dx, dy = a.shape
    t = np.zeros((2, dx, 2, dy), dtype=complex)
    t[0, :, 1, :], t[1, :, 0, :], t[1, :, 1, :] = a, b, c
    nx, ny = int(np.log2(dx)) + 1, int(np.log2(dy)) + 1
    amps = t.reshape(-1)
    return QuantumState(amps / np.linalg.norm(amps), (0,) * nx + (1,) * ny)


def infeasibility_search(
    row_dim: int,
    col_dim: int,
    restarts: int = 100,
    seed: int = 0,
    start: QuantumState | None = None,
) -> SearchResult:
    """Numerically minimize the squared residuals of the constraint system.

    ``row_dim``/``col_dim`` are the sizes of the coefficient matrices (powers
    of two). ``start`` is evaluated as given; each of the ``restarts`` random
    points is polished by L-BFGS-B. Deterministic for a fixed ``seed``.
    """
    for dim in (row_dim, col_dim):
        if dim < 1 or dim & (dim - 1):
            raise ValueError("block dimensions must be powers of two")
    nq = int(np.log2(row_dim)) + int(np.log2(col_dim)) + 2
    if nq > linalg.MAX_QUBITS:
        raise linalg.StateTooLargeError(f"search over {nq}-qubit states exceeds the cap")
    dx, dy = row_dim, col_dim

    def f(x):
        return abc_objective(*_unpack(x, dx, dy))

    def fg(x):
        return _objective_and_gradient(x, dx, dy)

    candidates: list[tuple[float, np.ndarray]] = []
    if start is not None:
        a, b, c, _ = coefficient_blocks(start)
        if a.shape != (dx, dy):
            raise ValueError(f"start state has {a.shape} blocks, expected {(dx, dy)}")
        z = np.concatenate([a.reshape(-1), b.reshape(-1), c.reshape(-1)])
        x0 = np.concatenate([z.real, z.imag])
        candidates.append((f(x0), x0))
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        x0 = rng.standard_normal(6 * dx * dy)
        res = minimize(fg, x0, jac=True, method="L-BFGS-B", options={"maxiter": 2000, "ftol": 1e-15, "gtol": 1e-12})
        candidates.append((float(res.fun), res.x))
    if not candidates:
        raise ValueError("nothing to evaluate: give a start state or at least one restart")
    residuals = tuple(v for v, _ in candidates)
    best_val, best_x = min(candidates, key=lambda t: t[0])
    a, b, c = _unpack(best_x, dx, dy)
    state = blocks_to_state(a, b, c)
    d = linalg.dagger
    delta = max(float(np.linalg.norm(a @ d(c))), float(np.linalg.norm(d(a) @ a - d(c) @ c)))
    tcc = float(np.real(np.trace(c @ d(c))))
    bound = trace_cc_bound(delta, min(dx, dy))
    return SearchResult(
        best_val,
        state,
        appendix_d_report(state, support_tol=np.inf),
        delta,
        tcc,
        bound,
        bool(tcc <= bound + 1e-12),
        residuals,
    )
