"""Pure multi-qubit states, per-player circuits, and exact measurement helpers.

State vectors are big-endian: qubit 0 is the leftmost ket symbol and the
most significant bit of the basis index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .. import linalg

NORM_TOL = 1e-9
UNITARY_TOL = 1e-9

_S2 = 1 / np.sqrt(2)
GATES: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
}
for _m in GATES.values():
    _m.flags.writeable = False


class QuantumError(ValueError):
    pass


def bits_of(index: int, width: int) -> str:
    return format(index, f"0{width}b") if width else ""


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Normalized amplitude vector plus the player owning each qubit."""

    amplitudes: np.ndarray
    partition: tuple[int, ...]

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        n = len(self.partition)
        if amps.size != 2**n:
            raise QuantumError(f"{amps.size} amplitudes do not describe {n} qubits")
        if n > linalg.MAX_QUBITS:
            raise linalg.StateTooLargeError(f"{n} qubits exceeds the cap of {linalg.MAX_QUBITS}")
        if not np.all(np.isfinite(amps)):
            raise QuantumError("amplitudes must be finite")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise QuantumError(f"state has norm {norm!r}; pure states must be normalized")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "partition", tuple(int(p) for p in self.partition))

    @property
    def qubit_count(self) -> int:
        return len(self.partition)

    def register(self, player: int) -> tuple[int, ...]:
        return tuple(q for q, owner in enumerate(self.partition) if owner == player)

    @property
    def players(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.partition)))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def density_matrix(self) -> np.ndarray:
        return linalg.projector(self.amplitudes)

    def with_ancillas(self, owners: Sequence[int]) -> "QuantumState":
        """Append ``|0>`` qubits owned by ``owners`` after the existing ones."""
        if not owners:
            return self
        pad = np.zeros(2 ** len(owners), dtype=complex)
        pad[0] = 1.0
        return QuantumState(linalg.tensor_product(self.amplitudes, pad).reshape(-1), self.partition + tuple(owners))


def state_from_terms(terms: Mapping[str, complex], partition: Sequence[int], normalize: bool = False) -> QuantumState:
    """Build a state from ``{"01": amp, ...}`` ket strings (spaces ignored)."""
    n = len(partition)
    amps = np.zeros(2**n, dtype=complex)
    for ket, amp in terms.items():
        ket = ket.replace(" ", "").replace("|", "").replace(">", "")
        if len(ket) != n or set(ket) - {"0", "1"}:
            raise QuantumError(f"ket {ket!r} does not name a {n}-qubit basis state")
        amps[int(ket, 2)] += amp
    if normalize:
        amps /= np.linalg.norm(amps)
    return QuantumState(amps, tuple(partition))


def product_state(*parts: QuantumState) -> QuantumState:
    amps = linalg.kron_all(p.amplitudes for p in parts).reshape(-1)
    return QuantumState(amps, sum((p.partition for p in parts), ()))


# ---------------------------------------------------------------------------
# gates and circuits


@dataclass(frozen=True, eq=False)
class Gate:
    targets: tuple[int, ...]
    name: str | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if len(set(self.targets)) != len(self.targets):
            raise QuantumError(f"gate targets repeat a qubit: {self.targets}")
        if self.matrix is None:
            if self.name is None or self.name.upper() not in GATES:
                raise QuantumError(f"unknown gate {self.name!r}")
            object.__setattr__(self, "name", self.name.upper())
        else:
            m = linalg.as_matrix(self.matrix)
            if m.shape != (2 ** len(self.targets),) * 2:
                raise QuantumError(f"gate matrix of shape {m.shape} does not fit {len(self.targets)} targets")
            err = float(np.max(np.abs(linalg.dagger(m) @ m - np.eye(m.shape[0]))))
            if err > UNITARY_TOL:
                raise QuantumError(f"gate matrix is not unitary (max |U^†U - I| = {err:.2e})")
            object.__setattr__(self, "matrix", m)
        if self.unitary().shape[0] != 2 ** len(self.targets):
            raise QuantumError(f"gate {self.name} given {len(self.targets)} targets")

    def unitary(self) -> np.ndarray:
        return self.matrix if self.matrix is not None else GATES[self.name]


def gate(name: str, *targets: int) -> Gate:
    return Gate(tuple(targets), name=name)


def unitary_gate(matrix, *targets: int) -> Gate:
    return Gate(tuple(targets), matrix=np.asarray(matrix, dtype=complex))


def canonical_action_map(actions: Sequence[str]) -> dict[str, str]:
    """Bitstring ``k`` (big-endian, width log2|A|) maps to the ``k``-th action."""
    k = len(actions)
    width = k.bit_length() - 1
    if 2**width != k:
        raise QuantumError(f"{k} actions is not a power of two; no canonical measurement exists")
    return {bits_of(j, width): a for j, a in enumerate(actions)}


@dataclass(frozen=True, eq=False)
class PlayerCircuit:
    """Unitaries on the owner's qubits followed by a standard-basis readout."""

    owner: int
    gates: tuple[Gate, ...] = ()
    output_qubits: tuple[int, ...] = ()
    action_map: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "output_qubits", tuple(int(q) for q in self.output_qubits))
        amap = {str(k): str(v) for k, v in dict(self.action_map).items()}
        width = len(self.output_qubits)
        expected = {bits_of(j, width) for j in range(2**width)}
        if set(amap) != expected:
            raise QuantumError(
                f"action map keys {sorted(amap)} must be every {width}-bit string for circuit of player {self.owner}"
            )
        object.__setattr__(self, "action_map", amap)

    def qubits(self) -> set[int]:
        out = set(self.output_qubits)
        for g in self.gates:
            out.update(g.targets)
        return out

    @property
    def is_measurement_only(self) -> bool:
        return not self.gates

    def action(self, bits: str) -> str:
        return self.action_map[bits]

    def bare(self) -> "PlayerCircuit":
        return PlayerCircuit(self.owner, (), self.output_qubits, self.action_map)


def measure_circuit(owner: int, qubits: Sequence[int], actions: Sequence[str]) -> PlayerCircuit:
    """Standard-basis readout of ``qubits`` with the canonical bitstring-to-action map."""
    return PlayerCircuit(owner, (), tuple(qubits), canonical_action_map(actions))


def constant_circuit(owner: int, action: str) -> PlayerCircuit:
    """Play ``action`` without touching any qubit."""
    return PlayerCircuit(owner, (), (), {"": action})


# ---------------------------------------------------------------------------
# state-vector kernels (tensor of shape (2,)*n)


def apply_unitary(psi: np.ndarray, u: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """Apply ``u`` to ``targets`` of a state tensor; returns a new tensor."""
    n = psi.ndim
    k = len(targets)
    ut = np.asarray(u).reshape((2,) * (2 * k))
    out = np.tensordot(ut, psi, axes=(list(range(k, 2 * k)), list(targets)))
    # tensordot puts the new target axes first
    rest = [q for q in range(n) if q not in targets]
    order = list(targets) + rest
    return np.moveaxis(out, list(range(n)), order)


def apply_gates(psi: np.ndarray, gates: Iterable[Gate]) -> np.ndarray:
    for g in gates:
        psi = apply_unitary(psi, g.unitary(), g.targets)
    return psi


def outcome_probabilities(psi: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Joint distribution of a standard-basis measurement of ``qubits`` (big-endian index)."""
    probs = np.abs(psi) ** 2
    n = psi.ndim
    rest = tuple(q for q in range(n) if q not in qubits)
    marg = probs.sum(axis=rest) if rest else probs
    # summing leaves the kept axes in ascending order; reorder to ``qubits`` order
    kept = sorted(qubits)
    marg = np.transpose(marg, [kept.index(q) for q in qubits]) if qubits else np.asarray(marg)
    return np.asarray(marg).reshape(-1)


def project(psi: np.ndarray, qubits: Sequence[int], bits: str) -> tuple[float, np.ndarray | None]:
    """Post-measurement state after reading ``bits`` on ``qubits``; ``(prob, normalized tensor)``."""
    idx = [slice(None)] * psi.ndim
    for q, b in zip(qubits, bits):
        idx[q] = int(b)
    out = np.zeros_like(psi)
    out[tuple(idx)] = psi[tuple(idx)]
    p = float(np.sum(np.abs(out) ** 2))
    if p <= 0.0:
        return 0.0, None
    return p, out / np.sqrt(p)


def as_tensor(state: QuantumState) -> np.ndarray:
    return np.array(state.amplitudes).reshape((2,) * state.qubit_count)
