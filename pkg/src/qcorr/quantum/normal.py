"""Quantum correlated equilibria of normal-form games.

A :class:`QceInstance` bundles a game, a shared pure state with its qubit
partition, and one circuit per player. Deviations are evaluated on the
player's register: any alternative circuit induces a two- or multi-outcome
measurement there, so the best deviation for a two-action player is the
Helstrom-optimal test between its opponent-conditioned states.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np
from scipy.stats import unitary_group

from .. import linalg
from ..classical import (
    EQUILIBRIUM,
    NOT_EQUILIBRIUM,
    UNDETERMINED,
    CorrelatingDevice,
    EquilibriumReport,
)
from ..games import NormalFormGame, OutcomeDistribution
from .state import (
    PlayerCircuit,
    QuantumError,
    QuantumState,
    apply_gates,
    as_tensor,
    bits_of,
    canonical_action_map,
    measure_circuit,
    outcome_probabilities,
)

NORM_DRIFT_TOL = 1e-7
PROB_FLOOR = 1e-15


@dataclass(frozen=True, eq=False)
class QceInstance:
    game: NormalFormGame
    state: QuantumState
    circuits: tuple[PlayerCircuit, ...]

    def __post_init__(self):
        object.__setattr__(self, "circuits", tuple(self.circuits))
        g, st = self.game, self.state
        if len(self.circuits) != g.n_players:
            raise QuantumError(f"{len(self.circuits)} circuits for {g.n_players} players")
        if any(not 0 <= p < g.n_players for p in st.partition):
            raise QuantumError("state partition names a player outside the game")
        n = st.qubit_count
        ancilla_owner: dict[int, int] = {}
        for i, c in enumerate(self.circuits):
            if c.owner != i:
                raise QuantumError(f"circuit {i} is owned by player {c.owner}")
            for q in c.qubits():
                if q < 0:
                    raise QuantumError(f"negative qubit index {q}")
                if q < n:
                    if st.partition[q] != i:
                        raise QuantumError(f"player {i}'s circuit touches qubit {q} owned by player {st.partition[q]}")
                elif ancilla_owner.setdefault(q, i) != i:
                    raise QuantumError(f"ancilla {q} is used by players {ancilla_owner[q]} and {i}")
            for a in c.action_map.values():
                g.action_index(i, a)
        if ancilla_owner and sorted(ancilla_owner) != list(range(n, n + len(ancilla_owner))):
            raise QuantumError(f"ancilla indices must be {n}, {n + 1}, ... without gaps")
        object.__setattr__(self, "_ancillas", tuple(ancilla_owner[q] for q in sorted(ancilla_owner)))

    @property
    def ancilla_owners(self) -> tuple[int, ...]:
        return self._ancillas

    def prepared_state(self) -> QuantumState:
        """Shared state with every ancilla appended in ``|0>``."""
        return self.state.with_ancillas(self.ancilla_owners)

    def is_canonical(self) -> bool:
        for i, c in enumerate(self.circuits):
            acts = self.game.actions[i]
            if c.gates or 2 ** len(c.output_qubits) != len(acts):
                return False
            if sorted(c.action_map.values()) != sorted(acts):
                return False
        return not self.ancilla_owners


def canonical_instance(game: NormalFormGame, state: QuantumState) -> QceInstance:
    """Each player reads the first log2|A_i| qubits of its register."""
    circuits = []
    for i, acts in enumerate(game.actions):
        amap = canonical_action_map(acts)
        width = len(next(iter(amap)))
        reg = state.register(i)
        if len(reg) < width:
            raise QuantumError(f"player {i} holds {len(reg)} qubits but needs {width}")
        circuits.append(measure_circuit(i, reg[:width], acts))
    return QceInstance(game, state, tuple(circuits))


def _evolved(inst: QceInstance, order: Sequence[int] | None = None) -> np.ndarray:
    psi = as_tensor(inst.prepared_state())
    order = range(inst.game.n_players) if order is None else order
    for i in order:
        psi = apply_gates(psi, inst.circuits[i].gates)
    drift = abs(float(np.sum(np.abs(psi) ** 2)) - 1.0)
    if drift > NORM_DRIFT_TOL:
        raise ArithmeticError(f"state norm drifted by {drift:.2e} during gate application")
    return psi


def _output_distribution(inst: QceInstance, psi: np.ndarray) -> OutcomeDistribution:
    outputs = [q for c in inst.circuits for q in c.output_qubits]
    probs = outcome_probabilities(psi, outputs)
    entries: dict[tuple[str, ...], float] = {}
    width = len(outputs)
    for k, p in enumerate(probs):
        if p <= PROB_FLOOR:
            continue
        bits = bits_of(k, width)
        profile, pos = [], 0
        for c in inst.circuits:
            m = len(c.output_qubits)
            profile.append(c.action(bits[pos:pos + m]))
            pos += m
        key = tuple(profile)
        entries[key] = entries.get(key, 0.0) + float(p)
    order = {p: k for k, p in enumerate(inst.game.profiles())}
    return OutcomeDistribution(sorted(entries.items(), key=lambda kv: order[kv[0]]))


def simulate_normal_qce(inst: QceInstance, order: Sequence[int] | None = None) -> OutcomeDistribution:
    """Exact outcome distribution when every player runs its circuit.

    ``order`` sets the sequence in which players' unitaries are applied; the
    result does not depend on it.
    """
    return _output_distribution(inst, _evolved(inst, order))


def evolved_amplitudes(inst: QceInstance, order: Sequence[int] | None = None) -> np.ndarray:
    return _evolved(inst, order).reshape(-1)


def canonicalize(inst: QceInstance) -> QceInstance:
    """Push all unitaries into the shared state, leaving bare standard-basis readouts."""
    prepared = inst.prepared_state()
    psi = _evolved(inst)
    state = QuantumState(psi.reshape(-1) / np.linalg.norm(psi), prepared.partition)
    return QceInstance(inst.game, state, tuple(c.bare() for c in inst.circuits))


def qce_to_ce(inst: QceInstance) -> CorrelatingDevice:
    """Classical device: sample a full standard-basis string of the canonical state,
    recommend to each player the action encoded by its output bits."""
    if any(c.gates for c in inst.circuits):
        raise QuantumError("qce_to_ce expects a canonical instance; call canonicalize first")
    st = inst.prepared_state()
    n = st.qubit_count
    entries: dict[tuple[str, ...], float] = {}
    for k, p in enumerate(st.probabilities()):
        if p <= PROB_FLOOR:
            continue
        bits = bits_of(k, n)
        key = tuple(c.action("".join(bits[q] for q in c.output_qubits)) for c in inst.circuits)
        entries[key] = entries.get(key, 0.0) + float(p)
    order = {p: k for k, p in enumerate(inst.game.profiles())}
    return CorrelatingDevice(sorted(entries.items(), key=lambda kv: order[kv[0]]))


# ---------------------------------------------------------------------------
# conditional states and deviations


@dataclass(frozen=True, eq=False)
class ConditionalState:
    advice: tuple[str, ...]
    probability: float
    rho: np.ndarray


@dataclass(frozen=True, eq=False)
class ConditionalStateFamily:
    """Reduced states of one player's register given each opponents' advice profile.

    ``register`` lists the player's qubits (ascending); ``output_positions``
    are the positions of its output qubits inside that register.
    """

    player: int
    register: tuple[int, ...]
    output_positions: tuple[int, ...]
    action_map: Mapping[str, str]
    entries: tuple[ConditionalState, ...]

    @property
    def dim(self) -> int:
        return 2 ** len(self.register)

    def by_advice(self) -> dict[tuple[str, ...], ConditionalState]:
        return {e.advice: e for e in self.entries}

    def action_projector(self, action: str) -> np.ndarray:
        """Projector onto the register basis states whose output bits encode ``action``."""
        diag = np.zeros(self.dim)
        width = len(self.register)
        for k in range(self.dim):
            bits = bits_of(k, width)
            if self.action_map["".join(bits[p] for p in self.output_positions)] == action:
                diag[k] = 1.0
        return np.diag(diag).astype(complex)


def conditional_states(inst: QceInstance, player: int) -> ConditionalStateFamily:
    """Reduced state of ``player``'s register after opponents read their output qubits.

    Non-canonical instances are canonicalized first. Advice profiles with zero
    probability are omitted.
    """
    if any(c.gates for c in inst.circuits) or inst.ancilla_owners:
        inst = canonicalize(inst)
    st = inst.state
    psi = as_tensor(st)
    n = st.qubit_count
    reg = st.register(player)
    own = inst.circuits[player]
    out_pos = tuple(reg.index(q) for q in own.output_qubits)
    opponents = [i for i in range(inst.game.n_players) if i != player]
    opp_outputs = [q for i in opponents for q in inst.circuits[i].output_qubits]
    rest = [q for q in range(n) if q not in reg and q not in opp_outputs]
    entries = []
    per_opp = [sorted(inst.circuits[i].action_map.items()) for i in opponents]
    for combo in itertools.product(*per_opp):
        bits = "".join(b for b, _ in combo)
        idx = [slice(None)] * n
        for q, b in zip(opp_outputs, bits):
            idx[q] = int(b)
        sub = psi[tuple(idx)]
        remaining = [q for q in range(n) if q not in opp_outputs]
        axes = [remaining.index(q) for q in reg] + [remaining.index(q) for q in rest]
        mat = np.transpose(sub, axes).reshape(2 ** len(reg), -1)
        rho = mat @ linalg.dagger(mat)
        p = float(np.real(np.trace(rho)))
        if p <= PROB_FLOOR:
            continue
        entries.append(ConditionalState(tuple(a for _, a in combo), p, rho / p))
    total = sum(e.probability for e in entries)
    entries = [ConditionalState(e.advice, e.probability / total, e.rho) for e in entries]
    return ConditionalStateFamily(player, reg, out_pos, dict(own.action_map), tuple(entries))


def payoff_table(game: NormalFormGame, family: ConditionalStateFamily) -> dict[tuple[str, ...], np.ndarray]:
    """``advice -> [u(x, advice) for x in player's actions]``."""
    i = family.player
    table = {}
    for e in family.entries:
        row = []
        for x in game.actions[i]:
            profile = list(e.advice)
            profile.insert(i, x)
            row.append(game.payoff(profile)[i])
        table[e.advice] = np.array(row)
    return table


def action_operators(family: ConditionalStateFamily, payoffs: Mapping[tuple[str, ...], Sequence[float]]) -> list[np.ndarray]:
    """``M_x = sum_a p(a) u(x, a) rho_a`` for each action index ``x``."""
    k = len(next(iter(payoffs.values())))
    ms = [np.zeros((family.dim, family.dim), dtype=complex) for _ in range(k)]
    for e in family.entries:
        u = payoffs[e.advice]
        for x in range(k):
            ms[x] += e.probability * u[x] * e.rho
    return ms


class DeviationValue(NamedTuple):
    value: float
    measurement: np.ndarray


def optimal_deviation_binary(
    family: ConditionalStateFamily, payoffs: Mapping[tuple[str, ...], Sequence[float]]
) -> DeviationValue:
    """Best expected utility over all measurements for a two-action player.

    The value is ``Tr(M_1) + Tr((M_0 - M_1)_+)``; ``measurement`` projects onto
    the positive eigenspace of ``M_0 - M_1`` (play action 0 on that outcome).
    """
    ms = action_operators(family, payoffs)
    if len(ms) != 2:
        raise ValueError(f"player has {len(ms)} actions; use the dual-certificate path")
    diff = ms[0] - ms[1]
    value = float(np.real(np.trace(ms[1]))) + float(np.real(np.trace(linalg.positive_part(diff))))
    return DeviationValue(value, linalg.positive_projector(diff))


def measurement_value(ms: Sequence[np.ndarray], povm: Sequence[np.ndarray]) -> float:
    return float(sum(np.real(np.trace(e @ m)) for e, m in zip(povm, ms)))


def dual_certificate_check(m_list: Sequence[np.ndarray], y: np.ndarray, on_path: float, eps: float = 1e-9) -> bool:
    """True iff ``Y - M_x >= 0`` for every ``x`` and ``Tr Y <= on_path``, each within ``eps``.

    Such a ``Y`` bounds every measurement's value by ``Tr Y``.
    """
    y = linalg.as_matrix(y)
    for m in m_list:
        if linalg.min_eigenvalue(y - linalg.as_matrix(m)) < -eps:
            return False
    return float(np.real(np.trace(y))) <= on_path + eps


def sampled_deviation_value(ms: Sequence[np.ndarray], samples: int, seed: int = 0) -> float:
    """Lower bound on the best deviation: random orthonormal bases, each vector
    assigned to its best action. The standard basis is always included."""
    dim = ms[0].shape[0]
    bases = [np.eye(dim, dtype=complex)]
    if dim > 1 and samples > 0:
        rng = np.random.default_rng(seed)
        bases += list(unitary_group.rvs(dim, size=samples, random_state=rng).reshape(samples, dim, dim))
    best = -np.inf
    stack = np.stack(ms)
    for u in bases:
        # vals[x, j] = <u_j| M_x |u_j>
        vals = np.real(np.einsum("ij,xik,kj->xj", np.conj(u), stack, u))
        best = max(best, float(vals.max(axis=0).sum()))
    return best


def on_path_utility(family: ConditionalStateFamily, game: NormalFormGame, ms: Sequence[np.ndarray]) -> float:
    acts = game.actions[family.player]
    return float(sum(np.real(np.trace(family.action_projector(a) @ m)) for a, m in zip(acts, ms)))


def verify_canonical_qce(
    inst: QceInstance,
    eps: float = 1e-9,
    certificates: Mapping[int, np.ndarray] | None = None,
    samples: int = 256,
    seed: int = 0,
) -> EquilibriumReport:
    """Check that no player gains by measuring its register differently.

    Two-action players are solved exactly. Players with more actions need a
    dual certificate in ``certificates``; without one their gain is only
    bounded below by sampled measurements and the verdict may be
    ``"undetermined"``.
    """
    certificates = certificates or {}
    if any(c.gates for c in inst.circuits) or inst.ancilla_owners:
        inst = canonicalize(inst)
    g = inst.game
    gains, on_path, best_values, status, measurements = [], [], [], [], []
    for i in range(g.n_players):
        fam = conditional_states(inst, i)
        table = payoff_table(g, fam)
        ms = action_operators(fam, table)
        follow = on_path_utility(fam, g, ms)
        k = len(g.actions[i])
        meas = None
        if k == 1:
            best, state = follow, "exact"
        elif k == 2:
            best, meas = optimal_deviation_binary(fam, table)
            state = "exact"
        elif i in certificates and dual_certificate_check(ms, certificates[i], follow, eps):
            best, state = float(np.real(np.trace(certificates[i]))), "certified"
        else:
            best = max(follow, sampled_deviation_value(ms, samples, seed))
            state = "lower-bound"
        gains.append(best - follow)
        on_path.append(follow)
        best_values.append(best)
        status.append(state)
        measurements.append(meas)
    if max(gains) > eps:
        verdict = NOT_EQUILIBRIUM
    elif "lower-bound" in status:
        verdict = UNDETERMINED
    else:
        verdict = EQUILIBRIUM
    worst = int(np.argmax(gains))
    witness = None
    if gains[worst] > eps:
        witness = {"player": worst, "utility": best_values[worst], "measurement": measurements[worst]}
    return EquilibriumReport(
        verdict,
        tuple(max(x, 0.0) for x in gains),
        tuple(on_path),
        tuple(best_values),
        eps,
        witness,
        {"status": tuple(status), "measurements": tuple(measurements)},
    )
