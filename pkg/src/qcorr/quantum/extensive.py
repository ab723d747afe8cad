"""Quantum advice in extensive-form games.

Each player keeps its register for the whole game and, on reaching one of
its information sets, runs that set's circuit on it: unitaries, then a
standard-basis readout whose bits select the action. Simulation branches on
every readout outcome and carries exact probabilities.

Information sets without a circuit take a fixed mixed action (a chance-like
player such as the referee picking GHZ inputs).
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..classical import EQUILIBRIUM, NOT_EQUILIBRIUM, EquilibriumReport, _argmax_prefer
from ..games import ExtensiveFormGame, GameError, OutcomeDistribution, require_valid
from .state import (
    PlayerCircuit,
    QuantumError,
    QuantumState,
    apply_gates,
    as_tensor,
    bits_of,
    outcome_probabilities,
    project,
)

PROB_FLOOR = 1e-15
MAX_HISTORIES = 200_000
MAX_LOOKAHEAD_SUBSETS = 4096
TESTED_FAMILIES = "lookahead plans over own circuits, per-information-set action choices, supplied alternative circuits"


class MeasurementReuseWarning(UserWarning):
    """A circuit acts on a qubit that an earlier circuit already measured."""


@dataclass(frozen=True, eq=False)
class ExtensiveQceInstance:
    """Game, shared state, per-information-set circuits, and fixed mixtures for circuit-free sets."""

    game: ExtensiveFormGame
    state: QuantumState
    circuits: Mapping[str, PlayerCircuit]
    mixing: Mapping[str, Mapping[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        g, st = self.game, self.state
        require_valid(g)
        circuits = dict(self.circuits)
        mixing = {k: dict(v) for k, v in dict(self.mixing).items()}
        infosets = g.infosets()
        n = st.qubit_count
        ancilla_owner: dict[int, int] = {}
        for iid, c in circuits.items():
            if iid not in infosets:
                raise QuantumError(f"circuit given for unknown information set {iid!r}")
            owner = infosets[iid].owner
            if c.owner != owner:
                raise QuantumError(f"circuit at {iid!r} is owned by player {c.owner}, the set by player {owner}")
            for q in c.qubits():
                if q < 0:
                    raise QuantumError(f"negative qubit index {q}")
                if q < n:
                    if st.partition[q] != owner:
                        raise QuantumError(f"circuit at {iid!r} touches qubit {q} owned by player {st.partition[q]}")
                elif ancilla_owner.setdefault(q, owner) != owner:
                    raise QuantumError(f"ancilla {q} is used by players {ancilla_owner[q]} and {owner}")
            for a in c.action_map.values():
                if a not in infosets[iid].actions:
                    raise QuantumError(f"circuit at {iid!r} maps to {a!r}, not an action there")
        for iid, inf in infosets.items():
            if iid in circuits:
                if iid in mixing:
                    raise QuantumError(f"information set {iid!r} has both a circuit and a mixture")
                continue
            if iid not in mixing:
                raise QuantumError(f"information set {iid!r} has neither a circuit nor a mixture")
            dist = mixing[iid]
            if set(dist) - set(inf.actions):
                raise QuantumError(f"mixture at {iid!r} names actions outside {inf.actions}")
            if any(p < 0 for p in dist.values()) or abs(sum(dist.values()) - 1.0) > 1e-9:
                raise QuantumError(f"mixture at {iid!r} is not a probability distribution")
        if ancilla_owner and sorted(ancilla_owner) != list(range(n, n + len(ancilla_owner))):
            raise QuantumError(f"ancilla indices must be {n}, {n + 1}, ... without gaps")
        object.__setattr__(self, "circuits", circuits)
        object.__setattr__(self, "mixing", mixing)
        object.__setattr__(self, "_ancillas", tuple(ancilla_owner[q] for q in sorted(ancilla_owner)))

    def prepared_state(self) -> QuantumState:
        # allocating every ancilla up front is equivalent to allocating at first use:
        # untouched |0> qubits do not interact with anything
        return self.state.with_ancillas(self._ancillas)


def _outcomes(psi: np.ndarray, qubits: Sequence[int]):
    """``(bits, probability, post-measurement tensor)`` for each possible readout."""
    probs = outcome_probabilities(psi, qubits)
    for k, p in enumerate(probs):
        if p > PROB_FLOOR:
            bits = bits_of(k, len(qubits))
            _, post = project(psi, qubits, bits)
            yield bits, float(p), post


def _touches_measured(c: PlayerCircuit, measured: frozenset) -> bool:
    return bool(c.qubits() & measured)


def simulate_extensive_qce(
    g: ExtensiveFormGame | ExtensiveQceInstance,
    state: QuantumState | None = None,
    circuits: Mapping[str, PlayerCircuit] | None = None,
    mixing: Mapping[str, Mapping[str, float]] | None = None,
) -> OutcomeDistribution:
    """Exact leaf distribution of the protocol."""
    inst = g if isinstance(g, ExtensiveQceInstance) else ExtensiveQceInstance(g, state, circuits or {}, mixing or {})
    game = inst.game
    out: dict[str, float] = {}
    warned: set[str] = set()

    def walk(nid: str, psi: np.ndarray, prob: float, measured: frozenset):
        nd = game.node(nid)
        if nd.is_leaf:
            out[nid] = out.get(nid, 0.0) + prob
            return
        c = inst.circuits.get(nd.infoset)
        if c is None:
            for a, p in inst.mixing[nd.infoset].items():
                if p > 0.0:
                    walk(nd.child(a), psi, prob * p, measured)
            return
        if _touches_measured(c, measured) and nd.infoset not in warned:
            warned.add(nd.infoset)
            warnings.warn(
                f"circuit at {nd.infoset!r} acts on already measured qubits {sorted(c.qubits() & measured)}",
                MeasurementReuseWarning,
                stacklevel=3,
            )
        psi = apply_gates(psi, c.gates)
        done = measured | frozenset(c.output_qubits)
        for bits, p, post in _outcomes(psi, c.output_qubits):
            walk(nd.child(c.action(bits)), post, prob * p, done)

    walk(game.root, as_tensor(inst.prepared_state()), 1.0, frozenset())
    return OutcomeDistribution((k, v) for k, v in out.items() if v > PROB_FLOOR)


# ---------------------------------------------------------------------------
# deviations


@dataclass(eq=False)
class _History:
    """One branch of play, with the deviator's actions left open at its own sets."""

    node: str
    prob: float
    key: tuple | None = None  # deviator's information when it moves here
    honest: str | None = None  # the action the protocol would take
    children: list = field(default_factory=list)  # (prob, action or None, _History)


@dataclass(frozen=True)
class LookaheadResult:
    value: float
    on_path: float
    plan: dict = field(default_factory=dict)

    @property
    def gain(self) -> float:
        return self.value - self.on_path


class _LookaheadTree:
    """Histories of play when ``player`` runs the circuits in ``early`` at the start.

    The deviator then knows the early readouts plus the readouts of its own
    remaining circuits as they are reached, and may play any action at any of
    its information sets. With perfect recall the deviator's information is a
    tree, so the best response is found by backward induction.
    """

    def __init__(self, inst: ExtensiveQceInstance, player: int, early: Sequence[str], cap: int):
        self.inst = inst
        self.player = player
        self.early = tuple(early)
        self.cap = cap
        self.count = 0
        self.members: dict[tuple, list[_History]] = {}
        self.choice: dict[tuple, str] = {}
        self.honest: dict[tuple, str | None] = {}
        self.roots: list[tuple[float, _History]] = []
        psi = as_tensor(inst.prepared_state())
        for prob, results, post in self._run_early(psi):
            self.roots.append((prob, self._grow(inst.game.root, post, prob, results, ())))

    def _run_early(self, psi: np.ndarray):
        branches = [(1.0, {}, psi)]
        for iid in self.early:
            c = self.inst.circuits[iid]
            nxt = []
            for prob, res, cur in branches:
                cur = apply_gates(cur, c.gates)
                for bits, p, post in _outcomes(cur, c.output_qubits):
                    nxt.append((prob * p, {**res, iid: bits}, post))
            branches = nxt
        for prob, res, post in branches:
            yield prob, tuple(sorted(res.items())), post

    def _grow(self, nid: str, psi: np.ndarray, prob: float, results: tuple, seen: tuple) -> _History:
        self.count += 1
        if self.count > self.cap:
            raise GameError(f"more than {self.cap} histories while evaluating lookahead deviations")
        inst, g = self.inst, self.inst.game
        nd = g.node(nid)
        h = _History(nid, prob)
        if nd.is_leaf:
            return h
        c = inst.circuits.get(nd.infoset)
        own = nd.owner == self.player
        if own:
            early = dict(results)
            if nd.infoset in early:
                h.key = (nd.infoset, results, seen)
                h.honest = c.action(early[nd.infoset])
                self._register(h)
                for a in nd.actions:
                    h.children.append((1.0, a, self._grow(nd.child(a), psi, prob, results, seen)))
                return h
            if c is None:
                h.key = (nd.infoset, results, seen)
                self._register(h)
                for a in nd.actions:
                    h.children.append((1.0, a, self._grow(nd.child(a), psi, prob, results, seen)))
                return h
            # run the honest circuit, observe, then act freely
            psi = apply_gates(psi, c.gates)
            for bits, p, post in _outcomes(psi, c.output_qubits):
                obs = seen + ((nd.infoset, bits),)
                sub = _History(nid, prob * p, (nd.infoset, results, obs), c.action(bits))
                self._register(sub)
                for a in nd.actions:
                    sub.children.append((1.0, a, self._grow(nd.child(a), post, prob * p, results, obs)))
                h.children.append((p, None, sub))
            return h
        if c is None:
            for a, p in inst.mixing[nd.infoset].items():
                if p > 0.0:
                    h.children.append((p, None, self._grow(nd.child(a), psi, prob * p, results, seen)))
            return h
        psi = apply_gates(psi, c.gates)
        for bits, p, post in _outcomes(psi, c.output_qubits):
            h.children.append((p, None, self._grow(nd.child(c.action(bits)), post, prob * p, results, seen)))
        return h

    def _register(self, h: _History):
        self.members.setdefault(h.key, []).append(h)
        self.honest.setdefault(h.key, h.honest)

    def value(self, h: _History) -> float:
        """Conditional expected payoff of the deviator from ``h`` on."""
        nd = self.inst.game.node(h.node)
        if nd.is_leaf:
            return float(nd.payoffs[self.player])
        if h.key is not None:
            a = self.choose(h.key)
            return next(self.value(ch) for _, act, ch in h.children if act == a)
        return sum(p * self.value(ch) for p, _, ch in h.children)

    def choose(self, key: tuple) -> str:
        if key not in self.choice:
            members = self.members[key]
            actions = self.inst.game.node(members[0].node).actions
            totals = []
            for a in actions:
                t = 0.0
                for h in members:
                    ch = next(c for _, act, c in h.children if act == a)
                    t += h.prob * self.value(ch)
                totals.append(t)
            honest = self.honest[key]
            pref = actions.index(honest) if honest in actions else 0
            self.choice[key] = actions[_argmax_prefer(totals, pref)]
        return self.choice[key]

    def best(self) -> float:
        return sum(p * self.value(h) for p, h in self.roots)

    def plan(self) -> dict[str, str]:
        out = {}
        for (iid, results, seen), a in sorted(self.choice.items(), key=lambda kv: repr(kv[0])):
            if a == self.honest[(iid, results, seen)]:
                continue
            tag = ",".join(f"{i}={b}" for i, b in results + seen if b)
            out[f"{iid}|{tag}" if tag else iid] = a
        return out


def _as_instance(g, state, circuits, mixing) -> ExtensiveQceInstance:
    if isinstance(g, ExtensiveQceInstance):
        return g
    return ExtensiveQceInstance(g, state, circuits or {}, mixing or {})


def lookahead_deviation_value(
    g: ExtensiveFormGame | ExtensiveQceInstance,
    state: QuantumState | None = None,
    circuits: Mapping[str, PlayerCircuit] | None = None,
    player: int = 0,
    mixing: Mapping[str, Mapping[str, float]] | None = None,
    eps: float = 1e-9,
    max_subsets: int = MAX_LOOKAHEAD_SUBSETS,
    max_histories: int = MAX_HISTORIES,
) -> LookaheadResult:
    """Best value when ``player`` may run any subset of its own circuits at the start.

    For each subset the player reads those circuits' outputs immediately,
    then at every own information set picks an action as a function of
    everything it has read. The empty subset is the plain deviation family
    (honest readouts, free actions). ``plan`` lists the winning subset and the
    (information set | readouts) entries where it departs from the protocol.
    """
    inst = _as_instance(g, state, circuits, mixing)
    game = inst.game
    if not 0 <= player < game.n_players:
        raise GameError(f"no player {player}")
    on_path = float(game.expected_utility(simulate_extensive_qce(inst))[player])
    own = [inf.id for inf in game.player_infosets(player) if inf.id in inst.circuits]
    if 2 ** len(own) > max_subsets:
        raise GameError(f"{2 ** len(own)} lookahead subsets for player {player} exceed the cap {max_subsets}")
    best_value, best_plan = -np.inf, {}
    for r in range(len(own) + 1):
        for early in itertools.combinations(own, r):
            tree = _LookaheadTree(inst, player, early, max_histories)
            v = tree.best()
            if v > best_value + eps:
                best_value, best_plan = v, {"early": list(early), "deviations": tree.plan()}
    return LookaheadResult(float(best_value), on_path, best_plan)


def verify_extensive_qce(
    inst: ExtensiveQceInstance,
    eps: float = 1e-9,
    alternatives: Mapping[int, Sequence[Mapping[str, PlayerCircuit]]] | None = None,
) -> EquilibriumReport:
    """Check every player against the tested deviation families.

    ``alternatives`` maps a player to replacement circuit sets for its
    information sets; each is simulated and compared with the protocol. A
    clean verdict holds within these families only, which ``details`` records.
    """
    game = inst.game
    base = game.expected_utility(simulate_extensive_qce(inst))
    gains, best_values, witnesses = [], [], []
    for i in range(game.n_players):
        res = lookahead_deviation_value(inst, player=i, eps=eps)
        value, witness = res.value, {"player": i, "utility": res.value, "plan": res.plan}
        for alt in (alternatives or {}).get(i, ()):
            circuits = {**inst.circuits, **alt}
            mixing = {k: v for k, v in inst.mixing.items() if k not in alt}
            alt_inst = ExtensiveQceInstance(game, inst.state, circuits, mixing)
            v = float(game.expected_utility(simulate_extensive_qce(alt_inst))[i])
            if v > value + eps:
                value, witness = v, {"player": i, "utility": v, "circuits": sorted(alt)}
        gains.append(value - float(base[i]))
        best_values.append(value)
        witnesses.append(witness)
    worst = int(np.argmax(gains)) if gains else 0
    verdict = EQUILIBRIUM if max(gains, default=0.0) <= eps else NOT_EQUILIBRIUM
    return EquilibriumReport(
        verdict,
        tuple(max(x, 0.0) if x > -1e-12 else x for x in gains),
        tuple(float(x) for x in base),
        tuple(best_values),
        eps,
        witnesses[worst] if gains and gains[worst] > eps else None,
        {"scope": "within tested families", "families": TESTED_FAMILIES},
    )
