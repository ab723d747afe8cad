"""Builders for the games, states, circuits and devices of the example corpus."""

from __future__ import annotations

import itertools

import numpy as np

from ..classical import CorrelatingDevice, device_from_choices
from ..games import ExtensiveFormGame, NormalFormGame, OutcomeDistribution, decision, leaf
from ..quantum.extensive import ExtensiveQceInstance
from ..quantum.normal import QceInstance, canonical_instance
from ..quantum.state import (
    PlayerCircuit,
    QuantumState,
    constant_circuit,
    gate,
    measure_circuit,
    product_state,
    state_from_terms,
)

ROW_COL = (("T", "B"), ("L", "R"))


def _two_by_two(tl, tr, bl, br, players=("row", "col")) -> NormalFormGame:
    payoffs = np.array([[tl, tr], [bl, br]], dtype=float)
    return NormalFormGame(ROW_COL, payoffs, players)


def coordination_game() -> NormalFormGame:
    """Anti-coordination game whose ½(TR + BL) split has a two-qubit QCE."""
    return _two_by_two((0, 0), (1, 5), (5, 1), (0, 0))


def hard_game() -> NormalFormGame:
    """Symmetric 6/6 game where ⅓(TR + BL + BR) is a CE with no QCE."""
    return _two_by_two((0, 0), (6, 6), (6, 6), (0, 0))


def envelope_game() -> NormalFormGame:
    """7/10 game used to illustrate the three-envelope CE."""
    return _two_by_two((0, 0), (7, 10), (10, 7), (0, 0))


def third_split() -> CorrelatingDevice:
    return CorrelatingDevice([(("T", "R"), 1 / 3), (("B", "L"), 1 / 3), (("B", "R"), 1 / 3)])


def half_split() -> CorrelatingDevice:
    return CorrelatingDevice([(("T", "R"), 0.5), (("B", "L"), 0.5)])


def singlet_like_state() -> QuantumState:
    """(|01> + |10>)/√2, qubit 0 to the row player."""
    return state_from_terms({"01": 1, "10": 1}, (0, 1), normalize=True)


def naive_state() -> QuantumState:
    """(|01> + |10> + |11>)/√3, the obvious attempt at ⅓(TR + BL + BR)."""
    return state_from_terms({"01": 1, "10": 1, "11": 1}, (0, 1), normalize=True)


def two_qubit_attempt_state() -> QuantumState:
    """Four-qubit attempt at ⅓(TR + BL + BR) that defeats the row player's deviations only."""
    s6, s12 = 1 / np.sqrt(6), 1 / np.sqrt(12)
    terms = {
        "0010": s6, "0011": -s6, "1000": s6, "1100": s6,
        "1010": s12, "1011": s12, "1110": s12, "1111": s12,
    }
    return state_from_terms(terms, (0, 0, 1, 1))


def hadamard_deviation(inst: QceInstance, player: int = 0) -> QceInstance:
    """Same instance with ``player`` applying H to its output qubit before measuring."""
    circuits = list(inst.circuits)
    c = circuits[player]
    circuits[player] = PlayerCircuit(c.owner, (gate("H", c.output_qubits[0]),) + c.gates, c.output_qubits, c.action_map)
    return QceInstance(inst.game, inst.state, circuits)


# ---------------------------------------------------------------------------
# the entry-deterrence-like tree and the GHZ games


def entry_game(out_subtree: bool = False) -> ExtensiveFormGame:
    """Player 1 chooses OUT (3, 3) or IN; player 2 picks a/b; player 1 then picks L/R blind.

    With ``out_subtree`` the OUT leaf is replaced by the complete-information GHZ game
    with player 1 as the input chooser and players 3-5 as the three guessers.
    """
    if not out_subtree:
        nodes = [
            decision("root", 0, "p1_entry", {"OUT": "out", "IN": "in"}),
            leaf("out", 3, 3),
            decision("in", 1, "p2_move", {"a": "in_a", "b": "in_b"}),
            decision("in_a", 0, "p1_guess", {"L": "a_L", "R": "a_R"}),
            decision("in_b", 0, "p1_guess", {"L": "b_L", "R": "b_R"}),
            leaf("a_L", 100, 2), leaf("a_R", 0, 0), leaf("b_L", 0, 0), leaf("b_R", 2, 100),
        ]
        return ExtensiveFormGame(nodes, "root", ("P1", "P2"))
    nodes = [
        decision("root", 0, "p1_entry", {"OUT": "out", "IN": "in"}),
        decision("in", 1, "p2_move", {"a": "in_a", "b": "in_b"}),
        decision("in_a", 0, "p1_guess", {"L": "a_L", "R": "a_R"}),
        decision("in_b", 0, "p1_guess", {"L": "b_L", "R": "b_R"}),
        leaf("a_L", 100, 2, 0, 0, 0), leaf("a_R", 0, 0, 0, 0, 0),
        leaf("b_L", 0, 0, 0, 0, 0), leaf("b_R", 2, 100, 0, 0, 0),
    ]
    nodes += _ghz_nodes("out", referee=0, guessers=(2, 3, 4),
                        win=lambda: (0, 0, 1, 1, 1), lose=lambda: (50, 0, 0, 0, 0), prefix="g_")
    return ExtensiveFormGame(nodes, "root", ("P1", "P2", "P3", "P4", "P5"))


GHZ_INPUTS = ("000", "011", "101", "110")
GUESSER_NAMES = ("Alice", "Bob", "Charlie")


def ghz_wins(inputs: str, outputs: str) -> bool:
    a, b, c = (int(ch) for ch in inputs)
    parity = sum(int(ch) for ch in outputs) % 2
    return parity == (a | b | c)


def _ghz_nodes(root: str, referee: int, guessers, win, lose, prefix: str = ""):
    """Referee picks an input triple; each guesser sees only its own bit and outputs 0/1."""
    nodes = [decision(root, referee, f"{prefix}inputs", {abc: f"{root}_{abc}" for abc in GHZ_INPUTS})]
    for abc in GHZ_INPUTS:
        for depth in range(3):
            for outs in itertools.product("01", repeat=depth):
                nid = f"{root}_{abc}" + ("_" + "".join(outs) if outs else "")
                player = guessers[depth]
                edges = {x: f"{root}_{abc}_{''.join(outs) + x}" for x in "01"}
                nodes.append(decision(nid, player, f"{prefix}{GUESSER_NAMES[depth][0]}{abc[depth]}", edges))
        for outs in itertools.product("01", repeat=3):
            o = "".join(outs)
            pay = win() if ghz_wins(abc, o) else lose()
            nodes.append(leaf(f"{root}_{abc}_{o}", *pay))
    return nodes


def cghz_game() -> ExtensiveFormGame:
    """Complete-information GHZ game: Nate (player 0) picks the inputs, then Alice, Bob, Charlie."""
    nodes = _ghz_nodes("root", referee=0, guessers=(1, 2, 3),
                       win=lambda: (0, 1, 1, 1), lose=lambda: (1, 0, 0, 0))
    return ExtensiveFormGame(nodes, "root", ("Nate", "Alice", "Bob", "Charlie"))


def ghz_state(owners=(0, 1, 2)) -> QuantumState:
    """½(|000> − |011> − |101> − |110>)."""
    return state_from_terms({"000": 0.5, "011": -0.5, "101": -0.5, "110": -0.5}, owners)


def bell_state(owners=(0, 1)) -> QuantumState:
    return state_from_terms({"00": 1, "11": 1}, owners, normalize=True)


def ghz_circuits(first_qubit: int, guessers, prefix: str = "") -> dict[str, PlayerCircuit]:
    """Hadamard on the guesser's qubit iff its input bit is 1, then read it out."""
    out = {}
    for k, player in enumerate(guessers):
        q = first_qubit + k
        name = GUESSER_NAMES[k][0]
        amap = {"0": "0", "1": "1"}
        out[f"{prefix}{name}0"] = PlayerCircuit(player, (), (q,), amap)
        out[f"{prefix}{name}1"] = PlayerCircuit(player, (gate("H", q),), (q,), amap)
    return out


def uniform_inputs() -> dict[str, float]:
    return {abc: 0.25 for abc in GHZ_INPUTS}


def cghz_instance() -> ExtensiveQceInstance:
    return ExtensiveQceInstance(
        cghz_game(), ghz_state((1, 2, 3)), ghz_circuits(0, (1, 2, 3)), {"inputs": uniform_inputs()}
    )


def entry_quantum_instance() -> ExtensiveQceInstance:
    """Players 1 and 2 share a Bell pair; 1 enters, both read their qubit to coordinate."""
    circuits = {
        "p1_entry": constant_circuit(0, "IN"),
        "p1_guess": measure_circuit(0, (0,), ("L", "R")),
        "p2_move": measure_circuit(1, (1,), ("a", "b")),
    }
    return ExtensiveQceInstance(entry_game(), bell_state((0, 1)), circuits)


def composite_instance() -> ExtensiveQceInstance:
    """Bell pair for players 1-2 and a GHZ triple for players 3-5 on the five-player tree."""
    state = product_state(bell_state((0, 1)), ghz_state((2, 3, 4)))
    circuits = {
        "p1_entry": constant_circuit(0, "IN"),
        "p1_guess": measure_circuit(0, (0,), ("L", "R")),
        "p2_move": measure_circuit(1, (1,), ("a", "b")),
        **ghz_circuits(2, (2, 3, 4), prefix="g_"),
    }
    return ExtensiveQceInstance(entry_game(True), state, circuits, {"g_inputs": uniform_inputs()})


def entry_target() -> OutcomeDistribution:
    return OutcomeDistribution([("a_L", 0.5), ("b_R", 0.5)])


def entry_device(g: ExtensiveFormGame | None = None) -> CorrelatingDevice:
    """½ (IN, a, L) + ½ (IN, b, R); off-path sets of the five-player tree get fixed advice."""
    g = g or entry_game()
    extra: list[dict[str, str]] = []
    if g.n_players == 5:
        # referee advice 000 and all-zero guesses; never reached on path
        p1_extra = {"g_inputs": "000"}
        extra = [{f"g_{n[0]}{b}": "0" for b in "01"} for n in GUESSER_NAMES]
    else:
        p1_extra = {}
    entries = []
    for p2, p1 in (("a", "L"), ("b", "R")):
        prof = [{"p1_entry": "IN", "p1_guess": p1, **p1_extra}, {"p2_move": p2}, *extra]
        entries.append((prof, 0.5))
    return device_from_choices(g, entries)


def fig1_instance() -> QceInstance:
    return canonical_instance(coordination_game(), singlet_like_state())


def naive_instance() -> QceInstance:
    return canonical_instance(hard_game(), naive_state())


def attempt_instance() -> QceInstance:
    return canonical_instance(hard_game(), two_qubit_attempt_state())
