"""The three-player GHZ game: quantum protocol and exhaustive classical bound."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..quantum.extensive import ExtensiveQceInstance, simulate_extensive_qce
from .corpus import GHZ_INPUTS, cghz_game, ghz_circuits, ghz_state, ghz_wins

# a deterministic guesser strategy is its output for input 0 then for input 1
GUESSER_STRATEGIES = ("00", "01", "10", "11")


def quantum_win_probabilities() -> dict[str, float]:
    """Win probability of the shared-GHZ protocol for each input triple."""
    g = cghz_game()
    state = ghz_state((1, 2, 3))
    circuits = ghz_circuits(0, (1, 2, 3))
    out = {}
    for abc in GHZ_INPUTS:
        inst = ExtensiveQceInstance(g, state, circuits, {"inputs": {abc: 1.0}})
        dist = simulate_extensive_qce(inst)
        out[abc] = sum(p for leaf_id, p in dist if ghz_wins(abc, leaf_id[-3:]))
    return out


def classical_wins(profile: tuple[str, str, str]) -> dict[str, bool]:
    """Which inputs a deterministic (Alice, Bob, Charlie) profile wins."""
    out = {}
    for abc in GHZ_INPUTS:
        outputs = "".join(s[int(bit)] for s, bit in zip(profile, abc))
        out[abc] = ghz_wins(abc, outputs)
    return out


@dataclass(frozen=True)
class ClassicalBound:
    profiles: int
    max_win_uniform: float
    best_profiles: tuple[tuple[str, str, str], ...]
    all_defeated: bool
    min_referee_best_response: float


def classical_brute_force() -> ClassicalBound:
    """Enumerate all 64 deterministic guesser profiles.

    Reports the best win probability against uniformly random inputs, whether
    every profile loses on some input, and the smallest payoff a referee paid
    ``1 - win`` can guarantee by best-responding to a known profile.
    """
    rates = {}
    referee = []
    defeated = True
    for prof in itertools.product(GUESSER_STRATEGIES, repeat=3):
        wins = classical_wins(prof)
        rates[prof] = sum(wins.values()) / len(wins)
        defeated &= not all(wins.values())
        referee.append(max(1.0 - float(w) for w in wins.values()))
    top = max(rates.values())
    best = tuple(p for p, r in rates.items() if r == top)
    return ClassicalBound(len(rates), top, best, defeated, min(referee))
