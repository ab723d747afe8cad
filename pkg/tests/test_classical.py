
import numpy as np
import pytest
from hypothesis import given, reject, settings
from hypothesis import strategies as st

from qcorr.classical import (
    CorrelatingDevice,
    device_from_choices,
    find_ce,
    push_to_normal_form,
    verify_ce,
    verify_efce,
    verify_ir_efce,
)
from qcorr.games import NormalFormGame, decision, leaf, ExtensiveFormGame, to_normal_form
from qcorr.scenarios.corpus import (
    cghz_game,
    coordination_game,
    entry_device,
    entry_game,
    envelope_game,
    hard_game,
    third_split,
)

from _support import PlanSpaceTooLarge, efce_gain_by_plan_enumeration, ir_efce_gain_by_tree_walk, random_extensive_game


def posterior_gain(g: NormalFormGame, mu) -> float:
    """Brute-force oracle: for each player and told action, best conditional reply."""
    total_gain = 0.0
    for i in range(g.n_players):
        for told in g.actions[i]:
            sub = [(prof, p) for prof, p in mu if prof[i] == told and p > 0]
            if not sub:
                continue
            def value(play):
                return sum(p * g.payoff(prof[:i] + (play,) + prof[i + 1:])[i] for prof, p in sub)
            total_gain += max(value(b) for b in g.actions[i]) - value(told)
    return total_gain


def test_envelope_ce_and_conditional_values():
    rep = verify_ce(envelope_game(), third_split())
    assert rep.is_equilibrium
    told_b = rep.details["conditional"][0]["B"]
    assert told_b["T"] == pytest.approx(3.5)
    assert told_b["B"] == pytest.approx(5.0)


def test_point_mass_on_nash_profile():
    assert verify_ce(envelope_game(), CorrelatingDevice([(("T", "R"), 1.0)])).is_equilibrium


def test_uniform_on_hard_game_is_indifferent():
    g = hard_game()
    mu = CorrelatingDevice([(p, 0.25) for p in g.profiles()])
    rep = verify_ce(g, mu)
    assert posterior_gain(g, mu) == pytest.approx(0.0, abs=1e-12)
    assert rep.max_gain == pytest.approx(0.0, abs=1e-12)
    assert rep.is_equilibrium
    assert rep.details["conditional"][0]["T"] == {"T": 3.0, "B": 3.0}


def test_uniform_on_coordination_game_is_not_ce():
    g = coordination_game()
    mu = CorrelatingDevice([(p, 0.25) for p in g.profiles()])
    rep = verify_ce(g, mu)
    assert not rep.is_equilibrium
    assert rep.max_gain == pytest.approx(posterior_gain(g, CorrelatingDevice([(p, 0.25) for p in g.profiles()])) / 2)
    assert rep.witness["deviation"]


def test_ce_gain_invariant_under_relabeling_and_order():
    g = envelope_game()
    mu = CorrelatingDevice([(("T", "L"), 0.2), (("T", "R"), 0.3), (("B", "L"), 0.4), (("B", "R"), 0.1)])
    base = verify_ce(g, mu).gains
    rev = CorrelatingDevice(list(mu)[::-1])
    assert verify_ce(g, rev).gains == base
    rename = {"T": "up", "B": "down", "L": "left", "R": "right"}
    g2 = NormalFormGame(tuple(tuple(rename[a] for a in acts) for acts in g.actions), g.payoffs)
    mu2 = CorrelatingDevice([(tuple(rename[a] for a in prof), p) for prof, p in mu])
    assert verify_ce(g2, mu2).gains == base


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_verify_ce_matches_posterior_oracle(seed):
    rng = np.random.default_rng(seed)
    shape = tuple(int(k) for k in rng.integers(1, 4, size=int(rng.integers(2, 4))))
    actions = tuple(tuple(f"a{j}" for j in range(k)) for k in shape)
    g = NormalFormGame(actions, rng.integers(-4, 5, size=shape + (len(shape),)))
    profiles = list(g.profiles())
    w = rng.dirichlet(np.ones(len(profiles)))
    mu = CorrelatingDevice(list(zip(profiles, w)))
    assert sum(verify_ce(g, mu).gains) == pytest.approx(posterior_gain(g, mu), abs=1e-9)


def test_find_ce_welfare_on_coordination_game():
    mu = find_ce(coordination_game(), "welfare")
    assert set(mu.support(1e-12)) <= {("T", "R"), ("B", "L")}
    assert coordination_game().expected_utility(mu).sum() == pytest.approx(6.0)
    assert verify_ce(coordination_game(), mu, 1e-6).is_equilibrium


def test_find_ce_trivial_game():
    g = NormalFormGame((("x",), ("y",)), [[[1.0, 2.0]]])
    mu = find_ce(g)
    assert mu.entries == ((("x", "y"), 1.0),)


def test_find_ce_row_utility_on_hard_game():
    mu = find_ce(hard_game(), 0)
    assert hard_game().expected_utility(mu)[0] >= 4 - 1e-9
    assert verify_ce(hard_game(), mu, 1e-6).is_equilibrium


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_find_ce_outputs_pass(seed):
    rng = np.random.default_rng(seed)
    shape = tuple(int(k) for k in rng.integers(1, 4, size=int(rng.integers(2, 4))))
    actions = tuple(tuple(f"a{j}" for j in range(k)) for k in shape)
    g = NormalFormGame(actions, rng.integers(-4, 5, size=shape + (len(shape),)))
    mu = find_ce(g, int(rng.integers(len(shape))))
    assert verify_ce(g, mu, 1e-6).is_equilibrium


# ---------------------------------------------------------------------------
# extensive form


def test_entry_game_efce_and_ir_efce():
    g = entry_game()
    mu = entry_device(g)
    efce = verify_efce(g, mu)
    assert efce.is_equilibrium
    assert efce.on_path[0] == pytest.approx(51.0)
    ir = verify_ir_efce(g, mu)
    assert not ir.is_equilibrium
    assert ir.gains[0] == pytest.approx(0.5)
    assert ir.best_values[0] == pytest.approx(51.5)
    told_r = [d for d in ir.witness["deviation"].values() if d["p1_entry"] == "OUT"]
    assert told_r


def test_efce_against_plan_enumeration_on_corpus():
    for g, mu in ((entry_game(), entry_device()), (entry_game(True), entry_device(entry_game(True)))):
        rep = verify_efce(g, mu)
        for i in range(g.n_players):
            assert rep.gains[i] == pytest.approx(efce_gain_by_plan_enumeration(g, mu, i), abs=1e-9)


def test_ir_efce_against_tree_walk_on_corpus():
    for g, mu in ((entry_game(), entry_device()), (entry_game(True), entry_device(entry_game(True)))):
        rep = verify_ir_efce(g, mu)
        for i in range(g.n_players):
            assert rep.gains[i] == pytest.approx(ir_efce_gain_by_tree_walk(g, mu, i), abs=1e-9)


def test_five_player_ir_efce_gain():
    g = entry_game(True)
    rep = verify_ir_efce(g, entry_device(g))
    assert rep.gains[0] >= 50 / 4 - 2
    assert verify_efce(g, entry_device(g)).is_equilibrium


def test_cghz_honest_guessers_lose_efce():
    # any deterministic guesser profile is beaten by some referee choice
    g = cghz_game()
    guess = {f"{n}{b}": "0" for n in "ABC" for b in "01"}
    for inputs in ("000", "011", "101", "110"):
        mu = device_from_choices(g, [([{"inputs": inputs}, {k: v for k, v in guess.items() if k[0] == "A"},
                                       {k: v for k, v in guess.items() if k[0] == "B"},
                                       {k: v for k, v in guess.items() if k[0] == "C"}], 1.0)])
        rep = verify_efce(g, mu)
        # all-zero outputs win only on 000; elsewhere the referee already profits
        assert rep.on_path[1] == (1.0 if inputs == "000" else 0.0)
        if inputs == "000":
            assert not rep.is_equilibrium and rep.gains[0] == pytest.approx(1.0)


def _random_device(rng, g, k):
    nfe = to_normal_form(g)
    entries = []
    for w in rng.dirichlet(np.ones(k)):
        prof = [nfe.strategies[i][int(rng.integers(len(nfe.strategies[i])))].as_dict() for i in range(g.n_players)]
        entries.append((prof, w))
    return device_from_choices(g, entries)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_random_games_efce_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    g = random_extensive_game(rng, max_nodes=14)
    mu = _random_device(rng, g, int(rng.integers(1, 4)))
    rep = verify_efce(g, mu)
    for i in range(g.n_players):
        try:
            oracle = efce_gain_by_plan_enumeration(g, mu, i)
        except PlanSpaceTooLarge:
            reject()  # beyond what the brute-force oracle can enumerate
        assert rep.gains[i] == pytest.approx(oracle, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_random_games_ir_efce_bridge_and_containment(seed):
    rng = np.random.default_rng(seed)
    g = random_extensive_game(rng, max_nodes=14)
    mu = _random_device(rng, g, int(rng.integers(1, 4)))
    ir = verify_ir_efce(g, mu)
    for i in range(g.n_players):
        assert ir.gains[i] == pytest.approx(ir_efce_gain_by_tree_walk(g, mu, i), abs=1e-9)
    # immediate revelation only helps the deviator
    ef = verify_efce(g, mu)
    assert all(e <= r + 1e-9 for e, r in zip(ef.gains, ir.gains))
    if ir.is_equilibrium:
        assert ef.is_equilibrium


def test_single_infoset_efce_equals_ce():
    nodes = [decision("r", 0, "I", {"T": "t", "B": "b"})]
    nodes += [decision(x, 1, "J", {"L": f"{x}L", "R": f"{x}R"}) for x in "tb"]
    pay = {"tL": (0, 0), "tR": (7, 10), "bL": (10, 7), "bR": (0, 0)}
    nodes += [leaf(k, *v) for k, v in pay.items()]
    g = ExtensiveFormGame(nodes, "r", 2)
    for entries in (
        [(("T", "R"), 1 / 3), (("B", "L"), 1 / 3), (("B", "R"), 1 / 3)],
        [(("T", "L"), 0.5), (("B", "R"), 0.5)],
    ):
        ext = device_from_choices(g, [([{"I": a}, {"J": b}], p) for (a, b), p in entries])
        nf = verify_ce(envelope_game(), CorrelatingDevice(entries))
        ef = verify_efce(g, ext)
        assert ef.verdict == nf.verdict
        assert ef.gains == pytest.approx(nf.gains, abs=1e-12)


def test_ir_efce_equals_ce_of_pushed_device():
    g = entry_game()
    nfe = to_normal_form(g)
    mu = entry_device(g)
    assert verify_ir_efce(g, mu).gains == verify_ce(nfe.game, push_to_normal_form(nfe, mu)).gains
