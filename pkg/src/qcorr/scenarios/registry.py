"""Named scenarios: build a corpus example, run the analyses, compare with expected values."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .. import io
from ..classical import EQUILIBRIUM, NOT_EQUILIBRIUM, verify_ce, verify_efce, verify_ir_efce
from ..games import validate_extensive
from ..quantum.constraints import appendix_d_report, deviation_criterion, infeasibility_search
from ..quantum.extensive import (
    ExtensiveQceInstance,
    lookahead_deviation_value,
    simulate_extensive_qce,
    verify_extensive_qce,
)
from ..quantum.normal import (
    canonicalize,
    conditional_states,
    qce_to_ce,
    simulate_normal_qce,
    verify_canonical_qce,
)
from ..quantum.state import constant_circuit
from . import corpus
from .ghz import classical_brute_force, quantum_win_probabilities


@dataclass(frozen=True)
class Check:
    name: str
    expected: Any
    computed: Any
    passed: bool
    tolerance: float | None = None

    def line(self) -> str:
        tol = f" (tol {self.tolerance:g})" if self.tolerance is not None else ""
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: computed {_fmt(self.computed)}, expected {_fmt(self.expected)}{tol}"


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


@dataclass(frozen=True)
class ScenarioReport:
    name: str
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "type": "scenario-report",
            "name": self.name,
            "passed": self.passed,
            "checks": [
                {"name": c.name, "expected": io.to_jsonable(c.expected), "computed": io.to_jsonable(c.computed),
                 "tolerance": c.tolerance, "passed": c.passed}
                for c in self.checks
            ],
        }


@dataclass(frozen=True)
class Options:
    eps: float = 1e-9
    restarts: int = 100
    seed: int = 0


class _Checks:
    def __init__(self):
        self.items: list[Check] = []

    def close(self, name: str, computed: float, expected: float, tol: float):
        computed = float(computed)
        self.items.append(Check(name, expected, computed, abs(computed - expected) <= tol, tol))

    def equal(self, name: str, computed, expected):
        self.items.append(Check(name, expected, computed, computed == expected))

    def at_least(self, name: str, computed: float, bound: float):
        computed = float(computed)
        self.items.append(Check(name, f">= {bound:.12g}", computed, computed >= bound))

    def above(self, name: str, computed: float, bound: float):
        computed = float(computed)
        self.items.append(Check(name, f"> {bound:.12g}", computed, computed > bound))

    def at_most(self, name: str, computed: float, bound: float):
        computed = float(computed)
        self.items.append(Check(name, f"<= {bound:.12g}", computed, computed <= bound))


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    run: Callable[[Options], list[Check]]
    payload: Callable[[], dict[str, dict]] = field(default=lambda: {})


# ---------------------------------------------------------------------------
# scenario bodies


def _fig1(opt: Options) -> list[Check]:
    c = _Checks()
    inst = corpus.fig1_instance()
    rep = verify_canonical_qce(inst, opt.eps)
    c.equal("verify_canonical_qce verdict", rep.verdict, EQUILIBRIUM)
    c.at_most("max gain", rep.max_gain, opt.eps)
    dist = simulate_normal_qce(inst)
    c.close("distance to ½(TR + BL)", dist.max_difference(corpus.half_split()), 0.0, 1e-12)
    c.equal("qce_to_ce device passes verify_ce", verify_ce(inst.game, qce_to_ce(inst), opt.eps).verdict, EQUILIBRIUM)
    return c.items


def _fig2_naive(opt: Options) -> list[Check]:
    c = _Checks()
    inst = corpus.naive_instance()
    dev = corpus.hadamard_deviation(inst)
    dist = simulate_normal_qce(dev).as_dict()
    c.close("P(TL) with row Hadamard", dist.get(("T", "L"), 0.0), 1 / 6, 1e-12)
    c.close("P(TR) with row Hadamard", dist.get(("T", "R"), 0.0), 2 / 3, 1e-12)
    c.close("P(BL) with row Hadamard", dist.get(("B", "L"), 0.0), 1 / 6, 1e-12)
    c.close("row utility with Hadamard", inst.game.expected_utility(simulate_normal_qce(dev))[0], 5.0, 1e-12)
    c.close("row utility on path", inst.game.expected_utility(simulate_normal_qce(inst))[0], 4.0, 1e-12)
    amps = canonicalize(dev).state.amplitudes * np.sqrt(6)
    c.close("canonical state after Hadamard (max deviation from [1, 2, -1, 0]/√6)",
            float(np.max(np.abs(amps - np.array([1, 2, -1, 0])))), 0.0, 1e-12)
    rep = verify_canonical_qce(inst, opt.eps)
    c.equal("verify_canonical_qce verdict", rep.verdict, NOT_EQUILIBRIUM)
    c.close("row best deviation value", rep.best_values[0], 3 + np.sqrt(5), 1e-9)
    c.close("row gain", rep.gains[0], np.sqrt(5) - 1, 1e-9)
    value, incentive = deviation_criterion(conditional_states(inst, 0), opt.eps)
    c.close("trace criterion Tr|⅓ρ − ⅔σ|", value, np.sqrt(5) / 3, 1e-9)
    c.equal("row incentive to deviate", incentive, True)
    return c.items


def _fig2_no_qce(opt: Options) -> list[Check]:
    c = _Checks()
    g = corpus.hard_game()
    rep = verify_ce(g, corpus.third_split(), opt.eps)
    c.equal("⅓(TR + BL + BR) is a classical CE", rep.verdict, EQUILIBRIUM)
    c.close("CE utility per player", rep.on_path[0], 4.0, 1e-12)
    _, incentive = deviation_criterion(conditional_states(corpus.naive_instance(), 0), opt.eps)
    c.equal("naive state gives the row player an incentive", incentive, True)
    c.equal("naive state satisfies the block conditions", appendix_d_report(corpus.naive_state()).satisfied(opt.eps), False)
    for dims in ((1, 1), (2, 2)):
        res = infeasibility_search(*dims, restarts=opt.restarts, seed=opt.seed)
        c.at_least(f"constraint residual floor, {dims[0]}x{dims[1]} blocks", res.min_residual, 1e-3)
        c.equal(f"Tr(CC†) bound holds at the optimum, {dims[0]}x{dims[1]} blocks", res.implication_holds, True)
    return c.items


def _fig4_ce(opt: Options) -> list[Check]:
    c = _Checks()
    rep = verify_ce(corpus.envelope_game(), corpus.third_split(), opt.eps)
    c.equal("verify_ce verdict", rep.verdict, EQUILIBRIUM)
    cond = rep.details["conditional"][0]["B"]
    c.close("row told B, plays T", cond["T"], 3.5, 1e-12)
    c.close("row told B, plays B", cond["B"], 5.0, 1e-12)
    return c.items


def _appD1(opt: Options) -> list[Check]:
    c = _Checks()
    inst = corpus.attempt_instance()
    c.close("induced device vs ⅓(TR + BL + BR)", qce_to_ce(inst).max_difference(corpus.third_split()), 0.0, 1e-12)
    rep = verify_canonical_qce(inst, opt.eps)
    c.close("row best deviation value", rep.best_values[0], 4.0, 1e-9)
    c.close("row gain", rep.gains[0], 0.0, 1e-9)
    c.close("column best deviation value", rep.best_values[1], 6.0, 1e-9)
    c.close("column gain", rep.gains[1], 2.0, 1e-9)
    cr = appendix_d_report(inst.state)
    c.equal("row block conditions hold", cr.row_ok(1e-10), True)
    c.equal("column block conditions hold", cr.col_ok(1e-10), False)
    return c.items


def _fig3(opt: Options) -> list[Check]:
    c = _Checks()
    g = corpus.entry_game()
    c.equal("game is well formed", validate_extensive(g), [])
    mu = corpus.entry_device(g)
    ef = verify_efce(g, mu, opt.eps)
    c.equal("verify_efce verdict", ef.verdict, EQUILIBRIUM)
    c.close("player 1 on-path utility", ef.on_path[0], 51.0, 1e-12)
    ir = verify_ir_efce(g, mu, opt.eps)
    c.equal("verify_ir_efce verdict", ir.verdict, NOT_EQUILIBRIUM)
    c.close("IR-EFCE gain for player 1", ir.gains[0], 0.5, 1e-9)
    c.close("IR-EFCE deviation value", ir.best_values[0], 51.5, 1e-9)
    q = corpus.entry_quantum_instance()
    c.close("quantum attempt distribution vs target",
            simulate_extensive_qce(q).max_difference(corpus.entry_target()), 0.0, 1e-12)
    look = lookahead_deviation_value(q, player=0, eps=opt.eps)
    c.close("lookahead deviation value", look.value, 51.5, 1e-9)
    c.above("lookahead gain", look.gain, opt.eps)
    return c.items


def _ghz(opt: Options) -> list[Check]:
    c = _Checks()
    for abc, p in quantum_win_probabilities().items():
        c.close(f"quantum win probability, input {abc}", p, 1.0, 1e-12)
    b = classical_brute_force()
    c.equal("deterministic profiles enumerated", b.profiles, 64)
    c.close("best classical win probability, uniform inputs", b.max_win_uniform, 0.75, 1e-12)
    c.equal("every classical profile loses on some input", b.all_defeated, True)
    return c.items


def _cghz(opt: Options) -> list[Check]:
    c = _Checks()
    inst = corpus.cghz_instance()
    g = inst.game
    c.equal("game is well formed", validate_extensive(g), [])
    pay = g.expected_utility(simulate_extensive_qce(inst))
    for i, name in enumerate(g.players):
        c.close(f"{name} expected payoff", pay[i], 0.0 if i == 0 else 1.0, 1e-12)
    for abc, p in quantum_win_probabilities().items():
        c.close(f"win probability, Nate plays {abc}", p, 1.0, 1e-12)
    b = classical_brute_force()
    c.close("best classical win probability, uniform Nate", b.max_win_uniform, 0.75, 1e-12)
    c.equal("every classical profile defeated by some Nate action", b.all_defeated, True)
    c.above("Nate's guaranteed payoff against any classical profile", b.min_referee_best_response, 0.0)
    rep = verify_extensive_qce(inst, opt.eps)
    c.equal("no tested deviation gains", rep.verdict, EQUILIBRIUM)
    return c.items


def _appF(opt: Options) -> list[Check]:
    c = _Checks()
    inst = corpus.composite_instance()
    g = inst.game
    c.equal("game is well formed", validate_extensive(g), [])
    c.close("protocol distribution vs ½(IN,a,L) + ½(IN,b,R)",
            simulate_extensive_qce(inst).max_difference(corpus.entry_target()), 0.0, 1e-12)
    rep = verify_extensive_qce(inst, opt.eps)
    c.at_most("largest tested deviation gain", rep.max_gain, opt.eps)
    out = ExtensiveQceInstance(g, inst.state, {**inst.circuits, "p1_entry": constant_circuit(0, "OUT")}, inst.mixing)
    c.close("player 1 utility after OUT", g.expected_utility(simulate_extensive_qce(out))[0], 0.0, 1e-12)
    mu = corpus.entry_device(g)
    c.equal("verify_efce verdict", verify_efce(g, mu, opt.eps).verdict, EQUILIBRIUM)
    ir = verify_ir_efce(g, mu, opt.eps)
    c.equal("verify_ir_efce verdict", ir.verdict, NOT_EQUILIBRIUM)
    c.at_least("IR-EFCE gain for player 1", ir.gains[0], 50 / 4 - 2)
    return c.items


# ---------------------------------------------------------------------------
# payloads for export


def _normal_payload(inst, device=None) -> dict[str, dict]:
    out = {"game": io.game_to_json(inst.game), "state": io.state_to_json(inst.state),
           "circuits": io.circuits_to_json(inst.circuits)}
    if device is not None:
        out["device"] = io.device_to_json(device)
    return out


def _extensive_payload(inst: ExtensiveQceInstance, device=None) -> dict[str, dict]:
    out = {"game": io.game_to_json(inst.game), "state": io.state_to_json(inst.state),
           "circuits": io.extensive_circuits_to_json(inst.circuits, inst.mixing),
           "target": io.distribution_to_json(simulate_extensive_qce(inst))}
    if device is not None:
        out["device"] = io.device_to_json(device)
    return out


def _fig3_payload():
    q = corpus.entry_quantum_instance()
    return _extensive_payload(q, corpus.entry_device(q.game))


def _appF_payload():
    q = corpus.composite_instance()
    return _extensive_payload(q, corpus.entry_device(q.game))


SCENARIOS: dict[str, Scenario] = {
    s.name: s
    for s in (
        Scenario("fig1", "½(TR + BL) through a shared two-qubit state is a canonical QCE", _fig1,
                 lambda: _normal_payload(corpus.fig1_instance(), corpus.half_split())),
        Scenario("fig2_naive", "the obvious state for ⅓(TR + BL + BR) loses to a Hadamard deviation", _fig2_naive,
                 lambda: _normal_payload(corpus.naive_instance(), corpus.third_split())),
        Scenario("fig2_no_qce", "⅓(TR + BL + BR) is a CE but no state satisfies the QCE constraints", _fig2_no_qce,
                 lambda: {"game": io.game_to_json(corpus.hard_game()), "device": io.device_to_json(corpus.third_split()),
                          "state": io.state_to_json(corpus.naive_state())}),
        Scenario("fig4_ce", "three-envelope CE of the 7/10 game", _fig4_ce,
                 lambda: {"game": io.game_to_json(corpus.envelope_game()),
                          "device": io.device_to_json(corpus.third_split())}),
        Scenario("appD1_state", "four-qubit attempt that stops the row player but not the column player", _appD1,
                 lambda: _normal_payload(corpus.attempt_instance(), corpus.third_split())),
        Scenario("fig3_efce", "entry game: EFCE yes, IR-EFCE no, quantum attempt refuted by lookahead", _fig3,
                 _fig3_payload),
        Scenario("ghz", "GHZ game: quantum protocol always wins, classical profiles at most 3/4", _ghz),
        Scenario("cghz", "complete-information GHZ game with a paid referee", _cghz,
                 lambda: _extensive_payload(corpus.cghz_instance())),
        Scenario("appF", "five-player composite: EFCE and QCE yes, IR-EFCE no", _appF, _appF_payload),
    )
}


def list_scenarios() -> list[str]:
    return list(SCENARIOS)


def get_scenario(name: str) -> Scenario:
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}; known: {', '.join(SCENARIOS)}")
    return SCENARIOS[name]


def run_scenario(name: str, eps: float = 1e-9, restarts: int = 100, seed: int = 0) -> ScenarioReport:
    sc = get_scenario(name)
    return ScenarioReport(name, tuple(sc.run(Options(eps, restarts, seed))))


def export_scenario(name: str, directory: str | Path) -> list[Path]:
    """Write ``<name>.<kind>`` JSON files (game, state, circuits, device, target) into ``directory``."""
    sc = get_scenario(name)
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    for kind, doc in sc.payload().items():
        p = d / f"{name}.{kind}"
        io.write_json(p, doc)
        paths.append(p)
    return paths
