"""Command-line front end.

Exit codes: 0 the analysis ran and the verdict is positive (equilibrium or
pass), 1 it ran and the verdict is negative, 2 the input was malformed, 3 a
numerical routine failed.
"""

from __future__ import annotations

import argparse
import sys
from typing import Any, Sequence

import numpy as np

from . import io, linalg
from .classical import (
    EQUILIBRIUM,
    EquilibriumReport,
    find_ce,
    verify_ce,
    verify_efce,
    verify_ir_efce,
)
from .games import GameError, to_normal_form
from .quantum.constraints import appendix_d_report, deviation_criterion, infeasibility_search
from .quantum.extensive import ExtensiveQceInstance, lookahead_deviation_value, simulate_extensive_qce
from .quantum.normal import (
    QceInstance,
    canonical_instance,
    canonicalize,
    conditional_states,
    qce_to_ce,
    simulate_normal_qce,
    verify_canonical_qce,
)
from .quantum.state import QuantumError
from .scenarios import classical_brute_force, export_scenario, list_scenarios, quantum_win_probabilities, run_scenario
from .scenarios.corpus import hard_game

OK, NEGATIVE, INPUT_ERROR, NUMERIC_ERROR = 0, 1, 2, 3


class Output:
    """Collects human lines and one machine document; prints one of them."""

    def __init__(self, args):
        self.machine = args.format == "machine"
        self.out = args.out
        self.lines: list[str] = []
        self.doc: Any = None

    def say(self, line: str = ""):
        self.lines.append(line)

    def emit(self, stream=None):
        stream = stream or sys.stdout
        if self.out is not None and self.doc is not None:
            io.write_json(self.out, self.doc)
        if self.machine:
            stream.write(io.dumps(self.doc) + "\n")
        else:
            stream.write("\n".join(self.lines) + "\n")


def _num(x: float) -> str:
    return f"{float(x):.10g}"


def _matrix_lines(m: np.ndarray, indent: str = "    ") -> list[str]:
    rows = []
    for r in np.asarray(m):
        cells = []
        for v in r:
            v = complex(v)
            cells.append(_num(v.real) if abs(v.imag) < 1e-15 else f"{_num(v.real)}{v.imag:+.10g}j")
        rows.append(indent + "[" + ", ".join(cells) + "]")
    return rows


def _report_lines(out: Output, rep: EquilibriumReport, players: Sequence[str]):
    out.say(f"verdict: {rep.verdict}")
    for i, name in enumerate(players):
        out.say(f"  {name}: on-path {_num(rep.on_path[i])}, best deviation {_num(rep.best_values[i])}, "
                f"gain {_num(rep.gains[i])}")
    w = rep.witness
    if w:
        out.say(f"witness: player {players[w['player']]}, deviation utility {_num(w['utility'])}")
        for k, v in w.items():
            if k in ("player", "utility"):
                continue
            if isinstance(v, np.ndarray):
                out.say(f"  {k}:")
                for line in _matrix_lines(v):
                    out.say(line)
            elif v is not None:
                out.say(f"  {k}: {io.to_jsonable(v)}")
    if "scope" in rep.details:
        out.say(f"scope: {rep.details['scope']}")
    out.doc = io.report_to_json(rep)


def _distribution_lines(out: Output, dist, title: str = "distribution"):
    out.say(f"{title}:")
    for k, p in dist:
        label = ",".join(k) if isinstance(k, tuple) else str(k)
        out.say(f"  {label}: {_num(p)}")


def _verdict_code(rep: EquilibriumReport) -> int:
    return OK if rep.verdict == EQUILIBRIUM else NEGATIVE


# ---------------------------------------------------------------------------
# loading


def _load(path: str, kind: str):
    doc = io.read_json(path)
    if kind == "game":
        return io.game_from_json(doc, path)
    if kind == "normal-game":
        return io.normal_game_from_json(doc, path)
    if kind == "extensive-game":
        return io.extensive_game_from_json(doc, path)
    if kind == "state":
        return io.state_from_json(doc, path)
    if kind == "circuits":
        return io.circuits_from_json(doc, path)
    if kind == "extensive-circuits":
        return io.extensive_circuits_from_json(doc, path)
    raise ValueError(kind)


def _device(path: str, game):
    return io.device_from_json(io.read_json(path), game, path)


def _qce_instance(args) -> QceInstance:
    state = _load(args.state, "state")
    game = _load(args.game, "normal-game")
    if args.circuits:
        return QceInstance(game, state, _load(args.circuits, "circuits"))
    return canonical_instance(game, state)


def _extensive_instance(args) -> ExtensiveQceInstance:
    state = _load(args.state, "state")
    game = _load(args.game, "extensive-game")
    circuits, mixing = _load(args.circuits, "extensive-circuits")
    return ExtensiveQceInstance(game, state, circuits, mixing)


# ---------------------------------------------------------------------------
# subcommands


def cmd_ce_verify(args, out: Output) -> int:
    g = _load(args.game, "normal-game")
    rep = verify_ce(g, _device(args.device, g), args.eps)
    _report_lines(out, rep, g.players)
    return _verdict_code(rep)


def cmd_ce_find(args, out: Output) -> int:
    g = _load(args.game, "normal-game")
    objective: Any = args.objective
    if objective is not None and objective != "welfare":
        try:
            objective = int(objective)
        except ValueError:
            raise io.FormatError("objective must be 'welfare' or a player index", "--objective") from None
    mu = find_ce(g, objective)
    _distribution_lines(out, mu, "correlated equilibrium")
    out.doc = io.device_to_json(mu)
    return OK


def cmd_efce_verify(args, out: Output) -> int:
    g = _load(args.game, "extensive-game")
    rep = verify_efce(g, _device(args.device, g), args.eps)
    _report_lines(out, rep, g.players)
    return _verdict_code(rep)


def cmd_ir_efce_verify(args, out: Output) -> int:
    g = _load(args.game, "extensive-game")
    rep = verify_ir_efce(g, _device(args.device, g), args.eps)
    _report_lines(out, rep, g.players)
    return _verdict_code(rep)


def cmd_to_normal_form(args, out: Output) -> int:
    g = _load(args.game, "extensive-game")
    nfe = to_normal_form(g)
    nf = nfe.game
    out.say(f"normal form: {' x '.join(str(k) for k in nf.shape)} strategies")
    for i, name in enumerate(nf.players):
        for label, s in zip(nf.actions[i], nfe.strategies[i]):
            choices = ", ".join(f"{k}={v}" for k, v in s.choices)
            out.say(f"  {name} {label}: {choices or '(no moves)'}")
    out.doc = io.game_to_json(nf)
    return OK


def cmd_qce_simulate(args, out: Output) -> int:
    inst = _qce_instance(args)
    dist = simulate_normal_qce(inst)
    _distribution_lines(out, dist)
    pay = inst.game.expected_utility(dist)
    out.say("expected payoffs: " + ", ".join(f"{n} {_num(v)}" for n, v in zip(inst.game.players, pay)))
    out.doc = io.distribution_to_json(dist)
    return OK


def cmd_qce_canonicalize(args, out: Output) -> int:
    inst = canonicalize(_qce_instance(args))
    st = inst.state
    out.say(f"canonical state on {st.qubit_count} qubits, partition {list(st.partition)}")
    for k, a in enumerate(st.amplitudes):
        if abs(a) > 1e-15:
            out.say(f"  |{format(k, f'0{st.qubit_count}b')}>: {_num(a.real)}{a.imag:+.10g}j")
    for c in inst.circuits:
        out.say(f"  player {c.owner} reads qubits {list(c.output_qubits)}")
    out.doc = io.instance_to_json(inst)
    return OK


def cmd_qce_verify(args, out: Output) -> int:
    inst = _qce_instance(args)
    rep = verify_canonical_qce(inst, args.eps, samples=args.samples, seed=args.seed)
    _report_lines(out, rep, inst.game.players)
    return _verdict_code(rep)


def cmd_qce_to_ce(args, out: Output) -> int:
    inst = _qce_instance(args)
    if any(c.gates for c in inst.circuits) or inst.ancilla_owners:
        inst = canonicalize(inst)
    mu = qce_to_ce(inst)
    _distribution_lines(out, mu, "correlating device")
    out.doc = io.device_to_json(mu)
    return OK


def cmd_qce_check_state(args, out: Output) -> int:
    state = _load(args.state, "state")
    rep = appendix_d_report(state)
    out.say("constraint residuals for ⅓(TR + BL + BR):")
    for k, v in rep.as_dict().items():
        if isinstance(v, dict):
            for kk, vv in v.items():
                out.say(f"  {kk}: {_num(vv)}")
        else:
            out.say(f"  {k}: {_num(v)}")
    if rep.distribution_error <= 1e-6:
        value, incentive = deviation_criterion(conditional_states(canonical_instance(hard_game(), state), 0), args.eps)
        out.say(f"trace criterion: {_num(value)} (row incentive {'yes' if incentive else 'no'})")
    ok = rep.satisfied(args.eps)
    out.say(f"verdict: {'pass' if ok else 'fail'}")
    out.doc = io.constraint_report_to_json(rep)
    return OK if ok else NEGATIVE


def cmd_qce_search(args, out: Output) -> int:
    start = _load(args.start, "state") if args.start else None
    res = infeasibility_search(args.row_dim, args.col_dim, args.restarts, args.seed, start)
    out.say(f"minimum summed squared residual: {_num(res.min_residual)} over {len(res.residuals)} starts")
    out.say(f"Tr(CC†) at the optimum {_num(res.trace_cc)} <= bound {_num(res.trace_cc_bound)}: "
            f"{'yes' if res.implication_holds else 'no'}")
    ok = res.min_residual >= args.threshold and res.implication_holds
    out.say(f"verdict: {'pass' if ok else 'fail'} (no feasible point below {args.threshold:g})")
    out.doc = {"type": "search-result", "min_residual": res.min_residual, "delta": res.delta,
               "trace_cc": res.trace_cc, "trace_cc_bound": res.trace_cc_bound,
               "implication_holds": res.implication_holds, "residuals": list(res.residuals),
               "best_state": io.state_to_json(res.best_state),
               "report": io.constraint_report_to_json(res.report)}
    return OK if ok else NEGATIVE


def cmd_qce_simulate_extensive(args, out: Output) -> int:
    inst = _extensive_instance(args)
    dist = simulate_extensive_qce(inst)
    _distribution_lines(out, dist)
    pay = inst.game.expected_utility(dist)
    out.say("expected payoffs: " + ", ".join(f"{n} {_num(v)}" for n, v in zip(inst.game.players, pay)))
    out.doc = io.distribution_to_json(dist)
    return OK


def cmd_qce_lookahead(args, out: Output) -> int:
    inst = _extensive_instance(args)
    res = lookahead_deviation_value(inst, player=args.player, eps=args.eps)
    out.say(f"player {inst.game.players[args.player]}: on-path {_num(res.on_path)}, "
            f"lookahead value {_num(res.value)}, gain {_num(res.gain)}")
    if res.plan.get("deviations"):
        out.say(f"  early circuits: {res.plan['early']}")
        for k, v in res.plan["deviations"].items():
            out.say(f"  at {k}: play {v}")
    gain = res.gain > args.eps
    out.say(f"verdict: {'not-equilibrium' if gain else 'equilibrium'} (within tested families)")
    out.doc = {"type": "lookahead-result", "player": args.player, "value": res.value, "on_path": res.on_path,
               "gain": res.gain, "plan": res.plan}
    return NEGATIVE if gain else OK


def cmd_ghz_simulate(args, out: Output) -> int:
    if args.mode == "quantum":
        wins = quantum_win_probabilities()
        for abc, p in wins.items():
            out.say(f"input {abc}: win probability {_num(p)}")
        ok = all(abs(p - 1.0) <= 1e-12 for p in wins.values())
        out.say(f"verdict: {'pass' if ok else 'fail'}")
        out.doc = {"type": "ghz-result", "mode": "quantum", "win_probabilities": wins}
        return OK if ok else NEGATIVE
    b = classical_brute_force()
    out.say(f"deterministic profiles: {b.profiles}")
    out.say(f"best win probability against uniform inputs: {_num(b.max_win_uniform)}")
    out.say(f"every profile loses on some input: {'yes' if b.all_defeated else 'no'}")
    out.say(f"referee's guaranteed payoff against a known profile: {_num(b.min_referee_best_response)}")
    ok = b.all_defeated and b.max_win_uniform < 1.0
    out.say(f"verdict: {'pass' if ok else 'fail'}")
    out.doc = {"type": "ghz-result", "mode": "classical", "profiles": b.profiles,
               "max_win_uniform": b.max_win_uniform, "best_profiles": b.best_profiles, "all_defeated": b.all_defeated,
               "min_referee_best_response": b.min_referee_best_response}
    return OK if ok else NEGATIVE


def cmd_scenario_list(args, out: Output) -> int:
    names = list_scenarios()
    for n in names:
        out.say(n)
    out.doc = {"type": "scenario-list", "names": names}
    return OK


def cmd_scenario_run(args, out: Output) -> int:
    if args.all == bool(args.name):
        raise io.FormatError("give a scenario name or --all, not both", "scenario run")
    names = list_scenarios() if args.all else [args.name]
    reports = []
    for n in names:
        rep = run_scenario(n, eps=args.eps, restarts=args.restarts, seed=args.seed)
        reports.append(rep)
        out.say(f"scenario {n}: {'pass' if rep.passed else 'fail'}")
        for c in rep.checks:
            out.say("  " + c.line())
    ok = all(r.passed for r in reports)
    out.doc = reports[0].as_dict() if not args.all else {
        "type": "scenario-suite", "passed": ok, "reports": [r.as_dict() for r in reports]}
    return OK if ok else NEGATIVE


def cmd_scenario_export(args, out: Output) -> int:
    names = list_scenarios() if args.all else [args.name]
    written = []
    for n in names:
        written += [str(p) for p in export_scenario(n, args.dir)]
    for p in written:
        out.say(f"wrote {p}")
    out.doc = {"type": "export-result", "files": written}
    return OK


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser, top: bool):
    d = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
    p.add_argument("--eps", type=float, default=d(1e-9), help="gain tolerance (default 1e-9)")
    p.add_argument("--seed", type=int, default=d(0), help="random seed (default 0)")
    p.add_argument("--restarts", type=int, default=d(100), help="search restarts (default 100)")
    p.add_argument("--max-qubits", type=int, default=d(linalg.MAX_QUBITS), help="qubit cap (default 14)")
    p.add_argument("--format", choices=("human", "machine"), default=d("human"))
    p.add_argument("--out", default=d(None), help="also write the machine document to this file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcorr", description="Classical and quantum correlated equilibria.")
    _common(parser, True)
    sub = parser.add_subparsers(dest="command", required=True)

    def leaf(subparsers, name, func, help_text):
        p = subparsers.add_parser(name, help=help_text)
        _common(p, False)
        p.set_defaults(func=func)
        return p

    def group(name, help_text):
        p = sub.add_parser(name, help=help_text)
        return p.add_subparsers(dest="action", required=True)

    ce = group("ce", "normal-form correlated equilibria")
    p = leaf(ce, "verify", cmd_ce_verify, "check a device against the obedience constraints")
    p.add_argument("game")
    p.add_argument("device")
    p = leaf(ce, "find", cmd_ce_find, "solve the CE linear program")
    p.add_argument("game")
    p.add_argument("--objective", default=None, help="'welfare' or a player index")

    for name, func in (("efce", cmd_efce_verify), ("ir-efce", cmd_ir_efce_verify)):
        grp = group(name, f"{name.upper()} of extensive-form games")
        p = leaf(grp, "verify", func, f"check a device as an {name.upper()}")
        p.add_argument("game")
        p.add_argument("device")

    p = leaf(sub, "to-normal-form", cmd_to_normal_form, "normal-form equivalent of an extensive game")
    p.add_argument("game")

    qce = group("qce", "quantum correlated equilibria")
    for name, func, help_text in (
        ("simulate", cmd_qce_simulate, "exact outcome distribution"),
        ("canonicalize", cmd_qce_canonicalize, "fold circuits into the shared state"),
        ("verify", cmd_qce_verify, "optimal deviations for every player"),
        ("to-ce", cmd_qce_to_ce, "classical device with the same outcome distribution"),
    ):
        p = leaf(qce, name, func, help_text)
        p.add_argument("state")
        p.add_argument("game")
        p.add_argument("--circuits", default=None, help="circuit file (default: canonical readouts)")
        if name == "verify":
            p.add_argument("--samples", type=int, default=256, help="random measurements for >2 actions")
    p = leaf(qce, "check-state", cmd_qce_check_state, "constraint residuals for the ⅓(TR + BL + BR) target")
    p.add_argument("state")
    p = leaf(qce, "search", cmd_qce_search, "numerical search for a state meeting the constraints")
    p.add_argument("--row-dim", type=int, default=1, help="row coefficient dimension (power of two)")
    p.add_argument("--col-dim", type=int, default=1, help="column coefficient dimension (power of two)")
    p.add_argument("--start", default=None, help="state file evaluated as an extra start point")
    p.add_argument("--threshold", type=float, default=1e-3, help="residual counted as feasible")
    for name, func, help_text in (
        ("simulate-extensive", cmd_qce_simulate_extensive, "exact leaf distribution of an extensive protocol"),
        ("lookahead", cmd_qce_lookahead, "best deviation running own circuits early"),
    ):
        p = leaf(qce, name, func, help_text)
        p.add_argument("state")
        p.add_argument("game")
        p.add_argument("circuits")
        if name == "lookahead":
            p.add_argument("--player", type=int, default=0)

    ghz = group("ghz", "the GHZ game")
    p = leaf(ghz, "simulate", cmd_ghz_simulate, "quantum protocol or classical brute force")
    p.add_argument("--mode", choices=("quantum", "classical"), default="quantum")

    sc = group("scenario", "built-in worked examples")
    leaf(sc, "list", cmd_scenario_list, "scenario names")
    p = leaf(sc, "run", cmd_scenario_run, "run a scenario's checks")
    p.add_argument("name", nargs="?")
    p.add_argument("--all", action="store_true")
    p = leaf(sc, "export", cmd_scenario_export, "write scenario inputs as files")
    p.add_argument("name", nargs="?")
    p.add_argument("--all", action="store_true")
    p.add_argument("--dir", default=".")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return INPUT_ERROR if e.code else OK
    out = Output(args)
    previous_cap = linalg.MAX_QUBITS
    linalg.set_max_qubits(args.max_qubits)
    try:
        code = args.func(args, out)
    except (io.FormatError, GameError, QuantumError, KeyError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        sys.stderr.write(f"input error: {msg}\n")
        return INPUT_ERROR
    except linalg.ConvergenceError as e:
        sys.stderr.write(f"numerical failure: {e} (residual {e.residual:.3e})\n")
        return NUMERIC_ERROR
    except ArithmeticError as e:
        sys.stderr.write(f"numerical failure: {e}\n")
        return NUMERIC_ERROR
    except ValueError as e:
        sys.stderr.write(f"input error: {e}\n")
        return INPUT_ERROR
    finally:
        linalg.set_max_qubits(previous_cap)
    out.emit()
    return code


if __name__ == "__main__":
    sys.exit(main())
