"""JSON file formats for games, states, circuits, devices, distributions and reports.

Every document is an object with a ``"type"`` field. Complex numbers are
``[re, im]`` pairs and floats are written with full ``repr`` precision, so
values survive a save/load cycle bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .classical import CorrelatingDevice, EquilibriumReport, device_from_choices
from .games import (
    ExtensiveFormGame,
    NormalFormGame,
    Node,
    OutcomeDistribution,
    PureStrategy,
    decision,
    leaf,
)
from .quantum.constraints import ConstraintReport
from .quantum.normal import QceInstance
from .quantum.state import Gate, PlayerCircuit, QuantumState


class FormatError(ValueError):
    """Malformed input; ``where`` names the offending line or field."""

    def __init__(self, message: str, where: str = ""):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


# ---------------------------------------------------------------------------
# generic helpers


def to_jsonable(x: Any) -> Any:
    """Plain JSON value for numbers, arrays, strategies, distributions and nested containers."""
    if isinstance(x, (str, bool)) or x is None:
        return x
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return np.stack([x.real, x.imag], axis=-1).tolist()
        return x.tolist()
    if isinstance(x, PureStrategy):
        return x.as_dict()
    if isinstance(x, OutcomeDistribution):
        return distribution_to_json(x)
    if isinstance(x, Mapping):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        return [to_jsonable(v) for v in x]
    if hasattr(x, "as_dict"):
        return to_jsonable(x.as_dict())
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(doc: Any) -> str:
    return json.dumps(to_jsonable(doc), indent=2, sort_keys=False, allow_nan=True)


def parse_text(text: str, source: str = "<input>") -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(e.msg, f"{source}:{e.lineno}:{e.colno}") from None
    if not isinstance(doc, dict):
        raise FormatError("top level must be an object", source)
    return doc


def read_json(path: str | Path) -> dict:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise FormatError(f"cannot read file ({e.strerror})", str(p)) from None
    return parse_text(text, str(p))


def write_json(path: str | Path, doc: Any) -> None:
    Path(path).write_text(dumps(doc) + "\n")


def _field(doc: Mapping, key: str, where: str, kind=None):
    if not isinstance(doc, Mapping):
        raise FormatError("expected an object", where)
    if key not in doc:
        raise FormatError(f"missing field {key!r}", where)
    v = doc[key]
    if kind is not None and not isinstance(v, kind):
        raise FormatError(f"field {key!r} must be {_kind_name(kind)}", f"{where}.{key}")
    return v


def _kind_name(kind) -> str:
    names = {list: "a list", dict: "an object", str: "a string", int: "an integer"}
    if isinstance(kind, tuple):
        return " or ".join(names.get(k, k.__name__) for k in kind)
    return names.get(kind, kind.__name__)


def _expect_type(doc: Mapping, expected: str, where: str):
    t = _field(doc, "type", where, str)
    if t != expected:
        raise FormatError(f"expected a {expected!r} document, got {t!r}", where)


def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise FormatError("expected a number", where)
    return float(x)


def _complex(x, where: str) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if not isinstance(x, list) or len(x) != 2:
        raise FormatError("expected a [re, im] pair", where)
    return complex(_number(x[0], where), _number(x[1], where))


def _wrap(fn, where: str):
    try:
        return fn()
    except FormatError:
        raise
    except (ValueError, KeyError, TypeError) as e:
        raise FormatError(str(e), where) from None


# ---------------------------------------------------------------------------
# games


def normal_game_to_json(g: NormalFormGame) -> dict:
    cells = [{"profile": list(p), "payoffs": [float(v) for v in g.payoff(p)]} for p in g.profiles()]
    return {"type": "normal-form-game", "players": list(g.players), "actions": [list(a) for a in g.actions],
            "payoffs": cells}


def normal_game_from_json(doc: Mapping, where: str = "game") -> NormalFormGame:
    _expect_type(doc, "normal-form-game", where)
    actions = _field(doc, "actions", where, list)
    players = doc.get("players")
    shape = []
    for i, acts in enumerate(actions):
        if not isinstance(acts, list) or not acts or not all(isinstance(a, str) for a in acts):
            raise FormatError("each player needs a non-empty list of action labels", f"{where}.actions[{i}]")
        shape.append(len(acts))
    n = len(actions)
    table = np.full(tuple(shape) + (n,), np.nan)
    cells = _field(doc, "payoffs", where, list)
    for k, cell in enumerate(cells):
        here = f"{where}.payoffs[{k}]"
        prof = _field(cell, "profile", here, list)
        pays = _field(cell, "payoffs", here, list)
        if len(prof) != n or len(pays) != n:
            raise FormatError(f"profile and payoffs need {n} entries", here)
        try:
            idx = tuple(actions[i].index(a) for i, a in enumerate(prof))
        except ValueError:
            raise FormatError(f"unknown action in profile {prof}", here) from None
        table[idx] = [_number(v, f"{here}.payoffs") for v in pays]
    if np.isnan(table).any():
        missing = tuple(int(v) for v in np.argwhere(np.isnan(table[..., 0]))[0])
        label = [actions[i][j] for i, j in enumerate(missing)]
        raise FormatError(f"no payoffs for profile {label}", f"{where}.payoffs")
    return _wrap(lambda: NormalFormGame(tuple(tuple(a) for a in actions), table,
                                        tuple(players) if players else ()), where)


def extensive_game_to_json(g: ExtensiveFormGame) -> dict:
    nodes = []
    for nid in g.preorder():
        nd = g.node(nid)
        if nd.is_leaf:
            nodes.append({"id": nid, "payoffs": list(nd.payoffs)})
        else:
            nodes.append({"id": nid, "owner": nd.owner, "infoset": nd.infoset, "edges": [list(e) for e in nd.edges]})
    return {"type": "extensive-form-game", "players": list(g.players), "root": g.root, "nodes": nodes}


def extensive_game_from_json(doc: Mapping, where: str = "game") -> ExtensiveFormGame:
    _expect_type(doc, "extensive-form-game", where)
    players = _field(doc, "players", where, (list, int))
    root = _field(doc, "root", where, str)
    nodes: list[Node] = []
    for k, nd in enumerate(_field(doc, "nodes", where, list)):
        here = f"{where}.nodes[{k}]"
        nid = _field(nd, "id", here, str)
        if "payoffs" in nd:
            pays = _field(nd, "payoffs", here, list)
            nodes.append(leaf(nid, *(_number(v, f"{here}.payoffs") for v in pays)))
            continue
        owner = _field(nd, "owner", here, int)
        infoset = _field(nd, "infoset", here, str)
        edges = _field(nd, "edges", here, list)
        for j, e in enumerate(edges):
            if not (isinstance(e, list) and len(e) == 2 and all(isinstance(s, str) for s in e)):
                raise FormatError("edges are [action, child] string pairs", f"{here}.edges[{j}]")
        nodes.append(decision(nid, owner, infoset, [tuple(e) for e in edges]))
    return _wrap(lambda: ExtensiveFormGame(nodes, root, players), where)


def game_from_json(doc: Mapping, where: str = "game"):
    t = _field(doc, "type", where, str)
    if t == "normal-form-game":
        return normal_game_from_json(doc, where)
    if t == "extensive-form-game":
        return extensive_game_from_json(doc, where)
    raise FormatError(f"expected a game document, got {t!r}", where)


def game_to_json(g) -> dict:
    return normal_game_to_json(g) if isinstance(g, NormalFormGame) else extensive_game_to_json(g)


# ---------------------------------------------------------------------------
# states and circuits


def state_to_json(s: QuantumState) -> dict:
    return {"type": "quantum-state", "qubit_count": s.qubit_count, "partition": list(s.partition),
            "amplitudes": [[float(a.real), float(a.imag)] for a in s.amplitudes]}


def state_from_json(doc: Mapping, where: str = "state") -> QuantumState:
    _expect_type(doc, "quantum-state", where)
    n = _field(doc, "qubit_count", where, int)
    part = _field(doc, "partition", where, list)
    if len(part) != n:
        raise FormatError(f"partition has {len(part)} entries for {n} qubits", f"{where}.partition")
    amps = _field(doc, "amplitudes", where, list)
    if len(amps) != 2**n:
        raise FormatError(f"{len(amps)} amplitudes for {n} qubits (need {2 ** n})", f"{where}.amplitudes")
    vec = np.array([_complex(a, f"{where}.amplitudes[{k}]") for k, a in enumerate(amps)], dtype=complex)
    return _wrap(lambda: QuantumState(vec, tuple(part)), where)


def _matrix_from_json(m, where: str) -> np.ndarray:
    if not isinstance(m, list) or not m or not all(isinstance(r, list) for r in m):
        raise FormatError("matrix must be a list of rows", where)
    return np.array([[_complex(v, f"{where}[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(m)])


def circuit_to_json(c: PlayerCircuit) -> dict:
    gates = []
    for g in c.gates:
        if g.matrix is not None:
            gates.append({"matrix": to_jsonable(g.matrix), "targets": list(g.targets)})
        else:
            gates.append({"name": g.name, "targets": list(g.targets)})
    return {"type": "circuit", "owner": c.owner, "gates": gates, "output_qubits": list(c.output_qubits),
            "action_map": dict(c.action_map)}


def circuit_from_json(doc: Mapping, where: str = "circuit") -> PlayerCircuit:
    if "type" in doc:
        _expect_type(doc, "circuit", where)
    owner = _field(doc, "owner", where, int)
    gates = []
    for k, g in enumerate(doc.get("gates", [])):
        here = f"{where}.gates[{k}]"
        targets = _field(g, "targets", here, list)
        if "matrix" in g:
            m = _matrix_from_json(g["matrix"], f"{here}.matrix")
            gates.append(_wrap(lambda: Gate(tuple(targets), matrix=m), here))
        else:
            name = _field(g, "name", here, str)
            gates.append(_wrap(lambda: Gate(tuple(targets), name=name), here))
    outputs = _field(doc, "output_qubits", where, list)
    amap = _field(doc, "action_map", where, dict)
    return _wrap(lambda: PlayerCircuit(owner, tuple(gates), tuple(outputs), amap), where)


def circuits_to_json(circuits) -> dict:
    return {"type": "circuits", "circuits": [circuit_to_json(c) for c in circuits]}


def circuits_from_json(doc: Mapping, where: str = "circuits") -> tuple[PlayerCircuit, ...]:
    _expect_type(doc, "circuits", where)
    items = _field(doc, "circuits", where, list)
    return tuple(circuit_from_json(c, f"{where}.circuits[{k}]") for k, c in enumerate(items))


def extensive_circuits_to_json(circuits: Mapping[str, PlayerCircuit], mixing: Mapping | None = None) -> dict:
    return {"type": "extensive-circuits",
            "circuits": {iid: circuit_to_json(c) for iid, c in circuits.items()},
            "mixing": {iid: dict(d) for iid, d in (mixing or {}).items()}}


def extensive_circuits_from_json(doc: Mapping, where: str = "circuits"):
    _expect_type(doc, "extensive-circuits", where)
    items = _field(doc, "circuits", where, dict)
    circuits = {iid: circuit_from_json(c, f"{where}.circuits.{iid}") for iid, c in items.items()}
    mixing = {}
    for iid, d in doc.get("mixing", {}).items():
        if not isinstance(d, dict):
            raise FormatError("mixture must map actions to probabilities", f"{where}.mixing.{iid}")
        mixing[iid] = {a: _number(p, f"{where}.mixing.{iid}.{a}") for a, p in d.items()}
    return circuits, mixing


# ---------------------------------------------------------------------------
# distributions and devices


def _key_to_json(key):
    return list(key) if isinstance(key, tuple) else key


def _key_from_json(key, where: str):
    if isinstance(key, list):
        if not all(isinstance(k, str) for k in key):
            raise FormatError("profile entries must be strings", where)
        return tuple(key)
    if isinstance(key, str):
        return key
    raise FormatError("outcome must be a leaf id or a list of action labels", where)


def distribution_to_json(d: OutcomeDistribution) -> dict:
    if isinstance(d, CorrelatingDevice):
        return device_to_json(d)
    return {"type": "distribution", "entries": [{"outcome": _key_to_json(k), "p": float(p)} for k, p in d]}


def distribution_from_json(doc: Mapping, where: str = "distribution") -> OutcomeDistribution:
    _expect_type(doc, "distribution", where)
    entries = []
    for k, e in enumerate(_field(doc, "entries", where, list)):
        here = f"{where}.entries[{k}]"
        entries.append((_key_from_json(_field(e, "outcome", here), f"{here}.outcome"), _number(_field(e, "p", here), f"{here}.p")))
    return _wrap(lambda: OutcomeDistribution(entries), where)


def device_to_json(mu: OutcomeDistribution) -> dict:
    entries = []
    for prof, p in mu:
        if prof and isinstance(prof[0], PureStrategy):
            entries.append({"profile": [s.as_dict() for s in prof], "p": float(p)})
        else:
            entries.append({"profile": list(prof), "p": float(p)})
    return {"type": "device", "entries": entries}


def device_from_json(doc: Mapping, game=None, where: str = "device") -> CorrelatingDevice:
    """Normal-form profiles are lists of labels; extensive ones lists of ``{infoset: action}``."""
    _expect_type(doc, "device", where)
    raw = []
    for k, e in enumerate(_field(doc, "entries", where, list)):
        here = f"{where}.entries[{k}]"
        prof = _field(e, "profile", here, list)
        p = _number(_field(e, "p", here), f"{here}.p")
        raw.append((prof, p, here))
    if raw and all(isinstance(x, dict) for x in raw[0][0]):
        if not isinstance(game, ExtensiveFormGame):
            raise FormatError("strategy profiles need an extensive-form game", where)
        for prof, _, here in raw:
            if not all(isinstance(x, dict) for x in prof):
                raise FormatError("mixed profile kinds", here)
        return _wrap(lambda: device_from_choices(game, [(prof, p) for prof, p, _ in raw]), where)
    entries = []
    for prof, p, here in raw:
        if not all(isinstance(x, str) for x in prof):
            raise FormatError("profile entries must be action labels", here)
        if isinstance(game, NormalFormGame):
            if len(prof) != game.n_players:
                raise FormatError(f"profile needs {game.n_players} entries", here)
            for i, a in enumerate(prof):
                if a not in game.actions[i]:
                    raise FormatError(f"{a!r} is not an action of player {i}", here)
        entries.append((tuple(prof), p))
    return _wrap(lambda: CorrelatingDevice(entries), where)


# ---------------------------------------------------------------------------
# reports


def report_to_json(r: EquilibriumReport) -> dict:
    return {"type": "equilibrium-report", "verdict": r.verdict, "gains": list(map(float, r.gains)),
            "on_path": list(map(float, r.on_path)), "best_values": list(map(float, r.best_values)),
            "eps": float(r.eps), "witness": to_jsonable(r.witness), "details": to_jsonable(r.details)}


def report_from_json(doc: Mapping, where: str = "report") -> EquilibriumReport:
    _expect_type(doc, "equilibrium-report", where)
    nums = {k: tuple(_number(v, f"{where}.{k}") for v in _field(doc, k, where, list))
            for k in ("gains", "on_path", "best_values")}
    return EquilibriumReport(_field(doc, "verdict", where, str), nums["gains"], nums["on_path"],
                             nums["best_values"], _number(_field(doc, "eps", where), f"{where}.eps"),
                             doc.get("witness"), dict(doc.get("details") or {}))


def constraint_report_to_json(r: ConstraintReport) -> dict:
    return {"type": "constraint-report", **r.as_dict()}


def constraint_report_from_json(doc: Mapping, where: str = "report") -> ConstraintReport:
    _expect_type(doc, "constraint-report", where)
    fields = ("sigma2_norm", "sigma3_residual", "col_sigma2_norm", "col_sigma3_residual")
    vals = [_number(_field(doc, f, where), f"{where}.{f}") for f in fields]
    abc = {k: _number(v, f"{where}.abc_residuals.{k}") for k, v in _field(doc, "abc_residuals", where, dict).items()}
    return ConstraintReport(*vals, abc, _number(doc.get("distribution_error", 0.0), f"{where}.distribution_error"))



# ---------------------------------------------------------------------------
# command results


def search_result_from_json(doc: Mapping, where: str = "search"):
    from .quantum.constraints import SearchResult

    _expect_type(doc, "search-result", where)
    nums = {k: _number(_field(doc, k, where), f"{where}.{k}")
            for k in ("min_residual", "delta", "trace_cc", "trace_cc_bound")}
    holds = _field(doc, "implication_holds", where, bool)
    residuals = tuple(_number(v, f"{where}.residuals[{k}]")
                      for k, v in enumerate(_field(doc, "residuals", where, list)))
    state = state_from_json(_field(doc, "best_state", where, dict), f"{where}.best_state")
    report = constraint_report_from_json(_field(doc, "report", where, dict), f"{where}.report")
    return SearchResult(nums["min_residual"], state, report, nums["delta"], nums["trace_cc"],
                        nums["trace_cc_bound"], holds, residuals)


def lookahead_result_from_json(doc: Mapping, where: str = "lookahead"):
    from .quantum.extensive import LookaheadResult

    _expect_type(doc, "lookahead-result", where)
    value = _number(_field(doc, "value", where), f"{where}.value")
    on_path = _number(_field(doc, "on_path", where), f"{where}.on_path")
    return LookaheadResult(value, on_path, dict(_field(doc, "plan", where, dict)))


def ghz_result_from_json(doc: Mapping, where: str = "ghz"):
    """Quantum mode loads as ``{inputs: win probability}``, classical mode as a ``ClassicalBound``."""
    from .scenarios.ghz import ClassicalBound

    _expect_type(doc, "ghz-result", where)
    mode = _field(doc, "mode", where, str)
    if mode == "quantum":
        wins = _field(doc, "win_probabilities", where, dict)
        return {k: _number(v, f"{where}.win_probabilities.{k}") for k, v in wins.items()}
    if mode != "classical":
        raise FormatError(f"unknown mode {mode!r}", f"{where}.mode")
    best = tuple(tuple(p) for p in _field(doc, "best_profiles", where, list))
    return ClassicalBound(_field(doc, "profiles", where, int),
                          _number(_field(doc, "max_win_uniform", where), f"{where}.max_win_uniform"),
                          best, _field(doc, "all_defeated", where, bool),
                          _number(_field(doc, "min_referee_best_response", where),
                                  f"{where}.min_referee_best_response"))


def scenario_list_from_json(doc: Mapping, where: str = "scenarios") -> list[str]:
    _expect_type(doc, "scenario-list", where)
    names = _field(doc, "names", where, list)
    if not all(isinstance(n, str) for n in names):
        raise FormatError("scenario names must be strings", f"{where}.names")
    return list(names)


def scenario_report_from_json(doc: Mapping, where: str = "scenario"):
    from .scenarios.registry import Check, ScenarioReport

    _expect_type(doc, "scenario-report", where)
    checks = []
    for k, c in enumerate(_field(doc, "checks", where, list)):
        w = f"{where}.checks[{k}]"
        tol = c.get("tolerance") if isinstance(c, Mapping) else None
        checks.append(Check(_field(c, "name", w, str), c.get("expected"), c.get("computed"),
                            _field(c, "passed", w, bool), None if tol is None else _number(tol, f"{w}.tolerance")))
    return ScenarioReport(_field(doc, "name", where, str), tuple(checks))


def scenario_suite_from_json(doc: Mapping, where: str = "suite") -> list:
    _expect_type(doc, "scenario-suite", where)
    return [scenario_report_from_json(r, f"{where}.reports[{k}]")
            for k, r in enumerate(_field(doc, "reports", where, list))]


def export_result_from_json(doc: Mapping, where: str = "export") -> list[Path]:
    _expect_type(doc, "export-result", where)
    return [Path(_wrap(lambda: str(f), where)) for f in _field(doc, "files", where, list)]


_LOADERS = {
    "normal-form-game": normal_game_from_json,
    "extensive-form-game": extensive_game_from_json,
    "quantum-state": state_from_json,
    "circuit": circuit_from_json,
    "circuits": circuits_from_json,
    "extensive-circuits": extensive_circuits_from_json,
    "distribution": distribution_from_json,
    "device": device_from_json,
    "equilibrium-report": report_from_json,
    "constraint-report": constraint_report_from_json,
    "search-result": search_result_from_json,
    "lookahead-result": lookahead_result_from_json,
    "ghz-result": ghz_result_from_json,
    "scenario-list": scenario_list_from_json,
    "scenario-report": scenario_report_from_json,
    "scenario-suite": scenario_suite_from_json,
    "export-result": export_result_from_json,
}


def load_document(doc: Mapping, where: str = "document"):
    """Dispatch on ``doc["type"]``; unknown types raise :class:`FormatError`."""
    t = _field(doc, "type", where, str)
    if t not in _LOADERS:
        raise FormatError(f"unknown document type {t!r}", where)
    return _LOADERS[t](doc, where=where)


# ---------------------------------------------------------------------------
# bundles


def instance_to_json(inst) -> dict:
    return {"type": "qce-instance", "game": game_to_json(inst.game), "state": state_to_json(inst.state),
            "circuits": circuits_to_json(inst.circuits)}


def instance_from_json(doc: Mapping, where: str = "instance") -> QceInstance:
    _expect_type(doc, "qce-instance", where)
    game = normal_game_from_json(_field(doc, "game", where, dict), f"{where}.game")
    state = state_from_json(_field(doc, "state", where, dict), f"{where}.state")
    circuits = circuits_from_json(_field(doc, "circuits", where, dict), f"{where}.circuits")
    return _wrap(lambda: QceInstance(game, state, circuits), where)


_LOADERS["qce-instance"] = instance_from_json
