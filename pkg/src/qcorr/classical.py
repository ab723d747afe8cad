"""Classical correlated equilibria: CE, EFCE and IR-EFCE checks, and an LP CE finder."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linprog

from .games import (
    ExtensiveFormGame,
    GameError,
    NormalFormGame,
    OutcomeDistribution,
    PureStrategy,
    require_valid,
    to_normal_form,
)

DEFAULT_EPS = 1e-9
MAX_DEVIATION_STATES = 200_000
_TIE = 1e-12

EQUILIBRIUM = "equilibrium"
NOT_EQUILIBRIUM = "not-equilibrium"
UNDETERMINED = "undetermined"


class CorrelatingDevice(OutcomeDistribution):
    """Distribution over recommended profiles.

    Normal-form profiles are tuples of action labels; extensive-form profiles
    are tuples of :class:`PureStrategy`, one per player.
    """


@dataclass(frozen=True)
class EquilibriumReport:
    verdict: str
    gains: tuple[float, ...]
    on_path: tuple[float, ...]
    best_values: tuple[float, ...]
    eps: float
    witness: dict[str, Any] | None = None
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def is_equilibrium(self) -> bool:
        return self.verdict == EQUILIBRIUM

    @property
    def max_gain(self) -> float:
        return max(self.gains, default=0.0)


def _verdict(gains: Sequence[float], eps: float) -> str:
    return EQUILIBRIUM if max(gains, default=0.0) <= eps else NOT_EQUILIBRIUM


def _argmax_prefer(values: Sequence[float], preferred: int) -> int:
    """Index of the maximum, keeping ``preferred`` unless beaten by more than a rounding tie."""
    best = preferred
    for k, v in enumerate(values):
        if v > values[best] + _TIE:
            best = k
    return best


# ---------------------------------------------------------------------------
# normal form


def verify_ce(g: NormalFormGame, mu: OutcomeDistribution, eps: float = DEFAULT_EPS) -> EquilibriumReport:
    """Check the obedience constraints of a device over ``g``'s action profiles.

    ``details["conditional"][i][told][play]`` is player ``i``'s expected
    payoff from ``play`` given the recommendation ``told``.
    """
    idx_entries = [(g.profile_index(profile), p) for profile, p in mu]
    gains, on_path, best_values, deviations, conditional = [], [], [], [], []
    for i in range(g.n_players):
        k = len(g.actions[i])
        told = np.zeros(k)
        # table[a, b] = sum over profiles recommending a of P * u_i(b, others)
        table = np.zeros((k, k))
        for idx, p in idx_entries:
            if p == 0.0:
                continue
            told[idx[i]] += p
            cells = list(idx)
            for b in range(k):
                cells[i] = b
                table[idx[i], b] += p * g.payoffs[tuple(cells)][i]
        follow = float(np.trace(table))
        best = 0.0
        dev: dict[str, str] = {}
        for a in range(k):
            b = _argmax_prefer(table[a], a)
            best += table[a, b]
            if b != a:
                dev[g.actions[i][a]] = g.actions[i][b]
        gains.append(best - follow)
        on_path.append(follow)
        best_values.append(best)
        deviations.append(dev)
        acts = g.actions[i]
        conditional.append({acts[a]: {acts[b]: float(table[a, b] / told[a]) for b in range(k)}
                            for a in range(k) if told[a] > 0.0})
    report_gains = tuple(max(x, 0.0) if x > -_TIE else x for x in gains)
    worst = int(np.argmax(gains))
    witness = None
    if gains[worst] > _TIE:
        witness = {"player": worst, "deviation": deviations[worst], "utility": best_values[worst]}
    return EquilibriumReport(
        _verdict(gains, eps),
        report_gains,
        tuple(on_path),
        tuple(best_values),
        eps,
        witness,
        {"deviations": deviations, "conditional": conditional},
    )


def find_ce(
    g: NormalFormGame,
    objective: str | int | np.ndarray | None = None,
    max_cells: int = 1 << 16,
    feasibility_tol: float = 1e-8,
) -> CorrelatingDevice:
    """Correlated equilibrium maximizing a linear objective over outcome probabilities.

    ``objective`` may be ``None`` (any feasible point), ``"welfare"`` (sum of
    payoffs), a player index (that player's utility), or an array of per-cell
    weights shaped like the action grid.
    """
    shape = g.shape
    cells = int(np.prod(shape))
    if cells > max_cells:
        raise GameError(f"game has {cells} cells (cap {max_cells})")
    if objective is None:
        c = np.zeros(cells)
    elif isinstance(objective, str):
        if objective != "welfare":
            raise ValueError(f"unknown objective {objective!r}")
        c = g.payoffs.sum(axis=-1).reshape(-1)
    elif isinstance(objective, (int, np.integer)):
        c = g.payoffs[..., int(objective)].reshape(-1)
    else:
        c = np.asarray(objective, dtype=float).reshape(-1)
        if c.size != cells:
            raise ValueError("objective weights do not match the number of cells")

    rows = []
    flat_profiles = list(np.ndindex(*shape))
    for i in range(g.n_players):
        for a in range(shape[i]):
            for b in range(shape[i]):
                if a == b:
                    continue
                row = np.zeros(cells)
                for col, idx in enumerate(flat_profiles):
                    if idx[i] != a:
                        continue
                    alt = list(idx)
                    alt[i] = b
                    row[col] = g.payoffs[tuple(alt)][i] - g.payoffs[idx][i]
                rows.append(row)
    a_ub = np.array(rows) if rows else None
    b_ub = np.zeros(len(rows)) if rows else None
    res = linprog(
        -c,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=np.ones((1, cells)),
        b_eq=[1.0],
        bounds=[(0, None)] * cells,
        method="highs",
    )
    if res.status != 0:
        raise ArithmeticError(f"CE linear program failed: {res.message}")
    x = np.clip(res.x, 0.0, None)
    x[x < 1e-13] = 0.0
    x /= x.sum()
    if a_ub is not None:
        violation = float(np.max(a_ub @ x))
        if violation > feasibility_tol:
            raise ArithmeticError(f"CE solution violates incentive constraints by {violation:.3e}")
    entries = [(tuple(g.actions[i][k] for i, k in enumerate(idx)), float(x[col]))
               for col, idx in enumerate(flat_profiles) if x[col] > 0.0]
    return CorrelatingDevice(entries)


# ---------------------------------------------------------------------------
# extensive form


def _strategy_profile(g: ExtensiveFormGame, profile: Sequence) -> tuple[dict[str, str], ...]:
    if len(profile) != g.n_players:
        raise GameError("device profile has the wrong number of players")
    out = []
    for i, s in enumerate(profile):
        choices = s.as_dict() if isinstance(s, PureStrategy) else dict(s)
        for inf in g.player_infosets(i):
            if inf.id not in choices:
                raise GameError(f"profile entry for player {i} misses information set {inf.id!r}")
            if choices[inf.id] not in inf.actions:
                raise GameError(f"{choices[inf.id]!r} is not an action at {inf.id!r}")
        out.append(choices)
    return tuple(out)


def outcome_distribution(g: ExtensiveFormGame, mu: OutcomeDistribution) -> OutcomeDistribution:
    """Leaf distribution induced when everyone follows the device."""
    return OutcomeDistribution((g.play(_strategy_profile(g, prof)), p) for prof, p in mu)


class _EfceBestResponse:
    """Optimal deviation plan for one player when recommendations are revealed on arrival.

    Plans map (information set, own recommendations so far) to an action.
    Perfect recall makes these augmented states a tree, so the best plan is
    found by backward induction; this equals the best of the enumerated
    deterministic plans.
    """

    def __init__(self, g: ExtensiveFormGame, profiles, weights, player: int, cap: int):
        self.g = g
        self.profiles = profiles
        self.weights = weights
        self.player = player
        self.cap = cap
        self.members: dict[tuple, list[tuple[str, int]]] = {}
        self.choice: dict[tuple, str] = {}
        self._collect()

    def _collect(self):
        g, i = self.g, self.player
        own = g.player_infosets(i)
        for k, prof in enumerate(self.profiles):
            for inf in own:
                for nid in inf.nodes:
                    recs = []
                    ok = True
                    for p, a in g.path(nid):
                        nd = g.node(p)
                        if nd.owner == i:
                            recs.append(prof[i][nd.infoset])
                        elif prof[nd.owner][nd.infoset] != a:
                            ok = False
                            break
                    if ok:
                        recs.append(prof[i][inf.id])
                        self.members.setdefault((inf.id, tuple(recs)), []).append((nid, k))
        if len(self.members) > self.cap:
            raise GameError(f"{len(self.members)} deviation states for player {i} (cap {self.cap})")

    def value(self, nid: str, k: int, recs: tuple) -> float:
        g, i = self.g, self.player
        prof = self.profiles[k]
        while True:
            nd = g.node(nid)
            if nd.is_leaf:
                return nd.payoffs[i]
            if nd.owner == i:
                recs = recs + (prof[i][nd.infoset],)
                return self.value(nd.child(self.choose(nd.infoset, recs)), k, recs)
            nid = nd.child(prof[nd.owner][nd.infoset])

    def choose(self, infoset: str, recs: tuple) -> str:
        key = (infoset, recs)
        if key not in self.choice:
            members = self.members.get(key, [])
            actions = self.g.node(members[0][0]).actions if members else ()
            totals = [sum(self.weights[k] * self.value(self.g.node(nid).child(a), k, recs) for nid, k in members)
                      for a in actions]
            rec = actions.index(recs[-1])
            self.choice[key] = actions[_argmax_prefer(totals, rec)]
        return self.choice[key]

    def best(self) -> float:
        return sum(w * self.value(self.g.root, k, ()) for k, w in enumerate(self.weights))

    def deviations(self) -> dict[tuple, str]:
        return {key: a for key, a in sorted(self.choice.items()) if a != key[1][-1]}


def verify_efce(
    g: ExtensiveFormGame,
    mu: OutcomeDistribution,
    eps: float = DEFAULT_EPS,
    cap: int = MAX_DEVIATION_STATES,
) -> EquilibriumReport:
    """EFCE check: each recommendation is revealed only when its information set is reached."""
    require_valid(g)
    entries = [(_strategy_profile(g, prof), p) for prof, p in mu if p > 0.0]
    profiles = [e[0] for e in entries]
    weights = [e[1] for e in entries]
    gains, on_path, best_values, plans = [], [], [], []
    for i in range(g.n_players):
        follow = sum(w * g.leaf_payoffs(g.play(prof))[i] for prof, w in entries)
        br = _EfceBestResponse(g, profiles, weights, i, cap)
        best = br.best()
        gains.append(best - follow)
        on_path.append(follow)
        best_values.append(best)
        plans.append(br.deviations())
    worst = int(np.argmax(gains))
    witness = None
    if gains[worst] > _TIE:
        witness = {
            "player": worst,
            "deviation": {f"{iid}|{'/'.join(recs)}": a for (iid, recs), a in plans[worst].items()},
            "utility": best_values[worst],
        }
    return EquilibriumReport(
        _verdict(gains, eps),
        tuple(max(x, 0.0) if x > -_TIE else x for x in gains),
        tuple(on_path),
        tuple(best_values),
        eps,
        witness,
    )


def push_to_normal_form(nfe, mu: OutcomeDistribution) -> CorrelatingDevice:
    """Re-express a device over pure-strategy profiles as a device over ``n(G)`` labels."""
    g = nfe.source
    entries = []
    for prof, p in mu:
        labels = []
        for i, ch in enumerate(_strategy_profile(g, prof)):
            target = PureStrategy(i, tuple((inf.id, ch[inf.id]) for inf in g.player_infosets(i)))
            labels.append(nfe.game.actions[i][nfe.strategies[i].index(target)])
        entries.append((tuple(labels), p))
    return CorrelatingDevice(entries)


def verify_ir_efce(
    g: ExtensiveFormGame,
    mu: OutcomeDistribution,
    eps: float = DEFAULT_EPS,
    cap: int | None = None,
) -> EquilibriumReport:
    """IR-EFCE check by reduction to a CE of the normal-form equivalent."""
    nfe = to_normal_form(g) if cap is None else to_normal_form(g, cap)
    device = push_to_normal_form(nfe, mu)
    rep = verify_ce(nfe.game, device, eps)
    witness = rep.witness
    if witness is not None:
        i = witness["player"]
        witness = dict(witness)
        witness["deviation"] = {
            told: nfe.strategy(i, play).as_dict() for told, play in witness["deviation"].items()
        }
    return EquilibriumReport(rep.verdict, rep.gains, rep.on_path, rep.best_values, eps, witness,
                             {"normal_form_device": device})


def device_from_choices(g: ExtensiveFormGame, entries: Iterable[tuple[Sequence[Mapping[str, str]], float]]) -> CorrelatingDevice:
    """Build an extensive-form device from per-player ``{infoset: action}`` maps."""
    out = []
    for prof, p in entries:
        choices = _strategy_profile(g, prof)
        out.append((tuple(PureStrategy(i, tuple((inf.id, ch[inf.id]) for inf in g.player_infosets(i)))
                          for i, ch in enumerate(choices)), p))
    return CorrelatingDevice(out)


def expected_payoffs(g: ExtensiveFormGame | NormalFormGame, mu: OutcomeDistribution) -> np.ndarray:
    if isinstance(g, NormalFormGame):
        return g.expected_utility(mu)
    return g.expected_utility(outcome_distribution(g, mu))


__all__ = [
    "CorrelatingDevice",
    "EquilibriumReport",
    "EQUILIBRIUM",
    "NOT_EQUILIBRIUM",
    "UNDETERMINED",
    "verify_ce",
    "find_ce",
    "verify_efce",
    "verify_ir_efce",
    "push_to_normal_form",
    "device_from_choices",
    "outcome_distribution",
    "expected_payoffs",
]
