"""Normal-form and extensive-form games of complete information.

Players are identified by 0-based integer indices; ``players`` carries
display names. Extensive-form games have no chance nodes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

PROB_TOL = 1e-9
MAX_STRATEGIES = 4096


class GameError(ValueError):
    pass


class StrategySpaceTooLarge(GameError):
    pass


# ---------------------------------------------------------------------------
# distributions


@dataclass(frozen=True)
class OutcomeDistribution:
    """Finite distribution over hashable outcome keys.

    Normal-form keys are tuples of action labels (one per player);
    extensive-form keys are leaf ids. Duplicate keys are merged and entries
    are kept in first-seen order.
    """

    entries: tuple[tuple[Hashable, float], ...]

    def __init__(self, entries: Iterable[tuple[Hashable, float]] | Mapping):
        items = entries.items() if isinstance(entries, Mapping) else entries
        merged: dict = {}
        for key, p in items:
            p = float(p)
            if not np.isfinite(p) or p < -PROB_TOL:
                raise ValueError(f"invalid probability {p} for {key!r}")
            merged[key] = merged.get(key, 0.0) + max(p, 0.0)
        total = sum(merged.values())
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "entries", tuple(merged.items()))

    def as_dict(self) -> dict:
        return dict(self.entries)

    def probability(self, key) -> float:
        return self.as_dict().get(key, 0.0)

    def support(self, tol: float = 0.0) -> list:
        return [k for k, p in self.entries if p > tol]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def max_difference(self, other: "OutcomeDistribution") -> float:
        a, b = self.as_dict(), other.as_dict()
        return max((abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in set(a) | set(b)), default=0.0)

    def close_to(self, other: "OutcomeDistribution", tol: float = 1e-9) -> bool:
        return self.max_difference(other) <= tol


# ---------------------------------------------------------------------------
# normal form


@dataclass(frozen=True, eq=False)
class NormalFormGame:
    """Payoffs indexed ``payoffs[a_0, ..., a_{n-1}, i]`` for player ``i``."""

    actions: tuple[tuple[str, ...], ...]
    payoffs: np.ndarray
    players: tuple[str, ...] = ()

    def __post_init__(self):
        actions = tuple(tuple(str(a) for a in acts) for acts in self.actions)
        object.__setattr__(self, "actions", actions)
        n = len(actions)
        if n == 0:
            raise GameError("a game needs at least one player")
        for i, acts in enumerate(actions):
            if not acts:
                raise GameError(f"player {i} has no actions")
            if len(set(acts)) != len(acts):
                raise GameError(f"player {i} has duplicate action labels")
        pay = np.array(self.payoffs, dtype=float)
        shape = tuple(len(a) for a in actions) + (n,)
        if pay.size != int(np.prod(shape)):
            raise GameError(f"payoff tensor has {pay.size} entries, expected shape {shape}")
        pay = pay.reshape(shape)
        if not np.all(np.isfinite(pay)):
            raise GameError("payoffs must be finite")
        pay.flags.writeable = False
        object.__setattr__(self, "payoffs", pay)
        players = tuple(self.players) or tuple(f"P{i + 1}" for i in range(n))
        if len(players) != n:
            raise GameError("player names do not match the action lists")
        object.__setattr__(self, "players", players)

    @property
    def n_players(self) -> int:
        return len(self.actions)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.actions)

    def action_index(self, player: int, label: str) -> int:
        try:
            return self.actions[player].index(label)
        except ValueError:
            raise GameError(f"{label!r} is not an action of player {player}") from None

    def profile_index(self, profile: Sequence[str]) -> tuple[int, ...]:
        if len(profile) != self.n_players:
            raise GameError(f"profile {profile!r} has the wrong length")
        return tuple(self.action_index(i, a) for i, a in enumerate(profile))

    def payoff(self, profile: Sequence[str]) -> np.ndarray:
        return self.payoffs[self.profile_index(profile)]

    def profiles(self) -> Iterable[tuple[str, ...]]:
        return itertools.product(*self.actions)

    def expected_utility(self, dist: OutcomeDistribution) -> np.ndarray:
        total = np.zeros(self.n_players)
        for profile, p in dist:
            total += p * self.payoff(profile)
        return total


# ---------------------------------------------------------------------------
# extensive form


@dataclass(frozen=True)
class Node:
    id: str
    owner: int | None = None
    infoset: str | None = None
    edges: tuple[tuple[str, str], ...] = ()
    payoffs: tuple[float, ...] | None = None

    @property
    def is_leaf(self) -> bool:
        return self.payoffs is not None

    @property
    def actions(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.edges)

    def child(self, action: str) -> str:
        for a, c in self.edges:
            if a == action:
                return c
        raise GameError(f"node {self.id!r} has no action {action!r}")


def leaf(node_id: str, *payoffs: float) -> Node:
    return Node(node_id, payoffs=tuple(float(p) for p in payoffs))


def decision(node_id: str, owner: int, infoset: str, edges: Mapping[str, str] | Sequence) -> Node:
    items = edges.items() if isinstance(edges, Mapping) else edges
    return Node(node_id, owner=owner, infoset=infoset, edges=tuple((str(a), str(c)) for a, c in items))


@dataclass(frozen=True)
class InfoSet:
    id: str
    owner: int
    actions: tuple[str, ...]
    nodes: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class ExtensiveFormGame:
    nodes: Mapping[str, Node]
    root: str
    players: tuple[str, ...]
    _order: tuple[str, ...] = field(init=False, repr=False)
    _parent: Mapping[str, tuple[str, str]] = field(init=False, repr=False)
    _infosets: Mapping[str, "InfoSet"] = field(init=False, repr=False)

    def __init__(self, nodes: Iterable[Node] | Mapping[str, Node], root: str, players: Sequence[str] | int):
        if isinstance(nodes, Mapping):
            nodes = list(nodes.values())
        table: dict[str, Node] = {}
        for nd in nodes:
            if nd.id in table:
                raise GameError(f"duplicate node id {nd.id!r}")
            table[nd.id] = nd
        if isinstance(players, int):
            players = tuple(f"P{i + 1}" for i in range(players))
        object.__setattr__(self, "nodes", table)
        object.__setattr__(self, "root", root)
        object.__setattr__(self, "players", tuple(players))
        # preorder from the root; tolerate malformed trees (validate reports them)
        order: list[str] = []
        parent: dict[str, tuple[str, str]] = {}
        seen: set[str] = set()
        stack = [root] if root in table else []
        while stack:
            nid = stack.pop()
            if nid in seen:
                continue
            seen.add(nid)
            order.append(nid)
            for a, c in reversed(table[nid].edges):
                if c in table and c not in seen:
                    parent.setdefault(c, (nid, a))
                    stack.append(c)
        object.__setattr__(self, "_order", tuple(order))
        object.__setattr__(self, "_parent", parent)
        object.__setattr__(self, "_infosets", self._group_infosets())

    @property
    def n_players(self) -> int:
        return len(self.players)

    def node(self, node_id: str) -> Node:
        return self.nodes[node_id]

    def preorder(self) -> tuple[str, ...]:
        return self._order

    def leaves(self) -> list[str]:
        return [n for n in self._order if self.nodes[n].is_leaf]

    def path(self, node_id: str) -> list[tuple[str, str]]:
        """(ancestor id, action taken) pairs from the root down to ``node_id``."""
        out = []
        cur = node_id
        while cur in self._parent:
            p, a = self._parent[cur]
            out.append((p, a))
            cur = p
        return out[::-1]

    def _group_infosets(self) -> dict[str, InfoSet]:
        groups: dict[str, list[str]] = {}
        for nid in self._order:
            nd = self.nodes[nid]
            if not nd.is_leaf:
                groups.setdefault(nd.infoset, []).append(nid)
        out = {}
        for iid, members in groups.items():
            first = self.nodes[members[0]]
            out[iid] = InfoSet(iid, first.owner, first.actions, tuple(members))
        return out

    def infosets(self) -> dict[str, InfoSet]:
        """Information sets in order of first appearance in a preorder walk."""
        return dict(self._infosets)

    def player_infosets(self, player: int) -> list[InfoSet]:
        return [s for s in self._infosets.values() if s.owner == player]

    def play(self, choices: Sequence[Mapping[str, str]]) -> str:
        """Leaf reached when player ``i`` picks ``choices[i][infoset]`` everywhere."""
        cur = self.root
        while not self.nodes[cur].is_leaf:
            nd = self.nodes[cur]
            cur = nd.child(choices[nd.owner][nd.infoset])
        return cur

    def leaf_payoffs(self, leaf_id: str) -> np.ndarray:
        return np.asarray(self.nodes[leaf_id].payoffs, dtype=float)

    def expected_utility(self, dist: OutcomeDistribution) -> np.ndarray:
        total = np.zeros(self.n_players)
        for leaf_id, p in dist:
            total += p * self.leaf_payoffs(leaf_id)
        return total


def validate_extensive(g: ExtensiveFormGame) -> list[str]:
    """Return a list of violations; an empty list means the game is well formed."""
    problems: list[str] = []
    nodes = g.nodes
    if g.root not in nodes:
        return [f"root {g.root!r} is not a node"]
    parents: dict[str, list[str]] = {}
    for nd in nodes.values():
        if nd.is_leaf:
            if nd.edges:
                problems.append(f"leaf {nd.id!r} has outgoing edges")
            if len(nd.payoffs) != g.n_players:
                problems.append(f"leaf {nd.id!r} has {len(nd.payoffs)} payoffs for {g.n_players} players")
            elif not all(np.isfinite(nd.payoffs)):
                problems.append(f"leaf {nd.id!r} has non-finite payoffs")
            continue
        if nd.owner is None or not 0 <= nd.owner < g.n_players:
            problems.append(f"node {nd.id!r} has invalid owner {nd.owner!r}")
        if nd.infoset is None:
            problems.append(f"node {nd.id!r} has no information set")
        if not nd.edges:
            problems.append(f"decision node {nd.id!r} has no actions")
        if len(set(nd.actions)) != len(nd.actions):
            problems.append(f"node {nd.id!r} repeats an action label")
        for a, c in nd.edges:
            if c not in nodes:
                problems.append(f"edge {nd.id!r} --{a}--> unknown node {c!r}")
            else:
                parents.setdefault(c, []).append(nd.id)
    if g.root in parents:
        problems.append(f"root {g.root!r} has a parent")
    for nid in nodes:
        ps = parents.get(nid, [])
        if nid != g.root and len(ps) != 1:
            problems.append(f"node {nid!r} has {len(ps)} parents")
    unreached = set(nodes) - set(g.preorder())
    if unreached:
        problems.append(f"nodes not reachable from the root: {sorted(unreached)}")
    if problems:
        return problems

    # information-set consistency
    by_set: dict[str, list[Node]] = {}
    for nid in g.preorder():
        nd = nodes[nid]
        if not nd.is_leaf:
            by_set.setdefault(nd.infoset, []).append(nd)
    for iid, members in by_set.items():
        owners = {m.owner for m in members}
        if len(owners) > 1:
            problems.append(f"information set {iid!r} spans players {sorted(owners)}")
        labels = {frozenset(m.actions) for m in members}
        if len(labels) > 1:
            problems.append(f"information set {iid!r} has inconsistent action sets")
        # a tree path cannot pass through the same information set twice
        for m in members:
            if any(nodes[p].infoset == iid for p, _ in g.path(m.id)):
                problems.append(f"information set {iid!r} is visited twice on one path")
                break
    if problems:
        return problems

    # perfect recall
    for iid, members in by_set.items():
        owner = members[0].owner
        seqs = set()
        for m in members:
            seqs.add(tuple((nodes[p].infoset, a) for p, a in g.path(m.id) if nodes[p].owner == owner))
        if len(seqs) > 1:
            problems.append(f"information set {iid!r} violates perfect recall for player {owner}")
    return problems


def require_valid(g: ExtensiveFormGame) -> None:
    problems = validate_extensive(g)
    if problems:
        raise GameError("invalid extensive-form game: " + "; ".join(problems))


# ---------------------------------------------------------------------------
# pure strategies and the normal-form equivalent


@dataclass(frozen=True)
class PureStrategy:
    owner: int
    choices: tuple[tuple[str, str], ...]

    def action(self, infoset: str) -> str:
        for iid, a in self.choices:
            if iid == infoset:
                return a
        raise KeyError(infoset)

    def as_dict(self) -> dict[str, str]:
        return dict(self.choices)

    @property
    def label(self) -> str:
        return ".".join(a for _, a in self.choices) or "-"


def pure_strategies(g: ExtensiveFormGame, player: int, cap: int = MAX_STRATEGIES) -> list[PureStrategy]:
    sets = g.player_infosets(player)
    count = 1
    for s in sets:
        count *= len(s.actions)
    if count > cap:
        raise StrategySpaceTooLarge(f"player {player} has {count} pure strategies (cap {cap})")
    ids = [s.id for s in sets]
    return [PureStrategy(player, tuple(zip(ids, combo))) for combo in itertools.product(*(s.actions for s in sets))]


@dataclass(frozen=True, eq=False)
class NormalFormEquivalent:
    """``n(G)`` together with the strategy behind each of its actions."""

    game: NormalFormGame
    strategies: tuple[tuple[PureStrategy, ...], ...]
    source: ExtensiveFormGame

    def labels(self, profile: Sequence[PureStrategy]) -> tuple[str, ...]:
        return tuple(self.game.actions[i][self.strategies[i].index(s)] for i, s in enumerate(profile))

    def strategy(self, player: int, label: str) -> PureStrategy:
        return self.strategies[player][self.game.action_index(player, label)]

    def leaf(self, labels: Sequence[str]) -> str:
        return self.source.play([self.strategy(i, a).as_dict() for i, a in enumerate(labels)])


def to_normal_form(g: ExtensiveFormGame, cap: int = MAX_STRATEGIES) -> NormalFormEquivalent:
    """Normal-form equivalent: each player's actions are its pure strategies."""
    require_valid(g)
    strats = tuple(tuple(pure_strategies(g, i, cap)) for i in range(g.n_players))
    actions = []
    for i, ss in enumerate(strats):
        labels = [s.label for s in ss]
        if len(set(labels)) != len(labels):
            labels = [f"s{k}" for k in range(len(ss))]
        actions.append(tuple(labels))
    shape = tuple(len(s) for s in strats)
    payoffs = np.zeros(shape + (g.n_players,))
    for idx in itertools.product(*(range(k) for k in shape)):
        leaf_id = g.play([strats[i][k].as_dict() for i, k in enumerate(idx)])
        payoffs[idx] = g.leaf_payoffs(leaf_id)
    nf = NormalFormGame(tuple(actions), payoffs, g.players)
    return NormalFormEquivalent(nf, strats, g)


def corresponds(
    nfe: NormalFormEquivalent,
    d_ext: OutcomeDistribution,
    d_nf: OutcomeDistribution,
    tol: float = PROB_TOL,
) -> bool:
    """True iff every leaf has the same probability under ``d_ext`` as the
    total probability of the ``n(G)`` profiles that reach it."""
    pushed: dict[str, float] = {}
    for labels, p in d_nf:
        leaf_id = nfe.leaf(labels)
        pushed[leaf_id] = pushed.get(leaf_id, 0.0) + p
    ext = d_ext.as_dict()
    return all(abs(ext.get(k, 0.0) - pushed.get(k, 0.0)) <= tol for k in set(ext) | set(pushed))
