"""Game model for multi-player discounted-sum games.

A game is an edge-rewarded directed graph.  Each vertex belongs to one
player, carries a start weight, and has a non-empty ordered list of
actions; every action moves to a target vertex and pays each player an
exact rational reward.  The value of a play for player ``p`` is
``sum_i t_p(v_i, a_i) * lam**i``.

All numbers are :class:`fractions.Fraction`.  Nothing here touches floats.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence

__all__ = [
    "Action",
    "Vertex",
    "Game",
    "Lasso",
    "StateLabel",
    "GameFormatError",
    "parse_rational",
    "format_rational",
    "parse_game",
    "render_game",
    "load_game",
    "lasso_payoff",
    "partial_sum",
    "scale_game",
    "evaluate_deterministic",
]

_RATIONAL_RE = re.compile(r"-?[0-9]+(/[1-9][0-9]*)?")


class GameFormatError(ValueError):
    """Raised for malformed or semantically invalid game/profile documents."""


def parse_rational(text, where: str = "value") -> Fraction:
    """Parse ``"p/q"`` or an integer string (plain JSON ints are accepted too)."""
    if isinstance(text, bool):
        raise GameFormatError(f"{where}: expected rational string, got {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str) or not _RATIONAL_RE.fullmatch(text.strip()):
        raise GameFormatError(f"{where}: expected rational like '3' or '-2/3', got {text!r}")
    return Fraction(text.strip())


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Action:
    id: str
    target: str
    rewards: Mapping[str, Fraction]


@dataclass(frozen=True)
class Vertex:
    id: str
    owner: str
    actions: tuple[Action, ...]
    initial: Fraction = Fraction(0)

    def action(self, action_id: str) -> Action:
        for a in self.actions:
            if a.id == action_id:
                return a
        raise KeyError(f"vertex {self.id!r} has no action {action_id!r}")


class StateLabel(NamedTuple):
    """A vertex paired with a memory state of the compliance memory."""

    vertex: str
    memory: int


class _Compiled(NamedTuple):
    # Index-based view of a game used by the solvers' inner loops.
    n: int
    players: tuple[str, ...]
    leader: int
    lam: Fraction
    owner: tuple[int, ...]
    # succ[v] = ((target, (reward per player, ...)), ...)
    succ: tuple[tuple[tuple[int, tuple[Fraction, ...]], ...], ...]
    initial: tuple[Fraction, ...]


@dataclass(frozen=True)
class Game:
    players: tuple[str, ...]
    leader: str
    lam: Fraction
    vertices: tuple[Vertex, ...]

    def __post_init__(self):
        object.__setattr__(self, "players", tuple(self.players))
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "lam", Fraction(self.lam))
        _validate(self)

    @cached_property
    def vertex_index(self) -> dict[str, int]:
        return {v.id: i for i, v in enumerate(self.vertices)}

    @cached_property
    def player_index(self) -> dict[str, int]:
        return {p: i for i, p in enumerate(self.players)}

    def vertex(self, vid: str) -> Vertex:
        try:
            return self.vertices[self.vertex_index[vid]]
        except KeyError:
            raise KeyError(f"unknown vertex {vid!r}") from None

    @property
    def initial_vertices(self) -> list[Vertex]:
        """Vertices with positive start weight, in file order."""
        return [v for v in self.vertices if v.initial > 0]

    @cached_property
    def max_abs_reward(self) -> Fraction:
        return max(
            (abs(r) for v in self.vertices for a in v.actions for r in a.rewards.values()),
            default=Fraction(0),
        )

    @cached_property
    def compiled(self) -> _Compiled:
        idx = self.vertex_index
        succ = tuple(
            tuple((idx[a.target], tuple(a.rewards[p] for p in self.players)) for a in v.actions)
            for v in self.vertices
        )
        return _Compiled(
            n=len(self.vertices),
            players=self.players,
            leader=self.player_index[self.leader],
            lam=self.lam,
            owner=tuple(self.player_index[v.owner] for v in self.vertices),
            succ=succ,
            initial=tuple(v.initial for v in self.vertices),
        )


def _validate(g: Game) -> None:
    if not g.players:
        raise GameFormatError("game needs at least one player")
    if len(set(g.players)) != len(g.players):
        raise GameFormatError("duplicate player ids")
    if g.leader not in g.players:
        raise GameFormatError(f"leader {g.leader!r} is not a declared player")
    if not (0 < g.lam < 1):
        raise GameFormatError(f"lambda must lie strictly between 0 and 1, got {format_rational(g.lam)}")
    if not g.vertices:
        raise GameFormatError("game has no vertices")
    ids = [v.id for v in g.vertices]
    if len(set(ids)) != len(ids):
        raise GameFormatError("duplicate vertex ids")
    known = set(ids)
    players = set(g.players)
    total = Fraction(0)
    for v in g.vertices:
        if v.owner not in players:
            raise GameFormatError(f"vertex {v.id!r}: owner {v.owner!r} is not a declared player")
        if not (0 <= v.initial <= 1):
            raise GameFormatError(f"vertex {v.id!r}: initial weight outside [0,1]")
        total += v.initial
        if not v.actions:
            raise GameFormatError(f"vertex {v.id!r} has no actions (sinks are not allowed)")
        aids = [a.id for a in v.actions]
        if len(set(aids)) != len(aids):
            raise GameFormatError(f"vertex {v.id!r}: duplicate action ids")
        for a in v.actions:
            if a.target not in known:
                raise GameFormatError(f"vertex {v.id!r}, action {a.id!r}: dangling target {a.target!r}")
            missing = players - set(a.rewards)
            if missing:
                raise GameFormatError(
                    f"vertex {v.id!r}, action {a.id!r}: missing reward for {sorted(missing)}"
                )
            extra = set(a.rewards) - players
            if extra:
                raise GameFormatError(f"vertex {v.id!r}, action {a.id!r}: reward for unknown {sorted(extra)}")
    if total != 1:
        raise GameFormatError(f"initial distribution sums to {format_rational(total)}, expected 1")


# -- file format -------------------------------------------------------------

def _load_json(text: str, what: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameFormatError(f"{what}: syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _field(obj, key, where, default=...):
    if not isinstance(obj, dict):
        raise GameFormatError(f"{where}: expected an object")
    if key not in obj:
        if default is ...:
            raise GameFormatError(f"{where}: missing field {key!r}")
        return default
    return obj[key]


def game_from_dict(doc) -> Game:
    players = _field(doc, "players", "game")
    if not isinstance(players, list) or not all(isinstance(p, str) for p in players):
        raise GameFormatError("game: 'players' must be a list of strings")
    leader = _field(doc, "leader", "game")
    lam = parse_rational(_field(doc, "lambda", "game"), "game.lambda")
    raw_vertices = _field(doc, "vertices", "game")
    if not isinstance(raw_vertices, list):
        raise GameFormatError("game: 'vertices' must be a list")
    vertices = []
    for i, rv in enumerate(raw_vertices):
        where = f"vertices[{i}]"
        vid = str(_field(rv, "id", where))
        actions = []
        raw_actions = _field(rv, "actions", where)
        if not isinstance(raw_actions, list):
            raise GameFormatError(f"{where}: 'actions' must be a list")
        for j, ra in enumerate(raw_actions):
            aw = f"{where}.actions[{j}]"
            rewards = _field(ra, "rewards", aw)
            if not isinstance(rewards, dict):
                raise GameFormatError(f"{aw}: 'rewards' must be an object")
            actions.append(
                Action(
                    id=str(_field(ra, "id", aw)),
                    target=str(_field(ra, "target", aw)),
                    rewards={str(p): parse_rational(r, f"{aw}.rewards.{p}") for p, r in rewards.items()},
                )
            )
        vertices.append(
            Vertex(
                id=vid,
                owner=str(_field(rv, "owner", where)),
                initial=parse_rational(_field(rv, "initial", where, "0"), f"{where}.initial"),
                actions=tuple(actions),
            )
        )
    return Game(players=tuple(players), leader=str(leader), lam=lam, vertices=tuple(vertices))


def parse_game(text: str) -> Game:
    """Parse and validate a JSON game document."""
    return game_from_dict(_load_json(text, "game"))


def game_to_dict(g: Game) -> dict:
    return {
        "players": list(g.players),
        "leader": g.leader,
        "lambda": format_rational(g.lam),
        "vertices": [
            {
                "id": v.id,
                "owner": v.owner,
                "initial": format_rational(v.initial),
                "actions": [
                    {
                        "id": a.id,
                        "target": a.target,
                        "rewards": {p: format_rational(a.rewards[p]) for p in g.players},
                    }
                    for a in v.actions
                ],
            }
            for v in g.vertices
        ],
    }


def render_game(g: Game) -> str:
    return json.dumps(game_to_dict(g), indent=2) + "\n"


def load_game(path) -> Game:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return parse_game(text)
    except GameFormatError as exc:
        raise GameFormatError(f"{path}: {exc}") from None


# -- plays ---------------------------------------------------------------------

@dataclass(frozen=True)
class Lasso:
    """Eventually periodic play: ``prefix`` once, then ``cycle`` forever.

    Steps are ``(vertex id, action id)`` pairs.
    """

    prefix: tuple[tuple[str, str], ...]
    cycle: tuple[tuple[str, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(tuple(s) for s in self.prefix))
        object.__setattr__(self, "cycle", tuple(tuple(s) for s in self.cycle))
        if not self.cycle:
            raise ValueError("lasso cycle must be non-empty")

    @property
    def steps(self) -> tuple[tuple[str, str], ...]:
        return self.prefix + self.cycle

    def vertices(self, n: int) -> list[str]:
        """First ``n`` vertices of the play."""
        out = []
        steps = self.steps
        k = len(self.prefix)
        for i in range(n):
            j = i if i < len(steps) else k + (i - k) % len(self.cycle)
            out.append(steps[j][0])
        return out

    def describe(self) -> str:
        head = "·".join(v for v, _ in self.prefix)
        cyc = "·".join(v for v, _ in self.cycle)
        cyc = f"({cyc})^ω" if len(self.cycle) > 1 else f"{cyc}^ω"
        return f"{head}·{cyc}" if head else cyc


def _lasso_rewards(g: Game, lasso: Lasso, p: str) -> tuple[list[Fraction], list[Fraction]]:
    if p not in g.player_index:
        raise KeyError(f"unknown player {p!r}")
    steps = lasso.steps
    for (v, a), (nv, _) in zip(steps, steps[1:] + steps[len(lasso.prefix):][:1]):
        if g.vertex(v).action(a).target != nv:
            raise ValueError(f"lasso does not chain: action {a!r} at {v!r} does not lead to {nv!r}")
    pre = [g.vertex(v).action(a).rewards[p] for v, a in lasso.prefix]
    cyc = [g.vertex(v).action(a).rewards[p] for v, a in lasso.cycle]
    return pre, cyc


def _discounted(rewards: Sequence[Fraction], lam: Fraction) -> Fraction:
    total = Fraction(0)
    for r in reversed(rewards):
        total = r + lam * total
    return total


def lasso_payoff(g: Game, lasso: Lasso, p: str) -> Fraction:
    """Exact discounted payoff of an eventually periodic play for player ``p``."""
    pre, cyc = _lasso_rewards(g, lasso, p)
    lam = g.lam
    cycle_value = _discounted(cyc, lam) / (1 - lam ** len(cyc))
    return _discounted(pre, lam) + lam ** len(pre) * cycle_value


def partial_sum(g: Game, lasso: Lasso, p: str, n: int) -> Fraction:
    """``sum_{i<n} t_p(v_i, a_i) lam**i`` along the play."""
    pre, cyc = _lasso_rewards(g, lasso, p)
    total = Fraction(0)
    w = Fraction(1)
    for i in range(n):
        r = pre[i] if i < len(pre) else cyc[(i - len(pre)) % len(cyc)]
        total += r * w
        w *= g.lam
    return total


def scale_game(g: Game, c) -> Game:
    """Multiply every reward by ``c > 0``."""
    c = Fraction(c)
    if c <= 0:
        raise ValueError("scale factor must be positive")
    vertices = tuple(
        Vertex(
            id=v.id,
            owner=v.owner,
            initial=v.initial,
            actions=tuple(
                Action(a.id, a.target, {p: r * c for p, r in a.rewards.items()}) for a in v.actions
            ),
        )
        for v in g.vertices
    )
    return Game(players=g.players, leader=g.leader, lam=g.lam, vertices=vertices)


# -- exact evaluation on functional graphs -----------------------------------

def evaluate_deterministic(
    succ: Sequence[int], reward: Sequence[Fraction], lam: Fraction, nodes: Iterable[int] | None = None
) -> dict[int, Fraction]:
    """Discounted values on a graph where every node has exactly one successor.

    ``succ[s]`` is the successor of ``s`` and ``reward[s]`` the reward paid
    when leaving it.  Only nodes reachable from ``nodes`` (default: all) are
    evaluated.  Each walk ends in a cycle, which is solved in closed form.
    """
    value: dict[int, Fraction] = {}
    for s0 in range(len(succ)) if nodes is None else nodes:
        if s0 in value:
            continue
        path: list[int] = []
        pos: dict[int, int] = {}
        s = s0
        while s not in value and s not in pos:
            pos[s] = len(path)
            path.append(s)
            s = succ[s]
        if s in pos:
            c = pos[s]
            cyc = path[c:]
            head = _discounted([reward[x] for x in cyc], lam) / (1 - lam ** len(cyc))
            value[cyc[0]] = head
            nxt = head
            for x in reversed(cyc[1:]):
                nxt = reward[x] + lam * nxt
                value[x] = nxt
            path = path[:c]
        for x in reversed(path):
            value[x] = reward[x] + lam * value[succ[x]]
    return value
