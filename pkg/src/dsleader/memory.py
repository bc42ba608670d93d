"""Compliance-memory profiles and the memory product game.

A :class:`Profile` with memory bound ``K`` maps ``(memory, vertex)`` to the
prescribed action and the next memory state.  The memory only moves along
compliant histories; after a deviation the punishment part takes over, and
that bookkeeping is not counted against ``K``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .game import (
    Action,
    Game,
    GameFormatError,
    Lasso,
    StateLabel,
    Vertex,
    _field,
    _load_json,
)

__all__ = [
    "Profile",
    "ProfileError",
    "parse_profile",
    "render_profile",
    "load_profile",
    "trace_play",
    "induced_play",
    "build_product",
    "product_vertex_id",
    "project_state",
    "embed_profile",
    "profile_to_product",
    "profile_from_product",
    "memoryless_profile",
    "restrict_to_reachable",
]


class ProfileError(ValueError):
    """The profile has no entry at a state the play (or check) needs."""


@dataclass(frozen=True)
class Profile:
    K: int
    table: Mapping[tuple[int, str], tuple[str, int]]

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("memory bound K must be positive")
        for (m, v), (a, nm) in self.table.items():
            if not (0 <= m < self.K and 0 <= nm < self.K):
                raise ValueError(f"entry ({m}, {v!r}) uses memory outside [0, {self.K})")

    def lookup(self, state: StateLabel) -> tuple[str, int]:
        try:
            return self.table[(state.memory, state.vertex)]
        except KeyError:
            raise ProfileError(f"profile undefined at vertex {state.vertex!r}, memory {state.memory}") from None

    def check_against(self, g: Game) -> None:
        for (m, v), (a, _) in self.table.items():
            if v not in g.vertex_index:
                raise GameFormatError(f"profile entry references unknown vertex {v!r}")
            if a not in {x.id for x in g.vertex(v).actions}:
                raise GameFormatError(f"profile entry at {v!r}: unknown action {a!r}")

    def entries(self) -> list[tuple[int, str, str, int]]:
        return [(m, v, a, nm) for (m, v), (a, nm) in sorted(self.table.items(), key=_entry_key)]


def _entry_key(item):
    (m, v), _ = item
    return (m, v)


def memoryless_profile(choice: Mapping[str, str]) -> Profile:
    """K=1 profile from a vertex -> action map."""
    return Profile(1, {(0, v): (a, 0) for v, a in choice.items()})


def parse_profile(text: str, g: Game | None = None) -> Profile:
    doc = _load_json(text, "profile")
    K = _field(doc, "K", "profile")
    if not isinstance(K, int) or isinstance(K, bool) or K < 1:
        raise GameFormatError("profile: 'K' must be a positive integer")
    raw = _field(doc, "entries", "profile")
    if not isinstance(raw, list):
        raise GameFormatError("profile: 'entries' must be a list")
    table = {}
    for i, e in enumerate(raw):
        where = f"entries[{i}]"
        m = _field(e, "memory", where)
        nm = _field(e, "next_memory", where)
        if not all(isinstance(x, int) and not isinstance(x, bool) and 0 <= x < K for x in (m, nm)):
            raise GameFormatError(f"{where}: memory ids must be integers in [0, {K})")
        key = (m, str(_field(e, "vertex", where)))
        if key in table:
            raise GameFormatError(f"{where}: duplicate entry for memory {m}, vertex {key[1]!r}")
        table[key] = (str(_field(e, "action", where)), nm)
    prof = Profile(K, table)
    if g is not None:
        prof.check_against(g)
    return prof


def render_profile(prof: Profile) -> str:
    doc = {
        "K": prof.K,
        "entries": [
            {"memory": m, "vertex": v, "action": a, "next_memory": nm} for m, v, a, nm in prof.entries()
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def load_profile(path, g: Game | None = None) -> Profile:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return parse_profile(text, g)
    except GameFormatError as exc:
        raise GameFormatError(f"{path}: {exc}") from None


def trace_play(g: Game, prof: Profile, start) -> tuple[list[StateLabel], list[str], int]:
    """Follow the profile from ``start`` until a product state repeats.

    Returns the visited states, the action taken at each, and the index
    where the cycle begins.
    """
    if isinstance(start, str):
        start = StateLabel(start, 0)
    states: list[StateLabel] = []
    actions: list[str] = []
    seen: dict[StateLabel, int] = {}
    s = StateLabel(*start)
    while s not in seen:
        seen[s] = len(states)
        a, nm = prof.lookup(s)
        states.append(s)
        actions.append(a)
        s = StateLabel(g.vertex(s.vertex).action(a).target, nm)
    return states, actions, seen[s]


def induced_play(g: Game, prof: Profile, start) -> Lasso:
    """The eventually periodic play a profile produces from ``start``."""
    states, actions, c = trace_play(g, prof, start)
    steps = [(s.vertex, a) for s, a in zip(states, actions)]
    return Lasso(prefix=tuple(steps[:c]), cycle=tuple(steps[c:]))


# -- product game ----------------------------------------------------------------

def product_vertex_id(vertex: str, memory: int) -> str:
    return f"{vertex}@{memory}"


def project_state(vid: str, K: int) -> StateLabel:
    """Inverse of :func:`product_vertex_id`."""
    vertex, sep, mem = vid.rpartition("@")
    if not sep or not mem.isdigit():
        raise ValueError(f"{vid!r} is not a product state id")
    m = int(mem)
    if m >= K:
        raise ValueError(f"state {vid!r} lies outside memory bound {K}")
    return StateLabel(vertex, m)


def _product_action_id(action: str, next_memory: int) -> str:
    return f"{action}>{next_memory}"


def build_product(g: Game, K: int) -> Game:
    """Game on ``V x {0..K-1}``; positional profiles there are K-memory profiles of ``g``.

    Each base action fans out into ``K`` product actions, one per choice of
    next memory state.  Start weight sits on memory 0 only.
    """
    if K < 1:
        raise ValueError("memory bound K must be positive")
    vertices = []
    for m in range(K):
        for v in g.vertices:
            actions = tuple(
                Action(_product_action_id(a.id, nm), product_vertex_id(a.target, nm), dict(a.rewards))
                for a in v.actions
                for nm in range(K)
            )
            vertices.append(
                Vertex(
                    id=product_vertex_id(v.id, m),
                    owner=v.owner,
                    initial=v.initial if m == 0 else Fraction(0),
                    actions=actions,
                )
            )
    return Game(players=g.players, leader=g.leader, lam=g.lam, vertices=tuple(vertices))


def profile_to_product(prof: Profile) -> Profile:
    """The K-memory profile as a positional (K=1) profile on the product game."""
    return memoryless_profile(
        {product_vertex_id(v, m): _product_action_id(a, nm) for (m, v), (a, nm) in prof.table.items()}
    )


def profile_from_product(positional: Profile, K: int) -> Profile:
    if positional.K != 1:
        raise ValueError("expected a positional profile on the product game")
    table = {}
    for (_, vid), (pa, _) in positional.table.items():
        s = project_state(vid, K)
        a, _, nm = pa.rpartition(">")
        table[(s.memory, s.vertex)] = (a, int(nm))
    return Profile(K, table)


def embed_profile(prof: Profile, K: int) -> Profile:
    """The same strategy viewed under a larger memory bound (extra states unused)."""
    if K < prof.K:
        raise ValueError("cannot embed into a smaller memory bound")
    return Profile(K, dict(prof.table))


def restrict_to_reachable(g: Game, prof: Profile) -> Profile:
    """Drop entries no start state at memory 0 can reach."""
    keep = {}
    for v in g.initial_vertices:
        states, actions, _ = trace_play(g, prof, StateLabel(v.id, 0))
        for s in states:
            keep[(s.memory, s.vertex)] = prof.table[(s.memory, s.vertex)]
    return Profile(prof.K, keep)
