"""Punishment values and best responses.

``punishment_values`` solves, for every player ``p``, the two-player
zero-sum discounted game in which ``p`` maximises her own payoff and all
other players jointly minimise it.  Both sides have optimal positional
strategies, so strategy iteration with exact policy evaluation terminates
with the exact rational value; no convergence tolerance is involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .game import Game, StateLabel, evaluate_deterministic
from .memory import Profile, ProfileError, trace_play
from .game import lasso_payoff
from .memory import induced_play

__all__ = [
    "PunishTable",
    "BestResponseReport",
    "punishment_values",
    "bellman_residual",
    "best_response_value",
]

Choice = tuple[int, Fraction]


def _evaluate(choices: Sequence[Sequence[Choice]], policy: Sequence[int], lam: Fraction) -> dict[int, Fraction]:
    succ = [choices[s][policy[s]][0] for s in range(len(choices))]
    reward = [choices[s][policy[s]][1] for s in range(len(choices))]
    return evaluate_deterministic(succ, reward, lam)


def _policy_iteration(
    choices: Sequence[Sequence[Choice]],
    controlled: Sequence[bool],
    maximize: bool,
    policy: list[int],
    lam: Fraction,
) -> tuple[dict[int, Fraction], list[int]]:
    """Optimise the controlled states against the fixed remainder of ``policy``.

    Switches only on strict improvement and then to the first optimal
    action in canonical order, so the result is deterministic.
    """
    policy = list(policy)
    sign = 1 if maximize else -1
    while True:
        val = _evaluate(choices, policy, lam)
        changed = False
        for s, opts in enumerate(choices):
            if not controlled[s] or len(opts) == 1:
                continue
            q = [sign * (r + lam * val[t]) for t, r in opts]
            best = max(q)
            if best > q[policy[s]]:
                policy[s] = q.index(best)
                changed = True
        if not changed:
            return val, policy


def _solve_zero_sum(
    choices: Sequence[Sequence[Choice]], maxer: Sequence[bool], lam: Fraction
) -> tuple[dict[int, Fraction], list[int]]:
    n = len(choices)
    policy = [0] * n
    miner = [not x for x in maxer]
    while True:
        val, policy = _policy_iteration(choices, miner, False, policy, lam)
        changed = False
        for s in range(n):
            if not maxer[s] or len(choices[s]) == 1:
                continue
            q = [r + lam * val[t] for t, r in choices[s]]
            best = max(q)
            if best > q[policy[s]]:
                policy[s] = q.index(best)
                changed = True
        if not changed:
            return val, policy


@dataclass(frozen=True)
class PunishTable:
    """``values[p][v]``: what ``p`` can guarantee from ``v`` against everyone else.

    ``policy[p][v]`` is the optimal positional action at ``v`` in that
    two-player game: ``p``'s own choice at her vertices, the coalition's
    punishing choice elsewhere.
    """

    values: dict[str, dict[str, Fraction]]
    policy: dict[str, dict[str, str]]

    def __call__(self, p: str, v: str) -> Fraction:
        return self.values[p][v]


def _player_game(g: Game, pi: int) -> list[list[Choice]]:
    cg = g.compiled
    return [[(t, rw[pi]) for t, rw in cg.succ[v]] for v in range(cg.n)]


def punishment_values(g: Game) -> PunishTable:
    cg = g.compiled
    values, policy = {}, {}
    for pi, p in enumerate(g.players):
        maxer = [cg.owner[v] == pi for v in range(cg.n)]
        val, pol = _solve_zero_sum(_player_game(g, pi), maxer, g.lam)
        values[p] = {v.id: val[i] for i, v in enumerate(g.vertices)}
        policy[p] = {v.id: v.actions[pol[i]].id for i, v in enumerate(g.vertices)}
    return PunishTable(values, policy)


def bellman_residual(g: Game, table: PunishTable) -> Fraction:
    """Largest absolute violation of the max/min optimality equations (exactly 0 when solved)."""
    worst = Fraction(0)
    for p in g.players:
        r = table.values[p]
        for v in g.vertices:
            q = [a.rewards[p] + g.lam * r[a.target] for a in v.actions]
            best = max(q) if v.owner == p else min(q)
            worst = max(worst, abs(best - r[v.id]))
    return worst


@dataclass(frozen=True)
class BestResponseReport:
    player: str
    values: dict[str, Fraction]
    on_path: dict[str, Fraction]
    policy: dict[StateLabel, str]
    weighted_value: Fraction
    weighted_on_path: Fraction

    @property
    def profitable(self) -> bool:
        return self.weighted_value > self.weighted_on_path


def best_response_value(g: Game, prof: Profile, p: str) -> BestResponseReport:
    """Optimal payoff of ``p`` when every other player keeps following ``prof``.

    The frozen players keep updating their memory along the observed play:
    a compliant step moves memory as prescribed, a step by ``p`` that
    differs from the prescription leaves memory unchanged.
    """
    if p not in g.player_index:
        raise KeyError(f"unknown player {p!r}")
    K = prof.K
    starts = [StateLabel(v.id, 0) for v in g.initial_vertices]

    def options(s: StateLabel) -> list[tuple[str, StateLabel, Fraction]]:
        vert = g.vertex(s.vertex)
        entry = prof.table.get((s.memory, s.vertex))
        if vert.owner != p:
            if entry is None:
                raise ProfileError(f"profile undefined at vertex {s.vertex!r}, memory {s.memory}")
            a = vert.action(entry[0])
            return [(a.id, StateLabel(a.target, entry[1]), a.rewards[p])]
        out = []
        for a in vert.actions:
            nm = entry[1] if entry is not None and entry[0] == a.id else s.memory
            out.append((a.id, StateLabel(a.target, nm), a.rewards[p]))
        return out

    index: dict[StateLabel, int] = {}
    states: list[StateLabel] = []
    opts: list[list[tuple[str, StateLabel, Fraction]]] = []
    stack = list(starts)
    while stack:
        s = stack.pop()
        if s in index:
            continue
        index[s] = len(states)
        states.append(s)
        o = options(s)
        opts.append(o)
        stack.extend(t for _, t, _ in o if t not in index)

    choices = [[(index[t], r) for _, t, r in o] for o in opts]
    controlled = [g.vertex(s.vertex).owner == p for s in states]
    init = []
    for s, o in zip(states, opts):
        entry = prof.table.get((s.memory, s.vertex))
        ids = [a for a, _, _ in o]
        init.append(ids.index(entry[0]) if entry is not None and entry[0] in ids else 0)
    val, pol = _policy_iteration(choices, controlled, True, init, g.lam)

    values = {s.vertex: val[index[s]] for s in starts}
    on_path = {s.vertex: lasso_payoff(g, induced_play(g, prof, s), p) for s in starts}
    policy = {s: opts[i][pol[i]][0] for i, s in enumerate(states) if controlled[i]}
    weight = {v.id: v.initial for v in g.initial_vertices}
    return BestResponseReport(
        player=p,
        values=values,
        on_path=on_path,
        policy=policy,
        weighted_value=sum((weight[v] * x for v, x in values.items()), Fraction(0)),
        weighted_on_path=sum((weight[v] * x for v, x in on_path.items()), Fraction(0)),
    )
