"""Reward-and-punish checks for bounded-memory profiles.

A play is the outcome of a Nash (leader) reward-and-punish profile iff at
every position the owner of the current vertex (every owner but the
leader, in leader mode) gets at least her punishment value from the
remainder of the play.  Plays of pure bounded-memory profiles are lassos,
so only finitely many positions need checking.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .game import Game, Lasso, StateLabel, evaluate_deterministic
from .memory import Profile, trace_play
from .punish import PunishTable, best_response_value, punishment_values

__all__ = [
    "MODES",
    "PositionCheck",
    "VerifyReport",
    "ClassicReport",
    "check_mode",
    "tail_values",
    "rp_check",
    "classic_nash_check",
]

MODES = ("nash", "leader")


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


def tail_values(g: Game, prof: Profile) -> dict[tuple[StateLabel, str], Fraction]:
    """Payoff of the rest of the play from every reachable product state."""
    index: dict[StateLabel, int] = {}
    succ: list[int] = []
    rewards: list[tuple[Fraction, ...]] = []
    pending: list[StateLabel | None] = []
    for v in g.initial_vertices:
        states, actions, c = trace_play(g, prof, StateLabel(v.id, 0))
        nxt = states[1:] + [states[c]]
        for s, a, t in zip(states, actions, nxt):
            if s in index:
                continue
            index[s] = len(succ)
            succ.append(-1)
            pending.append(t)
            act = g.vertex(s.vertex).action(a)
            rewards.append(tuple(act.rewards[p] for p in g.players))
    for i, t in enumerate(pending):
        succ[i] = index[t]
    out = {}
    for pi, p in enumerate(g.players):
        val = evaluate_deterministic(succ, [r[pi] for r in rewards], g.lam)
        for s, i in index.items():
            out[(s, p)] = val[i]
    return out


@dataclass(frozen=True)
class PositionCheck:
    start: str
    index: int
    state: StateLabel
    owner: str
    tail: Fraction
    punishment: Fraction
    constrained: bool

    @property
    def ok(self) -> bool:
        return not self.constrained or self.tail >= self.punishment


@dataclass
class VerifyReport:
    mode: str
    plays: dict[str, Lasso]
    start_payoffs: dict[str, dict[str, Fraction]]
    payoffs: dict[str, Fraction]
    positions: list[PositionCheck] = field(default_factory=list)

    @property
    def violations(self) -> list[PositionCheck]:
        return [c for c in self.positions if not c.ok]

    @property
    def passed(self) -> bool:
        return not self.violations


def rp_check(g: Game, prof: Profile, mode: str, table: PunishTable | None = None) -> VerifyReport:
    """Check the tail conditions at every position of every induced play."""
    check_mode(mode)
    table = table or punishment_values(g)
    tails = tail_values(g, prof)
    report = VerifyReport(mode=mode, plays={}, start_payoffs={}, payoffs={p: Fraction(0) for p in g.players})
    for v in g.initial_vertices:
        start = StateLabel(v.id, 0)
        states, actions, c = trace_play(g, prof, start)
        report.plays[v.id] = Lasso(
            prefix=tuple((s.vertex, a) for s, a in zip(states[:c], actions[:c])),
            cycle=tuple((s.vertex, a) for s, a in zip(states[c:], actions[c:])),
        )
        report.start_payoffs[v.id] = {p: tails[(start, p)] for p in g.players}
        for p in g.players:
            report.payoffs[p] += v.initial * tails[(start, p)]
        for j, s in enumerate(states):
            owner = g.vertex(s.vertex).owner
            report.positions.append(
                PositionCheck(
                    start=v.id,
                    index=j,
                    state=s,
                    owner=owner,
                    tail=tails[(s, owner)],
                    punishment=table(owner, s.vertex),
                    constrained=(mode == "nash" or owner != g.leader),
                )
            )
    return report


@dataclass(frozen=True)
class ClassicReport:
    passed: bool
    on_path: dict[str, Fraction]
    best: dict[str, Fraction]

    @property
    def profitable(self) -> list[str]:
        return [p for p in self.on_path if self.best[p] > self.on_path[p]]


def classic_nash_check(g: Game, prof: Profile) -> ClassicReport:
    """Nash check against the profile itself, with no retaliation after a deviation."""
    on_path, best = {}, {}
    for p in g.players:
        br = best_response_value(g, prof, p)
        on_path[p] = br.weighted_on_path
        best[p] = br.weighted_value
    return ClassicReport(passed=all(best[p] <= on_path[p] for p in g.players), on_path=on_path, best=best)
