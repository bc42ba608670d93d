"""SMT-LIB 2 encoding of the bounded-memory threshold problem.

One product state ``(v, m)`` per vertex and memory id.  Its integer
choice variable ``c`` selects an action and a next memory id
(``c = action * K + next_memory``).  Per player, a real ``e`` holds the
tail payoff, tied to the chosen successor by the one-step recurrence.
Boolean ``r`` over-approximates reachability from the start states.  The
punishment inequalities apply only where ``r`` holds.
"""

from __future__ import annotations

from fractions import Fraction

from .game import Game
from .punish import PunishTable, punishment_values
from .verify import check_mode

__all__ = ["smt_rational", "export_constraints"]


def smt_rational(x) -> str:
    x = Fraction(x)
    mag = str(abs(x.numerator)) if x.denominator == 1 else f"(/ {abs(x.numerator)} {x.denominator})"
    return f"(- {mag})" if x < 0 else mag


def export_constraints(g: Game, K: int, mode: str, t, table: PunishTable | None = None) -> str:
    check_mode(mode)
    if K < 1:
        raise ValueError("memory bound K must be positive")
    table = table or punishment_values(g)
    t = Fraction(t)
    n = len(g.vertices)
    players = g.players
    lam = smt_rational(g.lam)

    def st(v: int, m: int) -> str:
        return f"{v}_{m}"

    out = [
        "; reward-and-punish profile with bounded compliance memory",
        f"; mode={mode} memory={K} threshold={smt_rational(t)} lambda={lam}",
        "(set-logic QF_LIRA)",
    ]
    for i, v in enumerate(g.vertices):
        out.append(f"; vertex {i} = {v.id!r} owner {v.owner!r}")
    for j, p in enumerate(players):
        out.append(f"; player {j} = {p!r}{' (leader)' if p == g.leader else ''}")

    for m in range(K):
        for i, v in enumerate(g.vertices):
            s = st(i, m)
            out.append(f"(declare-const c_{s} Int)")
            out.append(f"(declare-const r_{s} Bool)")
            for j in range(len(players)):
                out.append(f"(declare-const e{j}_{s} Real)")
    for m in range(K):
        for i, v in enumerate(g.vertices):
            s = st(i, m)
            out.append(f"(assert (and (<= 0 c_{s}) (< c_{s} {len(v.actions) * K})))")
            for ai, a in enumerate(v.actions):
                ti = g.vertex_index[a.target]
                for nm in range(K):
                    ns = st(ti, nm)
                    eqs = " ".join(
                        f"(= e{j}_{s} (+ {smt_rational(a.rewards[p])} (* {lam} e{j}_{ns})))"
                        for j, p in enumerate(players)
                    )
                    out.append(f"(assert (=> (= c_{s} {ai * K + nm}) (and {eqs} (=> r_{s} r_{ns}))))")
            if mode == "nash" or v.owner != g.leader:
                j = players.index(v.owner)
                out.append(f"(assert (=> r_{s} (>= e{j}_{s} {smt_rational(table(v.owner, v.id))})))")
    li = players.index(g.leader)
    terms = []
    for i, v in enumerate(g.vertices):
        if v.initial > 0:
            out.append(f"(assert r_{st(i, 0)})")
            terms.append(f"(* {smt_rational(v.initial)} e{li}_{st(i, 0)})")
    objective = terms[0] if len(terms) == 1 else f"(+ {' '.join(terms)})"
    out.append(f"(assert (>= {objective} {smt_rational(t)}))")
    out.append("(check-sat)")
    return "\n".join(out) + "\n"
