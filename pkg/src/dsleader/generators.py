"""Example games: the figure games, the 3-SAT reduction, and random games."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .game import Action, Game, Vertex

__all__ = [
    "FIGURES",
    "CnfFormula",
    "gen_figure",
    "gen_3sat",
    "gen_random",
    "parse_dimacs",
    "brute_force_sat",
]


def _v(id, owner, actions, initial=0):
    return Vertex(id=id, owner=owner, initial=Fraction(initial), actions=tuple(actions))


def _a(id, target, players, rewards=None):
    rewards = rewards or [0] * len(players)
    return Action(id, target, {p: Fraction(r) for p, r in zip(players, rewards)})


def _fig1() -> Game:
    # Leader "L" owns only the sinks and is paid nothing.
    P = ("1", "2", "3", "L")
    third = Fraction(1, 3)
    return Game(
        players=P,
        leader="L",
        lam=Fraction(1, 2),
        vertices=(
            _v("1", "1", [_a("next", "2", P), _a("exit", "s1", P, (2, 1, 9, 0))], third),
            _v("2", "2", [_a("next", "3", P), _a("exit", "s2", P, (9, 2, 1, 0))], third),
            _v("3", "3", [_a("next", "1", P), _a("exit", "s3", P, (1, 9, 2, 0))], third),
            _v("s1", "L", [_a("loop", "s1", P)]),
            _v("s2", "L", [_a("loop", "s2", P)]),
            _v("s3", "L", [_a("loop", "s3", P)]),
        ),
    )


def _fig2() -> Game:
    P = ("1", "2", "3")
    return Game(
        players=P,
        leader="2",
        lam=Fraction(1, 2),
        vertices=(
            _v("1", "1", [_a("go", "2", P), _a("stay", "1", P)], 1),
            _v("2", "2", [_a("exit", "3", P, (-3, 3, 0)), _a("stay", "2", P, (1, 1, -2))]),
            _v("3", "3", [_a("stay", "3", P, (-3, 3, 0))]),
        ),
    )


def _fig3(epsilon) -> Game:
    eps = Fraction(epsilon)
    if not (0 < eps < 1):
        raise ValueError("epsilon must lie strictly between 0 and 1")
    P = ("1", "2")
    return Game(
        players=P,
        leader="2",
        lam=Fraction(1, 2),
        vertices=(
            _v("1", "1", [_a("go", "2", P), _a("side", "4", P)], 1),
            _v("2", "2", [_a("exit", "3", P), _a("stay", "2", P, (1, 0))]),
            _v("3", "1", [_a("stay", "3", P, (0, 50))]),
            _v("4", "1", [_a("stay", "4", P, (1 - eps, 0))]),
        ),
    )


def _fig4() -> Game:
    P = ("1", "2")
    return Game(
        players=P,
        leader="2",
        lam=Fraction(2, 3),
        vertices=(
            _v("1", "1", [_a("go", "2", P, (1, 0)), _a("quit", "3", P)], 1),
            _v("2", "2", [_a("pay", "2", P, (-1, 1)), _a("idle", "2", P)]),
            _v("3", "1", [_a("stay", "3", P)]),
        ),
    )


def _fig5() -> Game:
    P = ("1", "2", "3")
    return Game(
        players=P,
        leader="3",
        lam=Fraction(2, 3),
        vertices=(
            _v("1", "1", [_a("go", "2", P), _a("quit", "t1", P)], 1),
            _v("2", "2", [_a("go", "3", P, (-1, -1, 1)), _a("quit", "t2", P)]),
            _v("3", "3", [_a("left", "3", P, (1, 0, 1)), _a("right", "3", P, (0, 1, 1))]),
            _v("t1", "1", [_a("stay", "t1", P)]),
            _v("t2", "2", [_a("stay", "t2", P)]),
        ),
    )


FIGURES = ("fig1", "fig2", "fig3", "fig4", "fig5")


def gen_figure(name: str, epsilon=Fraction(1, 4)) -> Game:
    """One of the five example games; ``epsilon`` only affects ``fig3``."""
    builders = {"fig1": _fig1, "fig2": _fig2, "fig3": lambda: _fig3(epsilon), "fig4": _fig4, "fig5": _fig5}
    try:
        return builders[name]()
    except KeyError:
        raise ValueError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}") from None


# -- 3-SAT ---------------------------------------------------------------------

@dataclass(frozen=True)
class CnfFormula:
    """CNF over variables 1..n; literal ``+i`` / ``-i`` as in DIMACS."""

    n: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        for c in self.clauses:
            if not c:
                raise ValueError("empty clause")
            if len(c) > 3:
                raise ValueError(f"clause {c} has more than 3 literals")
            for lit in c:
                if lit == 0 or abs(lit) > self.n:
                    raise ValueError(f"literal {lit} outside variables 1..{self.n}")

    def evaluate(self, assignment: Sequence[bool]) -> bool:
        return all(any(assignment[abs(l) - 1] == (l > 0) for l in c) for c in self.clauses)


def brute_force_sat(f: CnfFormula) -> bool:
    """Truth-table satisfiability."""
    for bits in range(2 ** f.n):
        if f.evaluate([bool(bits >> i & 1) for i in range(f.n)]):
            return True
    return False


def parse_dimacs(text: str) -> CnfFormula:
    n = None
    clauses: list[list[int]] = []
    current: list[int] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {lineno}: bad problem line {line!r}")
            n = int(parts[2])
            continue
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ValueError(f"line {lineno}: bad literal {tok!r}") from None
            if lit == 0:
                clauses.append(current)
                current = []
            else:
                current.append(lit)
    if current:
        clauses.append(current)
    if n is None:
        n = max((abs(l) for c in clauses for l in c), default=0)
    return CnfFormula(n, tuple(tuple(c) for c in clauses))


def _lit_player(lit: int) -> str:
    return f"x{lit}" if lit > 0 else f"~x{-lit}"


def gen_3sat(f: CnfFormula, lam=Fraction(1, 2)) -> Game:
    """Leader game whose optimal leader value is 0 iff ``f`` is satisfiable.

    Layout: ``Ls`` starts the play and picks a literal of clause 1; the
    vertex of literal ``l`` in clause ``i`` either continues to the leader
    node ``L{i}`` (paying -1 to the player of the complementary literal)
    or drops into ``abs``, whose self-loop costs the leader 1 per step.
    ``L{i}`` picks a literal of clause ``i+1``; the last one wraps around to
    clause 1.
    """
    lam = Fraction(lam)
    players = tuple(_lit_player(s * i) for i in range(1, f.n + 1) for s in (1, -1)) + ("L",)

    def pay(who: str | None, amount: int = -1) -> dict[str, Fraction]:
        return {p: Fraction(amount if p == who else 0) for p in players}

    m = len(f.clauses)

    def lit_id(i: int, k: int) -> str:
        return f"c{i + 1}.{k + 1}"

    def enter(i: int) -> list[Action]:
        return [Action(f"pick{k + 1}", lit_id(i, k), pay(None)) for k in range(len(f.clauses[i]))]

    vertices = [Vertex("Ls", "L", tuple(enter(0)), Fraction(1))]
    for i, clause in enumerate(f.clauses):
        for k, lit in enumerate(clause):
            vertices.append(
                Vertex(
                    lit_id(i, k),
                    _lit_player(lit),
                    (
                        Action("next", f"L{i + 1}", pay(_lit_player(-lit))),
                        Action("abs", "abs", pay(None)),
                    ),
                )
            )
        vertices.append(Vertex(f"L{i + 1}", "L", tuple(enter((i + 1) % m))))
    vertices.append(Vertex("abs", "L", (Action("loop", "abs", pay("L")),)))
    return Game(players=players, leader="L", lam=lam, vertices=tuple(vertices))


# -- random games ------------------------------------------------------------------

_RANDOM_LAMBDAS = (Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(3, 4))


def gen_random(
    n_vertices: int,
    max_actions: int,
    n_players: int,
    reward_range: tuple[int, int] = (-3, 3),
    seed: int = 0,
    lam=None,
) -> Game:
    """Seeded random game with integer rewards; one or two start vertices."""
    if n_vertices < 1 or max_actions < 1 or n_players < 1:
        raise ValueError("sizes must be positive")
    lo, hi = reward_range
    rng = random.Random(seed)
    players = tuple(f"p{i + 1}" for i in range(n_players))
    leader = rng.choice(players)
    lam = Fraction(lam) if lam is not None else rng.choice(_RANDOM_LAMBDAS)
    ids = [str(i) for i in range(n_vertices)]
    starts = rng.sample(ids, min(n_vertices, rng.choice((1, 1, 2))))
    vertices = []
    for vid in ids:
        k = rng.randint(1, max_actions)
        actions = tuple(
            Action(f"a{j}", rng.choice(ids), {p: Fraction(rng.randint(lo, hi)) for p in players})
            for j in range(k)
        )
        vertices.append(
            Vertex(
                vid,
                rng.choice(players),
                actions,
                Fraction(1, len(starts)) if vid in starts else Fraction(0),
            )
        )
    return Game(players=players, leader=leader, lam=lam, vertices=tuple(vertices))


def all_small_formulas(n: int = 3, max_clauses: int = 3) -> Iterable[CnfFormula]:
    """Every multiset of 1..``max_clauses`` clauses of 1-3 literals over distinct variables."""
    from itertools import combinations, combinations_with_replacement, product

    clauses = []
    for size in (1, 2, 3):
        for vars_ in combinations(range(1, n + 1), size):
            for signs in product((1, -1), repeat=size):
                clauses.append(tuple(s * v for s, v in zip(signs, vars_)))
    for m in range(1, max_clauses + 1):
        for combo in combinations_with_replacement(clauses, m):
            used = max(abs(l) for c in combo for l in c)
            yield CnfFormula(used, combo)
