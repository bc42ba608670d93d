from fractions import Fraction as F
from itertools import product

import pytest

from dsleader.game import Lasso, lasso_payoff
from dsleader.generators import gen_figure


@pytest.fixture
def fig1():
    return gen_figure("fig1")


@pytest.fixture
def fig2():
    return gen_figure("fig2")


@pytest.fixture
def fig3():
    return gen_figure("fig3", F(1, 4))


@pytest.fixture
def fig4():
    return gen_figure("fig4")


@pytest.fixture
def fig5():
    return gen_figure("fig5")


def all_figures():
    return {name: gen_figure(name) for name in ("fig1", "fig2", "fig3", "fig4", "fig5")}


def positional_play(g, choice, start):
    """Lasso of a positional choice map, found by plain simulation."""
    steps, seen = [], {}
    v = start
    while v not in seen:
        seen[v] = len(steps)
        steps.append((v, choice[v]))
        v = g.vertex(v).action(choice[v]).target
    c = seen[v]
    return Lasso(prefix=tuple(steps[:c]), cycle=tuple(steps[c:]))


def all_positional(g, vertices=None):
    """Every positional choice map over ``vertices`` (default: all)."""
    vs = [v for v in g.vertices if vertices is None or v.id in vertices]
    for combo in product(*[[a.id for a in v.actions] for v in vs]):
        yield dict(zip([v.id for v in vs], combo))


def maxmin_by_enumeration(g, p):
    """Two-player value for ``p`` at every vertex: max over her positional
    policies of min over the coalition's positional policies."""
    mine = {v.id for v in g.vertices if v.owner == p}
    theirs = {v.id for v in g.vertices if v.owner != p}
    out = {}
    for v in g.vertices:
        best = None
        for s in all_positional(g, mine):
            worst = None
            for t in all_positional(g, theirs):
                val = lasso_payoff(g, positional_play(g, {**s, **t}, v.id), p)
                worst = val if worst is None else min(worst, val)
            best = worst if best is None else max(best, worst)
        out[v.id] = best
    return out
