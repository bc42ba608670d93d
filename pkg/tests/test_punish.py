from fractions import Fraction as F

import pytest

from dsleader.game import Action, Game, Vertex
from dsleader.generators import gen_figure, gen_random
from dsleader.memory import memoryless_profile
from dsleader.punish import bellman_residual, best_response_value, punishment_values

from conftest import all_figures, maxmin_by_enumeration


def test_fig2_player1_is_held_to_zero(fig2):
    assert maxmin_by_enumeration(fig2, "1")["1"] == 0
    assert punishment_values(fig2)("1", "1") == 0


def test_fig4_player1_at_vertex2(fig4):
    # only the two leader loops matter: -1/(1 - 2/3)
    assert maxmin_by_enumeration(fig4, "1")["2"] == -3
    assert punishment_values(fig4)("1", "2") == -3


def test_zero_game():
    g = gen_random(3, 2, 2, (0, 0), seed=5)
    t = punishment_values(g)
    assert all(x == 0 for row in t.values.values() for x in row.values())


@pytest.mark.parametrize("name", ["fig1", "fig2", "fig3", "fig4", "fig5"])
def test_matches_enumeration_and_bellman(name):
    g = gen_figure(name)
    t = punishment_values(g)
    assert bellman_residual(g, t) == 0
    for p in g.players:
        assert t.values[p] == maxmin_by_enumeration(g, p)


@pytest.mark.parametrize("seed", range(15))
def test_random_games_match_enumeration(seed):
    g = gen_random(4, 2, 3, seed=seed)
    t = punishment_values(g)
    assert bellman_residual(g, t) == 0
    for p in g.players:
        assert t.values[p] == maxmin_by_enumeration(g, p)


def _reversed_actions(g):
    return Game(
        g.players,
        g.leader,
        g.lam,
        tuple(Vertex(v.id, v.owner, tuple(reversed(v.actions)), v.initial) for v in g.vertices),
    )


@pytest.mark.parametrize("seed", range(10))
def test_value_independent_of_starting_policy(seed):
    g = gen_random(4, 3, 2, seed=seed)
    assert punishment_values(g).values == punishment_values(_reversed_actions(g)).values


@pytest.mark.parametrize("seed", range(10))
def test_zero_sum_antisymmetry(seed):
    base = gen_random(4, 2, 2, seed=seed)
    a, b = base.players
    zs = Game(
        base.players,
        base.leader,
        base.lam,
        tuple(
            Vertex(
                v.id,
                v.owner,
                tuple(Action(x.id, x.target, {a: x.rewards[a], b: -x.rewards[a]}) for x in v.actions),
                v.initial,
            )
            for v in base.vertices
        ),
    )
    t = punishment_values(zs)
    for v in zs.vertices:
        assert t(a, v.id) == -t(b, v.id)


def test_fig1_clockwise_is_not_nash(fig1):
    prof = memoryless_profile({"1": "next", "2": "next", "3": "next", "s1": "loop", "s2": "loop", "s3": "loop"})
    br = best_response_value(fig1, prof, "1")
    assert br.weighted_on_path == 0
    assert br.profitable
    assert br.policy[("1", 0)] == "exit"
    # exit at once from 1, after one step from 3, after two from 2
    assert br.values == {"1": 2, "2": F(1, 2), "3": 1}


def test_zero_game_has_no_profitable_deviation():
    g = gen_random(3, 2, 2, (0, 0), seed=1)
    prof = memoryless_profile({v.id: v.actions[0].id for v in g.vertices})
    for p in g.players:
        br = best_response_value(g, prof, p)
        assert br.weighted_value == 0 and not br.profitable


def test_fig2_exit_immediately_is_nash(fig2):
    prof = memoryless_profile({"1": "stay", "2": "exit", "3": "stay"})
    for p in fig2.players:
        br = best_response_value(fig2, prof, p)
        assert br.weighted_value == br.weighted_on_path
    assert best_response_value(fig2, prof, "2").weighted_on_path == 0


@pytest.mark.parametrize("seed", range(10))
def test_best_response_dominates_compliance(seed):
    g = gen_random(4, 2, 3, seed=seed)
    prof = memoryless_profile({v.id: v.actions[-1].id for v in g.vertices})
    for p in g.players:
        br = best_response_value(g, prof, p)
        for v, x in br.values.items():
            assert x >= br.on_path[v]
