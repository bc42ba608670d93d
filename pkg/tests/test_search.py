from fractions import Fraction as F

import pytest

from conftest import all_figures
from dsleader.game import scale_game
from dsleader.generators import gen_figure, gen_random
from dsleader.memory import induced_play
from dsleader.search import (
    OracleTooLarge,
    brute_force_oracle,
    decide_threshold,
    fallback_profile,
    solve_optimal,
)
from dsleader.punish import punishment_values
from dsleader.verify import rp_check

EXPECTED = {
    # (figure, mode): values for K = 1..4
    ("fig1", "leader"): [0, 0, 0, 0],
    ("fig1", "nash"): [0, 0, 0, 0],
    ("fig2", "leader"): [1, 1, F(3, 2), F(3, 2)],
    ("fig2", "nash"): [0, 0, 0, 0],
    ("fig3", "leader"): [0, 0, F(25, 4), F(25, 4)],
    ("fig3", "nash"): [0, 0, 0, 0],
    ("fig4", "leader"): [0, F(4, 5), F(18, 19), F(44, 45)],
    ("fig4", "nash"): [0, 0, 0, 0],
    ("fig5", "leader"): [0, 0, 0, 0],
    ("fig5", "nash"): [0, 0, 0, 0],
}


@pytest.mark.parametrize("key", sorted(EXPECTED))
def test_figure_values(key):
    name, mode = key
    g = gen_figure(name)
    for K, want in enumerate(EXPECTED[key], 1):
        r = solve_optimal(g, K, mode)
        assert r.value == want, (name, mode, K)
        report = rp_check(g, r.witness, mode)
        assert report.passed and report.payoffs[g.leader] == want


def test_fig2_witness(fig2):
    r = solve_optimal(fig2, 3, "leader")
    assert induced_play(fig2, r.witness, "1").describe() == "1·2·2·2·3^ω"
    assert rp_check(fig2, r.witness, "leader").payoffs == {"1": 0, "2": F(3, 2), "3": F(-3, 2)}
    assert induced_play(fig2, solve_optimal(fig2, 1, "leader").witness, "1").describe() == "1·2^ω"
    assert induced_play(fig2, solve_optimal(fig2, 2, "nash").witness, "1").describe() == "1^ω"


def test_fig4_values_stay_below_one(fig4):
    vals = [solve_optimal(fig4, K, "leader").value for K in (1, 2, 3)]
    assert vals == sorted(set(vals)) and vals[-1] < 1


def test_threshold(fig2):
    assert decide_threshold(fig2, 3, "leader", F(3, 2)).satisfied
    no = decide_threshold(fig2, 3, "leader", 2)
    assert not no.satisfied and no.witness is None
    yes = decide_threshold(fig2, 2, "leader", 1)
    assert yes.satisfied and rp_check(fig2, yes.witness, "leader").payoffs["2"] >= 1
    floor = -fig2.max_abs_reward / (1 - fig2.lam)
    assert decide_threshold(fig2, 1, "nash", floor).satisfied


def test_fallback_profile_always_passes():
    for g in list(all_figures().values()) + [gen_random(5, 3, 3, seed=s) for s in range(10)]:
        table = punishment_values(g)
        prof = fallback_profile(g, table)
        assert rp_check(g, prof, "nash", table).passed


@pytest.mark.parametrize("seed", range(12))
def test_oracle_equivalence(seed):
    g = gen_random(4, 2, 2 + seed % 2, seed=seed)
    for K in (1, 2):
        for mode in ("nash", "leader"):
            assert solve_optimal(g, K, mode).value == brute_force_oracle(g, K, mode)


@pytest.mark.parametrize("name", ["fig2", "fig3", "fig4"])
def test_oracle_on_figures(name):
    g = gen_figure(name)
    for K in (1, 2, 3):
        assert solve_optimal(g, K, "leader").value == brute_force_oracle(g, K, "leader")


@pytest.mark.parametrize("seed", range(15))
def test_monotone_and_dominance(seed):
    g = gen_random(4, 3, 3, seed=100 + seed)
    prev = {}
    for K in (1, 2, 3):
        cur = {mode: solve_optimal(g, K, mode).value for mode in ("nash", "leader")}
        assert cur["leader"] >= cur["nash"]
        for mode, v in prev.items():
            assert cur[mode] >= v
        prev = cur


@pytest.mark.parametrize("name", ["fig2", "fig3", "fig4", "fig5"])
@pytest.mark.parametrize("c", [F(2), F(1, 3)])
def test_scaling(name, c):
    g = gen_figure(name)
    h = scale_game(g, c)
    for K in (1, 3):
        for mode in ("nash", "leader"):
            a, b = solve_optimal(g, K, mode), solve_optimal(h, K, mode)
            assert b.value == c * a.value
            assert b.witness == a.witness


def test_scaled_examples(fig2, fig5):
    assert solve_optimal(scale_game(fig2, 2), 3, "leader").value == 3
    assert solve_optimal(scale_game(fig5, 10), 2, "nash").value == 0


@pytest.mark.parametrize("seed", range(4))
def test_threads_do_not_change_result(seed):
    g = gen_random(4, 3, 3, seed=seed)
    for mode in ("nash", "leader"):
        one = solve_optimal(g, 2, mode, threads=1)
        two = solve_optimal(g, 2, mode, threads=2)
        assert one.value == two.value and one.witness == two.witness
        t1 = decide_threshold(g, 2, mode, one.value, threads=1)
        t2 = decide_threshold(g, 2, mode, one.value, threads=2)
        assert t1.satisfied and t2.satisfied


def test_thread_env_var(fig2, monkeypatch):
    monkeypatch.setenv("DSLEADER_THREADS", "2")
    assert solve_optimal(fig2, 3, "leader").value == F(3, 2)
    monkeypatch.setenv("DSLEADER_THREADS", "many")
    assert solve_optimal(fig2, 3, "leader").value == F(3, 2)


def test_oracle_guard(fig2):
    with pytest.raises(OracleTooLarge):
        brute_force_oracle(gen_random(9, 2, 2, seed=1), 2, "leader")
    with pytest.raises(OracleTooLarge):
        brute_force_oracle(fig2, 4, "leader", max_profiles=3)


def test_bad_arguments(fig2):
    with pytest.raises(ValueError):
        solve_optimal(fig2, 0, "leader")
    with pytest.raises(ValueError):
        solve_optimal(fig2, 1, "coalition")
