from fractions import Fraction as F
from pathlib import Path

import pytest

from dsleader.game import Action, Game, Vertex
from dsleader.generators import gen_figure, gen_random
from dsleader.search import decide_threshold
from dsleader.smt import export_constraints, smt_rational

GOLDEN = Path(__file__).parent / "golden"

try:
    import z3
except ImportError:  # pragma: no cover
    z3 = None

needs_z3 = pytest.mark.skipif(z3 is None, reason="z3-solver not installed")


def z3_sat(text: str) -> bool:
    s = z3.Solver()
    s.add(z3.parse_smt2_string(text))
    res = s.check()
    assert res != z3.unknown
    return res == z3.sat


def zero_game():
    z = {"a": F(0), "b": F(0)}
    return Game(("a", "b"), "a", F(1, 2), (Vertex("v", "b", (Action("x", "v", z), Action("y", "w", z)), F(1)),
                                            Vertex("w", "a", (Action("x", "v", z),)))
                )


def test_rational_syntax():
    assert smt_rational(F(3)) == "3"
    assert smt_rational(F(-3, 4)) == "(- (/ 3 4))"
    assert smt_rational(0) == "0"


@pytest.mark.parametrize("t,name", [(F(1), "fig2_k1_leader_t1.smt2"), (F(3, 2), "fig2_k1_leader_t3_2.smt2")])
def test_golden(t, name):
    text = export_constraints(gen_figure("fig2"), 1, "leader", t)
    assert text == (GOLDEN / name).read_text()


def test_no_decimals():
    text = export_constraints(gen_figure("fig3", F(1, 7)), 2, "nash", F(1, 3))
    body = [l for l in text.splitlines() if not l.startswith(";")]
    assert not any("." in l for l in body)
    assert "(set-logic QF_LIRA)" in text and text.rstrip().endswith("(check-sat)")


def test_bad_input(fig2):
    with pytest.raises(ValueError):
        export_constraints(fig2, 0, "leader", 0)
    with pytest.raises(ValueError):
        export_constraints(fig2, 1, "both", 0)


@needs_z3
def test_fig2_round_trip(fig2):
    assert z3_sat(export_constraints(fig2, 1, "leader", 1))
    assert not z3_sat(export_constraints(fig2, 1, "leader", F(3, 2)))
    assert z3_sat(export_constraints(fig2, 3, "leader", F(3, 2)))
    assert not z3_sat(export_constraints(fig2, 3, "leader", 2))
    assert not z3_sat(export_constraints(fig2, 2, "leader", F(3, 2)))
    assert not z3_sat(export_constraints(fig2, 2, "nash", F(1, 100)))


@needs_z3
def test_zero_game_sat():
    assert z3_sat(export_constraints(zero_game(), 2, "nash", 0))


@needs_z3
@pytest.mark.parametrize("seed", range(10))
def test_random_round_trip(seed):
    g = gen_random(3, 2, 2 + seed % 2, seed=seed)
    for K in (1, 2):
        for mode in ("nash", "leader"):
            for t in (F(-1), F(0), F(1, 2), F(2)):
                want = decide_threshold(g, K, mode, t).satisfied
                assert z3_sat(export_constraints(g, K, mode, t)) == want, (seed, K, mode, t)
