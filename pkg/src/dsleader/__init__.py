"""Exact solver for bounded-memory Nash and leader profiles in discounted-sum games."""

from .game import (
    Action,
    Game,
    GameFormatError,
    Lasso,
    StateLabel,
    Vertex,
    lasso_payoff,
    load_game,
    parse_game,
    render_game,
    scale_game,
)
from .generators import CnfFormula, gen_3sat, gen_figure, gen_random
from .memory import Profile, build_product, induced_play, load_profile, parse_profile, render_profile
from .punish import PunishTable, best_response_value, punishment_values
from .search import brute_force_oracle, decide_threshold, solve_optimal
from .smt import export_constraints
from .verify import classic_nash_check, rp_check, tail_values

__version__ = "0.1.0"
