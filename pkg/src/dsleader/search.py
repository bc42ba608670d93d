"""Optimal bounded-memory reward-and-punish profiles.

The search fixes a profile one product state at a time, in the order the
induced plays discover them, starting from every start vertex at memory 0.
Each branch picks ``(action, next memory)`` for the current frontier state.
Memory ids are canonical: a fresh id is always the next unused one, which
removes the relabelling symmetry of the memory states.

Two prunes are applied, both exact:

* constraint: for each constrained position of the partial play, the best
  tail its owner could still get (reward so far plus the cooperative
  optimum from the frontier) is compared with her punishment value;
* bound: the leader's optimistic value (same construction) is compared
  with the incumbent.

Closed lassos are checked exactly.  Ties are broken towards the first
optimum in DFS order, so the returned witness does not depend on how the
work was scheduled.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .game import Game, StateLabel
from .memory import Profile, memoryless_profile, restrict_to_reachable, trace_play
from .punish import PunishTable, _policy_iteration, punishment_values
from .verify import check_mode, rp_check

__all__ = [
    "SearchStats",
    "SearchResult",
    "ThresholdResult",
    "OracleTooLarge",
    "cooperative_values",
    "fallback_profile",
    "solve_optimal",
    "decide_threshold",
    "brute_force_oracle",
]


@dataclass
class SearchStats:
    nodes: int = 0
    leaves: int = 0
    bound_prunes: int = 0
    constraint_prunes: int = 0

    def merge(self, other: "SearchStats") -> None:
        self.nodes += other.nodes
        self.leaves += other.leaves
        self.bound_prunes += other.bound_prunes
        self.constraint_prunes += other.constraint_prunes


@dataclass
class SearchResult:
    value: Fraction
    witness: Profile
    stats: SearchStats = field(default_factory=SearchStats)


@dataclass
class ThresholdResult:
    satisfied: bool
    threshold: Fraction
    witness: Profile | None
    value: Fraction | None
    stats: SearchStats = field(default_factory=SearchStats)


def cooperative_values(g: Game) -> list[list[Fraction]]:
    """``coop[p][v]``: the most ``p`` can get from ``v`` if everybody plays for her."""
    cg = g.compiled
    out = []
    for pi in range(len(cg.players)):
        choices = [[(t, rw[pi]) for t, rw in cg.succ[v]] for v in range(cg.n)]
        val, _ = _policy_iteration(choices, [True] * cg.n, True, [0] * cg.n, cg.lam)
        out.append([val[v] for v in range(cg.n)])
    return out


def fallback_profile(g: Game, table: PunishTable) -> Profile:
    """Everyone plays her own optimal strategy of her punishment game.

    Each owner then guarantees at least her punishment value from every
    vertex, whatever the others do, so this is feasible in both modes.
    """
    return memoryless_profile({v.id: table.policy[v.owner][v.id] for v in g.vertices})


class _Search:
    def __init__(self, g: Game, K: int, mode: str, table: PunishTable, *, threshold=None, root_choice=None):
        cg = g.compiled
        self.g = g
        self.K = K
        self.n = cg.n
        self.succ = cg.succ
        self.owner = cg.owner
        self.lam = cg.lam
        self.leader = cg.leader
        self.nplayers = len(cg.players)
        self.constrained = [mode == "nash" or cg.owner[v] != cg.leader for v in range(cg.n)]
        self.rp = [table(g.players[cg.owner[v]], g.vertices[v].id) for v in range(cg.n)]
        self.coop = cooperative_values(g)
        self.starts = [(v, cg.initial[v]) for v in range(cg.n) if cg.initial[v] > 0]
        self.future_ub = [Fraction(0)] * (len(self.starts) + 1)
        for k in range(len(self.starts) - 1, -1, -1):
            v, w = self.starts[k]
            self.future_ub[k] = self.future_ub[k + 1] + w * self.coop[self.leader][v]
        self.pow = [Fraction(1)]
        self.invpow = [Fraction(1)]
        self.act = [-1] * (self.n * K)
        self.nmem = [0] * (self.n * K)
        self.max_used = 0
        self.threshold = threshold
        self.root_choice = root_choice
        self.branched = False
        self.stats = SearchStats()
        self.best_value: Fraction | None = None
        self.best_table: dict[int, tuple[int, int]] | None = None
        self.best_from_dfs = False
        self.stop = False

    # powers are extended lazily; plays are at most n*K steps long
    def _p(self, i: int) -> Fraction:
        while len(self.pow) <= i:
            self.pow.append(self.pow[-1] * self.lam)
            self.invpow.append(self.invpow[-1] / self.lam)
        return self.pow[i]

    def seed(self, value: Fraction, table: dict[int, tuple[int, int]]) -> None:
        self.best_value = value
        self.best_table = table
        self.best_from_dfs = False

    def _bound_prunes(self, b: Fraction) -> bool:
        if self.threshold is not None:
            return b < self.threshold
        if self.best_value is None:
            return False
        return b < self.best_value or (b == self.best_value and self.best_from_dfs)

    def _leaf(self, value: Fraction) -> None:
        self.stats.leaves += 1
        if self.threshold is not None:
            if value >= self.threshold:
                self._record(value)
                self.stop = True
            return
        if self.best_value is None or value > self.best_value or (
            value == self.best_value and not self.best_from_dfs
        ):
            self._record(value)

    def _record(self, value: Fraction) -> None:
        self.best_value = value
        self.best_from_dfs = True
        self.best_table = {s: (self.act[s], self.nmem[s]) for s in range(len(self.act)) if self.act[s] >= 0}

    def run(self) -> None:
        self._start(0, Fraction(0))

    def _start(self, k: int, done: Fraction) -> None:
        if k == len(self.starts):
            self._leaf(done)
            return
        v = self.starts[k][0]
        self._walk(k, [v], {v: 0}, [(Fraction(0),) * self.nplayers], done)

    def _feasible(self, path, cum) -> bool:
        # upper bound on every constrained tail, given the frontier path[-1]
        d = len(path) - 1
        lam_d = self._p(d)
        vd = path[-1] % self.n
        for j in range(d):
            v = path[j] % self.n
            if not self.constrained[v]:
                continue
            o = self.owner[v]
            ub = (cum[d][o] - cum[j][o]) * self.invpow[j] + lam_d * self.invpow[j] * self.coop[o][vd]
            if ub < self.rp[v]:
                return False
        return True

    def _leader_bound(self, k, path, cum, done) -> Fraction:
        d = len(path) - 1
        L = self.leader
        cur = cum[d][L] + self._p(d) * self.coop[L][path[-1] % self.n]
        return done + self.starts[k][1] * cur + self.future_ub[k + 1]

    def _step(self, s: int, a: int, nm: int, cum_d, d: int):
        t, rw = self.succ[s % self.n][a]
        lam_d = self._p(d)
        return nm * self.n + t, tuple(c + r * lam_d for c, r in zip(cum_d, rw))

    def _close(self, k, path, cum, c, done) -> None:
        # path[0..d] all have transitions; cum has d+2 entries; cycle starts at c
        e_end = len(path)
        L = len(path) - c
        lam = self.lam
        self._p(e_end)
        denom = 1 - self.pow[L]
        head = [(cum[e_end][p] - cum[c][p]) * self.invpow[c] / denom for p in range(self.nplayers)]
        for j, s in enumerate(path):
            v = s % self.n
            if not self.constrained[v]:
                continue
            o = self.owner[v]
            e = c if j < c else e_end
            tail = (cum[e][o] - cum[j][o]) * self.invpow[j] + self.pow[e - j] * head[o]
            if tail < self.rp[v]:
                self.stats.constraint_prunes += 1
                return
        ldr = self.leader
        value0 = (cum[c][ldr] - cum[0][ldr]) + self.pow[c] * head[ldr]
        self._start(k + 1, done + self.starts[k][1] * value0)

    def _walk(self, k, path, pos, cum, done) -> None:
        added = 0
        try:
            while self.act[path[-1]] >= 0:
                s = path[-1]
                ns, nc = self._step(s, self.act[s], self.nmem[s], cum[-1], len(path) - 1)
                if ns in pos:
                    cum.append(nc)
                    self._close(k, path, cum, pos[ns], done)
                    cum.pop()
                    return
                pos[ns] = len(path)
                path.append(ns)
                cum.append(nc)
                added += 1
                if not self._viable(k, path, cum, done):
                    return
            self._branch(k, path, pos, cum, done)
        finally:
            for _ in range(added):
                del pos[path.pop()]
                cum.pop()

    def _viable(self, k, path, cum, done) -> bool:
        if not self._feasible(path, cum):
            self.stats.constraint_prunes += 1
            return False
        if self._bound_prunes(self._leader_bound(k, path, cum, done)):
            self.stats.bound_prunes += 1
            return False
        return True

    def _branch(self, k, path, pos, cum, done) -> None:
        s = path[-1]
        d = len(path) - 1
        nacts = len(self.succ[s % self.n])
        mem_choices = min(self.K, self.max_used + 2)
        options = [(a, nm) for a in range(nacts) for nm in range(mem_choices)]
        if not self.branched:
            self.branched = True
            if self.root_choice is not None:
                options = [options[self.root_choice]]
        saved_max = self.max_used
        for a, nm in options:
            if self.stop:
                break
            self.stats.nodes += 1
            self.act[s] = a
            self.nmem[s] = nm
            self.max_used = max(saved_max, nm)
            ns, nc = self._step(s, a, nm, cum[-1], d)
            if ns in pos:
                cum.append(nc)
                self._close(k, path, cum, pos[ns], done)
                cum.pop()
            else:
                pos[ns] = len(path)
                path.append(ns)
                cum.append(nc)
                if self._viable(k, path, cum, done):
                    self._walk(k, path, pos, cum, done)
                path.pop()
                cum.pop()
                del pos[ns]
        self.act[s] = -1
        self.nmem[s] = 0
        self.max_used = saved_max

    def profile(self, table: dict[int, tuple[int, int]]) -> Profile:
        out = {}
        for s, (a, nm) in table.items():
            v = self.g.vertices[s % self.n]
            out[(s // self.n, v.id)] = (v.actions[a].id, nm)
        return Profile(self.K, out)


def _table_of(g: Game, prof: Profile) -> dict[int, tuple[int, int]]:
    n = len(g.vertices)
    out = {}
    for (m, vid), (aid, nm) in prof.table.items():
        v = g.vertex_index[vid]
        a = [x.id for x in g.vertices[v].actions].index(aid)
        out[m * n + v] = (a, nm)
    return out


def _root_options(g: Game, K: int) -> int:
    v0 = g.initial_vertices[0]
    return len(v0.actions) * min(K, 2)


def _run_subtree(args):
    g, K, mode, table, threshold, root, seed_value, seed_table = args
    s = _Search(g, K, mode, table, threshold=threshold, root_choice=root)
    if seed_value is not None:
        s.seed(seed_value, seed_table)
    s.run()
    return s.best_value, s.best_table, s.best_from_dfs, s.stats


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("DSLEADER_THREADS", "1")))
    except ValueError:
        return 1


def _solve(g, K, mode, table, threshold, threads):
    roots = [None]
    if threads > 1:
        roots = list(range(_root_options(g, K)))
    seed = fallback_profile(g, table)
    seed_report = rp_check(g, seed, mode, table)
    assert seed_report.passed, "fallback profile must satisfy the punishment conditions"
    seed_value = seed_report.payoffs[g.leader]
    seed_prof = restrict_to_reachable(g, seed)
    jobs = [(g, K, mode, table, threshold, r, None if threshold is not None else seed_value, _table_of(g, seed_prof))
            for r in roots]
    if len(jobs) == 1:
        results = [_run_subtree(jobs[0])]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_subtree, jobs))
    stats = SearchStats()
    for r in results:
        stats.merge(r[3])
    return seed_value, seed_prof, results, stats


def solve_optimal(g: Game, K: int, mode: str, *, table: PunishTable | None = None, threads: int | None = None) -> SearchResult:
    """Maximum leader payoff over K-memory reward-and-punish profiles passing the mode's check."""
    check_mode(mode)
    if K < 1:
        raise ValueError("memory bound K must be positive")
    table = table or punishment_values(g)
    threads = threads or _default_threads()
    seed_value, seed_prof, results, stats = _solve(g, K, mode, table, None, threads)
    best = None
    for value, tab, from_dfs, _ in results:
        if not from_dfs:
            continue
        if best is None or value > best[0]:
            best = (value, tab)
    helper = _Search(g, K, mode, table)
    if best is None or best[0] < seed_value:
        # unreachable in practice: the DFS enumerates the fallback profile too
        return SearchResult(seed_value, Profile(K, dict(seed_prof.table)), stats)
    return SearchResult(best[0], helper.profile(best[1]), stats)


def decide_threshold(
    g: Game, K: int, mode: str, t, *, table: PunishTable | None = None, threads: int | None = None
) -> ThresholdResult:
    """Is there a K-memory profile passing the mode's check with leader payoff >= ``t``?"""
    check_mode(mode)
    t = Fraction(t)
    table = table or punishment_values(g)
    threads = threads or _default_threads()
    seed = fallback_profile(g, table)
    seed_report = rp_check(g, seed, mode, table)
    if seed_report.payoffs[g.leader] >= t:
        return ThresholdResult(True, t, restrict_to_reachable(g, seed), seed_report.payoffs[g.leader])
    _, _, results, stats = _solve(g, K, mode, table, t, threads)
    helper = _Search(g, K, mode, table)
    for value, tab, from_dfs, _ in results:
        if from_dfs and value is not None and value >= t:
            return ThresholdResult(True, t, helper.profile(tab), value, stats)
    return ThresholdResult(False, t, None, None, stats)


# -- exhaustive oracle -------------------------------------------------------------

class OracleTooLarge(RuntimeError):
    pass


def brute_force_oracle(
    g: Game, K: int, mode: str, *, max_states: int = 16, max_profiles: int = 200_000
) -> Fraction:
    """Leader optimum by enumerating every canonical profile, each checked with :func:`rp_check`.

    Shares nothing with the search besides the punishment table.  Refuses
    instances with more than ``max_states`` product states or more than
    ``max_profiles`` complete profiles.
    """
    check_mode(mode)
    if len(g.vertices) * K > max_states:
        raise OracleTooLarge(f"{len(g.vertices) * K} product states exceed the guard of {max_states}")
    table = punishment_values(g)
    starts = [StateLabel(v.id, 0) for v in g.initial_vertices]
    best: list[Fraction | None] = [None]
    count = [0]

    def frontier(entries) -> StateLabel | None:
        # first undefined state met when following the partial profile
        for s0 in starts:
            seen = set()
            s = s0
            while s not in seen:
                seen.add(s)
                key = (s.memory, s.vertex)
                if key not in entries:
                    return s
                a, nm = entries[key]
                s = StateLabel(g.vertex(s.vertex).action(a).target, nm)
        return None

    def rec(entries, used) -> None:
        s = frontier(entries)
        if s is None:
            count[0] += 1
            if count[0] > max_profiles:
                raise OracleTooLarge(f"more than {max_profiles} profiles")
            report = rp_check(g, Profile(K, entries), mode, table)
            if report.passed:
                v = report.payoffs[g.leader]
                if best[0] is None or v > best[0]:
                    best[0] = v
            return
        for a in g.vertex(s.vertex).actions:
            for nm in range(min(K, used + 2)):
                entries[(s.memory, s.vertex)] = (a.id, nm)
                rec(entries, max(used, nm))
                del entries[(s.memory, s.vertex)]

    rec({}, 0)
    return best[0]
