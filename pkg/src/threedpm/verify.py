"""Stability and popularity checks with witnesses.

Stability is a scan over acceptable triples. Popularity and strong popularity
are decided by an exact branch-and-bound over matchings; A-union-B popularity
on complete instances goes through two house allocation problems instead.
"""
from __future__ import annotations

import logging
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from typing import Literal

from .house import HAInstance, ha_improve, ha_is_popular
from .model import (
    Instance,
    Matching,
    PreconditionError,
    Triple,
    Verdict,
    Voters,
    addable_triple,
    check_matching,
    delta,
    tally,
)

log = logging.getLogger(__name__)

PROPERTIES = ("weak-stable", "strong-stable", "popular", "strong-popular", "ab-popular")
Threshold = Literal["win", "not-lose"]


class SearchLimitExceeded(RuntimeError):
    def __init__(self, nodes: int):
        super().__init__(f"search aborted after {nodes} nodes")
        self.nodes = nodes


def blocking_triples(inst: Instance, M: Matching, mode: str = "strong") -> list[Triple]:
    """Strongly blocking triples (``mode='strong'``) or weakly blocking ones (``mode='weak'``)."""
    if mode not in ("strong", "weak"):
        raise ValueError(f"mode must be 'strong' or 'weak', not {mode!r}")
    out = []
    for t in inst.acceptable_triples():
        better = worse = 0
        for x, y in ((t.a, t.b), (t.b, t.c), (t.c, t.a)):
            cur = M.partner(x)
            if inst.prefers(x, y, cur):
                better += 1
            elif y != cur:
                worse += 1
        if mode == "strong" and better == 3:
            out.append(t)
        elif mode == "weak" and better >= 2 and worse == 0:
            out.append(t)
    return out


# -- branch and bound ----------------------------------------------------------


class _Search:
    """Depth-first search over matchings, one A-agent per level.

    Each A-agent either takes a triple with a free B- and C-agent or stays
    unmatched (tried last). A voter's vote is fixed once it is placed; the
    bound adds, for every voter not yet placed, the best vote it could still
    cast. Subtrees whose bound misses the target are skipped.
    """

    def __init__(self, inst: Instance, M: Matching, voters: Voters, threshold: Threshold,
                 max_nodes: int | None = None):
        agents = inst.agents
        idx = {x: i for i, x in enumerate(agents)}
        nA = len(inst.A)
        voting = [True] * len(agents)
        if voters == "ab":
            for c in inst.C:
                voting[idx[c]] = False
        elif voters != "all":
            raise ValueError(f"unknown voter set {voters!r}")

        def v(x, y):
            if not voting[idx[x]]:
                return 0
            new, old = inst.rank(x, y), inst.rank(x, M.partner(x))
            return (new < old) - (new > old)

        unmatched = [v(x, x) for x in agents]
        cap = list(unmatched)
        options = []
        for a in inst.A:
            opts = []
            cur = M.triple_of(a)
            for t in inst.triples_of(a):
                bi, ci = idx[t.b], idx[t.c]
                gain = v(t.a, t.b) + v(t.b, t.c) + v(t.c, t.a)
                opts.append((bi, ci, gain, t == cur, t))
                ia = idx[a]
                cap[ia] = max(cap[ia], v(t.a, t.b))
                cap[bi] = max(cap[bi], v(t.b, t.c))
                cap[ci] = max(cap[ci], v(t.c, t.a))
            options.append(opts)
        self.inst = inst
        self.M = M
        self.nA = nA
        self.n_agents = len(agents)
        self.options = options
        self.unmatched = unmatched
        self.cap = cap
        self.a_unmatched_in_M = [not M.is_matched(a) for a in inst.A]
        self.target = 1 if threshold == "win" else 0
        self.need_diff = threshold == "not-lose"
        self.max_nodes = max_nodes
        self.nodes = 0

    def run(self, first: list[int] | None = None) -> tuple[Triple, ...] | None:
        """Search the whole tree, or only the level-0 branches listed in ``first``."""
        used = [False] * self.n_agents
        bc_unmatched = sum(self.unmatched[self.nA:])
        rem_cap = sum(self.cap)
        self.nodes = 0
        chosen: list[Triple] = []
        self._first = first
        if self._dfs(0, used, 0, rem_cap, bc_unmatched, False, chosen):
            return tuple(chosen)
        return None

    def _dfs(self, i, used, score, rem_cap, bc_unmatched, diverged, chosen) -> bool:
        self.nodes += 1
        if self.max_nodes is not None and self.nodes > self.max_nodes:
            raise SearchLimitExceeded(self.nodes)
        if score + rem_cap < self.target:
            return False
        if i == self.nA:
            return score + bc_unmatched >= self.target and (diverged or not self.need_diff)
        cap = self.cap
        unm = self.unmatched
        rem_a = rem_cap - cap[i]
        for k, (bi, ci, gain, same, t) in enumerate(self.options[i]):
            if i == 0 and self._first is not None and k not in self._first:
                continue
            if used[bi] or used[ci]:
                continue
            used[bi] = used[ci] = True
            chosen.append(t)
            if self._dfs(i + 1, used, score + gain, rem_a - cap[bi] - cap[ci],
                         bc_unmatched - unm[bi] - unm[ci], diverged or not same, chosen):
                return True
            chosen.pop()
            used[bi] = used[ci] = False
        if i == 0 and self._first is not None and len(self.options[0]) not in self._first:
            return False
        return self._dfs(i + 1, used, score + unm[i], rem_a, bc_unmatched,
                         diverged or not self.a_unmatched_in_M[i], chosen)


def _subtree(args):
    inst, M, voters, threshold, max_nodes, branches = args
    s = _Search(inst, M, voters, threshold, max_nodes)
    return s.run(branches)


def more_popular_search(
    inst: Instance,
    M: Matching,
    voters: Voters = "all",
    threshold: Threshold = "win",
    *,
    max_nodes: int | None = None,
    workers: int = 1,
) -> Matching | None:
    """A matching that beats ``M`` (``threshold='win'``: margin >= 1) or does not lose to it
    (``threshold='not-lose'``: margin >= 0 and different from ``M``); None if there is none.

    With ``workers > 1`` the level-0 branches are spread over processes; the
    answer's existence does not depend on scheduling, the particular witness does.
    """
    check_matching(inst, M)
    if threshold not in ("win", "not-lose"):
        raise ValueError(f"unknown threshold {threshold!r}")
    if workers <= 1 or not inst.A:
        found = _Search(inst, M, voters, threshold, max_nodes).run()
        return None if found is None else Matching(found)
    n_branches = len(inst.triples_of(inst.A[0])) + 1
    jobs = [(inst, M, voters, threshold, max_nodes, [k]) for k in range(n_branches)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        pending = {pool.submit(_subtree, job) for job in jobs}
        while pending:
            done, pending = wait(pending, return_when=FIRST_COMPLETED)
            for fut in done:
                found = fut.result()
                if found is not None:
                    for p in pending:
                        p.cancel()
                    return Matching(found)
    return None


def local_improvement(inst: Instance, M: Matching, radius: int = 3, voters: Voters = "all") -> Matching | None:
    """A matching with margin >= 1 over ``M`` obtained by adding at most ``radius`` new
    triples (and dropping the triples of ``M`` they collide with), or None.

    Dropping a triple without need only hurts its members, so this covers every
    matching within ``radius`` added triples of ``M``. Used as evidence where a
    full search is out of reach.
    """
    check_matching(inst, M)
    fresh = [t for t in inst.acceptable_triples() if t not in M]
    voting = set(inst.agents if voters == "all" else inst.A + inst.B)

    def gain(added):
        removed = {M.triple_of(x) for t in added for x in t} - {None}
        affected = {x for t in added for x in t} | {x for t in removed for x in t}
        new = {}
        for t in added:
            new[t.a], new[t.b], new[t.c] = t.b, t.c, t.a
        total = 0
        for x in affected & voting:
            r_new = inst.rank(x, new.get(x, x))
            r_old = inst.rank(x, M.partner(x))
            total += (r_new < r_old) - (r_new > r_old)
        return total, removed

    def rec(start, added, used):
        if added:
            g, removed = gain(added)
            if g >= 1:
                return M.replace(removed, added)
        if len(added) == radius:
            return None
        for k in range(start, len(fresh)):
            t = fresh[k]
            if used.isdisjoint(t):
                found = rec(k + 1, added + [t], used | set(t))
                if found is not None:
                    return found
        return None

    return rec(0, [], frozenset())


# -- verdicts ------------------------------------------------------------------


def ab_poly_eligible(inst: Instance) -> bool:
    return inst.equal_sizes() and inst.is_complete()


def house_projections(inst: Instance) -> tuple[HAInstance, HAInstance]:
    HA = HAInstance(inst.A, inst.B, {a: inst.prefs[a] for a in inst.A})
    HB = HAInstance(inst.B, inst.C, {b: inst.prefs[b] for b in inst.B})
    return HA, HB


def _verdict_from_witness(inst, prop, Mp, M, voters) -> Verdict:
    if Mp is None:
        return Verdict(prop, True)
    pro, con = tally(inst, Mp, M, voters)
    return Verdict(prop, False, Mp, pro - con, pro, con)


def _ab_poly(inst: Instance, M: Matching) -> Matching | None:
    """More A-union-B-popular matching than ``M`` via the house allocation split, or None."""
    t = addable_triple(inst, M)
    if t is not None:
        return M.replace((), [t])
    HA, HB = house_projections(inst)
    MA = {a: M.partner(a) for a in inst.A}
    MB = {b: M.partner(b) for b in inst.B}
    if not ha_is_popular(HA, MA):
        better = ha_improve(HA, MA)
        return Matching((a, b, M.partner(b)) for a, b in better.items())
    if not ha_is_popular(HB, MB):
        better = ha_improve(HB, MB)
        return Matching((M.triple_of(b).a, b, c) for b, c in better.items())
    return None


def verify(
    inst: Instance,
    M: Matching,
    prop: str,
    *,
    voters: Voters = "all",
    strategy: str = "auto",
    max_nodes: int | None = None,
    workers: int = 1,
) -> Verdict:
    """Decide ``prop`` for ``M``; a failing verdict carries a checkable witness.

    ``voters='ab'`` turns ``popular`` into A-union-B popularity. ``strategy``
    only matters for A-union-B popularity: ``poly`` demands complete lists and
    equal class sizes, ``brute`` always searches, ``auto`` picks ``poly`` when
    it can.
    """
    if prop not in PROPERTIES:
        raise ValueError(f"unknown property {prop!r}; expected one of {', '.join(PROPERTIES)}")
    if strategy not in ("auto", "brute", "poly"):
        raise ValueError(f"unknown strategy {strategy!r}")
    check_matching(inst, M)
    if prop in ("weak-stable", "strong-stable"):
        mode = "strong" if prop == "weak-stable" else "weak"
        blocking = blocking_triples(inst, M, mode)
        return Verdict(prop, not blocking, blocking[0] if blocking else None)
    if prop == "ab-popular":
        voters = "ab"
        eligible = ab_poly_eligible(inst)
        if strategy == "poly" and not eligible:
            raise PreconditionError("the polynomial A-union-B route needs complete lists and equal class sizes")
        if strategy != "brute" and eligible:
            Mp = _ab_poly(inst, M)
            if Mp is not None and delta(inst, Mp, M, "ab") < 1:
                raise AssertionError("house allocation witness failed to re-verify")
            return _verdict_from_witness(inst, prop, Mp, M, voters)
        if strategy == "auto":
            log.info("A-union-B popularity on an incomplete instance: falling back to exhaustive search")
    elif strategy == "poly":
        raise PreconditionError(f"no polynomial verification route for {prop}")
    if prop == "strong-popular":
        Mp = more_popular_search(inst, M, voters, "not-lose", max_nodes=max_nodes, workers=workers)
        return _verdict_from_witness(inst, prop, Mp, M, voters)
    t = addable_triple(inst, M)
    if t is not None:
        return _verdict_from_witness(inst, prop, M.replace((), [t]), M, voters)
    Mp = more_popular_search(inst, M, voters, "win", max_nodes=max_nodes, workers=workers)
    return _verdict_from_witness(inst, prop, Mp, M, voters)
