"""Finding optimal matchings and constructing more popular ones.

Exhaustive search covers the hard notions at desk scale. The polynomial
routes are the house allocation split for A-union-B popularity on complete
lists and the top-choice characterization of strong popularity when one class
follows a master list. The witness builders produce a matching that beats a
given one on master-list instances where no popular matching exists.
"""
from __future__ import annotations

import logging
from itertools import permutations
from typing import Iterator

from .house import HAInstance, ha_popular  # noqa: F401  (re-exported)
from .model import (
    Instance,
    Matching,
    PreconditionError,
    Triple,
    addable_triple,
    check_matching,
    delta,
    master_list_classes,
    master_lists,
    rotate_matching,
)
from .verify import PROPERTIES, ab_poly_eligible, house_projections, verify

log = logging.getLogger(__name__)


def enumerate_matchings(inst: Instance) -> Iterator[Matching]:
    """Every valid matching exactly once.

    A-agents are assigned in class order; each tries its acceptable triples
    by rank and then staying unmatched, so the empty matching comes last.
    """
    options = [inst.triples_of(a) for a in inst.A]
    used: set[str] = set()
    chosen: list[Triple] = []

    def rec(i):
        if i == len(options):
            yield Matching(chosen)
            return
        for t in options[i]:
            if t.b in used or t.c in used:
                continue
            used.add(t.b)
            used.add(t.c)
            chosen.append(t)
            yield from rec(i + 1)
            chosen.pop()
            used.discard(t.b)
            used.discard(t.c)
        yield from rec(i + 1)

    return rec(0)


def _rank_vector(inst: Instance, M: Matching) -> tuple[int, ...]:
    return tuple(inst.rank(x, M.partner(x)) for x in inst.agents)


def _margin(u: tuple[int, ...], v: tuple[int, ...]) -> int:
    """Margin of the matching with rank vector ``u`` over the one with ``v``."""
    return sum((x < y) - (x > y) for x, y in zip(u, v))


def find_matching(inst: Instance, prop: str, *, max_nodes: int | None = None,
                  strategy: str = "brute", workers: int = 1) -> Matching | None:
    """First matching in enumeration order that has ``prop``, or None.

    For strong popularity at most one matching qualifies, so a single pass of
    pairwise elimination narrows the field to one candidate, which is then
    verified.
    """
    if prop not in PROPERTIES:
        raise ValueError(f"unknown property {prop!r}")
    if prop == "strong-popular":
        champion = None
        for M in enumerate_matchings(inst):
            vec = _rank_vector(inst, M)
            if champion is None or _margin(champion[1], vec) < 1:
                champion = (M, vec)
        if champion is None:
            return None
        ok = verify(inst, champion[0], prop, max_nodes=max_nodes, workers=workers)
        return champion[0] if ok.holds else None
    for M in enumerate_matchings(inst):
        if prop in ("popular", "ab-popular") and addable_triple(inst, M) is not None:
            continue
        if verify(inst, M, prop, max_nodes=max_nodes, workers=workers,
                  strategy=strategy if prop == "ab-popular" else "auto"):
            return M
    return None


def ab_popular_find(inst: Instance) -> Matching | None:
    """An A-union-B-popular matching of a complete instance, composed from two house allocations."""
    if not ab_poly_eligible(inst):
        raise PreconditionError("needs complete lists and equal class sizes")
    HA, HB = house_projections(inst)
    MA = ha_popular(HA)
    if MA is None:
        return None
    MB = ha_popular(HB)
    if MB is None:
        return None
    if len(MA) != len(inst.A) or len(MB) != len(inst.B):
        raise AssertionError("popular house allocation on complete lists must be perfect")
    return Matching((a, b, MB[b]) for a, b in MA.items())


def strongly_popular_1ml(inst: Instance, master_class: int | None = None) -> Matching | None:
    """The strongly popular matching of a complete instance with a master-list class, or None.

    The candidate gives every agent outside the master-list class its first
    choice. ``master_class`` picks the class when several qualify; by default
    the first one (A, then B, then C) is used.
    """
    if not (inst.equal_sizes() and inst.is_complete()):
        raise PreconditionError("needs complete lists and equal class sizes")
    ml = master_list_classes(inst)
    if not ml:
        raise PreconditionError("no class is derived from a master list")
    k = ml[0] if master_class is None else master_class
    if k not in ml:
        raise PreconditionError(f"class {'ABC'[k]} is not derived from a master list")
    J = inst.rotate(k)
    top_b = {b: J.prefs[b][0] for b in J.B}
    top_c = {c: J.prefs[c][0] for c in J.C}
    if len(set(top_b.values())) != len(top_b) or len(set(top_c.values())) != len(top_c):
        return None
    found = Matching((top_c[c], b, c) for b, c in top_b.items())
    return rotate_matching(found, -k)


def _require_master_instance(inst: Instance, min_n: int) -> None:
    if not (inst.equal_sizes() and inst.is_complete()):
        raise PreconditionError("needs complete lists and equal class sizes")
    if len(inst.A) < min_n:
        raise PreconditionError(f"needs at least {min_n} agents per class, got {len(inst.A)}")


def _augment(inst: Instance, M: Matching) -> Matching | None:
    t = addable_triple(inst, M)
    return None if t is None else M.replace((), [t])


def _three_ml_candidates(ts, pos_b):
    """The construction for the B-ranking pattern, followed by every rearrangement."""
    (ai, bi, ci), (aj, bj, cj), (ak, bk, ck) = ts
    ranks = (pos_b[bi], pos_b[bj], pos_b[bk])
    # the three cyclic rotations of the aligned order are the even permutations
    inversions = sum(ranks[x] > ranks[y] for x in range(3) for y in range(x + 1, 3))
    if inversions % 2 == 1:
        yield [(ak, bi, ci), (ai, bj, cj), (aj, bk, ck)]
    else:
        yield [(ai, bk, cj), (aj, bi, ck), (ak, bj, ci)]
    for pb in permutations((bi, bj, bk)):
        for pc in permutations((ci, cj, ck)):
            yield list(zip((ai, aj, ak), pb, pc))


def witness_3ml(inst: Instance, M: Matching) -> Matching:
    """A matching more popular than ``M`` in a complete 3-master-list instance with n >= 3."""
    _require_master_instance(inst, 3)
    mls = master_lists(inst)
    if any(ml is None for ml in mls):
        raise PreconditionError("every class must be derived from a master list")
    check_matching(inst, M)
    aug = _augment(inst, M)
    if aug is not None:
        return aug
    pos_a = inst.memo("pos_c_over_a", lambda: {x: i for i, x in enumerate(mls[2].order)})
    pos_b = inst.memo("pos_a_over_b", lambda: {x: i for i, x in enumerate(mls[0].order)})
    # the three lexicographically smallest A-agents, for reproducible witnesses
    chosen = [M.triple_of(a) for a in sorted(inst.A)[:3]]
    chosen.sort(key=lambda t: pos_a[t.a])
    for k, cand in enumerate(_three_ml_candidates(chosen, pos_b)):
        Mp = M.replace(chosen, cand)
        if delta(inst, Mp, M) >= 1:
            if k:
                log.debug("3-master-list construction needed rearrangement #%d", k)
            return Mp
    raise RuntimeError("no rearrangement of three triples beats M; every 3-master-list instance should admit one")


def witness_2ml(inst: Instance, M: Matching) -> Matching:
    """A matching more popular than ``M`` in a complete instance where two classes follow master lists, n >= 5.

    Non-maximal matchings get a free triple. Otherwise every agent of the
    first master-list class moves one step up its list, and the agent it
    lands on does the same.
    """
    _require_master_instance(inst, 5)
    mls = master_lists(inst)
    k = next((k for k in range(3) if mls[k] is not None and mls[(k + 1) % 3] is not None), None)
    if k is None:
        raise PreconditionError("needs two classes derived from master lists")
    check_matching(inst, M)
    aug = _augment(inst, M)
    if aug is not None:
        return aug
    n = len(inst.A)

    def up_map(ml):
        order = ml.order
        return {order[i]: order[i - 1] for i in range(n)}

    up1 = inst.memo(("up", k), lambda: up_map(mls[k]))
    up2 = inst.memo(("up", (k + 1) % 3), lambda: up_map(mls[(k + 1) % 3]))
    triples = []
    for x in inst.classes[k]:
        y = up1[M.partner(x)]
        z = up2[M.partner(y)]
        slots = [None, None, None]
        slots[k], slots[(k + 1) % 3], slots[(k + 2) % 3] = x, y, z
        triples.append(slots)
    Mp = Matching(triples)
    d = delta(inst, Mp, M)
    if d < max(1, n - 4):
        raise RuntimeError(f"shifted matching has margin {d}, below the guaranteed {n - 4}")
    return Mp


def construct_obs1(inst: Instance) -> Matching:
    """Popular matching of a 3-master-list instance with 3 agents per class after removing agents from one class.

    With one agent left in the small class the three first choices form the
    only triple; with two left, first choices and second choices form two
    triples.
    """
    sizes = [len(c) for c in inst.classes]
    small = [k for k, s in enumerate(sizes) if s < 3]
    if len(small) != 1 or sizes[small[0]] not in (1, 2) or any(s != 3 for s in sizes if s != sizes[small[0]]):
        raise PreconditionError(f"expected one class of size 1 or 2 and two of size 3, got sizes {sizes}")
    if not inst.is_complete():
        raise PreconditionError("needs complete lists")
    mls = master_lists(inst)
    if any(ml is None for ml in mls):
        raise PreconditionError("every class must be derived from a master list")
    k = small[0]
    m = sizes[k]
    triples = []
    for r in range(m):
        slots = [None, None, None]
        for cls in range(3):
            # the class ranking class `cls` is cls - 1
            slots[cls] = mls[(cls - 1) % 3].order[r]
        triples.append(slots)
    return Matching(triples)


def solve(inst: Instance, prop: str, strategy: str = "auto", *, max_nodes: int | None = None,
          workers: int = 1) -> Matching | None:
    """Find a matching with ``prop``, preferring polynomial routes under ``strategy='auto'``."""
    if strategy not in ("auto", "brute", "poly"):
        raise ValueError(f"unknown strategy {strategy!r}")
    poly = None
    if prop == "ab-popular" and ab_poly_eligible(inst):
        poly = ab_popular_find
    elif prop == "strong-popular" and inst.equal_sizes() and inst.is_complete() and master_list_classes(inst):
        poly = strongly_popular_1ml
    if strategy == "poly":
        if poly is None:
            raise PreconditionError(f"no polynomial route for {prop} on this instance")
        return poly(inst)
    if strategy == "auto" and poly is not None:
        return poly(inst)
    if strategy == "auto":
        log.info("no polynomial route for %s here; running exhaustive search", prop)
    return find_matching(inst, prop, max_nodes=max_nodes, workers=workers)
