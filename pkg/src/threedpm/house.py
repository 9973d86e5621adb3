"""Popular matchings in house allocation (one-sided preferences).

Applicants rank posts; posts do not vote. Every applicant implicitly ranks a
private last-resort post below all listed posts, which we represent by simply
leaving the applicant out of the assignment dict.

f(a) is a's first choice. s(a) is a's most preferred post that is nobody's
first choice, or None (the last resort) if every listed post is some
applicant's first choice. A matching is popular iff every f-post is matched
and every applicant holds f(a) or s(a).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import networkx as nx

Assignment = dict[str, str]


@dataclass(frozen=True)
class HAInstance:
    applicants: tuple[str, ...]
    posts: tuple[str, ...]
    prefs: Mapping[str, tuple[str, ...]]
    _rank: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "applicants", tuple(self.applicants))
        object.__setattr__(self, "posts", tuple(self.posts))
        post_set = set(self.posts)
        prefs = {}
        rank = {}
        for a in self.applicants:
            lst = tuple(self.prefs.get(a, ()))
            if len(set(lst)) != len(lst):
                raise ValueError(f"{a} lists a post twice")
            for p in lst:
                if p not in post_set:
                    raise ValueError(f"{a} lists unknown post {p!r}")
            prefs[a] = lst
            rank[a] = {p: i for i, p in enumerate(lst)}
        object.__setattr__(self, "prefs", prefs)
        object.__setattr__(self, "_rank", rank)

    def rank(self, a: str, p: str | None) -> int:
        if p is None:
            return len(self.prefs[a])
        return self._rank[a][p]


def first_and_second(H: HAInstance) -> tuple[dict[str, str | None], dict[str, str | None]]:
    f = {a: (H.prefs[a][0] if H.prefs[a] else None) for a in H.applicants}
    f_posts = {p for p in f.values() if p is not None}
    s = {}
    for a in H.applicants:
        s[a] = next((p for p in H.prefs[a] if p not in f_posts), None)
    return f, s


def ha_delta(H: HAInstance, new: Mapping[str, str], old: Mapping[str, str]) -> int:
    total = 0
    for a in H.applicants:
        rn, ro = H.rank(a, new.get(a)), H.rank(a, old.get(a))
        total += (rn < ro) - (rn > ro)
    return total


def ha_validate(H: HAInstance, M: Mapping[str, str]) -> None:
    used = set()
    for a, p in M.items():
        if a not in H.prefs or p not in H._rank[a]:
            raise ValueError(f"({a}, {p}) is not an acceptable pair")
        if p in used:
            raise ValueError(f"post {p} assigned twice")
        used.add(p)


def ha_is_popular(H: HAInstance, M: Mapping[str, str]) -> bool:
    f, s = first_and_second(H)
    held = set(M.values())
    if any(p is not None and p not in held for p in f.values()):
        return False
    return all(M.get(a) in (f[a], s[a]) for a in H.applicants if f[a] is not None)


def ha_popular(H: HAInstance) -> Assignment | None:
    """A popular matching of ``H`` or None if none exists."""
    f, s = first_and_second(H)
    G = nx.Graph()
    left = [("a", a) for a in H.applicants]
    G.add_nodes_from(left)
    for a in H.applicants:
        if f[a] is None:
            continue
        G.add_edge(("a", a), ("p", f[a]))
        # last resort posts are private, one node each
        G.add_edge(("a", a), ("p", s[a]) if s[a] is not None else ("lr", a))
    mate = nx.bipartite.hopcroft_karp_matching(G, top_nodes=left)
    M: dict[str, str | None] = {}
    for a in H.applicants:
        if f[a] is None:
            continue
        q = mate.get(("a", a))
        if q is None:
            return None
        M[a] = q[1] if q[0] == "p" else None
    holder = {p: a for a, p in M.items() if p is not None}
    for a in H.applicants:
        p = f[a]
        if p is not None and p not in holder:
            old = M[a]
            if old is not None:
                del holder[old]
            M[a] = p
            holder[p] = a
    return {a: p for a, p in M.items() if p is not None}


def ha_improve(H: HAInstance, M: Mapping[str, str]) -> Assignment | None:
    """A matching more popular than ``M``, or None when ``M`` is popular.

    Every rearrangement hands the displaced applicant the post that was just
    vacated, so on complete lists the set of held posts never changes.
    """
    f, s = first_and_second(H)
    M = dict(M)
    holder = {p: a for a, p in M.items()}

    def reassign(moves):
        for x, p in moves:
            M.pop(x, None)
        for x, p in moves:
            if p is not None and p in H._rank[x]:
                M[x] = p
        return M

    for a in H.applicants:
        p = f[a]
        if p is not None and p not in holder:
            return reassign([(a, p)])
    for a in H.applicants:
        if f[a] is None:
            continue
        q = M.get(a)
        if q in (f[a], s[a]):
            continue
        if q is not None and (s[a] is None or H.rank(a, q) < H.rank(a, s[a])):
            # q lies strictly between f(a) and s(a), so it is a rival's first choice
            rival = next(x for x in H.applicants if f[x] == q)
            h = holder[f[a]]
            if h == rival:
                return reassign([(a, f[a]), (rival, q)])
            return reassign([(a, f[a]), (rival, q), (h, M.get(rival))])
        target = s[a]
        o = holder.get(target)
        if o is None:
            return reassign([(a, target)])
        h = holder[f[o]]
        if h == a:
            return reassign([(a, target), (o, q)])
        return reassign([(a, target), (o, f[o]), (h, q)])
    return None
