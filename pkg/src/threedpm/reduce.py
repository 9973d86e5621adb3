"""Hardness gadgets as instance compilers, plus brute-force oracles for their source problems.

Four compilers are provided:

* ``reduce_sat``: (2,2)-E3-SAT to popular matching existence with incomplete
  lists. Note the construction gives each clause agent five acceptable
  partners, although the hardness claim it backs speaks of four.
* ``reduce_3dm_spmi``: perfect cyclic 3D matching to strong popularity; the
  designated matching is strongly popular iff there is no perfect matching.
* ``reduce_3dm_pmvi``: the same source problem (odd n) to popularity
  verification; the designated matching is popular iff there is no perfect
  matching.
* ``reduce_osties_ab``: bipartite popular matching with one-sided ties to
  A-union-B popularity.

The oracles share no code with the 3D verifiers so that equivalence tests are
genuine cross-checks.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Mapping, Sequence

from .model import Instance, Matching, PreconditionError

Literal_ = tuple[str, bool]


class ReductionError(ValueError):
    pass


# -- source problems -------------------------------------------------------------


@dataclass(frozen=True)
class SatInstance:
    """A CNF formula; ``clauses`` hold (variable, is_positive) literals."""

    variables: tuple[str, ...]
    clauses: tuple[tuple[Literal_, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "clauses", tuple(tuple((v, bool(s)) for v, s in cl) for cl in self.clauses))

    def check_22e3(self) -> None:
        """Raise unless every clause has 3 distinct variables and every variable occurs twice each way."""
        pos = dict.fromkeys(self.variables, 0)
        neg = dict.fromkeys(self.variables, 0)
        if len(pos) != len(self.variables):
            raise ReductionError("duplicate variable names")
        for k, cl in enumerate(self.clauses):
            names = [v for v, _ in cl]
            if len(cl) != 3 or len(set(names)) != 3:
                raise ReductionError(f"clause {k + 1} must have exactly three distinct variables")
            for v, s in cl:
                if v not in pos:
                    raise ReductionError(f"clause {k + 1} uses undeclared variable {v!r}")
                (pos if s else neg)[v] += 1
        for v in self.variables:
            if pos[v] != 2 or neg[v] != 2:
                raise ReductionError(f"variable {v} occurs {pos[v]}x positively and {neg[v]}x negatively; need 2 and 2")

    def satisfied_by(self, sigma: Mapping[str, bool]) -> bool:
        return all(any(sigma[v] == s for v, s in cl) for cl in self.clauses)


@dataclass(frozen=True)
class Cyclic3DM:
    """Three equal classes with unranked cyclic acceptability (A accepts B, B accepts C, C accepts A)."""

    A: tuple[str, ...]
    B: tuple[str, ...]
    C: tuple[str, ...]
    acc: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("A", "B", "C"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        classes = (self.A, self.B, self.C)
        owner = {}
        for k, members in enumerate(classes):
            for x in members:
                if x in owner:
                    raise ReductionError(f"duplicate agent {x!r}")
                owner[x] = k
        if not len(self.A) == len(self.B) == len(self.C):
            raise ReductionError("classes must have equal size")
        acc = {}
        for x, k in owner.items():
            ys = frozenset(self.acc.get(x, ()))
            for y in ys:
                if owner.get(y) != (k + 1) % 3:
                    raise ReductionError(f"{x} accepts {y!r}, which is not in the next class")
            acc[x] = ys
        for x in self.acc:
            if x not in owner:
                raise ReductionError(f"acceptability given for unknown agent {x!r}")
        object.__setattr__(self, "acc", acc)

    @property
    def n(self) -> int:
        return len(self.A)

    def neighbours(self, x: str) -> list[str]:
        """Acceptable agents of ``x`` in declaration order of their class."""
        k = 0 if x in self.A else 1 if x in self.B else 2
        nxt = (self.A, self.B, self.C)[(k + 1) % 3]
        return [y for y in nxt if y in self.acc[x]]

    def triples(self) -> list[tuple[str, str, str]]:
        return [(a, b, c) for a in self.A for b in self.neighbours(a) for c in self.neighbours(b) if a in self.acc[c]]


@dataclass(frozen=True)
class OneSidedTiesInstance:
    """Bipartite graph; U has strict lists, each w in W has a strict list or one tie (``w in ties``)."""

    U: tuple[str, ...]
    W: tuple[str, ...]
    u_prefs: Mapping[str, tuple[str, ...]]
    w_prefs: Mapping[str, tuple[str, ...]]
    ties: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "U", tuple(self.U))
        object.__setattr__(self, "W", tuple(self.W))
        object.__setattr__(self, "ties", frozenset(self.ties))
        up = {u: tuple(self.u_prefs.get(u, ())) for u in self.U}
        wp = {w: tuple(self.w_prefs.get(w, ())) for w in self.W}
        if set(self.U) & set(self.W) or len(set(self.U)) != len(self.U) or len(set(self.W)) != len(self.W):
            raise ReductionError("agent names must be unique across U and W")
        for x in self.ties:
            if x not in wp:
                raise ReductionError(f"tie marker on unknown agent {x!r}")
        edges_u = {(u, w) for u, lst in up.items() for w in lst}
        edges_w = {(u, w) for w, lst in wp.items() for u in lst}
        for lst in list(up.values()) + list(wp.values()):
            if len(set(lst)) != len(lst):
                raise ReductionError("an agent lists the same neighbour twice")
        if edges_u != edges_w:
            odd = sorted(edges_u ^ edges_w)[0]
            raise ReductionError(f"edge {odd[0]}-{odd[1]} is listed by only one endpoint")
        object.__setattr__(self, "u_prefs", up)
        object.__setattr__(self, "w_prefs", wp)

    def edges(self) -> list[tuple[str, str]]:
        return [(u, w) for u in self.U for w in self.u_prefs[u]]


# -- (2,2)-E3-SAT -------------------------------------------------------------------


def _clause_agent(v: str, k: int) -> str:
    return f"a.{v}.C{k + 1}"


def _occurrences(phi: SatInstance, v: str, positive: bool) -> list[int]:
    return [k for k, cl in enumerate(phi.clauses) if (v, positive) in cl]


def reduce_sat(phi: SatInstance) -> Instance:
    """Popular-matching instance that has a popular matching iff ``phi`` is satisfiable.

    Clause agents accept five B-agents (the two copies for their literal and
    the three clause B-agents), not four; every other agent accepts at most
    three.
    """
    phi.check_22e3()
    order = {v: i for i, v in enumerate(phi.variables)}
    A, B, C = [], [], []
    prefs: dict[str, list[str]] = {}
    for k, cl in enumerate(phi.clauses):
        tag = f"C{k + 1}"
        bs = [f"b{m}.{tag}" for m in (1, 2, 3)]
        cs = [f"c{m}.{tag}" for m in (1, 2, 3)]
        lits = sorted(cl, key=lambda lit: order[lit[0]])
        for v, s in lits:
            sign = "+" if s else "-"
            a = _clause_agent(v, k)
            A.append(a)
            prefs[a] = [f"b1.{v}{sign}", f"b2.{v}{sign}", *bs]
        B.extend(bs)
        C.extend(cs)
        for b in bs:
            prefs[b] = list(cs)
        for c in cs:
            prefs[c] = [_clause_agent(v, k) for v, _ in lits]
    for v in phi.variables:
        p1, p2 = _occurrences(phi, v, True)
        n1, n2 = _occurrences(phi, v, False)
        a1, a2 = f"a1.{v}", f"a2.{v}"
        A += [a1, a2]
        B += [f"b1.{v}", f"b2.{v}", f"b1.{v}+", f"b1.{v}-", f"b2.{v}+", f"b2.{v}-"]
        C += [f"c1.{v}+", f"c1.{v}-", f"c2.{v}+", f"c2.{v}-"]
        prefs[a1] = [f"b2.{v}", f"b1.{v}"]
        prefs[a2] = [f"b1.{v}", f"b2.{v}"]
        prefs[f"b1.{v}"] = [f"c2.{v}-", f"c2.{v}+"]
        prefs[f"b2.{v}"] = [f"c1.{v}+", f"c1.{v}-"]
        for m in (1, 2):
            for sign in "+-":
                prefs[f"b{m}.{v}{sign}"] = [f"c{m}.{v}{sign}"]
        prefs[f"c1.{v}+"] = [_clause_agent(v, p1), _clause_agent(v, p2), a1]
        prefs[f"c1.{v}-"] = [_clause_agent(v, n1), _clause_agent(v, n2), a2]
        prefs[f"c2.{v}+"] = [_clause_agent(v, p1), _clause_agent(v, p2), a2]
        prefs[f"c2.{v}-"] = [_clause_agent(v, n1), _clause_agent(v, n2), a1]
    return Instance(A, B, C, prefs)


def sat_assignment_to_matching(phi: SatInstance, sigma: Mapping[str, bool]) -> Matching:
    """The popular matching built from a satisfying assignment."""
    phi.check_22e3()
    if set(sigma) != set(phi.variables):
        raise ReductionError("assignment must give a value to every variable, and only to those")
    if not phi.satisfied_by(sigma):
        raise ReductionError("assignment does not satisfy the formula")
    order = {v: i for i, v in enumerate(phi.variables)}
    triples = []
    for v in phi.variables:
        a1, a2, b1, b2 = f"a1.{v}", f"a2.{v}", f"b1.{v}", f"b2.{v}"
        if sigma[v]:
            phi_k, psi_k = _occurrences(phi, v, True)
            triples += [(a2, b2, f"c1.{v}-"), (a1, b1, f"c2.{v}-"),
                        (_clause_agent(v, phi_k), f"b2.{v}+", f"c2.{v}+"),
                        (_clause_agent(v, psi_k), f"b1.{v}+", f"c1.{v}+")]
        else:
            phi_k, psi_k = _occurrences(phi, v, False)
            triples += [(a2, b1, f"c2.{v}+"), (a1, b2, f"c1.{v}+"),
                        (_clause_agent(v, phi_k), f"b2.{v}-", f"c2.{v}-"),
                        (_clause_agent(v, psi_k), f"b1.{v}-", f"c1.{v}-")]
    for k, cl in enumerate(phi.clauses):
        unsat = sorted((v for v, s in cl if sigma[v] != s), key=order.__getitem__)
        for m, v in enumerate(unsat, start=1):
            triples.append((_clause_agent(v, k), f"b{m}.C{k + 1}", f"c{m}.C{k + 1}"))
    return Matching(triples)


def matching_to_sat_assignment(phi: SatInstance, M: Matching) -> dict[str, bool]:
    """Read an assignment off a popular matching: x is true iff a positive b-agent of x is matched."""
    sigma = {}
    for v in phi.variables:
        pos = any(M.is_matched(f"b{m}.{v}+") for m in (1, 2))
        neg = any(M.is_matched(f"b{m}.{v}-") for m in (1, 2))
        if pos and neg:
            raise PreconditionError(f"matching sends both literals of {v} into clause gadgets, so it is not popular")
        sigma[v] = pos
    return sigma


# -- perfect cyclic 3D matching ---------------------------------------------------------


def _copy_names(J: Cyclic3DM, marks: Sequence[str]) -> None:
    names = set(J.A) | set(J.B) | set(J.C)
    for x in list(names):
        for mark in marks:
            if x + mark in names:
                raise ReductionError(f"agent name {x + mark!r} clashes with a generated copy")


def _dedup(xs):
    return list(dict.fromkeys(xs))


def reduce_3dm_spmi(J: Cyclic3DM) -> tuple[Instance, Matching]:
    """Instance plus designated matching; the matching is strongly popular iff ``J`` has no perfect matching."""
    _copy_names(J, ["'"])
    n = J.n
    a, b, c = J.A, J.B, J.C
    p = lambda x: x + "'"  # noqa: E731
    prefs: dict[str, list[str]] = {}
    for i in range(n):
        prefs[a[i]] = [p(b[i])] + J.neighbours(a[i])
        prefs[p(a[i])] = [p(b[i])]
        prefs[b[i]] = J.neighbours(b[i])
        prefs[p(b[i])] = _dedup([p(c[i]), p(c[(i + 1) % n])])
        prefs[c[i]] = J.neighbours(c[i])
        prefs[p(c[i])] = [a[i], p(a[(i - 1) % n])]
    inst = Instance(list(a) + [p(x) for x in a], list(b) + [p(x) for x in b],
                    list(c) + [p(x) for x in c], prefs)
    M = Matching((a[i], p(b[i]), p(c[i])) for i in range(n))
    return inst, M


def pad_cyclic3dm(J: Cyclic3DM, extra: int) -> Cyclic3DM:
    """Add ``extra`` dummy triples, each acceptable only within itself; perfect matchings are unaffected."""
    names = set(J.A) | set(J.B) | set(J.C)
    dummies = [(f"pad{i}.a", f"pad{i}.b", f"pad{i}.c") for i in range(1, extra + 1)]
    for t in dummies:
        if names & set(t):
            raise ReductionError(f"padding agent names clash with {sorted(names & set(t))}")
    acc = dict(J.acc)
    for a, b, c in dummies:
        acc[a], acc[b], acc[c] = frozenset([b]), frozenset([c]), frozenset([a])
    return Cyclic3DM(J.A + tuple(t[0] for t in dummies), J.B + tuple(t[1] for t in dummies),
                     J.C + tuple(t[2] for t in dummies), acc)


def reduce_3dm_pmvi(J: Cyclic3DM) -> tuple[Instance, Matching]:
    """Instance plus designated matching; the matching is popular iff ``J`` (odd n) has no perfect matching.

    With n = 1 the cyclic index shifts collapse onto the agent itself and the
    gadget stops working, so such inputs are first padded to n = 3 with two
    dummy triples.
    """
    if J.n % 2 == 0:
        raise PreconditionError("the popularity-verification gadget needs an odd number of agents per class")
    if J.n == 1:
        J = pad_cyclic3dm(J, 2)
    n = J.n
    _copy_names(J, ["'", "''"])
    a, b, c = J.A, J.B, J.C
    p = lambda x: x + "'"  # noqa: E731
    q = lambda x: x + "''"  # noqa: E731
    prefs: dict[str, list[str]] = {}
    for i in range(n):
        prev, nxt = (i - 1) % n, (i + 1) % n
        prefs[a[i]] = [p(b[i])] + J.neighbours(a[i])
        prefs[p(a[i])] = [p(b[i])]
        prefs[q(a[i])] = [b[i], q(b[i])]
        prefs[b[i]] = [q(c[i])] + J.neighbours(b[i])
        prefs[p(b[i])] = _dedup([p(c[i]), p(c[nxt])])
        prefs[q(b[i])] = [q(c[nxt])]
        prefs[c[i]] = J.neighbours(c[i])
        prefs[p(c[i])] = [p(a[prev]), a[i]]
        # 1-based parity
        if (i + 1) % 2 == 1:
            prefs[q(c[i])] = _dedup([q(a[prev]), q(a[i])])
        else:
            prefs[q(c[i])] = _dedup([q(a[i]), q(a[prev])])
    inst = Instance(list(a) + [p(x) for x in a] + [q(x) for x in a],
                    list(b) + [p(x) for x in b] + [q(x) for x in b],
                    list(c) + [p(x) for x in c] + [q(x) for x in c], prefs)
    M = Matching([(a[i], p(b[i]), p(c[i])) for i in range(n)] + [(q(a[i]), b[i], q(c[i])) for i in range(n)])
    return inst, M


# -- one-sided ties ------------------------------------------------------------------------


def _osties_names(G: OneSidedTiesInstance):
    A = {u: f"a.{u}" for u in G.U}
    B = {w: f"b.{w}" for w in G.W}
    return A, B


def _c_name(G: OneSidedTiesInstance, w: str, u: str) -> str:
    return f"c.{w}" if w in G.ties else f"c.{w}.{u}"


def reduce_osties_ab(G: OneSidedTiesInstance) -> Instance:
    """Instance whose A-union-B-popular matchings correspond to popular matchings of ``G``."""
    A, B = _osties_names(G)
    C = []
    prefs: dict[str, list[str]] = {}
    for u in G.U:
        prefs[A[u]] = [B[w] for w in G.u_prefs[u]]
    for w in G.W:
        if w in G.ties:
            c = _c_name(G, w, "")
            C.append(c)
            prefs[B[w]] = [c]
            prefs[c] = [A[u] for u in G.w_prefs[w]]
        else:
            prefs[B[w]] = [_c_name(G, w, u) for u in G.w_prefs[w]]
            for u in G.U:
                c = _c_name(G, w, u)
                C.append(c)
                prefs[c] = [A[u]]
    return Instance(list(A.values()), list(B.values()), C, prefs)


def osties_to_3d(G: OneSidedTiesInstance, pairs) -> Matching:
    """Lift a matching of ``G`` (iterable of (u, w) pairs) to the reduced instance."""
    A, B = _osties_names(G)
    return Matching((A[u], B[w], _c_name(G, w, u)) for u, w in pairs)


def osties_from_3d(G: OneSidedTiesInstance, M: Matching) -> frozenset[tuple[str, str]]:
    A, B = _osties_names(G)
    u_of = {v: k for k, v in A.items()}
    w_of = {v: k for k, v in B.items()}
    return frozenset((u_of[t.a], w_of[t.b]) for t in M.triples)


# -- oracles ---------------------------------------------------------------------------------


def oracle_sat(phi: SatInstance) -> dict[str, bool] | None:
    """First satisfying assignment in binary counting order (all-true first), or None."""
    for values in product((True, False), repeat=len(phi.variables)):
        sigma = dict(zip(phi.variables, values))
        if phi.satisfied_by(sigma):
            return sigma
    return None


def oracle_3dm(J: Cyclic3DM) -> list[tuple[str, str, str]] | None:
    """A perfect matching of ``J`` by plain backtracking, or None."""
    by_a = {a: [] for a in J.A}
    for t in J.triples():
        by_a[t[0]].append(t)
    used: set[str] = set()
    chosen: list[tuple[str, str, str]] = []

    def rec(i):
        if i == len(J.A):
            return True
        for t in by_a[J.A[i]]:
            if t[1] in used or t[2] in used:
                continue
            used.update(t[1:])
            chosen.append(t)
            if rec(i + 1):
                return True
            chosen.pop()
            used.difference_update(t[1:])
        return False

    return list(chosen) if rec(0) else None


def osties_matchings(G: OneSidedTiesInstance) -> list[frozenset[tuple[str, str]]]:
    """All matchings of the bipartite graph, by recursion over U."""
    out = []
    used: set[str] = set()
    chosen: list[tuple[str, str]] = []

    def rec(i):
        if i == len(G.U):
            out.append(frozenset(chosen))
            return
        u = G.U[i]
        for w in G.u_prefs[u]:
            if w not in used:
                used.add(w)
                chosen.append((u, w))
                rec(i + 1)
                chosen.pop()
                used.discard(w)
        rec(i + 1)

    rec(0)
    return out


def osties_delta(G: OneSidedTiesInstance, new, old) -> int:
    """Votes of all agents of ``G`` for ``new`` over ``old``; tied partners count as equal."""
    pn, po = dict(new), dict(old)
    wn = {w: u for u, w in new}
    wo = {w: u for u, w in old}
    total = 0
    for u in G.U:
        lst = G.u_prefs[u]
        rn = lst.index(pn[u]) if u in pn else len(lst)
        ro = lst.index(po[u]) if u in po else len(lst)
        total += (rn < ro) - (rn > ro)
    for w in G.W:
        lst = G.w_prefs[w]
        if w in G.ties:
            rn, ro = (0 if w in wn else 1), (0 if w in wo else 1)
        else:
            rn = lst.index(wn[w]) if w in wn else len(lst)
            ro = lst.index(wo[w]) if w in wo else len(lst)
        total += (rn < ro) - (rn > ro)
    return total


def oracle_osties(G: OneSidedTiesInstance) -> frozenset[tuple[str, str]] | None:
    """First popular matching of ``G`` in enumeration order, or None."""
    ms = osties_matchings(G)
    for M in ms:
        if all(osties_delta(G, Mp, M) < 1 for Mp in ms):
            return M
    return None
