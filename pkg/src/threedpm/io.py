"""Plain-text documents, the two worked examples, and seeded instance generators.

Instance document::

    3dpm-instance v1
    # comments are allowed anywhere after the header
    class A
    a1: b1 b2
    class B
    b1: c1
    ...

Matching document::

    3dpm-matching v1
    a1 b1 c1

Source problems use ``p cnf`` DIMACS for (2,2)-E3-SAT, a ``3dm-cyclic v1``
document laid out like an instance (lists are unranked), and an
``osties v1`` document with ``side U`` / ``side W`` sections where a W-line
``w: tie: u1 u2`` marks a single tie.

Generators draw from :class:`random.Random` (MT19937) seeded with the given
integer, so the same arguments give the same instance on every platform.
"""
from __future__ import annotations

import random
from typing import Iterable

from .model import (
    CLASS_LABELS,
    Instance,
    InstanceError,
    Matching,
    Triple,
    detect_master_list,
    validate_matching,
)
from .reduce import Cyclic3DM, OneSidedTiesInstance, ReductionError, SatInstance

INSTANCE_HEADER = "3dpm-instance v1"
MATCHING_HEADER = "3dpm-matching v1"
CYCLIC_HEADER = "3dm-cyclic v1"
OSTIES_HEADER = "osties v1"


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _lines(text: str, header: str) -> list[tuple[int, str]]:
    """Numbered content lines after the header; comments and blank lines dropped."""
    raw = text.split("\n")
    out = []
    seen_header = False
    for no, line in enumerate(raw, start=1):
        line = line.rstrip("\r").strip()
        if not line or line.startswith("#"):
            continue
        if not seen_header:
            if line != header:
                raise ParseError(f"expected header {header!r}, got {line!r}", no)
            seen_header = True
            continue
        out.append((no, line))
    if not seen_header:
        raise ParseError(f"missing header {header!r}")
    return out


def _check_token(tok: str, no: int) -> None:
    if not tok or ":" in tok or any(ch.isspace() for ch in tok):
        raise ParseError(f"bad agent token {tok!r}", no)


def _sections(lines, keyword: str, labels: tuple[str, ...]):
    """Split ``name: x y z`` lines into labelled sections; returns {label: [(no, name, entries, rest)]}."""
    sections: dict[str, list] = {lab: [] for lab in labels}
    current = None
    seen = set()
    for no, line in lines:
        parts = line.split()
        if parts[0] == keyword:
            if len(parts) != 2 or parts[1] not in labels:
                raise ParseError(f"expected '{keyword} <{'|'.join(labels)}>'", no)
            if parts[1] in seen:
                raise ParseError(f"section {parts[1]} given twice", no)
            seen.add(parts[1])
            current = parts[1]
            continue
        if current is None:
            raise ParseError(f"agent line before any '{keyword}' header", no)
        if ":" not in line:
            raise ParseError("expected 'name: entries'", no)
        name, rest = line.split(":", 1)
        name = name.strip()
        _check_token(name, no)
        sections[current].append((no, name, rest))
    return sections


def _entries(rest: str, no: int) -> list[str]:
    toks = rest.split()
    for t in toks:
        _check_token(t, no)
    return toks


def _validated_lists(sections, labels):
    owner: dict[str, int] = {}
    where: dict[str, int] = {}
    for k, lab in enumerate(labels):
        for no, name, _ in sections[lab]:
            if name in owner:
                raise ParseError(f"duplicate agent {name!r} (first defined on line {where[name]})", no)
            owner[name] = k
            where[name] = no
    prefs = {}
    for k, lab in enumerate(labels):
        for no, name, rest in sections[lab]:
            lst = _entries(rest, no)
            seen = set()
            for y in lst:
                if y not in owner:
                    raise ParseError(f"{name} refers to unknown agent {y!r}", no)
                if owner[y] != (k + 1) % 3:
                    raise ParseError(
                        f"{name} in class {lab} ranks {y} from class {labels[owner[y]]}; "
                        f"expected class {labels[(k + 1) % 3]}", no)
                if y in seen:
                    raise ParseError(f"{name} lists {y} twice", no)
                seen.add(y)
            prefs[name] = lst
    classes = [[name for _, name, _ in sections[lab]] for lab in labels]
    return classes, prefs


# -- instances and matchings -------------------------------------------------------


def parse_instance(text: str) -> Instance:
    secs = _sections(_lines(text, INSTANCE_HEADER), "class", CLASS_LABELS)
    classes, prefs = _validated_lists(secs, CLASS_LABELS)
    try:
        return Instance(*classes, prefs)
    except InstanceError as e:
        raise ParseError(str(e)) from e


def _check_serializable(names: Iterable[str]) -> None:
    for x in names:
        if not x or ":" in x or any(ch.isspace() for ch in x):
            raise ValueError(f"agent {x!r} cannot be written: tokens may not contain ':' or whitespace")


def serialize_instance(inst: Instance) -> str:
    _check_serializable(inst.agents)
    out = [INSTANCE_HEADER]
    for lab, members in zip(CLASS_LABELS, inst.classes):
        out.append(f"class {lab}")
        for x in members:
            out.append(f"{x}: {' '.join(inst.prefs[x])}".rstrip())
    return "\n".join(out) + "\n"


def parse_matching(text: str, inst: Instance | None = None) -> Matching:
    """Parse a matching document; with ``inst`` the triples are also checked against it."""
    triples = []
    for no, line in _lines(text, MATCHING_HEADER):
        parts = line.split()
        if len(parts) != 3:
            raise ParseError("expected three agents per line", no)
        for t in parts:
            _check_token(t, no)
        if inst is not None:
            M1 = Matching([parts])
            problems = validate_matching(inst, M1)
            if problems:
                raise ParseError(problems[0], no)
            for prev_no, prev in triples:
                if set(prev) & set(parts):
                    raise ParseError(f"agent reused (also on line {prev_no})", no)
        triples.append((no, tuple(parts)))
    return Matching(t for _, t in triples)


def serialize_matching(M: Matching, inst: Instance | None = None) -> str:
    out = [MATCHING_HEADER]
    for t in M.sorted(inst):
        _check_serializable(t)
        out.append(" ".join(t))
    return "\n".join(out) + "\n"


# -- source problems -----------------------------------------------------------------------


def parse_sat(text: str) -> SatInstance:
    """DIMACS CNF; variable i is named ``x<i>``."""
    header = None
    tokens: list[tuple[int, str]] = []
    for no, line in enumerate(text.split("\n"), start=1):
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError("expected 'p cnf <variables> <clauses>'", no)
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise ParseError("non-integer counts in problem line", no) from None
            continue
        if header is None:
            raise ParseError("clause before the 'p cnf' line", no)
        tokens.extend((no, t) for t in line.split())
    if header is None:
        raise ParseError("missing 'p cnf' line")
    nvars, nclauses = header
    clauses, cur = [], []
    for no, t in tokens:
        try:
            lit = int(t)
        except ValueError:
            raise ParseError(f"bad literal {t!r}", no) from None
        if lit == 0:
            clauses.append(tuple(cur))
            cur = []
        elif abs(lit) > nvars:
            raise ParseError(f"literal {lit} exceeds declared variable count {nvars}", no)
        else:
            cur.append((f"x{abs(lit)}", lit > 0))
    if cur:
        raise ParseError("last clause is not terminated by 0")
    if len(clauses) != nclauses:
        raise ParseError(f"header declares {nclauses} clauses, found {len(clauses)}")
    return SatInstance(tuple(f"x{i}" for i in range(1, nvars + 1)), tuple(clauses))


def serialize_sat(phi: SatInstance) -> str:
    index = {v: i for i, v in enumerate(phi.variables, start=1)}
    out = [f"p cnf {len(phi.variables)} {len(phi.clauses)}"]
    for cl in phi.clauses:
        out.append(" ".join(str(index[v] if s else -index[v]) for v, s in cl) + " 0")
    return "\n".join(out) + "\n"


def serialize_assignment(phi: SatInstance, sigma: dict[str, bool]) -> str:
    index = {v: i for i, v in enumerate(phi.variables, start=1)}
    return "v " + " ".join(str(index[v] if sigma[v] else -index[v]) for v in phi.variables) + " 0\n"


def parse_cyclic3dm(text: str) -> Cyclic3DM:
    secs = _sections(_lines(text, CYCLIC_HEADER), "class", CLASS_LABELS)
    classes, prefs = _validated_lists(secs, CLASS_LABELS)
    try:
        return Cyclic3DM(*classes, {x: frozenset(v) for x, v in prefs.items()})
    except ReductionError as e:
        raise ParseError(str(e)) from e


def serialize_cyclic3dm(J: Cyclic3DM) -> str:
    out = [CYCLIC_HEADER]
    for lab, members in zip(CLASS_LABELS, (J.A, J.B, J.C)):
        out.append(f"class {lab}")
        for x in members:
            out.append(f"{x}: {' '.join(J.neighbours(x))}".rstrip())
    return "\n".join(out) + "\n"


def parse_osties(text: str) -> OneSidedTiesInstance:
    secs = _sections(_lines(text, OSTIES_HEADER), "side", ("U", "W"))
    u_prefs, w_prefs, ties = {}, {}, set()
    for no, name, rest in secs["U"]:
        u_prefs[name] = _entries(rest, no)
    for no, name, rest in secs["W"]:
        body = rest.strip()
        if body.startswith("tie:"):
            ties.add(name)
            body = body[len("tie:"):]
        w_prefs[name] = _entries(body, no)
    try:
        return OneSidedTiesInstance([n for _, n, _ in secs["U"]], [n for _, n, _ in secs["W"]],
                                    u_prefs, w_prefs, frozenset(ties))
    except ReductionError as e:
        raise ParseError(str(e)) from e


def serialize_osties(G: OneSidedTiesInstance) -> str:
    out = [OSTIES_HEADER, "side U"]
    for u in G.U:
        out.append(f"{u}: {' '.join(G.u_prefs[u])}".rstrip())
    out.append("side W")
    for w in G.W:
        tie = "tie: " if w in G.ties else ""
        out.append(f"{w}: {tie}{' '.join(G.w_prefs[w])}".rstrip())
    return "\n".join(out) + "\n"


def serialize_osties_matching(pairs) -> str:
    return "".join(f"{u} {w}\n" for u, w in sorted(pairs))


# -- fixtures -----------------------------------------------------------------------------

_FIXTURE_TEXT = {
    # strongly stable, yet beaten by fig1_Mprime
    "fig1": """3dpm-instance v1
class A
a1: b1 b2 b3
a2: b3 b2 b1
a3: b1 b3 b2
class B
b1: c2 c1 c3
b2: c3 c2 c1
b3: c3 c2 c1
class C
c1: a2 a1 a3
c2: a2 a1 a3
c3: a1 a3 a2
""",
    # strongly popular, yet strongly blocked by (a1, b2, c3)
    "fig2": """3dpm-instance v1
class A
a1: b2 b1 b3
a2: b2 b3 b1
a3: b3 b2 b1
class B
b1: c1 c2 c3
b2: c3 c2 c1
b3: c3 c2 c1
class C
c1: a1 a2 a3
c2: a2 a1 a3
c3: a1 a3 a2
""",
    "fig1_M": "3dpm-matching v1\na1 b1 c1\na2 b2 c2\na3 b3 c3\n",
    "fig1_Mprime": "3dpm-matching v1\na1 b2 c3\na2 b3 c1\na3 b1 c2\n",
    "fig2_M": "3dpm-matching v1\na1 b1 c1\na2 b2 c2\na3 b3 c3\n",
}

FIXTURES = tuple(_FIXTURE_TEXT)


def fixture_text(name: str) -> str:
    try:
        return _FIXTURE_TEXT[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}") from None


def fixture(name: str) -> Instance | Matching:
    text = fixture_text(name)
    if text.startswith(INSTANCE_HEADER):
        return parse_instance(text)
    return parse_matching(text)


# -- generators ---------------------------------------------------------------------------

GENERATOR_KINDS = ("random", "k-masterlist")


def _names(n: int) -> tuple[list[str], list[str], list[str]]:
    return ([f"a{i}" for i in range(1, n + 1)], [f"b{i}" for i in range(1, n + 1)],
            [f"c{i}" for i in range(1, n + 1)])


def _random_lists(rng: random.Random, members, target, complete: bool) -> dict[str, list[str]]:
    out = {}
    for x in members:
        lst = rng.sample(target, len(target))
        if not complete:
            lst = [y for y in lst if rng.random() < 0.5]
        out[x] = lst
    return out


def _master_lists(rng: random.Random, members, target, complete: bool) -> dict[str, list[str]]:
    order = rng.sample(target, len(target))
    out = {}
    for x in members:
        out[x] = list(order) if complete else [y for y in order if rng.random() < 0.5]
    return out


def generate(kind: str = "random", n: int = 3, k: int = 0, complete: bool = True, seed: int = 0,
             max_tries: int = 1000) -> Instance:
    """Seeded instance with classes a1..an, b1..bn, c1..cn.

    ``k-masterlist`` draws one master order for each of the first ``k``
    classes (A, then B, then C); each remaining class is redrawn on its own
    until it does not follow a master list. ``random`` ignores ``k``.
    """
    if kind not in GENERATOR_KINDS:
        raise ValueError(f"unknown generator kind {kind!r}; expected one of {GENERATOR_KINDS}")
    if n < 1:
        raise ValueError("n must be at least 1")
    if k not in (0, 1, 2, 3):
        raise ValueError("k must be 0, 1, 2 or 3")
    rng = random.Random(seed)
    classes = _names(n)
    if kind == "random":
        prefs = {}
        for c in range(3):
            prefs.update(_random_lists(rng, classes[c], classes[(c + 1) % 3], complete))
        return Instance(*classes, prefs)
    if n == 1 and k < 3:
        raise ValueError("with one agent per class every class follows a master list")
    prefs = {}
    for c in range(3):
        members, target = classes[c], classes[(c + 1) % 3]
        if c < k:
            prefs.update(_master_lists(rng, members, target, complete))
            continue
        # redraw this class alone until its lists admit no common order
        for _ in range(max_tries):
            lists = _random_lists(rng, members, target, complete)
            probe = Instance(members, target, [], lists)
            if detect_master_list(probe, 0) is None:
                break
        else:
            raise ValueError(f"could not draw a non-master-list class {CLASS_LABELS[c]} in {max_tries} tries")
        prefs.update(lists)
    return Instance(*classes, prefs)


def random_cyclic3dm(n: int, seed: int, density: float | None = None) -> Cyclic3DM:
    """Seeded acceptability-only instance; each cyclic pair is acceptable with probability ``density``
    (drawn uniformly from [0.4, 0.9] when omitted, so both answers occur)."""
    rng = random.Random(seed)
    p = rng.uniform(0.4, 0.9) if density is None else density
    A, B, C = _names(n)
    acc = {}
    for xs, ys in ((A, B), (B, C), (C, A)):
        for x in xs:
            acc[x] = frozenset(y for y in ys if rng.random() < p)
    return Cyclic3DM(A, B, C, acc)


def random_osties(n_u: int, n_w: int, seed: int, density: float = 0.7) -> OneSidedTiesInstance:
    """Seeded bipartite instance with strict U lists; each w is tied with probability 1/2."""
    rng = random.Random(seed)
    U = [f"u{i}" for i in range(1, n_u + 1)]
    W = [f"w{i}" for i in range(1, n_w + 1)]
    edges = [(u, w) for u in U for w in W if rng.random() < density]
    u_prefs = {u: rng.sample([w for x, w in edges if x == u], sum(x == u for x, _ in edges)) for u in U}
    w_prefs = {w: rng.sample([u for u, x in edges if x == w], sum(x == w for _, x in edges)) for w in W}
    ties = {w for w in W if rng.random() < 0.5}
    return OneSidedTiesInstance(U, W, u_prefs, w_prefs, ties)


def masterlist_instance(orders: tuple[list[str], list[str], list[str]] | None = None, n: int = 3) -> Instance:
    """Complete instance where every class follows one master list (identity orders by default)."""
    A, B, C = _names(n)
    if orders is None:
        orders = (B, C, A)
    prefs = {**{a: list(orders[0]) for a in A}, **{b: list(orders[1]) for b in B},
             **{c: list(orders[2]) for c in C}}
    return Instance(A, B, C, prefs)


def truncate(inst: Instance, remove: Iterable[str]) -> Instance:
    """Drop agents and strike them from every list."""
    gone = set(remove)
    classes = [[x for x in cl if x not in gone] for cl in inst.classes]
    prefs = {x: [y for y in inst.prefs[x] if y not in gone] for cl in classes for x in cl}
    return Instance(*classes, prefs)


__all__ = [
    "ParseError", "parse_instance", "serialize_instance", "parse_matching", "serialize_matching",
    "parse_sat", "serialize_sat", "serialize_assignment", "parse_cyclic3dm", "serialize_cyclic3dm",
    "parse_osties", "serialize_osties", "serialize_osties_matching", "fixture", "fixture_text",
    "FIXTURES", "generate", "random_cyclic3dm", "random_osties", "masterlist_instance", "truncate", "Triple",
]
