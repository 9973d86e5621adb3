"""Instances, matchings, votes and structural predicates.

Agents are opaque string tokens split into three classes A, B, C. Agents in A
rank agents in B, agents in B rank agents in C, agents in C rank agents in A.
Preference lists are strict and may be incomplete. An unmatched agent is its
own partner and ranks that below every acceptable agent.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal, Mapping, NamedTuple, Sequence

CLASS_LABELS = ("A", "B", "C")

Voters = Literal["all", "ab"]


class InstanceError(ValueError):
    """Raised when an instance violates the cyclic preference invariants."""


class InvalidMatchingError(ValueError):
    """Raised when an operation requires a valid matching and gets something else."""


class PreconditionError(ValueError):
    """An operation was called outside the inputs it is defined for."""


class Triple(NamedTuple):
    a: str
    b: str
    c: str


class Instance:
    """Three agent classes with cyclic strict preferences.

    Instances are immutable. Rank tables are built once so that comparing two
    partners of an agent is a dictionary lookup.
    """

    __slots__ = ("classes", "prefs", "_rank", "_class_of", "_memo")

    def __init__(
        self,
        A: Sequence[str],
        B: Sequence[str],
        C: Sequence[str],
        prefs: Mapping[str, Sequence[str]],
    ):
        classes = (tuple(A), tuple(B), tuple(C))
        class_of: dict[str, int] = {}
        for k, members in enumerate(classes):
            for x in members:
                if not isinstance(x, str) or not x:
                    raise InstanceError(f"agent identifiers must be non-empty strings, got {x!r}")
                if x in class_of:
                    raise InstanceError(f"duplicate agent {x!r}")
                class_of[x] = k
        for x in prefs:
            if x not in class_of:
                raise InstanceError(f"preferences given for unknown agent {x!r}")
        frozen: dict[str, tuple[str, ...]] = {}
        rank: dict[str, dict[str, int]] = {}
        for x, k in class_of.items():
            lst = tuple(prefs.get(x, ()))
            target = (k + 1) % 3
            seen: dict[str, int] = {}
            for i, y in enumerate(lst):
                if y not in class_of:
                    raise InstanceError(f"{x} ranks unknown agent {y!r}")
                if class_of[y] != target:
                    raise InstanceError(
                        f"{x} (class {CLASS_LABELS[k]}) ranks {y} from class "
                        f"{CLASS_LABELS[class_of[y]]}, expected class {CLASS_LABELS[target]}"
                    )
                if y in seen:
                    raise InstanceError(f"{x} lists {y} twice")
                seen[y] = i
            seen[x] = len(lst)
            frozen[x] = lst
            rank[x] = seen
        self.classes = classes
        self.prefs = frozen
        self._rank = rank
        self._class_of = class_of
        self._memo: dict = {}

    def memo(self, key, compute):
        """Cache a derived value; instances never change, so this is safe."""
        try:
            return self._memo[key]
        except KeyError:
            value = self._memo[key] = compute()
            return value

    @classmethod
    def from_lists(
        cls,
        A: Mapping[str, Sequence[str]],
        B: Mapping[str, Sequence[str]],
        C: Mapping[str, Sequence[str]],
    ) -> "Instance":
        """Build an instance from one ``{agent: list}`` mapping per class; key order is class order."""
        prefs = {**A, **B, **C}
        return cls(list(A), list(B), list(C), prefs)

    @property
    def A(self) -> tuple[str, ...]:
        return self.classes[0]

    @property
    def B(self) -> tuple[str, ...]:
        return self.classes[1]

    @property
    def C(self) -> tuple[str, ...]:
        return self.classes[2]

    @property
    def agents(self) -> tuple[str, ...]:
        return self.classes[0] + self.classes[1] + self.classes[2]

    @property
    def n(self) -> int:
        """Common class size; raises if the classes differ in size."""
        if not self.equal_sizes():
            raise PreconditionError("classes have different sizes")
        return len(self.A)

    def __contains__(self, x: object) -> bool:
        return x in self._class_of

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return self.classes == other.classes and self.prefs == other.prefs

    def __hash__(self) -> int:
        return hash((self.classes, tuple(sorted(self.prefs.items()))))

    def __repr__(self) -> str:
        sizes = "/".join(str(len(c)) for c in self.classes)
        return f"Instance({sizes} agents)"

    def __getstate__(self):
        return (self.classes, self.prefs)

    def __setstate__(self, state):
        classes, prefs = state
        other = Instance(*classes, prefs)
        for slot in Instance.__slots__:
            setattr(self, slot, getattr(other, slot))

    def class_of(self, x: str) -> int:
        try:
            return self._class_of[x]
        except KeyError:
            raise KeyError(f"unknown agent {x!r}") from None

    def rank(self, x: str, y: str) -> int:
        """Position of ``y`` in ``x``'s list; ``x`` itself (unmatched) ranks last."""
        r = self._rank[x].get(y)
        if r is None:
            raise KeyError(f"{y!r} is not acceptable to {x!r}")
        return r

    def accepts(self, x: str, y: str) -> bool:
        return y != x and y in self._rank[x]

    def prefers(self, x: str, y: str, z: str) -> bool:
        """True iff ``x`` strictly prefers ``y`` to ``z`` (either may be ``x`` itself)."""
        return self._rank[x][y] < self._rank[x][z]

    def is_acceptable_triple(self, a: str, b: str, c: str) -> bool:
        return (
            self._class_of.get(a) == 0
            and self._class_of.get(b) == 1
            and self._class_of.get(c) == 2
            and b in self._rank[a]
            and c in self._rank[b]
            and a in self._rank[c]
        )

    def acceptable_triples(self) -> list[Triple]:
        """All acceptable triples; A by index, then by preference rank along the cycle."""
        return [t for a in self.A for t in self.triples_of(a)]

    def triples_of(self, a: str) -> list[Triple]:
        """Acceptable triples through A-agent ``a``, best for ``a`` first, then best for its B-agent."""
        rank = self._rank
        return [Triple(a, b, c) for b in self.prefs[a] for c in self.prefs[b] if a in rank[c]]

    def is_complete(self) -> bool:
        for k, members in enumerate(self.classes):
            size = len(self.classes[(k + 1) % 3])
            if any(len(self.prefs[x]) != size for x in members):
                return False
        return True

    def equal_sizes(self) -> bool:
        return len(self.A) == len(self.B) == len(self.C)

    def rotate(self, k: int = 1) -> "Instance":
        """Cyclically relabel classes: with ``k=1`` old B becomes A, old C becomes B, old A becomes C."""
        k %= 3
        cls = self.classes[k:] + self.classes[:k]
        return Instance(*cls, self.prefs)


class Matching:
    """A set of triples with partner lookup.

    Construction does not validate; use :func:`validate_matching` or
    :func:`check_matching` against an instance.
    """

    __slots__ = ("triples", "_partner", "_triple_of")

    def __init__(self, triples: Iterable[Sequence[str]] = ()):
        ts = frozenset(Triple(*t) for t in triples)
        partner: dict[str, str] = {}
        triple_of: dict[str, Triple] = {}
        for t in ts:
            a, b, c = t
            partner[a] = b
            partner[b] = c
            partner[c] = a
            triple_of[a] = triple_of[b] = triple_of[c] = t
        self.triples = ts
        self._partner = partner
        self._triple_of = triple_of

    def __getstate__(self):
        return tuple(self.triples)

    def __setstate__(self, state):
        other = Matching(state)
        for slot in Matching.__slots__:
            setattr(self, slot, getattr(other, slot))

    def partner(self, x: str) -> str:
        return self._partner.get(x, x)

    def triple_of(self, x: str) -> Triple | None:
        return self._triple_of.get(x)

    def is_matched(self, x: str) -> bool:
        return x in self._partner

    def __len__(self) -> int:
        return len(self.triples)

    def __iter__(self):
        return iter(self.triples)

    def __contains__(self, t: object) -> bool:
        return t in self.triples

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Matching):
            return NotImplemented
        return self.triples == other.triples

    def __hash__(self) -> int:
        return hash(self.triples)

    def __repr__(self) -> str:
        body = ", ".join("(" + ",".join(t) + ")" for t in sorted(self.triples))
        return "Matching({" + body + "})"

    def sorted(self, inst: Instance | None = None) -> list[Triple]:
        """Triples ordered by the A-agent's position in ``inst`` (or by name)."""
        if inst is None:
            return sorted(self.triples)
        pos = {a: i for i, a in enumerate(inst.A)}
        return sorted(self.triples, key=lambda t: pos.get(t.a, len(pos)))

    def replace(self, remove: Iterable[Triple], add: Iterable[Sequence[str]]) -> "Matching":
        return Matching((self.triples - set(remove)) | {Triple(*t) for t in add})


@dataclass(frozen=True)
class Verdict:
    """Outcome of checking one property of one matching.

    ``witness`` is a more popular matching or a blocking triple when the
    property fails; ``delta`` is the witness's head-to-head margin where that
    applies.
    """

    property: str
    holds: bool
    witness: Matching | Triple | None = None
    delta: int | None = None
    votes_for: int | None = None
    votes_against: int | None = None

    def __bool__(self) -> bool:
        return self.holds


@dataclass(frozen=True)
class MasterList:
    class_label: str
    order: tuple[str, ...]

    def index(self, x: str) -> int:
        return self.order.index(x)


# -- votes -------------------------------------------------------------------


def vote(inst: Instance, x: str, Mp: Matching, M: Matching) -> int:
    """+1 if ``x`` prefers its partner in ``Mp`` to its partner in ``M``, -1 if the reverse, else 0."""
    if x not in inst:
        raise KeyError(f"unknown agent {x!r}")
    r = inst._rank[x]
    try:
        new, old = r[Mp.partner(x)], r[M.partner(x)]
    except KeyError:
        raise InvalidMatchingError(f"{x} is matched to an unacceptable partner") from None
    return (new < old) - (new > old)


def _voter_set(inst: Instance, voters: Voters) -> tuple[str, ...]:
    if voters == "all":
        return inst.agents
    if voters == "ab":
        return inst.A + inst.B
    raise ValueError(f"unknown voter set {voters!r}")


def tally(inst: Instance, Mp: Matching, M: Matching, voters: Voters = "all") -> tuple[int, int]:
    """(agents preferring ``Mp``, agents preferring ``M``) over the voter set."""
    _check_agents(inst, Mp)
    _check_agents(inst, M)
    pro = con = 0
    rank = inst._rank
    for x in _voter_set(inst, voters):
        r = rank[x]
        new, old = r[Mp.partner(x)], r[M.partner(x)]
        if new < old:
            pro += 1
        elif new > old:
            con += 1
    return pro, con


def delta(inst: Instance, Mp: Matching, M: Matching, voters: Voters = "all") -> int:
    """Head-to-head margin of ``Mp`` over ``M``; positive means ``Mp`` wins."""
    pro, con = tally(inst, Mp, M, voters)
    return pro - con


def _check_agents(inst: Instance, M: Matching) -> None:
    for t in M.triples:
        for x in t:
            if x not in inst:
                raise InvalidMatchingError(f"matching mentions {x!r}, which is not in the instance")


# -- structural predicates ---------------------------------------------------


def validate_matching(inst: Instance, M: Matching) -> list[str]:
    """Human-readable violations; an empty list means ``M`` is a valid matching of ``inst``."""
    problems = []
    seen: dict[str, Triple] = {}
    for t in sorted(M.triples):
        for x, k in zip(t, range(3)):
            if x not in inst:
                problems.append(f"unknown agent {x!r} in {t}")
            elif inst.class_of(x) != k:
                problems.append(f"agent {x} in {t} is not in class {CLASS_LABELS[k]}")
            if x in seen:
                problems.append(f"agent reused: {x} in {seen[x]} and {t}")
            seen[x] = t
        if all(x in inst for x in t) and not inst.is_acceptable_triple(*t):
            problems.append(f"acceptability violated by {t}")
    return problems


def check_matching(inst: Instance, M: Matching) -> None:
    problems = validate_matching(inst, M)
    if problems:
        raise InvalidMatchingError("; ".join(problems))


def addable_triple(inst: Instance, M: Matching) -> Triple | None:
    """First acceptable triple of three agents unmatched in ``M``, or None."""
    for a in inst.A:
        if M.is_matched(a):
            continue
        for b in inst.prefs[a]:
            if M.is_matched(b):
                continue
            for c in inst.prefs[b]:
                if not M.is_matched(c) and inst.accepts(c, a):
                    return Triple(a, b, c)
    return None


def is_maximal(inst: Instance, M: Matching) -> tuple[bool, Triple | None]:
    t = addable_triple(inst, M)
    return t is None, t


def detect_master_list(inst: Instance, label: str | int) -> MasterList | None:
    """A master order that every list in the class is a subsequence of, or None.

    Consecutive pairs of every list become precedence constraints; the result
    is the lexicographically smallest topological order of the target class.
    """
    import heapq

    k = CLASS_LABELS.index(label) if isinstance(label, str) else label
    target = inst.classes[(k + 1) % 3]
    succ: dict[str, set[str]] = {y: set() for y in target}
    indeg = dict.fromkeys(target, 0)
    for x in inst.classes[k]:
        lst = inst.prefs[x]
        for y, z in zip(lst, lst[1:]):
            if z not in succ[y]:
                succ[y].add(z)
                indeg[z] += 1
    heap = [y for y, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        y = heapq.heappop(heap)
        order.append(y)
        for z in succ[y]:
            indeg[z] -= 1
            if indeg[z] == 0:
                heapq.heappush(heap, z)
    if len(order) != len(target):
        return None
    return MasterList(CLASS_LABELS[k], tuple(order))


def master_lists(inst: Instance) -> tuple[MasterList | None, MasterList | None, MasterList | None]:
    """detect_master_list for all three classes, cached on the instance."""
    return inst.memo("master_lists", lambda: tuple(detect_master_list(inst, k) for k in range(3)))


def master_list_classes(inst: Instance) -> list[int]:
    return [k for k, ml in enumerate(master_lists(inst)) if ml is not None]


def rotate_triple(t: Sequence[str], k: int) -> Triple:
    """Map a triple of ``inst`` to the corresponding triple of ``inst.rotate(k)``."""
    k %= 3
    return Triple(*(tuple(t[k:]) + tuple(t[:k])))


def rotate_matching(M: Matching, k: int) -> Matching:
    return Matching(rotate_triple(t, k) for t in M.triples)


def is_subsequence(lst: Sequence[str], order: Sequence[str]) -> bool:
    it = iter(order)
    return all(any(y == z for z in it) for y in lst)
