"""End-to-end acceptance checks, one test per criterion.

Each test prints a PASS/FAIL line and asserts its runtime limit; the
conftest hook repeats the verdicts in the terminal summary.
"""
import random
import time
from contextlib import contextmanager
from itertools import combinations, permutations, product

import pytest

from oracles import ha_popular_set, perfect_3dm, tabulate
from threedpm import (
    Instance,
    Matching,
    ab_popular_find,
    blocking_triples,
    construct_obs1,
    delta,
    detect_master_list,
    enumerate_matchings,
    find_matching,
    is_maximal,
    local_improvement,
    more_popular_search,
    strongly_popular_1ml,
    validate_matching,
    verify,
    witness_2ml,
    witness_3ml,
)
from threedpm import io
from threedpm.house import HAInstance, ha_popular
from threedpm.model import master_list_classes
from threedpm.reduce import (
    Cyclic3DM,
    OneSidedTiesInstance,
    SatInstance,
    matching_to_sat_assignment,
    oracle_3dm,
    oracle_osties,
    oracle_sat,
    reduce_3dm_pmvi,
    reduce_3dm_spmi,
    reduce_osties_ab,
    reduce_sat,
    sat_assignment_to_matching,
)


@contextmanager
def within(seconds, label):
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        took = time.perf_counter() - start
        print(f"{'PASS' if ok and took < seconds else 'FAIL'} {label} ({took:.2f}s, limit {seconds}s)")
    assert took < seconds, f"{label} took {took:.1f}s, limit {seconds}s"


def complete_random(seed, n=3):
    return io.generate("random", n, 0, True, seed)


# -- 1, 2: the two worked examples -------------------------------------------------------


@pytest.mark.acceptance("1", "first figure: stable in both senses, not popular, stored alternative wins by 3")
def test_criterion_01_first_figure():
    with within(1, "criterion 1"):
        inst, M = io.fixture("fig1"), io.fixture("fig1_M")
        assert verify(inst, M, "weak-stable").holds
        assert verify(inst, M, "strong-stable").holds
        v = verify(inst, M, "popular")
        assert not v.holds and delta(inst, v.witness, M) >= 1
        assert delta(inst, io.fixture("fig1_Mprime"), M) == 3


@pytest.mark.acceptance("2", "second figure: blocked by (a1,b2,c3), yet strongly popular over all 172 matchings")
def test_criterion_02_second_figure():
    with within(1, "criterion 2"):
        inst, M = io.fixture("fig2"), io.fixture("fig2_M")
        v = verify(inst, M, "weak-stable")
        assert not v.holds and tuple(v.witness) == ("a1", "b2", "c3")
        assert verify(inst, M, "strong-popular").holds
        others = [N for N in enumerate_matchings(inst) if N != M]
        assert len(others) == 171
        assert all(delta(inst, N, M) < 0 for N in others)


# -- 3: implications --------------------------------------------------------------------


@pytest.mark.acceptance("3", "implication lattice on 100 complete n=3 instances")
def test_criterion_03_implications():
    violations = []
    with within(60, "criterion 3"):
        for seed in range(100):
            inst = complete_random(seed)
            strongly = 0
            ms = list(enumerate_matchings(inst))
            assert len(ms) == 172
            for M in ms:
                ws = verify(inst, M, "weak-stable").holds
                ss = verify(inst, M, "strong-stable").holds
                pop = verify(inst, M, "popular").holds
                sp = verify(inst, M, "strong-popular").holds
                strongly += sp
                if ss and not ws:
                    violations.append((seed, M, "strong-stable without weak-stable"))
                if sp and not pop:
                    violations.append((seed, M, "strongly popular but not popular"))
                if pop and not is_maximal(inst, M)[0]:
                    violations.append((seed, M, "popular but not maximal"))
                if sp and ws and not ss:
                    violations.append((seed, M, "strongly popular and weakly stable, not strongly stable"))
            if strongly > 1:
                violations.append((seed, None, f"{strongly} strongly popular matchings"))
    assert violations == []


# -- 4, 5, 6: master lists ---------------------------------------------------------------


@pytest.mark.acceptance("4", "three master lists, n=3: no popular matching, witness for all 172 matchings")
def test_criterion_04_three_master_lists():
    with within(60, "criterion 4"):
        for seed in range(100):
            inst = io.generate("k-masterlist", 3, 3, True, seed)
            assert find_matching(inst, "popular") is None
            for M in enumerate_matchings(inst):
                assert delta(inst, witness_3ml(inst, M), M) >= 1, (seed, M)


@pytest.mark.acceptance("5", "two master lists, n=5: witness beats all 14400 perfect matchings")
def test_criterion_05_two_master_lists():
    n = 5
    with within(60, "criterion 5"):
        for seed in range(20):
            inst = io.generate("k-masterlist", n, 2, True, seed)
            A, B, C = inst.classes
            for pb in permutations(B):
                for pc in permutations(C):
                    M = Matching(zip(A, pb, pc))
                    assert delta(inst, witness_2ml(inst, M), M) >= n - 4
            rng = random.Random(seed)
            for _ in range(20):
                k = rng.randrange(n)
                M = Matching(zip(A[:k], rng.sample(B, k), rng.sample(C, k)))
                assert delta(inst, witness_2ml(inst, M), M) == 3


def plant_top_choices(inst, seed):
    """Move a random permutation to the front of the lists of classes B and C."""
    rng = random.Random(seed)
    prefs = {x: list(inst.prefs[x]) for x in inst.agents}
    for k in (1, 2):
        target = list(inst.classes[(k + 1) % 3])
        rng.shuffle(target)
        for x, y in zip(inst.classes[k], target):
            prefs[x].remove(y)
            prefs[x].insert(0, y)
    return Instance(*inst.classes, prefs)


def one_master_list_instances(count, sizes, first_seed=0):
    """Half plain draws, half with injective top choices planted, all with exactly class A on a master list."""
    out, seed = [], first_seed
    while len(out) < count:
        n = sizes[seed % len(sizes)]
        inst = io.generate("k-masterlist", n, 1, True, seed)
        if seed % 2:
            inst = plant_top_choices(inst, seed)
        if master_list_classes(inst) == [0]:
            out.append(inst)
        seed += 1
    return out


@pytest.mark.acceptance("6", "one master list: top-choice construction matches exhaustive search")
def test_criterion_06_one_master_list():
    positives = 0
    with within(120, "criterion 6"):
        for inst in one_master_list_instances(100, (2, 3)):
            truth = [M for M in enumerate_matchings(inst) if verify(inst, M, "strong-popular").holds]
            got = strongly_popular_1ml(inst)
            assert truth == ([] if got is None else [got])
            positives += got is not None
        for inst in one_master_list_instances(20, (4,), first_seed=1000):
            got = strongly_popular_1ml(inst)
            if got is not None:
                positives += 1
                assert more_popular_search(inst, got, threshold="not-lose") is None
    assert positives >= 20


# -- 7: A-union-B popularity --------------------------------------------------------------


def all_complete_ha(m):
    apps = [f"a{i}" for i in range(1, m + 1)]
    posts = [f"p{i}" for i in range(1, m + 1)]
    for lists in product(list(permutations(posts)), repeat=m):
        yield HAInstance(apps, posts, dict(zip(apps, lists)))


def random_ha(seed):
    rng = random.Random(seed)
    m, k = rng.randint(1, 4), rng.randint(1, 4)
    apps = [f"a{i}" for i in range(1, m + 1)]
    posts = [f"p{i}" for i in range(1, k + 1)]
    return HAInstance(apps, posts, {a: [p for p in rng.sample(posts, k) if rng.random() < 0.7] for a in apps})


@pytest.mark.acceptance("7", "house allocation route agrees with brute force")
def test_criterion_07_ab_popular():
    with within(120, "criterion 7"):
        for seed in range(100):
            inst = complete_random(seed, n=1 + seed % 3)
            T = tabulate(inst)
            exists = any(T.popular(i, ab=True) for i in range(len(T.matchings)))
            M = ab_popular_find(inst)
            assert (M is not None) == exists, seed
            if M is not None:
                assert T.popular(T.index(M), ab=True)
        cases = [H for m in (1, 2, 3) for H in all_complete_ha(m)] + [random_ha(s) for s in range(500)]
        for H in cases:
            popular = ha_popular_set(H.applicants, H.posts, H.prefs)
            found = ha_popular(H)
            assert (found is None) == (not popular)
            assert found is None or found in popular


# -- 8, 9, 10: reductions with brute-force sources ---------------------------------------------


@pytest.mark.acceptance("8", "strong popularity gadget: perfect matching iff no strongly popular matching")
def test_criterion_08_strong_popularity_gadget():
    seen = set()
    with within(300, "criterion 8"):
        for n, count in ((2, 50), (3, 10)):
            for seed in range(count):
                J = io.random_cyclic3dm(n, seed)
                inst, _ = reduce_3dm_spmi(J)
                has_perfect = oracle_3dm(J) is not None
                assert has_perfect == (perfect_3dm(J) is not None)
                assert has_perfect == (find_matching(inst, "strong-popular") is None), (n, seed)
                seen.add(has_perfect)
    assert seen == {True, False}


@pytest.mark.acceptance("9", "popularity verification gadget: designated matching popular iff no perfect matching")
def test_criterion_09_popularity_gadget():
    single = [Cyclic3DM(["a1"], ["b1"], ["c1"], acc)
              for acc in ({"a1": {"b1"}, "b1": {"c1"}, "c1": {"a1"}}, {})]
    seen = set()
    with within(600, "criterion 9"):
        for J in single + [io.random_cyclic3dm(3, 100 + s) for s in range(5)]:
            inst, M = reduce_3dm_pmvi(J)
            none = oracle_3dm(J) is None
            assert verify(inst, M, "popular", max_nodes=10**8).holds == none
            seen.add(none)
    assert seen == {True, False}


def all_small_osties():
    for nu, nw in product((1, 2, 3), (1, 2)):
        U = [f"u{i}" for i in range(1, nu + 1)]
        W = [f"w{i}" for i in range(1, nw + 1)]
        pairs = [(u, w) for u in U for w in W]
        for mask in product((False, True), repeat=len(pairs)):
            edges = [e for e, m in zip(pairs, mask) if m]
            nbr_u = {u: [w for x, w in edges if x == u] for u in U}
            nbr_w = {w: [u for u, x in edges if x == w] for w in W}
            for u_lists in product(*(list(permutations(nbr_u[u])) for u in U)):
                for w_lists in product(*(list(permutations(nbr_w[w])) for w in W)):
                    for tie_mask in product((False, True), repeat=nw):
                        yield OneSidedTiesInstance(U, W, dict(zip(U, u_lists)), dict(zip(W, w_lists)),
                                                   {w for w, t in zip(W, tie_mask) if t})


@pytest.mark.acceptance("10", "one-sided ties gadget: popular matching iff A-union-B-popular matching")
def test_criterion_10_one_sided_ties():
    seen = set()
    count = 0
    with within(300, "criterion 10"):
        cases = list(all_small_osties()) + [io.random_osties(3, 3, s) for s in range(200)]
        for G in cases:
            T = tabulate(reduce_osties_ab(G))
            exists = any(T.popular(i, ab=True) for i in range(len(T.matchings)))
            assert (oracle_osties(G) is not None) == exists, G
            seen.add(exists)
            count += 1
    assert seen == {True, False} and count > 500


# -- 11: SAT gadget ---------------------------------------------------------------------------


SMALLEST = SatInstance(["x1", "x2", "x3"], [
    [("x1", True), ("x2", True), ("x3", True)],
    [("x1", True), ("x2", False), ("x3", False)],
    [("x1", False), ("x2", True), ("x3", False)],
    [("x1", False), ("x2", False), ("x3", True)],
])


@pytest.mark.acceptance("11", "SAT gadget: structure, mappers, no improvement within 3 added triples")
def test_criterion_11_sat_gadget():
    # full popularity of the 72-agent matching is out of reach for exhaustive search
    with within(300, "criterion 11"):
        phi = SMALLEST
        inst = reduce_sat(phi)
        nc, nv = len(phi.clauses), len(phi.variables)
        assert (len(inst.A), len(inst.B), len(inst.C)) == (3 * nc + 2 * nv, 3 * nc + 6 * nv, 3 * nc + 4 * nv)
        assert len(inst.agents) == 72
        expected = {
            "a1.x1": ("b2.x1", "b1.x1"), "a2.x1": ("b1.x1", "b2.x1"),
            "b1.x1": ("c2.x1-", "c2.x1+"), "b2.x1": ("c1.x1+", "c1.x1-"),
            "b1.x1+": ("c1.x1+",), "b2.x1-": ("c2.x1-",),
            "c1.x1+": ("a.x1.C1", "a.x1.C2", "a1.x1"), "c1.x1-": ("a.x1.C3", "a.x1.C4", "a2.x1"),
            "c2.x1+": ("a.x1.C1", "a.x1.C2", "a2.x1"), "c2.x1-": ("a.x1.C3", "a.x1.C4", "a1.x1"),
            "a.x2.C3": ("b1.x2+", "b2.x2+", "b1.C3", "b2.C3", "b3.C3"),
            "a.x3.C3": ("b1.x3-", "b2.x3-", "b1.C3", "b2.C3", "b3.C3"),
            "b2.C3": ("c1.C3", "c2.C3", "c3.C3"), "c3.C3": ("a.x1.C3", "a.x2.C3", "a.x3.C3"),
        }
        for x, lst in expected.items():
            assert inst.prefs[x] == lst, x
        assert detect_master_list(inst, "B") is not None and detect_master_list(inst, "C") is not None
        sigma = oracle_sat(phi)
        M = sat_assignment_to_matching(phi, sigma)
        assert validate_matching(inst, M) == []
        assert matching_to_sat_assignment(phi, M) == sigma
        better = local_improvement(inst, M, radius=3)
        if better is not None:
            print(f"matching within 3 added triples beats the constructed one by {delta(inst, better, M)}:")
            print("  dropped", sorted(M.triples - better.triples))
            print("  added  ", sorted(better.triples - M.triples))
        assert better is None


# -- 12: observation on truncated instances ---------------------------------------------------


@pytest.mark.acceptance("12", "truncated three-master-list instances: constructed matching is popular")
def test_criterion_12_truncations():
    with within(60, "criterion 12"):
        for seed in range(20):
            full = io.generate("k-masterlist", 3, 3, True, seed)
            for keep in (1, 2):
                for kept in combinations(full.A, keep):
                    inst = io.truncate(full, [a for a in full.A if a not in kept])
                    M = construct_obs1(inst)
                    assert verify(inst, M, "popular").holds
                    T = tabulate(inst)
                    assert T.popular(T.index(M))
