import pickle

from itertools import permutations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import all_matchings, maximal
from strategies import instance_with_two_matchings, instances, matchings
from threedpm import (
    Instance,
    InstanceError,
    Matching,
    delta,
    detect_master_list,
    is_maximal,
    validate_matching,
    vote,
)
from threedpm import io
from threedpm.model import is_subsequence, master_list_classes, rotate_matching
from threedpm.reduce import SatInstance, reduce_sat
from threedpm.solve import enumerate_matchings


@pytest.fixture
def fig1():
    return io.fixture("fig1"), io.fixture("fig1_M"), io.fixture("fig1_Mprime")


def complete(n):
    return io.masterlist_instance(n=n)


class TestVotes:
    def test_votes_on_first_figure(self, fig1):
        inst, M, Mp = fig1
        assert vote(inst, "a2", Mp, M) == 1
        assert vote(inst, "b3", Mp, M) == -1

    def test_identity_votes_zero(self, fig1):
        inst, M, _ = fig1
        assert all(vote(inst, x, M, M) == 0 for x in inst.agents)

    def test_unmatched_is_worst(self):
        inst = complete(2)
        M = Matching([("a1", "b2", "c2")])
        assert vote(inst, "a1", M, Matching()) == 1
        assert vote(inst, "a1", Matching(), M) == -1

    def test_unknown_agent(self, fig1):
        inst, M, _ = fig1
        with pytest.raises(KeyError):
            vote(inst, "z9", M, M)

    def test_delta_values(self, fig1):
        inst, M, Mp = fig1
        assert delta(inst, Mp, M) == 3
        assert delta(inst, M, M) == 0
        fig2 = io.fixture("fig2")
        alt = Matching([("a1", "b1", "c1"), ("a2", "b2", "c3"), ("a3", "b3", "c2")])
        assert delta(fig2, alt, io.fixture("fig2_M")) == -2

    def test_foreign_matching_rejected(self, fig1):
        inst, M, _ = fig1
        with pytest.raises(ValueError):
            delta(inst, Matching([("x", "y", "z")]), M)

    @given(instance_with_two_matchings())
    def test_antisymmetry_and_bound(self, data):
        inst, M1, M2 = data
        for voters in ("all", "ab"):
            assert delta(inst, M1, M2, voters) == -delta(inst, M2, M1, voters)
        assert abs(delta(inst, M1, M2)) <= len(inst.agents)
        assert abs(delta(inst, M1, M2, "ab")) <= len(inst.A) + len(inst.B)

    @given(instance_with_two_matchings())
    def test_delta_is_sum_of_votes(self, data):
        inst, M1, M2 = data
        assert delta(inst, M1, M2) == sum(vote(inst, x, M1, M2) for x in inst.agents)
        assert delta(inst, M1, M2, "ab") == sum(vote(inst, x, M1, M2) for x in inst.A + inst.B)


class TestValidity:
    def test_figure_matching_ok(self, fig1):
        inst, M, _ = fig1
        assert validate_matching(inst, M) == []

    def test_reuse(self, fig1):
        inst, _, _ = fig1
        problems = validate_matching(inst, Matching([("a1", "b1", "c1"), ("a1", "b2", "c2")]))
        assert any("agent reused" in p for p in problems)

    def test_unacceptable(self):
        inst = Instance(["a1"], ["b1"], ["c1"], {"a1": ["b1"], "b1": [], "c1": ["a1"]})
        problems = validate_matching(inst, Matching([("a1", "b1", "c1")]))
        assert any("acceptability" in p for p in problems)

    def test_wrong_class(self, fig1):
        inst, _, _ = fig1
        assert validate_matching(inst, Matching([("b1", "a1", "c1")]))

    @given(instances(max_n=2))
    def test_accepts_exactly_enumerated(self, inst):
        ours = {frozenset(M.triples) for M in enumerate_matchings(inst)}
        assert ours == set(all_matchings(inst))
        assert all(validate_matching(inst, Matching(m)) == [] for m in ours)


class TestInstance:
    def test_cross_class_preference(self):
        with pytest.raises(InstanceError):
            Instance(["a1"], ["b1"], ["c1"], {"a1": ["c1"], "b1": [], "c1": []})

    def test_duplicate_in_list(self):
        with pytest.raises(InstanceError):
            Instance(["a1"], ["b1", "b2"], ["c1"], {"a1": ["b1", "b1"]})

    def test_duplicate_agent(self):
        with pytest.raises(InstanceError):
            Instance(["x"], ["x"], ["c1"], {})

    def test_unequal_sizes_allowed(self):
        inst = Instance(["a1"], ["b1", "b2"], ["c1", "c2", "c3"], {})
        assert not inst.equal_sizes()

    def test_pickle_round_trip(self, fig1):
        inst, M, _ = fig1
        assert pickle.loads(pickle.dumps(inst)) == inst
        assert pickle.loads(pickle.dumps(M)) == M

    @given(instances())
    def test_rotation_preserves_deltas(self, inst):
        M = Matching(inst.acceptable_triples()[:1])
        for k in (1, 2):
            R = inst.rotate(k)
            assert R.rotate(3 - k) == inst
            assert delta(R, rotate_matching(M, k), Matching()) == delta(inst, M, Matching())


class TestMaximal:
    def test_empty_not_maximal(self):
        ok, t = is_maximal(complete(1), Matching())
        assert not ok and tuple(t) == ("a1", "b1", "c1")

    def test_perfect_is_maximal(self):
        inst = complete(3)
        assert is_maximal(inst, Matching([("a1", "b2", "c3"), ("a2", "b3", "c1"), ("a3", "b1", "c2")]))[0]

    def test_second_figure(self):
        assert is_maximal(io.fixture("fig2"), io.fixture("fig2_M")) == (True, None)

    @given(instances(max_n=3).flatmap(lambda i: matchings(i).map(lambda m: (i, m))))
    def test_against_oracle(self, data):
        inst, M = data
        ok, t = is_maximal(inst, M)
        assert ok == maximal(inst, M.triples)
        if not ok:
            assert inst.is_acceptable_triple(*t) and not any(M.is_matched(x) for x in t)


class TestMasterList:
    def test_identical_lists(self):
        inst = complete(3)
        ml = detect_master_list(inst, "A")
        assert ml.order == ("b1", "b2", "b3")

    def test_two_cycle(self):
        inst = Instance(["a1", "a2"], ["b1", "b2"], [], {"a1": ["b1", "b2"], "a2": ["b2", "b1"]})
        assert detect_master_list(inst, "A") is None

    def test_lexicographic_tie_break(self):
        inst = Instance(["a1", "a2"], ["b1", "b2", "b3"], [], {"a1": ["b3"], "a2": ["b2"]})
        assert detect_master_list(inst, 0).order == ("b1", "b2", "b3")

    def test_reduction_output_has_master_lists_on_b_and_c(self):
        phi = SatInstance(["x1", "x2", "x3"], [
            [("x1", True), ("x2", True), ("x3", True)],
            [("x1", True), ("x2", True), ("x3", True)],
            [("x1", False), ("x2", False), ("x3", False)],
            [("x1", False), ("x2", False), ("x3", False)],
        ])
        inst = reduce_sat(phi)
        assert detect_master_list(inst, "B") is not None
        assert detect_master_list(inst, "C") is not None

    @given(instances(max_n=3, complete=False))
    def test_replay(self, inst):
        for k in range(3):
            ml = detect_master_list(inst, k)
            if ml is not None:
                assert sorted(ml.order) == sorted(inst.classes[(k + 1) % 3])
                assert all(is_subsequence(inst.prefs[x], ml.order) for x in inst.classes[k])
            else:
                target = inst.classes[(k + 1) % 3]
                assert not any(all(is_subsequence(inst.prefs[x], order) for x in inst.classes[k])
                               for order in permutations(target))

    @given(st.integers(0, 2**64 - 1))
    def test_generator_master_classes(self, seed):
        for k in range(4):
            inst = io.generate("k-masterlist", 3, k, True, seed)
            assert master_list_classes(inst) == list(range(k))
