import random
from collections import Counter

from oracles import tabulate
from threedpm import io
from threedpm.experiments import GadgetProbeConfig, SurveyConfig, probe_sat_gadget, random_formula, run_survey


def test_survey_counts_match_oracle():
    cfg = SurveyConfig(n=2, seeds=range(15), properties=("popular", "strong-popular"))
    res = run_survey(cfg)
    want = Counter()
    for seed in cfg.seeds:
        T = tabulate(io.generate("random", 2, 0, True, seed))
        want["popular"] += any(T.popular(i) for i in range(len(T.matchings)))
        want["strong-popular"] += any(T.strongly_popular(i) for i in range(len(T.matchings)))
    for prop in cfg.properties:
        assert res.found[prop] == want[prop]
        assert res.found[prop] + res.absent[prop] == 15


def test_random_formula_is_balanced():
    phi = random_formula(random.Random(3), 6)
    phi.check_22e3()
    assert len(phi.clauses) == 8


def test_probe_is_reproducible():
    cfg = GadgetProbeConfig(formulas=3, radius=1)
    a = [(p.formula, p.improvement) for p in probe_sat_gadget(cfg)]
    b = [(p.formula, p.improvement) for p in probe_sat_gadget(cfg)]
    assert a == b and len(a) == 3
