"""How often generated instances admit each kind of matching."""
import argparse

from threedpm import io
from threedpm.experiments import SurveyConfig, run_survey


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--kind", choices=io.GENERATOR_KINDS, default="random")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--incomplete", action="store_true")
    p.add_argument("--seeds", type=int, default=50)
    p.add_argument("--max-nodes", type=int, default=2_000_000)
    a = p.parse_args()
    cfg = SurveyConfig(a.kind, a.n, a.k, not a.incomplete, range(a.seeds), max_nodes=a.max_nodes)
    res = run_survey(cfg)
    print(f"{'property':16} {'found':>6} {'absent':>6} {'aborted':>7}")
    for prop, f, n, x in res.rows():
        print(f"{prop:16} {f:6} {n:6} {x:7}")
    if res.no_popular:
        print("seeds without a popular matching:", " ".join(map(str, res.no_popular)))


if __name__ == "__main__":
    main()
