"""Probe the SAT gadget's designated matching for improvements that add few triples.

For every satisfiable random formula the matching built from a satisfying
assignment is searched for a more popular matching that adds at most
``--radius`` triples. Any hit is printed with its votes.
"""
import argparse

from threedpm.model import delta, tally
from threedpm.experiments import GadgetProbeConfig, probe_sat_gadget
from threedpm.reduce import reduce_sat, sat_assignment_to_matching


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--variables", type=int, default=3)
    p.add_argument("--formulas", type=int, default=20)
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--show", type=int, default=1, help="print this many improvements in full")
    a = p.parse_args()
    cfg = GadgetProbeConfig(a.variables, a.formulas, a.radius, a.seed)
    beaten = shown = 0
    for probe in probe_sat_gadget(cfg):
        if probe.improvement is None:
            continue
        beaten += 1
        if shown < a.show:
            shown += 1
            inst = reduce_sat(probe.formula)
            M = sat_assignment_to_matching(probe.formula, probe.sigma)
            Mp = probe.improvement
            print("formula:", probe.formula.clauses)
            print("assignment:", probe.sigma)
            print("  dropped:", sorted(tuple(t) for t in set(M) - set(Mp)))
            print("  added:  ", sorted(tuple(t) for t in set(Mp) - set(M)))
            print(f"  votes {tally(inst, Mp, M)}, delta {delta(inst, Mp, M)}")
    print(f"{beaten} of {cfg.formulas} designated matchings beaten within {cfg.radius} added triples")


if __name__ == "__main__":
    main()
