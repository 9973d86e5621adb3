"""Seeded batch experiments shared by the scripts in ``scripts/``."""
from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field

from . import io
from .model import Matching
from .reduce import SatInstance, oracle_sat, reduce_sat, sat_assignment_to_matching
from .solve import solve
from .verify import SearchLimitExceeded, local_improvement


@dataclass(frozen=True)
class SurveyConfig:
    """Which instances to draw and which properties to look for."""

    kind: str = "random"
    n: int = 3
    k: int = 0
    complete: bool = True
    seeds: range = range(50)
    properties: tuple[str, ...] = ("weak-stable", "strong-stable", "popular", "strong-popular")
    max_nodes: int | None = 2_000_000


@dataclass
class SurveyResult:
    config: SurveyConfig
    found: Counter = field(default_factory=Counter)
    absent: Counter = field(default_factory=Counter)
    aborted: Counter = field(default_factory=Counter)
    # seeds of instances with no popular matching, handy for follow-up
    no_popular: list[int] = field(default_factory=list)

    def rows(self) -> list[tuple[str, int, int, int]]:
        return [(p, self.found[p], self.absent[p], self.aborted[p]) for p in self.config.properties]


def run_survey(cfg: SurveyConfig) -> SurveyResult:
    """Count how many generated instances admit each property."""
    res = SurveyResult(cfg)
    for seed in cfg.seeds:
        inst = io.generate(cfg.kind, cfg.n, cfg.k, cfg.complete, seed)
        for prop in cfg.properties:
            try:
                M = solve(inst, prop, "brute", max_nodes=cfg.max_nodes)
            except SearchLimitExceeded:
                res.aborted[prop] += 1
                continue
            if M is None:
                res.absent[prop] += 1
                if prop == "popular":
                    res.no_popular.append(seed)
            else:
                res.found[prop] += 1
    return res


@dataclass(frozen=True)
class GadgetProbeConfig:
    """Random formulas fed through the SAT gadget, then probed for local improvements.

    ``variables`` must be a multiple of 3 so the literal occurrences fill
    whole clauses.
    """

    variables: int = 3
    formulas: int = 20
    radius: int = 2
    seed: int = 0


@dataclass
class GadgetProbe:
    formula: SatInstance
    sigma: dict[str, bool]
    improvement: Matching | None


def random_formula(rng: random.Random, variables: int) -> SatInstance:
    """Each variable twice positive and twice negative, three distinct variables per clause."""
    if variables % 3:
        raise ValueError("number of variables must be a multiple of 3")
    names = [f"x{i}" for i in range(1, variables + 1)]
    lits = [(v, s) for v in names for s in (True, True, False, False)]
    while True:
        rng.shuffle(lits)
        rows = [tuple(lits[i:i + 3]) for i in range(0, len(lits), 3)]
        if all(len({v for v, _ in r}) == 3 for r in rows):
            return SatInstance(names, rows)


def probe_sat_gadget(cfg: GadgetProbeConfig):
    """Yield one probe per satisfiable formula: the assignment's matching and any local improvement."""
    rng = random.Random(cfg.seed)
    made = 0
    while made < cfg.formulas:
        phi = random_formula(rng, cfg.variables)
        sigma = oracle_sat(phi)
        if sigma is None:
            continue
        made += 1
        inst = reduce_sat(phi)
        M = sat_assignment_to_matching(phi, sigma)
        yield GadgetProbe(phi, sigma, local_improvement(inst, M, radius=cfg.radius))
