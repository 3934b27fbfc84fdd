"""Randomized bracket validation: sampled consistent instantiations must have
optimal values inside the reported bounds.

Sampling draws, per row, a convex combination of the polytope vertices with
exponentially distributed weights (symmetric Dirichlet) from a seeded
``random.Random``, so runs are reproducible for a fixed seed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .errors import BmdpError
from .model import Bmdp, Mdp, NaturePolicy, instantiate
from .omega import mdp_rabin_max
from .polytope import bfs_vertices
from .reach import ReachQuery, mdp_reach
from .report import CheckReport

_SLACK = 1e-6


@dataclass(frozen=True)
class BracketCounterexample:
    trial: int
    state: str
    value: float
    lower: float | None
    upper: float | None

    def __str__(self) -> str:
        lo = "-inf" if self.lower is None else f"{self.lower:.9g}"
        hi = "+inf" if self.upper is None else f"{self.upper:.9g}"
        return (
            f"trial {self.trial}: value {self.value:.9g} at {self.state} "
            f"outside [{lo}, {hi}]"
        )


@dataclass(frozen=True)
class BracketResult:
    passed: bool
    trials: int
    counterexamples: tuple[BracketCounterexample, ...]


def sample_consistent(model: Bmdp, rng: random.Random) -> Mdp:
    """Draw a random consistent point instantiation of an interval model."""
    nature = {}
    for a in range(model.n_actions):
        vertices = bfs_vertices(model.rows[a]).vertices
        weights = [-math.log(1.0 - rng.random()) for _ in vertices]
        total = sum(weights)
        dist: dict[int, float] = {}
        for w, vertex in zip(weights, vertices):
            for t, p in vertex.items():
                dist[t] = dist.get(t, 0.0) + p * w / total
        nature[a] = {t: p for t, p in dist.items() if p > 0.0}
    return instantiate(model, NaturePolicy(nature))


def validate_bracket(
    model: Bmdp, report: CheckReport, trials: int, seed: int
) -> BracketResult:
    """Check sampled instantiations against a report's bounds.

    For each trial a consistent MDP is drawn and its optimal value computed
    (maximal Rabin acceptance, or maximal reachability for reach reports);
    any value escaping ``[lower - 1e-6, upper + 1e-6]`` is a counterexample.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    targets: frozenset[int] | None = None
    if report.objective.startswith("reach"):
        names = report.objective.split()[1:]
        try:
            targets = frozenset(model.state_index(x) for x in names)
        except KeyError as exc:
            raise BmdpError(f"report target missing from model: {exc}") from exc
    rng = random.Random(seed)
    counterexamples: list[BracketCounterexample] = []
    for trial in range(trials):
        sampled = sample_consistent(model, rng)
        if targets is None:
            values = mdp_rabin_max(sampled).values
        else:
            values = mdp_reach(sampled, ReachQuery(targets, "max")).values
        for s, name in enumerate(model.state_names):
            lo = report.lower.values.get(name) if report.lower else None
            hi = report.upper.values.get(name) if report.upper else None
            value = float(values[s])
            if (lo is not None and value < lo - _SLACK) or (
                hi is not None and value > hi + _SLACK
            ):
                counterexamples.append(
                    BracketCounterexample(trial, name, value, lo, hi)
                )
    return BracketResult(not counterexamples, trials, tuple(counterexamples))
