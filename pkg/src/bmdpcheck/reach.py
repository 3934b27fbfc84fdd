"""Quantitative reachability: exact chain solving, optimal MDP reachability,
and robust reachability on interval models.

Value iteration is seeded with the qualitative 0/1 sets, then the extracted
strategy pair is re-evaluated by an exact linear solve and checked against
the Bellman operator; the returned values are that exact evaluation, so the
reported optimum is attained by the reported policies to solver precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import ConvergenceError, SolverInternalError
from .graph import bmdp_qualitative_reach, qualitative_reach
from .model import (
    Bmdp,
    Distribution,
    Mdp,
    NaturePolicy,
    PositionalPolicy,
    Sense,
    StochasticGame,
)
from .polytope import extreme_distribution

_TIE_TOL = 1e-11
_ZERO_TOL = 1e-12
_BELLMAN_TOL = 1e-11
_MAX_REFINE_ROUNDS = 100


@dataclass(frozen=True)
class ReachQuery:
    """Parameters of one reachability analysis."""

    target: frozenset[int]
    controller_sense: Sense = "max"
    nature_sense: Sense | None = None
    epsilon: float = 1e-10
    max_iterations: int = 10**6


@dataclass(frozen=True)
class ReachResult:
    values: np.ndarray
    policy: PositionalPolicy
    iterations: int


@dataclass(frozen=True)
class RobustReachResult:
    values: np.ndarray
    policy: PositionalPolicy
    nature: NaturePolicy
    iterations: int


def _chain_reach_exact(
    n: int, dist_of: list[Distribution], target: set[int]
) -> np.ndarray:
    """Exact reach probabilities in a chain given per-state distributions.

    Target states are treated as absorbing.  After 0/1 classification the
    remaining linear system is non-singular and solved directly.
    """
    preds: list[list[int]] = [[] for _ in range(n)]
    for s in range(n):
        if s in target:
            continue
        for t in dist_of[s]:
            preds[t].append(s)

    def backward(seed: Iterable[int]) -> set[int]:
        seen = set(seed)
        stack = list(seen)
        while stack:
            t = stack.pop()
            for s in preds[t]:
                if s not in seen:
                    seen.add(s)
                    stack.append(s)
        return seen

    can_reach = backward(target)
    prob0 = set(range(n)) - can_reach
    prob1 = set(range(n)) - backward(prob0)
    middle = sorted(set(range(n)) - prob0 - prob1)
    values = np.zeros(n)
    values[sorted(prob1)] = 1.0
    if middle:
        idx = {s: i for i, s in enumerate(middle)}
        k = len(middle)
        mat = np.eye(k)
        rhs = np.zeros(k)
        for s in middle:
            i = idx[s]
            for t, p in dist_of[s].items():
                if t in idx:
                    mat[i, idx[t]] -= p
                elif t in prob1:
                    rhs[i] += p
        try:
            sol = np.linalg.solve(mat, rhs)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - classification prevents this
            raise SolverInternalError(
                "singular reachability system after 0/1 classification"
            ) from exc
        values[middle] = np.clip(sol, 0.0, 1.0)
    return values


def mc_reach_exact(mc: Mdp, target: Iterable[int]) -> np.ndarray:
    """Exact probabilities of reaching the target set in a Markov chain."""
    if not mc.is_markov_chain:
        raise ValueError("mc_reach_exact expects a Markov chain")
    dist_of = [mc.dists[mc.available[s][0]] for s in range(mc.n_states)]
    return _chain_reach_exact(mc.n_states, dist_of, set(target))


# ---------------------------------------------------------------------------
# Shared optimizer for point and interval models.


class _MdpEngine:
    """One-step lookahead over a point MDP."""

    def __init__(self, mdp: Mdp):
        self.mdp = mdp

    def qval(self, action: int, v: np.ndarray) -> float:
        return sum(p * v[t] for t, p in self.mdp.dists[action].items())

    def dist_for(self, action: int, v: np.ndarray, prefer) -> Distribution:
        return self.mdp.dists[action]


class _BmdpEngine:
    """One-step lookahead where nature resolves each row to an extreme
    distribution in its own sense."""

    def __init__(self, model: Bmdp, nature_sense: Sense):
        self.model = model
        self.nature_sense = nature_sense

    def qval(self, action: int, v: np.ndarray) -> float:
        dist = extreme_distribution(self.model.rows[action], v, self.nature_sense)
        return sum(p * v[t] for t, p in dist.items())

    def dist_for(self, action: int, v: np.ndarray, prefer) -> Distribution:
        pref = prefer if self.nature_sense == "max" else None
        return extreme_distribution(
            self.model.rows[action], v, self.nature_sense, prefer=pref
        )


def _validate_query(n: int, query: ReachQuery) -> None:
    if not query.target:
        raise ValueError("target set must be nonempty")
    if not all(0 <= s < n for s in query.target):
        raise ValueError("target contains unknown state indices")
    if query.epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if query.controller_sense not in ("max", "min"):
        raise ValueError(f"bad controller sense {query.controller_sense!r}")


def _value_iteration(
    n: int,
    available,
    engine,
    query: ReachQuery,
    prob0: frozenset[int],
    prob1: frozenset[int],
) -> tuple[np.ndarray, int]:
    sense = query.controller_sense
    v = np.zeros(n)
    v[sorted(prob1)] = 1.0
    middle = [s for s in range(n) if s not in prob0 and s not in prob1]
    iterations = 0
    delta = float("inf")
    while middle and delta >= query.epsilon:
        if iterations >= query.max_iterations:
            raise ConvergenceError(
                f"value iteration did not converge within {query.max_iterations} sweeps "
                f"(residual {delta:.3e})",
                values=v,
                residual=delta,
            )
        iterations += 1
        nv = v.copy()
        delta = 0.0
        for s in middle:
            qs = [engine.qval(a, v) for a in available[s]]
            best = max(qs) if sense == "max" else min(qs)
            nv[s] = best
            delta = max(delta, abs(best - v[s]))
        # Iterates climb from the 0-seed regardless of sense.
        assert np.all(nv >= v - 1e-12), "value iteration sweep decreased"
        v = nv
    return v, iterations


def _extract_pair(
    n: int,
    available,
    engine,
    u: np.ndarray,
    sense: Sense,
    target: set[int],
) -> tuple[dict[int, int], dict[int, Distribution]]:
    """Deterministic greedy policy extraction with progress layering.

    States are assigned outward from the target; among value-optimal actions
    (and, for a cooperating nature, among value-tied extreme distributions)
    the choice must put positive mass on already-assigned states.  This rules
    out value-preserving cycles that would never reach the target.
    """
    choice: dict[int, int] = {}
    dists: dict[int, Distribution] = {}
    assigned = set(target)
    pending: list[tuple[int, list[int]]] = []
    for s in range(n):
        if s in target:
            a = available[s][0]
            choice[s] = a
            dists[s] = engine.dist_for(a, u, None)
            continue
        qs = {a: engine.qval(a, u) for a in available[s]}
        if sense == "max":
            best = max(qs.values())
            cands = [a for a in available[s] if qs[a] >= best - _TIE_TOL]
        else:
            best = min(qs.values())
            cands = [a for a in available[s] if qs[a] <= best + _TIE_TOL]
        if u[s] <= _ZERO_TOL:
            a = cands[0]
            choice[s] = a
            dists[s] = engine.dist_for(a, u, None)
            continue
        pending.append((s, cands))
    while pending:
        progressed = False
        still: list[tuple[int, list[int]]] = []
        frozen = frozenset(assigned)
        for s, cands in pending:
            done = False
            for a in cands:
                d = engine.dist_for(a, u, frozen)
                if any(t in assigned for t in d):
                    choice[s] = a
                    dists[s] = d
                    assigned.add(s)
                    progressed = done = True
                    break
            if not done:
                still.append((s, cands))
            else:
                frozen = frozenset(assigned)
        pending = still
        if not progressed:
            break
    for s, cands in pending:  # only reachable before the evaluation stabilizes
        a = cands[0]
        choice[s] = a
        dists[s] = engine.dist_for(a, u, None)
    return choice, dists


def _solve(
    n: int,
    available,
    engine,
    query: ReachQuery,
    prob0: frozenset[int],
    prob1: frozenset[int],
):
    target = set(query.target)
    sense = query.controller_sense
    v, iterations = _value_iteration(n, available, engine, query, prob0, prob1)
    u = v
    prev: np.ndarray | None = None
    for _ in range(_MAX_REFINE_ROUNDS):
        choice, dists = _extract_pair(n, available, engine, u, sense, target)
        u_new = _chain_reach_exact(n, [dists[s] for s in range(n)], target)
        if prev is not None:
            drift = u_new - prev
            if sense == "max" and drift.min() < -1e-9:
                raise SolverInternalError("policy refinement regressed (max)")
            if sense == "min" and drift.max() > 1e-9:
                raise SolverInternalError("policy refinement regressed (min)")
        residual = 0.0
        for s in range(n):
            if s in target:
                continue
            qs = [engine.qval(a, u_new) for a in available[s]]
            best = max(qs) if sense == "max" else min(qs)
            residual = max(residual, abs(best - u_new[s]))
        if residual <= _BELLMAN_TOL and prev is not None and np.allclose(
            u_new, prev, atol=1e-12, rtol=0.0
        ):
            return u_new, choice, dists, iterations
        if residual <= _BELLMAN_TOL and prev is None:
            prev = u_new
            u = u_new
            continue
        prev = u_new
        u = u_new
    raise SolverInternalError("policy refinement did not stabilize")


def mdp_reach(mdp: Mdp, query: ReachQuery) -> ReachResult:
    """Optimal reachability value and positional policy in a point MDP."""
    _validate_query(mdp.n_states, query)
    game = StochasticGame(mdp, owner=(1,) * mdp.n_states)
    prob0, prob1 = qualitative_reach(
        game, query.target, query.controller_sense, query.controller_sense
    )
    engine = _MdpEngine(mdp)
    values, choice, _, iterations = _solve(
        mdp.n_states, mdp.available, engine, query, prob0, prob1
    )
    return ReachResult(values, PositionalPolicy(choice), iterations)


def bmdp_reach(model: Bmdp, query: ReachQuery) -> RobustReachResult:
    """Robust reachability on an interval model.

    Each sweep resolves nature greedily to an extreme distribution of each
    row and the controller to the best action.  Returns the value vector,
    the controller policy and the nature policy of chosen extreme
    distributions, each of which is a vertex of its row polytope.
    """
    _validate_query(model.n_states, query)
    if query.nature_sense not in ("max", "min"):
        raise ValueError("bmdp_reach needs a nature sense ('max' or 'min')")
    prob0, prob1 = bmdp_qualitative_reach(
        model, query.target, query.controller_sense, query.nature_sense
    )
    engine = _BmdpEngine(model, query.nature_sense)
    values, choice, dists, iterations = _solve(
        model.n_states, model.available, engine, query, prob0, prob1
    )
    nature: dict[int, Distribution] = {}
    for a in range(model.n_actions):
        s = model.action_owner[a]
        if choice.get(s) == a:
            nature[a] = dict(dists[s])
        else:
            nature[a] = extreme_distribution(model.rows[a], values, query.nature_sense)
    return RobustReachResult(
        values, PositionalPolicy(choice), NaturePolicy(nature), iterations
    )
