"""Rabin-objective solving: MDP model checking, the interval-model-to-game
reduction, the game-based lower-bound procedure, the polynomial upper-bound
procedure, and a brute-force oracle for testing.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import SizeGuardError, SolverInternalError
from .graph import (
    EndComponent,
    _sccs,
    bmdp_mec_decomposition,
    bsccs,
    mec_decomposition,
    row_can_put_mass,
)
from .model import (
    Bmdp,
    Distribution,
    IntervalRow,
    Mdp,
    NaturePolicy,
    PositionalPolicy,
    ProbInterval,
    RabinPair,
    Sense,
    StochasticGame,
    instantiate,
    restrict_actions,
)
from .polytope import bfs_vertices, extreme_distribution
from .reach import ReachQuery, _chain_reach_exact, bmdp_reach, mdp_reach

log = logging.getLogger(__name__)

_IMPROVE_TOL = 1e-9
_EXHAUSTIVE_THRESHOLD = 4096


@dataclass(frozen=True)
class RabinResult:
    values: np.ndarray
    policy: PositionalPolicy


@dataclass(frozen=True)
class SgResult:
    values: np.ndarray
    controller: PositionalPolicy
    opponent: PositionalPolicy


@dataclass(frozen=True)
class GameResult:
    """Values on original states plus the strategies and instantiation
    witnessing them."""

    values: np.ndarray
    controller: PositionalPolicy
    nature: NaturePolicy
    witness: Mdp


# ---------------------------------------------------------------------------
# Exact Rabin evaluation of Markov chains.


def _accepting_bscc_states(
    n: int, dist_of: list[Distribution], pairs: Iterable[RabinPair]
) -> set[int]:
    def succ(s: int):
        return dist_of[s].keys()

    accepting: set[int] = set()
    for comp in _sccs(range(n), succ):
        if not all(t in comp for s in comp for t in succ(s)):
            continue
        if any(not (comp & p.fin) and (comp & p.inf) for p in pairs):
            accepting |= comp
    return accepting


def _chain_rabin_values(
    n: int, dist_of: list[Distribution], pairs: Iterable[RabinPair]
) -> np.ndarray:
    target = _accepting_bscc_states(n, dist_of, pairs)
    if not target:
        return np.zeros(n)
    return _chain_reach_exact(n, dist_of, target)


def mc_rabin_values(mc: Mdp) -> np.ndarray:
    """Exact acceptance probabilities of a Markov chain.

    A bottom SCC is accepting iff some pair misses it with F and meets it
    with I; the value is the probability of reaching an accepting BSCC.
    """
    if not mc.is_markov_chain:
        raise ValueError("mc_rabin_values expects a Markov chain")
    dist_of = [mc.dists[mc.available[s][0]] for s in range(mc.n_states)]
    return _chain_rabin_values(mc.n_states, dist_of, mc.acceptance)


# ---------------------------------------------------------------------------
# In-component steering: positional choices that keep a run inside an end
# component while visiting a base set infinitely often.


def _steer_mdp_component(
    mdp: Mdp, ec: EndComponent, base: set[int]
) -> dict[int, int]:
    choice: dict[int, int] = {}
    assigned = set(base)
    for s in sorted(ec.states & base):
        staying = sorted(a for a in mdp.available[s] if a in ec.actions)
        choice[s] = staying[0]
    pending = sorted(ec.states - base)
    while pending:
        progressed = False
        still = []
        for s in pending:
            picked = None
            for a in sorted(a for a in mdp.available[s] if a in ec.actions):
                if any(t in assigned for t in mdp.dists[a]):
                    picked = a
                    break
            if picked is None:
                still.append(s)
            else:
                choice[s] = picked
                assigned.add(s)
                progressed = True
        pending = still
        if not progressed:  # pragma: no cover - ECs are internally connected
            raise SolverInternalError("end component steering failed to progress")
    return choice


def _steer_bmdp_component(
    model: Bmdp, ec: EndComponent, base: set[int]
) -> tuple[dict[int, int], dict[int, Distribution]]:
    """Controller actions and cooperative nature vertices that confine runs
    to the component and reach the base set with positive probability."""
    n = model.n_states
    choice: dict[int, int] = {}
    nature: dict[int, Distribution] = {}
    assigned = set(base)

    def confined_extreme(a: int, prefer: set[int]) -> Distribution:
        w = np.zeros(n)
        for t in ec.states:
            w[t] = 1.0
        d = extreme_distribution(
            model.rows[a], w, "max", prefer=frozenset(prefer | base)
        )
        return d

    for s in sorted(ec.states & base):
        staying = sorted(a for a in model.available[s] if a in ec.actions)
        a = staying[0]
        choice[s] = a
        nature[a] = confined_extreme(a, assigned)
    pending = sorted(ec.states - base)
    while pending:
        progressed = False
        still = []
        for s in pending:
            picked = None
            for a in sorted(a for a in model.available[s] if a in ec.actions):
                d = confined_extreme(a, assigned)
                if any(t in assigned for t in d):
                    picked = (a, d)
                    break
            if picked is None:
                still.append(s)
            else:
                choice[s], nature[picked[0]] = picked[0], picked[1]
                assigned.add(s)
                progressed = True
        pending = still
        if not progressed:  # pragma: no cover - ECs are internally connected
            raise SolverInternalError("interval end component steering failed")
    return choice, nature


# ---------------------------------------------------------------------------
# Rabin objectives on point MDPs.


def mdp_rabin_max(mdp: Mdp) -> RabinResult:
    """Maximal acceptance probability and an optimal positional policy.

    For each pair the states avoiding F are decomposed into end components;
    components meeting I are winning, and the value is the maximal
    probability of reaching their union.
    """
    n = mdp.n_states
    winning: list[tuple[RabinPair, EndComponent]] = []
    wstates: set[int] = set()
    for pair in mdp.acceptance:
        allowed = set(range(n)) - pair.fin
        if not allowed:
            continue
        for ec in mec_decomposition(mdp, states=allowed):
            if ec.states & pair.inf:
                winning.append((pair, ec))
                wstates |= ec.states
    if not wstates:
        policy = {s: mdp.available[s][0] for s in range(n)}
        return RabinResult(np.zeros(n), PositionalPolicy(policy))
    res = mdp_reach(mdp, ReachQuery(frozenset(wstates), "max"))
    choice = dict(res.policy.choice)
    claimed: set[int] = set()
    for pair, ec in winning:
        fresh = ec.states - claimed
        if not fresh:
            continue
        base = (ec.states & pair.inf) | (ec.states & claimed)
        steer = _steer_mdp_component(mdp, ec, base)
        for s in fresh:
            choice[s] = steer[s]
        claimed |= ec.states
    return RabinResult(res.values, PositionalPolicy(choice))


def _streett_good_ecs(mdp: Mdp, pairs: tuple[RabinPair, ...]) -> list[EndComponent]:
    """End components in which the complement (Streett) condition can be
    satisfied almost surely: every pair with I inside the component also has
    F inside it."""
    work = list(mec_decomposition(mdp))
    good: list[EndComponent] = []
    while work:
        ec = work.pop()
        bad = [p for p in pairs if (ec.states & p.inf) and not (ec.states & p.fin)]
        if not bad:
            good.append(ec)
            continue
        remove: set[int] = set()
        for p in bad:
            remove |= p.inf
        rest = ec.states - remove
        if rest:
            work.extend(mec_decomposition(mdp, states=rest))
    good.sort(key=lambda ec: min(ec.states))
    return good


def mdp_rabin_min(mdp: Mdp) -> RabinResult:
    """Minimal acceptance probability over all policies, with a positional
    witness policy.

    Computed as 1 minus the maximal probability of the complement condition,
    via good-component decomposition and a reachability query.  The witness
    attains the value whenever each good component requires at most one F
    set to be visited infinitely often (always the case for single-pair
    acceptance); with several such obligations a positional policy cannot
    alternate and the witness is best-effort while the value stays exact.
    """
    n = mdp.n_states
    good = _streett_good_ecs(mdp, mdp.acceptance)
    gstates: set[int] = set()
    for ec in good:
        gstates |= ec.states
    if not gstates:
        policy = {s: mdp.available[s][0] for s in range(n)}
        return RabinResult(np.ones(n), PositionalPolicy(policy))
    res = mdp_reach(mdp, ReachQuery(frozenset(gstates), "max"))
    choice = dict(res.policy.choice)
    claimed: set[int] = set()
    for ec in good:
        fresh = ec.states - claimed
        if not fresh:
            continue
        needed: set[int] = set()
        for p in mdp.acceptance:
            if ec.states & p.inf:
                needed |= ec.states & p.fin
        base = (needed | (ec.states & claimed)) if needed else set()
        if base:
            steer = _steer_mdp_component(mdp, ec, base)
        else:
            steer = {
                s: sorted(a for a in mdp.available[s] if a in ec.actions)[0]
                for s in ec.states
            }
        for s in fresh:
            choice[s] = steer[s]
        claimed |= ec.states
    return RabinResult(1.0 - res.values, PositionalPolicy(choice))


# ---------------------------------------------------------------------------
# The interval-model-to-game reduction.


def build_game(model: Bmdp) -> StochasticGame:
    """Explicit stochastic game whose values bracket the interval model.

    Original states keep their actions, each now moving deterministically to
    an intermediate environment-owned state; there the environment picks one
    vertex of the row polytope.  Acceptance stays on original states, so the
    intermediate states are neutral for every pair.
    """
    n = model.n_states
    state_names = list(model.state_names)
    for a in range(model.n_actions):
        s = model.action_owner[a]
        state_names.append(f"{model.state_names[s]}@{model.action_names[a]}")
    action_names = list(model.action_names)
    action_owner = list(model.action_owner)
    dists: list[Distribution] = [{n + a: 1.0} for a in range(model.n_actions)]
    available = [tuple(acts) for acts in model.available]
    vertex_avail: list[tuple[int, ...]] = []
    for a in range(model.n_actions):
        vset = bfs_vertices(model.rows[a])
        indices = []
        for k, vertex in enumerate(vset.vertices):
            indices.append(len(action_names))
            action_names.append(f"{model.action_names[a]}[{k}]")
            action_owner.append(n + a)
            dists.append(dict(vertex))
        vertex_avail.append(tuple(indices))
    mdp = Mdp(
        state_names=tuple(state_names),
        initial=model.initial,
        action_names=tuple(action_names),
        action_owner=tuple(action_owner),
        available=tuple(available) + tuple(vertex_avail),
        dists=tuple(dists),
        acceptance=model.acceptance,
    )
    owner = tuple(1 if s < n else 2 for s in range(len(state_names)))
    return StochasticGame(mdp, owner)


def _eval_fixed_controller(
    game: StochasticGame, pol1: Mapping[int, int]
) -> tuple[np.ndarray, dict[int, int]]:
    """Value of a fixed player-1 policy against an optimal opponent, plus the
    opponent's best response."""
    chosen = {s: (pol1[s],) for s in game.states_of(1)}
    sub, amap = restrict_actions(game.mdp, chosen)
    res = mdp_rabin_min(sub)
    pol2 = {s: amap[res.policy[s]] for s in game.states_of(2)}
    return res.values, pol2


def sg_rabin(game: StochasticGame, player2_sense: Sense) -> SgResult:
    """Value of the Rabin game for a maximizing player 1.

    A cooperating player 2 reduces to a single MDP.  Against an adversarial
    player 2, player-1 positional strategies are improved by switching to
    one-step better actions, each candidate evaluated exactly by the minimal
    Rabin value of the fixed-policy MDP; small strategy spaces are verified
    exhaustively.
    """
    mdp = game.mdp
    if player2_sense == "max":
        res = mdp_rabin_max(mdp)
        pol1 = {s: res.policy[s] for s in game.states_of(1)}
        pol2 = {s: res.policy[s] for s in game.states_of(2)}
        return SgResult(res.values, PositionalPolicy(pol1), PositionalPolicy(pol2))
    if player2_sense != "min":
        raise ValueError(f"bad player-2 sense {player2_sense!r}")

    p1 = game.states_of(1)
    pol1 = {s: mdp.available[s][0] for s in p1}
    values, pol2 = _eval_fixed_controller(game, pol1)
    seen = {tuple(pol1[s] for s in p1)}
    while True:
        new = dict(pol1)
        switched = False
        for s in p1:
            qs = {
                a: sum(p * values[t] for t, p in mdp.dists[a].items())
                for a in mdp.available[s]
            }
            best = max(qs.values())
            if best > qs[pol1[s]] + _IMPROVE_TOL:
                new[s] = next(a for a in mdp.available[s] if qs[a] == best)
                switched = True
        if not switched:
            break
        new_values, pol2 = _eval_fixed_controller(game, new)
        if np.min(new_values - values) < -_IMPROVE_TOL:
            raise SolverInternalError(
                "strategy improvement regressed: "
                f"{values.tolist()} -> {new_values.tolist()}"
            )
        key = tuple(new[s] for s in p1)
        if key in seen:
            raise SolverInternalError(
                f"strategy improvement revisited policy {key} without progress"
            )
        seen.add(key)
        pol1, values = new, new_values

    space = 1
    for s in p1:
        space *= len(mdp.available[s])
    if space <= _EXHAUSTIVE_THRESHOLD:
        values, pol1, pol2 = _exhaustive_min(game, values, pol1, pol2)
    return SgResult(values, PositionalPolicy(pol1), PositionalPolicy(pol2))


def _exhaustive_min(game, values, pol1, pol2):
    """Enumerate all player-1 positional policies and keep the pointwise
    best; corrects a locally-stuck improvement result if needed."""
    mdp = game.mdp
    p1 = game.states_of(1)
    results = []
    vmax = np.array(values)
    for combo in itertools.product(*[mdp.available[s] for s in p1]):
        cand = dict(zip(p1, combo))
        v, opp = _eval_fixed_controller(game, cand)
        results.append((v, cand, opp))
        vmax = np.maximum(vmax, v)
    if np.max(vmax - values) <= _IMPROVE_TOL:
        return values, pol1, pol2
    log.debug("strategy improvement was %.3g below the exhaustive optimum",
              float(np.max(vmax - values)))
    for v, cand, opp in results:
        if np.min(v - vmax) >= -_IMPROVE_TOL:
            return v, cand, opp
    raise SolverInternalError(
        "no single positional policy attains the pointwise optimum"
    )


# ---------------------------------------------------------------------------
# Bounds on interval models.


def bmdp_lower(model: Bmdp) -> GameResult:
    """Optimal lower bound: the controller maximizes acceptance while the
    intervals are resolved adversarially.

    Solves the induced game, then materializes the worst-case instantiation
    from the environment's vertex choices.
    """
    game = build_game(model)
    sol = sg_rabin(game, "min")
    n = model.n_states
    controller = {s: sol.controller[s] for s in range(n)}
    nature: dict[int, Distribution] = {}
    for a in range(model.n_actions):
        g = sol.opponent[n + a]
        nature[a] = dict(game.mdp.dists[g])
    nature_policy = NaturePolicy(nature)
    witness = instantiate(model, nature_policy)
    values = np.clip(sol.values[:n], 0.0, 1.0)
    return GameResult(values, PositionalPolicy(controller), nature_policy, witness)


@dataclass(frozen=True)
class PairAnalysis:
    """End components found for one acceptance pair after making its F set
    absorbing, and the winning ones among them."""

    pair_index: int
    components: tuple[EndComponent, ...]
    winning: tuple[EndComponent, ...]


@dataclass(frozen=True)
class UpperAnalysis:
    pairs: tuple[PairAnalysis, ...]
    winning_states: frozenset[int]


def _absorb_states(model: Bmdp, states: frozenset[int]) -> Bmdp:
    rows = list(model.rows)
    for a in range(model.n_actions):
        s = model.action_owner[a]
        if s in states:
            rows[a] = IntervalRow(
                source=s, action=a, bounds={s: ProbInterval(1.0, 1.0)}
            )
    return Bmdp(
        state_names=model.state_names,
        initial=model.initial,
        action_names=model.action_names,
        action_owner=model.action_owner,
        available=model.available,
        rows=tuple(rows),
        acceptance=model.acceptance,
    )


def upper_winning_analysis(model: Bmdp) -> UpperAnalysis:
    """Winning end components of the cooperative (upper-bound) analysis."""
    per: list[PairAnalysis] = []
    wstates: set[int] = set()
    for i, pair in enumerate(model.acceptance):
        absorbed = _absorb_states(model, pair.fin)
        mecs = bmdp_mec_decomposition(absorbed)
        winning = tuple(ec for ec in mecs if ec.states & pair.inf)
        per.append(PairAnalysis(i, tuple(mecs), winning))
        for ec in winning:
            wstates |= ec.states
    return UpperAnalysis(tuple(per), frozenset(wstates))


def bmdp_upper(model: Bmdp) -> GameResult:
    """Optimal upper bound: controller and intervals cooperate.

    Per pair, F states are made absorbing and the interval end components
    meeting I are collected as winning; the value is the cooperative maximal
    probability of reaching them.  The explicit game is never constructed.
    """
    n = model.n_states
    analysis = upper_winning_analysis(model)
    wstates = analysis.winning_states
    if not wstates:
        values = np.zeros(n)
        controller = {s: model.available[s][0] for s in range(n)}
        nature = {
            a: extreme_distribution(model.rows[a], values, "max")
            for a in range(model.n_actions)
        }
        nature_policy = NaturePolicy(nature)
        return GameResult(
            values,
            PositionalPolicy(controller),
            nature_policy,
            instantiate(model, nature_policy),
        )
    res = bmdp_reach(
        model, ReachQuery(frozenset(wstates), "max", nature_sense="max")
    )
    choice = dict(res.policy.choice)
    nature = {a: dict(d) for a, d in res.nature.choice.items()}
    claimed: set[int] = set()
    for pa in analysis.pairs:
        pair = model.acceptance[pa.pair_index]
        for ec in pa.winning:
            fresh = ec.states - claimed
            if not fresh:
                continue
            base = (ec.states & pair.inf) | (ec.states & claimed)
            steer_choice, steer_nature = _steer_bmdp_component(model, ec, base)
            for s in fresh:
                choice[s] = steer_choice[s]
                nature[steer_choice[s]] = steer_nature[steer_choice[s]]
            claimed |= ec.states
    nature_policy = NaturePolicy(nature)
    witness = instantiate(model, nature_policy)
    return GameResult(res.values, PositionalPolicy(choice), nature_policy, witness)


# ---------------------------------------------------------------------------
# Brute-force oracle.


def brute_force_value(
    model: Bmdp, player2_sense: Sense, guard: int = 10**6
) -> np.ndarray:
    """Enumerate positional controller policies against positional
    vertex-valued interval resolutions and evaluate each chain exactly.

    Intended as a testing oracle for small models only; refuses inputs whose
    combination count exceeds the guard.
    """
    n = model.n_states
    vertex_sets = [bfs_vertices(model.rows[a]).vertices for a in range(model.n_actions)]
    combos = 1
    for s in range(n):
        combos *= sum(len(vertex_sets[a]) for a in model.available[s])
        if combos > guard:
            raise SizeGuardError(
                f"brute force would evaluate more than {guard} chains"
            )
    best: np.ndarray | None = None
    for pol in itertools.product(*[model.available[s] for s in range(n)]):
        inner: np.ndarray | None = None
        for combo in itertools.product(*[range(len(vertex_sets[a])) for a in pol]):
            dist_of = [vertex_sets[pol[s]][combo[s]] for s in range(n)]
            vals = _chain_rabin_values(n, dist_of, model.acceptance)
            if inner is None:
                inner = vals
            elif player2_sense == "min":
                inner = np.minimum(inner, vals)
            else:
                inner = np.maximum(inner, vals)
        assert inner is not None
        best = inner if best is None else np.maximum(best, inner)
    assert best is not None
    return best
