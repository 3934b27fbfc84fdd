"""Structural graph analyses: end components, bottom SCCs and 0/1 attractors.

End component decomposition runs both on point MDPs and, with the interval
staying condition, directly on interval models without building the induced
game.  The qualitative reachability fixpoints classify states whose optimal
value is exactly 0 or exactly 1 before any numeric iteration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

from .model import Bmdp, IntervalRow, Mdp, Sense, StochasticGame

_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class EndComponent:
    """A set of states and actions in which the process can remain forever."""

    states: frozenset[int]
    actions: frozenset[int]


# ---------------------------------------------------------------------------
# Interval-row support predicates.
#
# These answer, without enumerating vertices, which supports a feasible
# distribution of a row can (or must) have.


def row_can_confine(row: IntervalRow, inside: set[int] | frozenset[int]) -> bool:
    """Some feasible distribution has support inside the given state set."""
    hi_inside = 0.0
    for succ, iv in row.bounds.items():
        if succ in inside:
            hi_inside += iv.hi
        elif iv.lo > 0.0:
            return False
    return hi_inside >= 1.0 - _EDGE_TOL


def row_can_avoid(row: IntervalRow, avoid: set[int] | frozenset[int]) -> bool:
    """Some feasible distribution puts no mass on the given state set."""
    hi_outside = 0.0
    for succ, iv in row.bounds.items():
        if succ in avoid:
            if iv.lo > 0.0:
                return False
        else:
            hi_outside += iv.hi
    return hi_outside >= 1.0 - _EDGE_TOL


def row_must_hit(row: IntervalRow, hit: set[int] | frozenset[int]) -> bool:
    """Every feasible distribution puts positive mass on the given set."""
    return not row_can_avoid(row, hit)


def row_can_put_mass(
    row: IntervalRow, succ: int, inside: set[int] | frozenset[int] | None = None
) -> bool:
    """Some feasible distribution (confined to ``inside`` if given) has
    positive mass on ``succ``."""
    iv = row.bounds.get(succ)
    if iv is None or iv.hi <= 0.0:
        return False
    if inside is not None:
        if succ not in inside or not row_can_confine(row, inside):
            return False
    if iv.lo > 0.0:
        return True
    lo_rest = sum(other.lo for s, other in row.bounds.items() if s != succ)
    return lo_rest < 1.0 - _EDGE_TOL


def row_must_confine(row: IntervalRow, inside: set[int] | frozenset[int]) -> bool:
    """Every feasible distribution has support inside the given state set."""
    return all(
        succ in inside or not row_can_put_mass(row, succ) for succ in row.bounds
    )


# ---------------------------------------------------------------------------
# Strongly connected components (iterative Tarjan).


def _sccs(nodes: Iterable[int], succ: Callable[[int], Iterable[int]]) -> list[set[int]]:
    nodes = list(nodes)
    node_set = set(nodes)
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    out: list[set[int]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter([s for s in succ(root) if s in node_set]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter([s for s in succ(w) if s in node_set])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == v:
                        break
                out.append(comp)
    return out


# ---------------------------------------------------------------------------
# Maximal end components.


def _mec_worker(
    candidates: set[int],
    actions_of: Callable[[int], Iterable[int]],
    stays: Callable[[int, set[int]], bool],
    edges: Callable[[int, set[int]], Iterable[int]],
) -> list[EndComponent]:
    out: list[EndComponent] = []
    work: list[set[int]] = [set(candidates)]
    while work:
        t = work.pop()
        staying: dict[int, list[int]] = {}
        while True:
            staying = {s: [a for a in actions_of(s) if stays(a, t)] for s in t}
            dead = [s for s in t if not staying[s]]
            if not dead:
                break
            t -= set(dead)
        if not t:
            continue

        def succ(s: int, _staying=staying, _t=t):
            seen: set[int] = set()
            for a in _staying[s]:
                seen.update(x for x in edges(a, _t) if x in _t)
            return seen

        comps = _sccs(t, succ)
        if len(comps) == 1 and comps[0] == t:
            acts = frozenset(a for s in t for a in staying[s])
            out.append(EndComponent(frozenset(t), acts))
        else:
            work.extend(comps)
    out.sort(key=lambda ec: min(ec.states))
    return out


def mec_decomposition(
    mdp: Mdp,
    states: Iterable[int] | None = None,
    actions: Iterable[int] | None = None,
) -> list[EndComponent]:
    """All maximal end components of an MDP (standard SCC pruning).

    ``states``/``actions`` optionally restrict the search to a sub-MDP, which
    the Rabin routines use to exclude the finitely-allowed state sets.
    """
    candidates = set(range(mdp.n_states)) if states is None else set(states)
    allowed = None if actions is None else set(actions)

    def actions_of(s: int):
        acts = mdp.available[s]
        return acts if allowed is None else [a for a in acts if a in allowed]

    def stays(a: int, t: set[int]) -> bool:
        return all(succ in t for succ in mdp.dists[a])

    def edges(a: int, t: set[int]):
        return mdp.dists[a].keys()

    return _mec_worker(candidates, actions_of, stays, edges)


def bmdp_mec_decomposition(
    model: Bmdp,
    states: Iterable[int] | None = None,
    actions: Iterable[int] | None = None,
) -> list[EndComponent]:
    """Maximal end components of an interval model.

    An action can stay within a candidate set T iff no mass is forced
    outside (all outside lower bounds are 0) and the upper bounds inside T
    sum to at least 1; edges are successors that some T-confined feasible
    distribution can reach.  This matches the end components of the induced
    game projected to original states and actions.
    """
    candidates = set(range(model.n_states)) if states is None else set(states)
    allowed = None if actions is None else set(actions)

    def actions_of(s: int):
        acts = model.available[s]
        return acts if allowed is None else [a for a in acts if a in allowed]

    def stays(a: int, t: set[int]) -> bool:
        return row_can_confine(model.rows[a], t)

    def edges(a: int, t: set[int]):
        row = model.rows[a]
        return [s for s in row.bounds if row_can_put_mass(row, s, inside=t)]

    return _mec_worker(candidates, actions_of, stays, edges)


def bsccs(mc: Mdp) -> list[frozenset[int]]:
    """Bottom strongly connected components of a Markov chain."""
    if not mc.is_markov_chain:
        raise ValueError("bsccs expects a Markov chain (one action per state)")

    def succ(s: int):
        return mc.dists[mc.available[s][0]].keys()

    out = []
    for comp in _sccs(range(mc.n_states), succ):
        if all(x in comp for s in comp for x in succ(s)):
            out.append(frozenset(comp))
    out.sort(key=min)
    return out


# ---------------------------------------------------------------------------
# Qualitative reachability (exact 0 / exact 1 classification).


def qualitative_reach(
    game: StochasticGame,
    target: Iterable[int],
    player1: Sense,
    player2: Sense,
) -> tuple[frozenset[int], frozenset[int]]:
    """States whose optimal reach value is exactly 0 resp. exactly 1.

    Each state is quantified by its owner's sense: a maximizing owner needs
    some action, a minimizing owner is held to all actions.  Computed by the
    standard positive-probability fixpoint (for 0) and the nested
    stay-and-progress fixpoint (for 1); no numerics involved.
    """
    mdp = game.mdp
    n = mdp.n_states
    target = set(target)
    sense = [player1 if game.owner[s] == 1 else player2 for s in range(n)]

    def exists(s: int) -> bool:
        return sense[s] == "max"

    # Positive-value fixpoint.
    reach = set(target)
    changed = True
    while changed:
        changed = False
        for s in range(n):
            if s in reach:
                continue
            hits = (
                any(reach & mdp.dists[a].keys() for a in mdp.available[s])
                if exists(s)
                else all(reach & mdp.dists[a].keys() for a in mdp.available[s])
            )
            if hits:
                reach.add(s)
                changed = True
    prob0 = frozenset(range(n)) - reach

    # Almost-sure fixpoint: greatest Y such that from Y the target is reached
    # with positive probability while never leaving Y.
    y = set(range(n))
    while True:
        x = set(target)
        changed = True
        while changed:
            changed = False
            for s in range(n):
                if s in x:
                    continue

                def good(a: int) -> bool:
                    supp = mdp.dists[a].keys()
                    return all(t in y for t in supp) and bool(x & supp)

                ok = (
                    any(good(a) for a in mdp.available[s])
                    if exists(s)
                    else all(good(a) for a in mdp.available[s])
                )
                if ok:
                    x.add(s)
                    changed = True
        if x == y:
            return prob0, frozenset(x)
        y = x


def bmdp_qualitative_reach(
    model: Bmdp,
    target: Iterable[int],
    controller: Sense,
    nature: Sense,
) -> tuple[frozenset[int], frozenset[int]]:
    """0/1 classification on the game induced by an interval model, computed
    from row support predicates without constructing the game."""
    n = model.n_states
    target = set(target)

    def positive_via(a: int, reach: set[int]) -> bool:
        row = model.rows[a]
        if nature == "max":
            return any(row_can_put_mass(row, t) for t in reach & row.bounds.keys())
        return row_must_hit(row, reach)

    reach = set(target)
    changed = True
    while changed:
        changed = False
        for s in range(n):
            if s in reach:
                continue
            tests = (positive_via(a, reach) for a in model.available[s])
            ok = any(tests) if controller == "max" else all(tests)
            if ok:
                reach.add(s)
                changed = True
    prob0 = frozenset(range(n)) - reach

    def sure_via(a: int, y: set[int], x: set[int]) -> bool:
        row = model.rows[a]
        if nature == "max":
            return row_can_confine(row, y) and any(
                row_can_put_mass(row, t, inside=y) for t in x & row.bounds.keys()
            )
        return row_must_confine(row, y) and row_must_hit(row, x)

    y = set(range(n))
    while True:
        x = set(target)
        changed = True
        while changed:
            changed = False
            for s in range(n):
                if s in x:
                    continue
                tests = (sure_via(a, y, x) for a in model.available[s])
                ok = any(tests) if controller == "max" else all(tests)
                if ok:
                    x.add(s)
                    changed = True
        if x == y:
            return prob0, frozenset(x)
        y = x
