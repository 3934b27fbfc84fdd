"""Core immutable model types: MDPs, interval-valued MDPs, games and policies.

States and actions are interned to dense integer indices at construction
time; display names appear only at I/O boundaries.  All probability
comparisons use the absolute tolerance ``SUM_TOL``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Literal, Mapping

from .errors import BoundViolationError, SkeletonMismatchError

SUM_TOL = 1e-9

Sense = Literal["max", "min"]

#: A probability distribution over state indices: positive entries summing to 1.
Distribution = Mapping[int, float]


@dataclass(frozen=True)
class ProbInterval:
    """Closed probability interval ``[lo, hi]`` with ``0 <= lo <= hi <= 1``."""

    lo: float
    hi: float

    def contains(self, p: float, tol: float = SUM_TOL) -> bool:
        return self.lo - tol <= p <= self.hi + tol

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi


ZERO_INTERVAL = ProbInterval(0.0, 0.0)


@dataclass(frozen=True)
class IntervalRow:
    """Interval bounds on the successor distribution of one (state, action).

    Successors absent from ``bounds`` carry the implicit interval ``[0, 0]``.
    """

    source: int
    action: int
    bounds: Mapping[int, ProbInterval]

    def interval(self, succ: int) -> ProbInterval:
        return self.bounds.get(succ, ZERO_INTERVAL)

    @property
    def successors(self) -> tuple[int, ...]:
        return tuple(sorted(self.bounds))

    def lo_sum(self) -> float:
        return sum(iv.lo for iv in self.bounds.values())

    def hi_sum(self) -> float:
        return sum(iv.hi for iv in self.bounds.values())

    def is_feasible(self, tol: float = SUM_TOL) -> bool:
        if any(iv.lo > iv.hi + tol for iv in self.bounds.values()):
            return False
        return self.lo_sum() <= 1.0 + tol and self.hi_sum() >= 1.0 - tol


@dataclass(frozen=True)
class RabinPair:
    """Acceptance pair: ``fin`` must be visited finitely often, some state of
    ``inf`` infinitely often."""

    fin: frozenset[int]
    inf: frozenset[int]


@dataclass(frozen=True)
class PositionalPolicy:
    """Memoryless deterministic policy: state index -> chosen action index."""

    choice: Mapping[int, int]

    def __getitem__(self, state: int) -> int:
        return self.choice[state]


@dataclass(frozen=True)
class NaturePolicy:
    """Positional resolution of interval non-determinism.

    Actions are unique per state, so the choice is keyed by action index;
    each value is a concrete successor distribution inside the row bounds.
    """

    choice: Mapping[int, Distribution]

    def __getitem__(self, action: int) -> Distribution:
        return self.choice[action]


@dataclass(frozen=True)
class _ModelSkeleton:
    """State/action structure shared by point models and interval models."""

    state_names: tuple[str, ...]
    initial: int
    action_names: tuple[str, ...]
    action_owner: tuple[int, ...]
    available: tuple[tuple[int, ...], ...]

    @property
    def n_states(self) -> int:
        return len(self.state_names)

    @property
    def n_actions(self) -> int:
        return len(self.action_names)

    def state_index(self, name: str) -> int:
        try:
            return self.state_names.index(name)
        except ValueError:
            raise KeyError(f"unknown state {name!r}") from None

    def action_index(self, state: int, name: str) -> int:
        for a in self.available[state]:
            if self.action_names[a] == name:
                return a
        raise KeyError(
            f"state {self.state_names[state]!r} has no action {name!r}"
        )

    def action_label(self, action: int) -> str:
        owner = self.action_owner[action]
        return f"{self.state_names[owner]}.{self.action_names[action]}"

    def _skeleton_key(self):
        return (
            self.state_names,
            self.initial,
            self.action_names,
            self.action_owner,
            self.available,
        )


@dataclass(frozen=True)
class Mdp(_ModelSkeleton):
    """Point-probability MDP; a Markov chain is the single-action special case."""

    dists: tuple[Distribution, ...]
    acceptance: tuple[RabinPair, ...] = ()

    @property
    def is_markov_chain(self) -> bool:
        return all(len(acts) == 1 for acts in self.available)

    def dist(self, action: int) -> Distribution:
        return self.dists[action]


@dataclass(frozen=True)
class Bmdp(_ModelSkeleton):
    """Bounded-parameter MDP: per-action interval rows instead of distributions.

    An interval Markov chain is a Bmdp whose available sets are singletons.
    """

    rows: tuple[IntervalRow, ...] = ()
    acceptance: tuple[RabinPair, ...] = ()

    @property
    def is_interval_mc(self) -> bool:
        return all(len(acts) == 1 for acts in self.available)

    def row(self, action: int) -> IntervalRow:
        return self.rows[action]

    @property
    def is_point(self) -> bool:
        return all(
            iv.is_point for row in self.rows for iv in row.bounds.values()
        )


@dataclass(frozen=True)
class StochasticGame:
    """An MDP plus a total state-ownership function (player 1 or 2)."""

    mdp: Mdp
    owner: tuple[int, ...]

    def states_of(self, player: int) -> tuple[int, ...]:
        return tuple(s for s in range(self.mdp.n_states) if self.owner[s] == player)


@dataclass(frozen=True)
class Violation:
    """One violated model invariant, with human-readable coordinates."""

    kind: str
    where: str
    message: str

    def __str__(self) -> str:
        return f"[{self.kind}] {self.where}: {self.message}"


def validate_bmdp(model: Bmdp) -> list[Violation]:
    """Check every model invariant; an empty report means the model is valid.

    Violations are data, not exceptions: callers decide whether to raise.
    """
    out: list[Violation] = []
    n = model.n_states
    for s, acts in enumerate(model.available):
        if not acts:
            out.append(
                Violation("no-actions", model.state_names[s], "state has no available action")
            )
        for a in acts:
            if model.action_owner[a] != s:
                out.append(
                    Violation(
                        "action-owner",
                        model.action_label(a),
                        f"listed as available in {model.state_names[s]!r} but owned by "
                        f"{model.state_names[model.action_owner[a]]!r}",
                    )
                )
    seen_owned: set[int] = set()
    for s, acts in enumerate(model.available):
        seen_owned.update(acts)
    for a in range(model.n_actions):
        if a not in seen_owned:
            out.append(
                Violation("action-owner", model.action_label(a), "action is not available anywhere")
            )
    for a, row in enumerate(model.rows):
        where = model.action_label(a)
        if row.action != a or row.source != model.action_owner[a]:
            out.append(Violation("row-coordinates", where, "row source/action indices inconsistent"))
        for succ, iv in row.bounds.items():
            if not 0 <= succ < n:
                out.append(Violation("reference", where, f"unknown successor index {succ}"))
                continue
            sname = model.state_names[succ]
            if iv.lo > iv.hi + SUM_TOL:
                out.append(
                    Violation(
                        "interval-order", where, f"to {sname}: lo {iv.lo:g} > hi {iv.hi:g}"
                    )
                )
            if iv.lo < -SUM_TOL or iv.hi > 1 + SUM_TOL:
                out.append(
                    Violation(
                        "interval-range", where, f"to {sname}: [{iv.lo:g}, {iv.hi:g}] outside [0, 1]"
                    )
                )
        lo, hi = row.lo_sum(), row.hi_sum()
        if lo > 1 + SUM_TOL:
            out.append(Violation("row-mass", where, f"lower bounds sum to {lo:g} > 1"))
        if hi < 1 - SUM_TOL:
            out.append(Violation("row-mass", where, f"upper bounds sum to {hi:g} < 1"))
    for k, pair in enumerate(model.acceptance):
        overlap = pair.fin & pair.inf
        if overlap:
            names = ", ".join(sorted(model.state_names[s] for s in overlap))
            out.append(Violation("rabin-overlap", f"pair {k}", f"F and I share {{{names}}}"))
        for s in pair.fin | pair.inf:
            if not 0 <= s < n:
                out.append(Violation("reference", f"pair {k}", f"unknown state index {s}"))
    return out


def check_distribution(dist: Distribution, tol: float = SUM_TOL) -> None:
    """Raise if entries are non-positive or do not sum to 1 within tolerance."""
    total = 0.0
    for succ, p in dist.items():
        if p <= 0:
            raise ValueError(f"non-positive probability {p} for successor {succ}")
        total += p
    if abs(total - 1.0) > tol:
        raise ValueError(f"distribution sums to {total}, not 1")


def is_consistent(mdp: Mdp, model: Bmdp, tol: float = SUM_TOL) -> bool:
    """True iff the point MDP's probabilities lie within the interval bounds."""
    if mdp._skeleton_key() != model._skeleton_key():
        raise SkeletonMismatchError("point MDP and interval model differ in states or actions")
    for a in range(model.n_actions):
        row = model.rows[a]
        dist = mdp.dists[a]
        for succ in set(row.bounds) | set(dist):
            if not row.interval(succ).contains(dist.get(succ, 0.0), tol):
                return False
    return True


def instantiate(model: Bmdp, nature: NaturePolicy) -> Mdp:
    """Materialize the consistent point MDP selected by a nature policy."""
    dists: list[Distribution] = []
    for a in range(model.n_actions):
        try:
            chosen = nature[a]
        except KeyError:
            raise BoundViolationError(
                f"nature policy undefined for action {model.action_label(a)}"
            ) from None
        row = model.rows[a]
        dist = {succ: p for succ, p in chosen.items() if p > 0.0}
        total = 0.0
        for succ, p in dist.items():
            if not row.interval(succ).contains(p):
                raise BoundViolationError(
                    f"action {model.action_label(a)}: probability {p:g} to "
                    f"{model.state_names[succ]} outside "
                    f"[{row.interval(succ).lo:g}, {row.interval(succ).hi:g}]"
                )
            total += p
        for succ, iv in row.bounds.items():
            if succ not in dist and iv.lo > SUM_TOL:
                raise BoundViolationError(
                    f"action {model.action_label(a)}: no mass to "
                    f"{model.state_names[succ]} but lower bound is {iv.lo:g}"
                )
        if abs(total - 1.0) > SUM_TOL:
            raise BoundViolationError(
                f"action {model.action_label(a)}: chosen distribution sums to {total:g}"
            )
        dists.append(dict(dist))
    return Mdp(
        state_names=model.state_names,
        initial=model.initial,
        action_names=model.action_names,
        action_owner=model.action_owner,
        available=model.available,
        dists=tuple(dists),
        acceptance=model.acceptance,
    )


def restrict_actions(
    mdp: Mdp, chosen: Mapping[int, Iterable[int]]
) -> tuple[Mdp, tuple[int, ...]]:
    """Sub-MDP keeping only the listed actions per state (all states kept).

    Returns the renumbered MDP and the map from new to old action indices.
    """
    new_names: list[str] = []
    new_owner: list[int] = []
    new_avail: list[tuple[int, ...]] = []
    new_dists: list[Distribution] = []
    action_map: list[int] = []
    for s in range(mdp.n_states):
        acts = tuple(chosen.get(s, mdp.available[s]))
        if not acts:
            raise ValueError(f"state {mdp.state_names[s]!r} left without actions")
        indices = []
        for a in acts:
            if a not in mdp.available[s]:
                raise ValueError(
                    f"action {mdp.action_label(a)} not available in {mdp.state_names[s]!r}"
                )
            indices.append(len(action_map))
            new_names.append(mdp.action_names[a])
            new_owner.append(s)
            new_dists.append(mdp.dists[a])
            action_map.append(a)
        new_avail.append(tuple(indices))
    restricted = Mdp(
        state_names=mdp.state_names,
        initial=mdp.initial,
        action_names=tuple(new_names),
        action_owner=tuple(new_owner),
        available=tuple(new_avail),
        dists=tuple(new_dists),
        acceptance=mdp.acceptance,
    )
    return restricted, tuple(action_map)


def induce_mc(mdp: Mdp, policy: PositionalPolicy) -> Mdp:
    """Markov chain obtained by fixing a positional policy in an MDP."""
    chosen = {}
    for s in range(mdp.n_states):
        try:
            a = policy[s]
        except KeyError:
            raise ValueError(f"policy undefined for state {mdp.state_names[s]!r}") from None
        chosen[s] = (a,)
    mc, _ = restrict_actions(mdp, chosen)
    return mc
