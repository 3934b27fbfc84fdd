"""Labelled interval models, deterministic Rabin automata, and their product.

The product tracks model and automaton jointly; the automaton moves on the
label of the source state, and acceptance is lifted from the automaton
component, turning a labelled model plus automaton into a plain model with
internal Rabin acceptance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import AlphabetError
from .model import Bmdp, IntervalRow, RabinPair, _ModelSkeleton


@dataclass(frozen=True)
class LabelledBmdp(_ModelSkeleton):
    """Interval model whose acceptance is replaced by a state labelling."""

    rows: tuple[IntervalRow, ...] = ()
    labels: tuple[str, ...] = ()

    def row(self, action: int) -> IntervalRow:
        return self.rows[action]

    @property
    def letters(self) -> frozenset[str]:
        return frozenset(self.labels)


@dataclass(frozen=True)
class Dra:
    """Deterministic Rabin automaton over a fixed finite alphabet."""

    state_names: tuple[str, ...]
    alphabet: tuple[str, ...]
    initial: int
    trans: Mapping[tuple[int, str], int]
    acceptance: tuple[RabinPair, ...]

    @property
    def n_states(self) -> int:
        return len(self.state_names)

    def state_index(self, name: str) -> int:
        try:
            return self.state_names.index(name)
        except ValueError:
            raise KeyError(f"unknown automaton state {name!r}") from None

    def step(self, state: int, letter: str) -> int:
        if letter not in self.alphabet:
            raise AlphabetError(f"letter {letter!r} not in alphabet")
        return self.trans[(state, letter)]


def dra_accepts_lasso(
    dra: Dra, prefix: Sequence[str], cycle: Sequence[str]
) -> bool:
    """Whether the ultimately-periodic word ``prefix . cycle^omega`` is
    accepted.

    Simulates until the (automaton state, cycle position) pair repeats, then
    checks the Rabin pairs against the loop's state set.
    """
    if not cycle:
        raise ValueError("cycle must be nonempty")
    q = dra.initial
    for letter in prefix:
        q = dra.step(q, letter)
    seen: dict[tuple[int, int], int] = {}
    trace: list[int] = []
    pos = 0
    while (q, pos) not in seen:
        seen[(q, pos)] = len(trace)
        trace.append(q)
        q = dra.step(q, cycle[pos])
        pos = (pos + 1) % len(cycle)
    loop = set(trace[seen[(q, pos)]:])
    return any(not (loop & p.fin) and (loop & p.inf) for p in dra.acceptance)


def build_product(model: LabelledBmdp, dra: Dra) -> Bmdp:
    """Interval model over reachable (model state, automaton state) pairs.

    Mass of an original transition is relocated, not altered, so row
    feasibility carries over.  Acceptance pairs are the automaton pairs
    lifted to the product.
    """
    missing = model.letters - set(dra.alphabet)
    if missing:
        raise AlphabetError(
            f"model labels {sorted(missing)} missing from automaton alphabet"
        )
    # Breadth-first discovery over possible (hi > 0) edges.
    index: dict[tuple[int, int], int] = {}
    order: list[tuple[int, int]] = []

    def intern(s: int, q: int) -> int:
        key = (s, q)
        if key not in index:
            index[key] = len(order)
            order.append(key)
        return index[key]

    intern(model.initial, dra.initial)
    frontier = 0
    edges: dict[tuple[int, int], list[tuple[int, int, int]]] = {}
    while frontier < len(order):
        s, q = order[frontier]
        frontier += 1
        q_next = dra.step(q, model.labels[s])
        for a in model.available[s]:
            row = model.rows[a]
            for succ, iv in row.bounds.items():
                if iv.hi > 0.0:
                    intern(succ, q_next)
    state_names = tuple(
        f"{model.state_names[s]}.{dra.state_names[q]}" for s, q in order
    )
    action_names: list[str] = []
    action_owner: list[int] = []
    available: list[tuple[int, ...]] = []
    rows: list[IntervalRow] = []
    for ps, (s, q) in enumerate(order):
        q_next = dra.step(q, model.labels[s])
        acts = []
        for a in model.available[s]:
            idx = len(action_names)
            acts.append(idx)
            action_names.append(model.action_names[a])
            action_owner.append(ps)
            bounds = {}
            for succ, iv in model.rows[a].bounds.items():
                key = (succ, q_next)
                if key in index:
                    bounds[index[key]] = iv
                # Undiscovered keys can only stem from [0, 0] entries, which
                # absence already denotes.
            rows.append(IntervalRow(source=ps, action=idx, bounds=bounds))
        available.append(tuple(acts))
    acceptance = tuple(
        RabinPair(
            fin=frozenset(i for i, (s, q) in enumerate(order) if q in p.fin),
            inf=frozenset(i for i, (s, q) in enumerate(order) if q in p.inf),
        )
        for p in dra.acceptance
    )
    return Bmdp(
        state_names=state_names,
        initial=0,
        action_names=tuple(action_names),
        action_owner=tuple(action_owner),
        available=tuple(available),
        rows=tuple(rows),
        acceptance=acceptance,
    )
