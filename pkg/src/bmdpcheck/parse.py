"""Line-oriented text parsers for interval models and Rabin automata.

The formats are whitespace-tokenized with ``#`` comments; see the README for
the full grammar.  Parsing interns states and actions to dense indices and
forwards semantic violations as validation errors.
"""

from __future__ import annotations

import re

from .errors import ModelValidationError, ParseError
from .model import Bmdp, IntervalRow, ProbInterval, RabinPair, Violation, validate_bmdp
from .product import Dra, LabelledBmdp

_INTERVAL_RE = re.compile(r"^\[\s*([^,\s\]]+)\s*,\s*([^,\s\]]+)\s*\]$")


def _logical_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.replace("{", " { ").replace("}", " } ").split()


def _parse_float(token: str, lineno: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"expected a number, got {token!r}", lineno) from None


def _parse_braced_sets(tokens: list[str], lineno: int, count: int) -> list[list[str]]:
    sets: list[list[str]] = []
    pos = 0
    while pos < len(tokens):
        if tokens[pos] != "{":
            raise ParseError("expected '{'", lineno)
        pos += 1
        names: list[str] = []
        while pos < len(tokens) and tokens[pos] != "}":
            names.append(tokens[pos])
            pos += 1
        if pos == len(tokens):
            raise ParseError("unterminated '{'", lineno)
        pos += 1
        sets.append(names)
    if len(sets) != count:
        raise ParseError(f"expected {count} braced sets, got {len(sets)}", lineno)
    return sets


class _ModelBuilder:
    def __init__(self, labelled: bool):
        self.labelled = labelled
        self.state_names: list[str] = []
        self.state_index: dict[str, int] = {}
        self.initial: int | None = None
        self.labels: dict[int, str] = {}
        self.action_names: list[str] = []
        self.action_owner: list[int] = []
        self.available: dict[int, list[int]] = {}
        self.rows: list[dict[int, ProbInterval]] = []
        self.pairs: list[RabinPair] = []
        self.current_action: int | None = None

    def state(self, name: str, lineno: int) -> int:
        if name not in self.state_index:
            raise ParseError(f"unknown state {name!r}", lineno)
        return self.state_index[name]


def parse_model(text: str) -> Bmdp | LabelledBmdp:
    """Parse a model file into an interval model.

    Returns a :class:`LabelledBmdp` for the ``labelled-bmdp`` header and a
    plain :class:`Bmdp` (with Rabin acceptance) for the ``bmdp`` header.
    Raises :class:`ParseError` for malformed text and
    :class:`ModelValidationError` when the parsed model breaks an invariant.
    """
    lines = list(_logical_lines(text))
    if not lines:
        raise ParseError("empty model file", 1)
    lineno, header = lines[0]
    if header != ["bmdp"] and header != ["labelled-bmdp"]:
        raise ParseError("model file must start with 'bmdp' or 'labelled-bmdp'", lineno)
    b = _ModelBuilder(labelled=header == ["labelled-bmdp"])

    for lineno, tokens in lines[1:]:
        kind, rest = tokens[0], tokens[1:]
        if kind == "states":
            if b.state_names:
                raise ParseError("duplicate 'states' line", lineno)
            if not rest:
                raise ParseError("'states' needs at least one name", lineno)
            for name in rest:
                if name in b.state_index:
                    raise ParseError(f"duplicate state {name!r}", lineno)
                b.state_index[name] = len(b.state_names)
                b.state_names.append(name)
                b.available[b.state_index[name]] = []
        elif kind == "init":
            if len(rest) != 1:
                raise ParseError("'init' needs exactly one state", lineno)
            if b.initial is not None:
                raise ParseError("duplicate 'init' line", lineno)
            b.initial = b.state(rest[0], lineno)
        elif kind == "label":
            if not b.labelled:
                raise ParseError("'label' is only allowed in labelled models", lineno)
            if len(rest) != 2:
                raise ParseError("'label' needs a state and a letter", lineno)
            s = b.state(rest[0], lineno)
            if s in b.labels:
                raise ParseError(f"duplicate label for state {rest[0]!r}", lineno)
            b.labels[s] = rest[1]
        elif kind == "action":
            if len(rest) != 2:
                raise ParseError("'action' needs a state and an action name", lineno)
            s = b.state(rest[0], lineno)
            if any(b.action_names[a] == rest[1] for a in b.available[s]):
                raise ParseError(
                    f"duplicate action {rest[1]!r} in state {rest[0]!r}", lineno
                )
            b.current_action = len(b.action_names)
            b.action_names.append(rest[1])
            b.action_owner.append(s)
            b.available[s].append(b.current_action)
            b.rows.append({})
        elif kind == "to":
            if b.current_action is None:
                raise ParseError("'to' before any 'action'", lineno)
            if len(rest) < 2:
                raise ParseError("'to' needs a state and an interval", lineno)
            succ = b.state(rest[0], lineno)
            match = _INTERVAL_RE.match(" ".join(rest[1:]))
            if not match:
                raise ParseError("expected an interval like [0.1, 0.5]", lineno)
            lo = _parse_float(match.group(1), lineno)
            hi = _parse_float(match.group(2), lineno)
            row = b.rows[b.current_action]
            if succ in row:
                raise ParseError(f"duplicate successor {rest[0]!r}", lineno)
            row[succ] = ProbInterval(lo, hi)
        elif kind == "rabin":
            if b.labelled:
                raise ParseError("'rabin' is not allowed in labelled models", lineno)
            fin, inf = _parse_braced_sets(rest, lineno, 2)
            b.pairs.append(
                RabinPair(
                    fin=frozenset(b.state(x, lineno) for x in fin),
                    inf=frozenset(b.state(x, lineno) for x in inf),
                )
            )
        else:
            raise ParseError(f"unknown directive {kind!r}", lineno)

    if not b.state_names:
        raise ParseError("model declares no states", 1)
    if b.initial is None:
        raise ParseError("model declares no initial state", 1)
    skeleton = dict(
        state_names=tuple(b.state_names),
        initial=b.initial,
        action_names=tuple(b.action_names),
        action_owner=tuple(b.action_owner),
        available=tuple(tuple(b.available[s]) for s in range(len(b.state_names))),
    )
    rows = tuple(
        IntervalRow(source=b.action_owner[a], action=a, bounds=dict(b.rows[a]))
        for a in range(len(b.action_names))
    )
    if b.labelled:
        unlabelled = [
            b.state_names[s] for s in range(len(b.state_names)) if s not in b.labels
        ]
        if unlabelled:
            raise ParseError(f"states without labels: {', '.join(unlabelled)}", 1)
        model = LabelledBmdp(
            **skeleton,
            rows=rows,
            labels=tuple(b.labels[s] for s in range(len(b.state_names))),
        )
        violations = validate_bmdp(Bmdp(**skeleton, rows=rows, acceptance=()))
    else:
        model = Bmdp(**skeleton, rows=rows, acceptance=tuple(b.pairs))
        violations = validate_bmdp(model)
    if violations:
        raise ModelValidationError(violations)
    return model


def parse_dra(text: str) -> Dra:
    """Parse an automaton file; the transition function must be total."""
    lines = list(_logical_lines(text))
    if not lines:
        raise ParseError("empty automaton file", 1)
    lineno, header = lines[0]
    if header != ["dra"]:
        raise ParseError("automaton file must start with 'dra'", lineno)
    alphabet: list[str] = []
    state_names: list[str] = []
    state_index: dict[str, int] = {}
    initial: int | None = None
    trans: dict[tuple[int, str], int] = {}
    trans_lines: dict[tuple[int, str], int] = {}
    pairs: list[RabinPair] = []

    def state(name: str, lineno: int) -> int:
        if name not in state_index:
            raise ParseError(f"unknown automaton state {name!r}", lineno)
        return state_index[name]

    for lineno, tokens in lines[1:]:
        kind, rest = tokens[0], tokens[1:]
        if kind == "alphabet":
            if alphabet:
                raise ParseError("duplicate 'alphabet' line", lineno)
            if not rest:
                raise ParseError("'alphabet' needs at least one letter", lineno)
            if len(set(rest)) != len(rest):
                raise ParseError("duplicate letters in alphabet", lineno)
            alphabet = list(rest)
        elif kind == "states":
            if state_names:
                raise ParseError("duplicate 'states' line", lineno)
            for name in rest:
                if name in state_index:
                    raise ParseError(f"duplicate state {name!r}", lineno)
                state_index[name] = len(state_names)
                state_names.append(name)
        elif kind == "init":
            if len(rest) != 1:
                raise ParseError("'init' needs exactly one state", lineno)
            if initial is not None:
                raise ParseError("duplicate 'init' line", lineno)
            initial = state(rest[0], lineno)
        elif kind == "trans":
            if len(rest) != 3:
                raise ParseError("'trans' needs source, letter, target", lineno)
            src = state(rest[0], lineno)
            letter = rest[1]
            if letter not in alphabet:
                raise ParseError(f"letter {letter!r} not in alphabet", lineno)
            dst = state(rest[2], lineno)
            if (src, letter) in trans:
                raise ParseError(
                    f"duplicate transition for ({rest[0]}, {letter})", lineno
                )
            trans[(src, letter)] = dst
            trans_lines[(src, letter)] = lineno
        elif kind == "rabin":
            fin, inf = _parse_braced_sets(rest, lineno, 2)
            pairs.append(
                RabinPair(
                    fin=frozenset(state(x, lineno) for x in fin),
                    inf=frozenset(state(x, lineno) for x in inf),
                )
            )
        else:
            raise ParseError(f"unknown directive {kind!r}", lineno)

    if not state_names:
        raise ParseError("automaton declares no states", 1)
    if not alphabet:
        raise ParseError("automaton declares no alphabet", 1)
    if initial is None:
        raise ParseError("automaton declares no initial state", 1)
    missing = [
        (state_names[s], letter)
        for s in range(len(state_names))
        for letter in alphabet
        if (s, letter) not in trans
    ]
    if missing:
        raise ModelValidationError(
            [
                Violation("totality", f"({s}, {letter})", "missing transition")
                for s, letter in missing
            ]
        )
    overlapping = [
        Violation("rabin-overlap", f"pair {k}", "F and I overlap")
        for k, p in enumerate(pairs)
        if p.fin & p.inf
    ]
    if overlapping:
        raise ModelValidationError(overlapping)
    return Dra(
        state_names=tuple(state_names),
        alphabet=tuple(alphabet),
        initial=initial,
        trans=trans,
        acceptance=tuple(pairs),
    )
