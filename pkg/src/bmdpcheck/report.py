"""Check reports: the result of one analysis, with a machine-readable
key-value text form (12 significant digits) and a human-readable table.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParseError, SolverInternalError

_BRACKET_SLACK = 1e-7


def _fmt(x: float) -> str:
    return format(x, ".12g")


@dataclass
class BoundReport:
    """One side (lower or upper) of a computed bracket."""

    values: dict[str, float]
    controller: dict[str, str] = field(default_factory=dict)
    nature: dict[tuple[str, str], dict[str, float]] = field(default_factory=dict)
    iterations: int = 0
    witness_text: str | None = None


@dataclass
class CheckReport:
    """Full outcome of a check: per-state bounds, strategies, and metadata."""

    objective: str
    bound: str
    method: str
    epsilon: float
    state_names: tuple[str, ...]
    initial: str
    lower: BoundReport | None = None
    upper: BoundReport | None = None
    elapsed_seconds: float = 0.0

    def __post_init__(self):
        for v in (self.lower, self.upper):
            if v is None:
                continue
            bad = [s for s, x in v.values.items() if not -1e-9 <= x <= 1 + 1e-9]
            if bad:
                raise SolverInternalError(f"report values outside [0, 1]: {bad}")
        if self.lower is not None and self.upper is not None:
            for s in self.state_names:
                lo = self.lower.values.get(s)
                hi = self.upper.values.get(s)
                if lo is not None and hi is not None and lo > hi + _BRACKET_SLACK:
                    raise SolverInternalError(
                        f"lower bound {lo} exceeds upper bound {hi} at {s}"
                    )

    @property
    def summary(self) -> str:
        parts = []
        if self.lower is not None:
            parts.append(f"lower { _fmt(self.lower.values[self.initial]) }")
        if self.upper is not None:
            parts.append(f"upper { _fmt(self.upper.values[self.initial]) }")
        return f"{self.initial}: " + ", ".join(parts)


def report_to_text(report: CheckReport) -> str:
    out = ["report v1"]
    out.append(f"objective {report.objective}")
    out.append(f"bound {report.bound}")
    out.append(f"method {report.method}")
    out.append(f"epsilon {_fmt(report.epsilon)}")
    out.append("states " + " ".join(report.state_names))
    out.append(f"initial {report.initial}")
    out.append(f"elapsed {_fmt(report.elapsed_seconds)}")
    for side, bound in (("lower", report.lower), ("upper", report.upper)):
        if bound is None:
            continue
        out.append(f"iterations {side} {bound.iterations}")
        for s in report.state_names:
            if s in bound.values:
                out.append(f"{side} {s} {_fmt(bound.values[s])}")
        for s, a in sorted(bound.controller.items()):
            out.append(f"controller {side} {s} {a}")
        for (s, a), dist in sorted(bound.nature.items()):
            probs = " ".join(f"{t}:{_fmt(p)}" for t, p in sorted(dist.items()))
            out.append(f"nature {side} {s} {a} {probs}")
    return "\n".join(out) + "\n"


def report_from_text(text: str) -> CheckReport:
    """Parse the machine-readable report format (tolerant of unknown lines)."""
    lines = [
        (i, line.split("#", 1)[0].strip())
        for i, line in enumerate(text.splitlines(), start=1)
    ]
    lines = [(i, line) for i, line in lines if line]
    if not lines or not lines[0][1].startswith("report"):
        raise ParseError("not a report file", 1)
    meta: dict[str, str] = {}
    state_names: tuple[str, ...] = ()
    sides: dict[str, BoundReport] = {}

    def side(name: str) -> BoundReport:
        if name not in ("lower", "upper"):
            raise ParseError(f"unknown bound side {name!r}")
        if name not in sides:
            sides[name] = BoundReport(values={})
        return sides[name]

    for lineno, line in lines[1:]:
        tokens = line.split()
        kind, rest = tokens[0], tokens[1:]
        try:
            if kind in ("objective", "bound", "method", "epsilon", "initial", "elapsed"):
                meta[kind] = " ".join(rest)
            elif kind == "states":
                state_names = tuple(rest)
            elif kind in ("lower", "upper"):
                side(kind).values[rest[0]] = float(rest[1])
            elif kind == "iterations":
                side(rest[0]).iterations = int(rest[1])
            elif kind == "controller":
                side(rest[0]).controller[rest[1]] = rest[2]
            elif kind == "nature":
                dist = {}
                for tok in rest[3:]:
                    t, p = tok.rsplit(":", 1)
                    dist[t] = float(p)
                side(rest[0]).nature[(rest[1], rest[2])] = dist
            # Unknown keys are skipped for forward compatibility.
        except (IndexError, ValueError) as exc:
            raise ParseError(f"malformed report line: {line!r}", lineno) from exc
    if "initial" not in meta or not state_names:
        raise ParseError("report lacks states or initial state")
    return CheckReport(
        objective=meta.get("objective", "rabin"),
        bound=meta.get("bound", "both"),
        method=meta.get("method", "auto"),
        epsilon=float(meta.get("epsilon", "1e-10")),
        state_names=state_names,
        initial=meta["initial"],
        lower=sides.get("lower"),
        upper=sides.get("upper"),
        elapsed_seconds=float(meta.get("elapsed", "0")),
    )


def report_table(report: CheckReport) -> str:
    """Aligned human-readable table of the per-state bounds."""
    rows = [("state", "lower", "upper")]
    for s in report.state_names:
        lo = _fmt(report.lower.values[s]) if report.lower and s in report.lower.values else "-"
        hi = _fmt(report.upper.values[s]) if report.upper and s in report.upper.values else "-"
        rows.append((s, lo, hi))
    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    lines = [
        "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip()
        for row in rows
    ]
    lines.append("")
    lines.append(f"initial {report.summary}")
    return "\n".join(lines) + "\n"
