"""End-to-end analysis orchestration shared by the service and the tests.

Takes raw model/automaton text plus options, runs the requested bound
computations, and packages values, strategies, witnesses and timings into a
:class:`CheckReport` with serialized artifacts.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import BmdpError, ModelValidationError
from .model import Bmdp, NaturePolicy, PositionalPolicy, Violation, instantiate
from .omega import GameResult, bmdp_lower, bmdp_upper, brute_force_value, build_game, sg_rabin
from .parse import parse_dra, parse_model
from .product import LabelledBmdp, build_product
from .reach import ReachQuery, bmdp_reach
from .report import BoundReport, CheckReport
from .serialize import mdp_to_text

Bound = Literal["lower", "upper", "both"]
Method = Literal["auto", "game", "mec", "brute"]


class UsageError(BmdpError):
    """Invalid option combination (maps to the CLI usage exit code)."""

    kind = "usage"


@dataclass
class CheckOptions:
    bound: Bound = "both"
    objective: str = "rabin"
    targets: tuple[str, ...] = ()
    epsilon: float = 1e-10
    max_iterations: int = 10**6
    method: Method = "auto"


@dataclass
class CheckOutcome:
    report: CheckReport
    model: Bmdp


def _named_values(model: Bmdp, values) -> dict[str, float]:
    return {model.state_names[s]: float(values[s]) for s in range(model.n_states)}


def _named_controller(model: Bmdp, policy: PositionalPolicy) -> dict[str, str]:
    return {
        model.state_names[s]: model.action_names[a]
        for s, a in sorted(policy.choice.items())
    }


def _named_nature(model: Bmdp, nature: NaturePolicy):
    out = {}
    for a, dist in nature.choice.items():
        key = (model.state_names[model.action_owner[a]], model.action_names[a])
        out[key] = {model.state_names[t]: float(p) for t, p in dist.items()}
    return out


def _bound_report(model: Bmdp, result: GameResult, iterations: int = 0) -> BoundReport:
    return BoundReport(
        values=_named_values(model, result.values),
        controller=_named_controller(model, result.controller),
        nature=_named_nature(model, result.nature),
        iterations=iterations,
        witness_text=mdp_to_text(result.witness),
    )


def resolve_model(model_text: str, dra_text: str | None, objective: str) -> Bmdp:
    """Parse the inputs and produce the plain interval model to analyse."""
    parsed = parse_model(model_text)
    if isinstance(parsed, LabelledBmdp):
        if objective.startswith("reach"):
            if dra_text is not None:
                raise UsageError("reach objectives do not take an automaton")
            return Bmdp(
                state_names=parsed.state_names,
                initial=parsed.initial,
                action_names=parsed.action_names,
                action_owner=parsed.action_owner,
                available=parsed.available,
                rows=parsed.rows,
                acceptance=(),
            )
        if dra_text is None:
            raise ModelValidationError(
                [_violation("objective", "model", "labelled model needs an automaton")]
            )
        return build_product(parsed, parse_dra(dra_text))
    if dra_text is not None:
        raise UsageError("an automaton requires a labelled model")
    return parsed


def run_check(
    model_text: str, dra_text: str | None, options: CheckOptions
) -> CheckOutcome:
    started = time.perf_counter()
    objective = options.objective
    if objective != "rabin" and not objective.startswith("reach"):
        raise UsageError(f"unknown objective {options.objective!r}")
    if options.bound not in ("lower", "upper", "both"):
        raise UsageError(f"unknown bound {options.bound!r}")
    if options.epsilon <= 0:
        raise UsageError("epsilon must be positive")
    model = resolve_model(model_text, dra_text, objective)
    want_lower = options.bound in ("lower", "both")
    want_upper = options.bound in ("upper", "both")

    lower: BoundReport | None = None
    upper: BoundReport | None = None
    if objective.startswith("reach"):
        if options.method not in ("auto",):
            raise UsageError("reach objectives support --method auto only")
        if not options.targets:
            raise UsageError("reach objective needs at least one target state")
        try:
            targets = frozenset(model.state_index(x) for x in options.targets)
        except KeyError as exc:
            raise ModelValidationError(
                [_violation("reference", "objective", str(exc))]
            ) from exc
        method = "robust-vi"
        objective = "reach " + " ".join(options.targets)
        if want_lower:
            lower = _reach_bound(model, targets, "min", options)
        if want_upper:
            upper = _reach_bound(model, targets, "max", options)
    elif options.method == "brute":
        method = "brute"
        if want_lower:
            lower = BoundReport(
                values=_named_values(model, brute_force_value(model, "min"))
            )
        if want_upper:
            upper = BoundReport(
                values=_named_values(model, brute_force_value(model, "max"))
            )
    else:
        method = options.method
        if options.method == "mec" and want_lower:
            raise UsageError("the mec method computes upper bounds only")
        if want_lower:
            lower = _bound_report(model, bmdp_lower(model))
        if want_upper:
            if options.method == "game":
                upper = _upper_via_game(model)
            else:
                upper = _bound_report(model, bmdp_upper(model))

    report = CheckReport(
        objective=objective,
        bound=options.bound,
        method=method,
        epsilon=options.epsilon,
        state_names=model.state_names,
        initial=model.state_names[model.initial],
        lower=lower,
        upper=upper,
        elapsed_seconds=time.perf_counter() - started,
    )
    return CheckOutcome(report=report, model=model)


def _reach_bound(model, targets, nature_sense, options) -> BoundReport:
    res = bmdp_reach(
        model,
        ReachQuery(
            target=targets,
            controller_sense="max",
            nature_sense=nature_sense,
            epsilon=options.epsilon,
            max_iterations=options.max_iterations,
        ),
    )
    witness = instantiate(model, res.nature)
    return BoundReport(
        values=_named_values(model, res.values),
        controller=_named_controller(model, res.policy),
        nature=_named_nature(model, res.nature),
        iterations=res.iterations,
        witness_text=mdp_to_text(witness),
    )


def _upper_via_game(model: Bmdp) -> BoundReport:
    game = build_game(model)
    sol = sg_rabin(game, "max")
    n = model.n_states
    controller = PositionalPolicy({s: sol.controller[s] for s in range(n)})
    nature = NaturePolicy(
        {
            a: dict(game.mdp.dists[sol.opponent[n + a]])
            for a in range(model.n_actions)
        }
    )
    witness = instantiate(model, nature)
    result = GameResult(
        np.clip(sol.values[:n], 0.0, 1.0), controller, nature, witness
    )
    return _bound_report(model, result)


def _violation(kind: str, where: str, message: str) -> Violation:
    return Violation(kind, where, message)


def policy_text(report: CheckReport) -> str:
    """Policy file: controller lines ``state action`` and nature lines
    ``state action -> succ:prob ...`` per computed bound."""
    out: list[str] = []
    for side, bound in (("lower", report.lower), ("upper", report.upper)):
        if bound is None or (not bound.controller and not bound.nature):
            continue
        out.append(f"# {side} controller")
        for s, a in bound.controller.items():
            out.append(f"{s} {a}")
        out.append(f"# {side} nature")
        for (s, a), dist in sorted(bound.nature.items()):
            probs = " ".join(f"{t}:{format(p, '.12g')}" for t, p in sorted(dist.items()))
            out.append(f"{s} {a} -> {probs}")
    return "\n".join(out) + "\n" if out else ""
