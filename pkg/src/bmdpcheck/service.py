"""FastAPI service wrapping the checking library.

All analyses are pure functions of the request payload; the service holds no
state, so it can serve concurrent clients.  Library errors are mapped to
structured 400/422 responses carrying an error kind that clients (notably
the CLI) translate into exit codes.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .bracket import validate_bracket
from .checker import CheckOptions, policy_text, run_check
from .errors import BmdpError, ModelValidationError
from .omega import build_game
from .parse import parse_dra, parse_model
from .polytope import bfs_vertices
from .product import LabelledBmdp, build_product
from .report import CheckReport, report_from_text, report_table, report_to_text
from .schemas import (
    BfsRequest,
    BfsResponse,
    BoundModel,
    BracketRequest,
    BracketResponse,
    CheckRequest,
    CheckResponse,
    GameRequest,
    GameResponse,
    NatureChoice,
    ProductRequest,
    ProductResponse,
    ReportModel,
    ValidateRequest,
    ValidateResponse,
    ViolationModel,
)
from .serialize import game_to_text, model_to_text


def _report_model(report: CheckReport) -> ReportModel:
    def bound_model(side):
        if side is None:
            return None
        return BoundModel(
            values=side.values,
            controller=side.controller,
            nature=[
                NatureChoice(state=s, action=a, distribution=dist)
                for (s, a), dist in sorted(side.nature.items())
            ],
            iterations=side.iterations,
            witness=side.witness_text,
        )

    return ReportModel(
        objective=report.objective,
        bound=report.bound,
        method=report.method,
        epsilon=report.epsilon,
        states=list(report.state_names),
        initial=report.initial,
        lower=bound_model(report.lower),
        upper=bound_model(report.upper),
        elapsed_seconds=report.elapsed_seconds,
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="bmdpcheck",
        version=__version__,
        description="Probability bounds for omega-regular objectives on "
        "interval-valued MDPs",
    )

    @app.exception_handler(BmdpError)
    async def _bmdp_error(_: Request, exc: BmdpError) -> JSONResponse:
        body = {"kind": exc.kind, "message": str(exc)}
        line = getattr(exc, "line", None)
        if line is not None:
            body["line"] = line
        return JSONResponse(status_code=400, content={"detail": body})

    @app.get("/api/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/api/validate", response_model=ValidateResponse)
    def validate(req: ValidateRequest) -> ValidateResponse:
        try:
            parse_model(req.model)  # still raises for malformed text
            violations = []
        except ModelValidationError as exc:
            violations = exc.violations
        return ValidateResponse(
            valid=not violations,
            violations=[
                ViolationModel(kind=v.kind, where=v.where, message=v.message)
                for v in violations
            ],
        )

    @app.post("/api/check", response_model=CheckResponse)
    def check(req: CheckRequest) -> CheckResponse:
        options = CheckOptions(
            bound=req.bound,
            objective=req.objective,
            targets=tuple(req.targets),
            epsilon=req.epsilon,
            max_iterations=req.max_iterations,
            method=req.method,
        )
        outcome = run_check(req.model, req.dra, options)
        return CheckResponse(
            report=_report_model(outcome.report),
            report_text=report_to_text(outcome.report),
            policy_text=policy_text(outcome.report),
            table=report_table(outcome.report),
        )

    @app.post("/api/bfs", response_model=BfsResponse)
    def bfs(req: BfsRequest) -> BfsResponse:
        model = parse_model(req.model)
        try:
            s = model.state_index(req.state)
            a = model.action_index(s, req.action)
        except KeyError as exc:
            raise BmdpError(str(exc)) from exc
        vset = bfs_vertices(model.rows[a])
        return BfsResponse(
            state=req.state,
            action=req.action,
            vertices=[
                {model.state_names[t]: p for t, p in vertex.items()}
                for vertex in vset.vertices
            ],
        )

    @app.post("/api/game", response_model=GameResponse)
    def game(req: GameRequest) -> GameResponse:
        model = parse_model(req.model)
        if isinstance(model, LabelledBmdp):
            raise BmdpError("game construction needs a model with acceptance")
        g = build_game(model)
        return GameResponse(
            game_text=game_to_text(g),
            n_states=g.mdp.n_states,
            n_player2_states=len(g.states_of(2)),
            n_actions=g.mdp.n_actions,
        )

    @app.post("/api/product", response_model=ProductResponse)
    def product(req: ProductRequest) -> ProductResponse:
        model = parse_model(req.model)
        if not isinstance(model, LabelledBmdp):
            raise BmdpError("the product needs a labelled model")
        dra = parse_dra(req.dra)
        prod = build_product(model, dra)
        return ProductResponse(model_text=model_to_text(prod), n_states=prod.n_states)

    @app.post("/api/bracket", response_model=BracketResponse)
    def bracket(req: BracketRequest) -> BracketResponse:
        model = parse_model(req.model)
        if isinstance(model, LabelledBmdp):
            raise BmdpError("bracket validation needs a model with acceptance")
        report = report_from_text(req.report_text)
        result = validate_bracket(model, report, req.trials, req.seed)
        return BracketResponse(
            passed=result.passed,
            trials=result.trials,
            counterexamples=[str(c) for c in result.counterexamples],
        )

    return app


app = create_app()
