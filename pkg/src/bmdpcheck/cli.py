"""Command-line client for the checking service.

The CLI speaks HTTP to the service; without ``--server`` it mounts the
application in-process, so batch use needs no running server.  Exit codes:
0 success, 1 validation failure, 2 parse error, 3 convergence failure,
4 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import httpx

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PARSE = 2
EXIT_CONVERGENCE = 3
EXIT_USAGE = 4

_KIND_EXITS = {
    "parse": EXIT_PARSE,
    "validation": EXIT_VALIDATION,
    "convergence": EXIT_CONVERGENCE,
    "usage": EXIT_USAGE,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


class _ClientError(Exception):
    def __init__(self, kind: str, message: str):
        self.kind = kind
        super().__init__(message)


class _InProcessTransport(httpx.BaseTransport):
    """Synchronous httpx transport that drives the ASGI app directly.

    Each request runs the app to completion on a private event loop, so the
    CLI exercises the same HTTP surface as a remote client without needing a
    server process.
    """

    def __init__(self, app):
        self._asgi = httpx.ASGITransport(app=app)

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        import asyncio

        async def run():
            response = await self._asgi.handle_async_request(request)
            body = await response.aread()
            return response, body

        response, body = asyncio.run(run())
        return httpx.Response(
            response.status_code, headers=response.headers, content=body
        )


def make_client(server: str | None) -> httpx.Client:
    """HTTP client against a remote server, or the in-process application."""
    if server:
        return httpx.Client(base_url=server, timeout=300.0)
    from .service import create_app

    return httpx.Client(
        transport=_InProcessTransport(create_app()),
        base_url="http://bmdpcheck.local",
    )


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    if response.status_code >= 400:
        try:
            detail = response.json()["detail"]
        except Exception:
            raise _ClientError("internal", response.text.strip()) from None
        if isinstance(detail, dict):
            raise _ClientError(detail.get("kind", "internal"), detail.get("message", ""))
        raise _ClientError("usage", str(detail))
    return response.json()


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _ClientError("usage", f"cannot read {path}: {exc}") from exc


def _write(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bmdpcheck", description=__doc__)
    parser.add_argument(
        "--server",
        default=os.environ.get("BMDPCHECK_SERVER"),
        help="base URL of a running service (default: in-process)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="compute probability bounds")
    check.add_argument("model")
    check.add_argument("--dra", help="automaton file for labelled models")
    check.add_argument("--bound", choices=["upper", "lower", "both"], required=True)
    check.add_argument(
        "--objective",
        required=True,
        help="'rabin' or 'reach:<s1,s2,...>'",
    )
    check.add_argument("--epsilon", type=float, default=1e-10)
    check.add_argument(
        "--method", choices=["auto", "game", "mec", "brute"], default="auto"
    )
    check.add_argument("--policy-out")
    check.add_argument("--witness-out")
    check.add_argument("--report-out")

    validate = sub.add_parser("validate", help="report model invariant violations")
    validate.add_argument("model")

    bfs = sub.add_parser("bfs", help="list the corner points of one row")
    bfs.add_argument("model")
    bfs.add_argument("--state", required=True)
    bfs.add_argument("--action", required=True)

    game = sub.add_parser("game", help="build the explicit stochastic game")
    game.add_argument("model")
    game.add_argument("--out")

    product = sub.add_parser("product", help="product of a labelled model and a DRA")
    product.add_argument("model")
    product.add_argument("--dra", required=True)
    product.add_argument("--out")

    bracket = sub.add_parser(
        "bracket", help="validate a report against sampled instantiations"
    )
    bracket.add_argument("model")
    bracket.add_argument("--report", required=True)
    bracket.add_argument("--trials", type=int, default=100)
    bracket.add_argument("--seed", type=int, default=0)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)

    return parser


def _cmd_check(client, args) -> int:
    objective = args.objective
    targets: list[str] = []
    if objective.startswith("reach:"):
        targets = [t for t in objective[len("reach:"):].split(",") if t]
        objective = "reach"
    elif objective.startswith("reach"):
        raise _ClientError("usage", "reach objective needs targets: reach:<s1,s2,...>")
    if objective not in ("rabin", "reach"):
        raise _ClientError("usage", f"unknown objective {args.objective!r}")
    payload = {
        "model": _read(args.model),
        "bound": args.bound,
        "objective": objective,
        "targets": targets,
        "epsilon": args.epsilon,
        "method": args.method,
    }
    if args.dra:
        payload["dra"] = _read(args.dra)
    data = _post(client, "/api/check", payload)
    print(data["table"], end="")
    if args.report_out:
        _write(args.report_out, data["report_text"])
    if args.policy_out:
        _write(args.policy_out, data["policy_text"])
    if args.witness_out:
        report = data["report"]
        side = report["lower"] if report["lower"] is not None else report["upper"]
        if side and side.get("witness"):
            _write(args.witness_out, side["witness"])
        else:
            print("no witness available for this method", file=sys.stderr)
    return EXIT_OK


def _cmd_validate(client, args) -> int:
    data = _post(client, "/api/validate", {"model": _read(args.model)})
    if data["valid"]:
        print("model is valid")
        return EXIT_OK
    for v in data["violations"]:
        print(f"[{v['kind']}] {v['where']}: {v['message']}")
    return EXIT_VALIDATION


def _cmd_bfs(client, args) -> int:
    data = _post(
        client,
        "/api/bfs",
        {"model": _read(args.model), "state": args.state, "action": args.action},
    )
    for vertex in data["vertices"]:
        print(" ".join(f"{t}:{p:.12g}" for t, p in sorted(vertex.items())))
    return EXIT_OK


def _cmd_game(client, args) -> int:
    data = _post(client, "/api/game", {"model": _read(args.model)})
    if args.out:
        _write(args.out, data["game_text"])
    else:
        print(data["game_text"], end="")
    print(
        f"game: {data['n_states']} states "
        f"({data['n_player2_states']} environment), {data['n_actions']} actions",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_product(client, args) -> int:
    data = _post(
        client,
        "/api/product",
        {"model": _read(args.model), "dra": _read(args.dra)},
    )
    if args.out:
        _write(args.out, data["model_text"])
    else:
        print(data["model_text"], end="")
    return EXIT_OK


def _cmd_bracket(client, args) -> int:
    data = _post(
        client,
        "/api/bracket",
        {
            "model": _read(args.model),
            "report_text": _read(args.report),
            "trials": args.trials,
            "seed": args.seed,
        },
    )
    if data["passed"]:
        print(f"bracket check passed ({data['trials']} trials)")
        return EXIT_OK
    print(f"bracket check FAILED ({len(data['counterexamples'])} counterexamples)")
    for c in data["counterexamples"][:20]:
        print(f"  {c}")
    return EXIT_VALIDATION


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn

        from .service import create_app

        uvicorn.run(create_app(), host=args.host, port=args.port)
        return EXIT_OK
    handlers = {
        "check": _cmd_check,
        "validate": _cmd_validate,
        "bfs": _cmd_bfs,
        "game": _cmd_game,
        "product": _cmd_product,
        "bracket": _cmd_bracket,
    }
    try:
        with make_client(args.server) as client:
            return handlers[args.command](client, args)
    except _ClientError as exc:
        print(f"error ({exc.kind}): {exc}", file=sys.stderr)
        return _KIND_EXITS.get(exc.kind, EXIT_USAGE)
    except httpx.HTTPError as exc:
        print(f"error (transport): {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
