"""Command-line client for the solver service.

The CLI is a thin HTTP client: with ``--server`` it talks to a running
service, otherwise it mounts the FastAPI app in-process over an ASGI
transport, so everything works offline with identical payloads.

Exit codes: 0 success, 2 bad flags or invalid input, 3 solver failure,
4 exhaustive-search size limit.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx

from . import __version__
from .reports import REPORT_SCHEMA, report_to_csv

_VERSION_MESSAGE = f"broadbid %(version)s (report schema {REPORT_SCHEMA}, rng pcg64)"


def _request(server: str | None, path: str, payload: dict) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=600.0) as client:
            return client.post(path, json=payload)
    import asyncio

    from .service.app import create_app

    async def go() -> httpx.Response:
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://broadbid.local", timeout=600.0
        ) as client:
            return await client.post(path, json=payload)

    return asyncio.run(go())


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _post(server: str | None, path: str, payload: dict) -> dict:
    try:
        resp = _request(server, path, payload)
    except httpx.HTTPError as e:
        _fail(f"cannot reach service: {e}", 3)
    if resp.status_code == 200:
        return resp.json()
    try:
        body = resp.json()
    except ValueError:
        body = {}
    err = body.get("error") or {}
    code = err.get("code")
    message = err.get("message") or str(body.get("detail", resp.text))
    if resp.status_code == 422 or code == "invalid_input":
        _fail(message, 2)
    if resp.status_code == 413 or code == "size_limit":
        _fail(message, 4)
    _fail(message, 3)
    raise AssertionError("unreachable")


def _load_instance_doc(path: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        _fail(f"instance file not found: {path}", 2)
    except json.JSONDecodeError as e:
        _fail(f"malformed instance document: {e}", 2)
    if not isinstance(doc, dict):
        _fail("instance document must be a JSON object", 2)
    return doc


def _emit(report: dict, out: str | None, fmt: str) -> None:
    text = report_to_csv(report) if fmt == "csv" else json.dumps(report, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


@click.group()
@click.version_option(__version__, message=_VERSION_MESSAGE)
@click.option("--server", default=None, help="Base URL of a running service; default runs in-process.")
@click.pass_context
def main(ctx: click.Context, server: str | None) -> None:
    """Bid optimization for broad-match ad auctions."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server


@main.command()
@click.option("--instance", "instance_path", required=True, type=click.Path())
@click.option(
    "--method",
    required=True,
    type=click.Choice(
        [
            "mincut",
            "lp",
            "budgeted",
            "lagrangian",
            "keyword-lp-round",
            "keyword-exact",
            "greedy-margin",
            "greedy-rate",
            "oracle",
        ]
    ),
)
@click.option("--budget", default=None, help="Budget in currency units (decimal).")
@click.option("--epsilon", type=click.Choice(["0", "0.5"]), default="0")
@click.option("--trials", type=int, default=1000)
@click.option("--seed", type=int, default=0)
@click.option(
    "--rate",
    type=click.Choice(["profit_over_cost", "value_over_cost"]),
    default="profit_over_cost",
    help="Ratio used by greedy-rate.",
)
@click.option("--out", default=None, type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@click.pass_context
def solve(ctx, instance_path, method, budget, epsilon, trials, seed, rate, out, fmt):
    """Run one solver on an instance document."""
    payload = {
        "instance": _load_instance_doc(instance_path),
        "method": method,
        "budget": budget,
        "epsilon": float(epsilon),
        "trials": trials,
        "seed": seed,
        "rate": rate,
    }
    _emit(_post(ctx.obj["server"], "/solve", payload), out, fmt)


@main.command()
@click.option(
    "--family",
    required=True,
    type=click.Choice(
        ["greedy-trap", "integrality-gap", "independent-set", "max-coverage", "simulation"]
    ),
)
@click.option("--n", type=int, default=None, help="greedy-trap: number of keywords.")
@click.option("--k", type=int, default=None, help="integrality-gap size / max-coverage budget.")
@click.option("--chain", type=int, default=None, help="integrality-gap chain length.")
@click.option("--cost-anchor", default=None)
@click.option("--cost-satellite", default=None)
@click.option("--value-anchor", default=None)
@click.option("--strict/--no-strict", default=True, help="Enforce the scale ordering of the gap family.")
@click.option("--graph", default=None, type=click.Path(), help="independent-set: edge list file.")
@click.option("--sets-file", default=None, type=click.Path(), help="max-coverage: JSON with sets and element_weights.")
@click.option("--keywords", type=int, default=None, help="simulation: keyword count.")
@click.option("--seed", type=int, default=None)
@click.option("--out", required=True, type=click.Path())
@click.pass_context
def generate(ctx, family, n, k, chain, cost_anchor, cost_satellite, value_anchor,
             strict, graph, sets_file, keywords, seed, out):
    """Write an instance document from one of the built-in families."""
    payload: dict = {"family": family, "strict": strict}
    if n is not None:
        payload["n"] = n
    if k is not None:
        payload["k"] = k
    if chain is not None:
        payload["chain"] = chain
    for key, val in (
        ("cost_anchor", cost_anchor),
        ("cost_satellite", cost_satellite),
        ("value_anchor", value_anchor),
    ):
        if val is not None:
            payload[key] = val
    if graph is not None:
        from .generators import parse_edge_list

        try:
            nodes, edges = parse_edge_list(Path(graph).read_text())
        except (OSError, ValueError) as e:
            _fail(f"bad edge list: {e}", 2)
        payload["nodes"] = nodes
        payload["edges"] = edges
    if sets_file is not None:
        try:
            doc = json.loads(Path(sets_file).read_text())
        except (OSError, json.JSONDecodeError) as e:
            _fail(f"bad sets file: {e}", 2)
        payload["sets"] = doc.get("sets", {})
        payload["element_weights"] = doc.get("element_weights", {})
    if keywords is not None:
        payload["keywords"] = keywords
    if seed is not None:
        payload["seed"] = seed
    body = _post(ctx.obj["server"], "/generate", payload)
    Path(out).write_text(json.dumps(body["instance"], indent=2) + "\n")


@main.command()
@click.option("--instance", "instance_path", required=True, type=click.Path())
@click.option("--budget", default=None, help="Budget in currency units; defaults to the instance budget.")
@click.option("--out", default=None, type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@click.pass_context
def plan(ctx, instance_path, budget, out, fmt):
    """Split a budget into the two-campaign realization of the LP optimum."""
    payload = {"instance": _load_instance_doc(instance_path), "budget": budget}
    _emit(_post(ctx.obj["server"], "/plan", payload), out, fmt)


@main.group()
def experiment() -> None:
    """Multi-run experiment harnesses."""


@experiment.command("sim")
@click.option("--keywords", type=int, required=True)
@click.option("--runs", type=int, default=15)
@click.option("--seed", type=int, default=0)
@click.option("--exact-method", type=click.Choice(["closed-form", "bb", "brute"]), default="closed-form")
@click.option("--bounds-ok", is_flag=True, default=False,
              help="Beyond 12 keywords, report relaxation bounds instead of exact optima.")
@click.option("--out", default=None, type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@click.pass_context
def experiment_sim(ctx, keywords, runs, seed, exact_method, bounds_ok, out, fmt):
    """Compare exact+broad vs broad-only optima over simulated campaigns."""
    payload = {
        "keywords": keywords,
        "runs": runs,
        "seed": seed,
        "exact_method": exact_method,
        "bounds_ok": bounds_ok,
    }
    _emit(_post(ctx.obj["server"], "/experiment/sim", payload), out, fmt)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host: str, port: int) -> None:
    """Run the solver service."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
