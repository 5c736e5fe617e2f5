"""FastAPI service wrapping the solver library.

Every solver error maps to one structured error envelope so clients can act
on the code: invalid_input (400), size_limit (413), solver_failure (500).
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .. import __version__, reports
from ..errors import (
    BroadBidError,
    IterationLimitError,
    ParseError,
    SizeLimitError,
    SolverError,
    ValidationError,
)
from ..model import Money, dump_instance, load_instance
from .. import generators
from . import schemas


def _error_status(exc: Exception) -> tuple[int, str]:
    if isinstance(exc, (ParseError, ValidationError, ValueError)):
        return 400, "invalid_input"
    if isinstance(exc, SizeLimitError):
        return 413, "size_limit"
    if isinstance(exc, (SolverError, IterationLimitError)):
        return 500, "solver_failure"
    return 500, "internal"


def create_app() -> FastAPI:
    app = FastAPI(title="broadbid", version=__version__)

    @app.exception_handler(BroadBidError)
    async def handle_library_error(request: Request, exc: BroadBidError):
        status, code = _error_status(exc)
        return JSONResponse(
            status_code=status, content={"error": {"code": code, "message": str(exc)}}
        )

    @app.exception_handler(ValueError)
    async def handle_value_error(request: Request, exc: ValueError):
        status, code = _error_status(exc)
        return JSONResponse(
            status_code=status, content={"error": {"code": code, "message": str(exc)}}
        )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return {"status": "ok"}

    @app.get("/version", response_model=schemas.VersionResponse)
    def version():
        return {
            "version": __version__,
            "report_schema": reports.REPORT_SCHEMA,
            "rng": "pcg64",
        }

    @app.post("/solve")
    def solve(req: schemas.SolveRequest):
        inst = load_instance(req.instance.model_dump())
        budget = Money.parse(req.budget) if req.budget is not None else None
        return reports.run_solve(
            inst,
            req.method,
            budget=budget,
            epsilon=req.epsilon,
            trials=req.trials,
            seed=req.seed,
            rate=req.rate,
        )

    @app.post("/solve.csv", response_class=PlainTextResponse)
    def solve_csv(req: schemas.SolveRequest):
        return reports.report_to_csv(solve(req))

    @app.post("/plan")
    def plan(req: schemas.PlanRequest):
        inst = load_instance(req.instance.model_dump())
        budget = Money.parse(req.budget) if req.budget is not None else None
        return reports.run_plan(inst, budget)

    @app.post("/generate", response_model=schemas.GenerateResponse)
    def generate(req: schemas.GenerateRequest):
        return {"instance": dump_instance(_generate(req))}

    @app.post("/experiment/sim")
    def experiment_sim(req: schemas.ExperimentSimRequest):
        return reports.run_experiment_sim(
            req.keywords, req.runs, req.seed, req.exact_method, req.bounds_ok
        )

    return app


def _require(value, name: str, family: str):
    if value is None:
        raise ValidationError(f"family {family!r} needs {name!r}")
    return value


def _generate(req: schemas.GenerateRequest):
    family = req.family
    if family == "greedy-trap":
        return generators.greedy_trap(_require(req.n, "n", family))
    if family == "integrality-gap":
        return generators.integrality_gap(
            _require(req.k, "k", family),
            _require(req.chain, "chain", family),
            Money.parse(_require(req.cost_anchor, "cost_anchor", family)),
            Money.parse(_require(req.cost_satellite, "cost_satellite", family)),
            Money.parse(_require(req.value_anchor, "value_anchor", family)),
            strict=req.strict,
        )
    if family == "independent-set":
        nodes = _require(req.nodes, "nodes", family)
        return generators.independent_set(nodes, req.edges or [])
    if family == "max-coverage":
        return generators.max_coverage(
            _require(req.sets, "sets", family),
            req.element_weights or {},
            _require(req.k, "k", family),
        )
    if family == "simulation":
        return generators.simulation(
            _require(req.keywords, "keywords", family),
            _require(req.seed, "seed", family),
        )
    raise ValidationError(f"unknown family {family!r}")


app = create_app()
