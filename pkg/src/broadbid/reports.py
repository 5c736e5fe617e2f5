"""Report assembly for solver runs: one dict shape per run, JSON- and
CSV-renderable with identical numbers.  Monetary amounts are exact decimal
strings; utilities and spends are micro^2-exact decimals in currency units."""

from __future__ import annotations

import csv
import io
import math
import time
from typing import Any

from . import baselines, experiment, keyword_solver, query_solver
from .errors import SolverError, ValidationError
from .model import (
    Instance,
    derive_dependencies,
    format_micro2,
    weight,
)
from .query_solver import OptimalBidResult

REPORT_SCHEMA = "broadbid.report/1"

SOLVE_METHODS = (
    "mincut",
    "lp",
    "budgeted",
    "lagrangian",
    "keyword-lp-round",
    "keyword-exact",
    "greedy-margin",
    "greedy-rate",
    "oracle",
)

ROW_COLUMNS = ["id", "value", "cost", "clicks", "w", "bid_exact", "bid_broad", "won"]


def _instance_summary(inst: Instance) -> dict[str, int]:
    dg = derive_dependencies(inst)
    return {
        "queries": len(inst.queries),
        "biddable": len(inst.biddable_ids),
        "dependency_pairs": len(dg.pairs),
    }


def _query_rows(inst: Instance, result: OptimalBidResult) -> list[dict[str, Any]]:
    rows = []
    for q in inst.queries:
        rows.append(
            {
                "id": q.id,
                "value": str(q.value),
                "cost": str(q.cost),
                "clicks": str(q.clicks),
                "w": format_micro2(weight(q)),
                "bid_exact": format_micro2(result.bid.exact.get(q.id, 0) * 10**6),
                "bid_broad": format_micro2(result.bid.broad.get(q.id, 0) * 10**6),
                "won": q.id in result.winning_set.members,
            }
        )
    return rows


def _result_report(inst: Instance, result: OptimalBidResult) -> dict[str, Any]:
    ws = result.winning_set
    return {
        "method": result.method,
        "utility": format_micro2(ws.utility),
        "value_part": format_micro2(ws.value_part),
        "cost_part": format_micro2(ws.cost_part),
        "spend": format_micro2(ws.cost_part),
        "won_count": len(ws.members),
        "rows": _query_rows(inst, result),
    }


def run_solve(
    inst: Instance,
    method: str,
    budget=None,
    epsilon: float = 0.0,
    trials: int = 1000,
    seed: int = 0,
    rate: str = baselines.PROFIT_OVER_COST,
) -> dict[str, Any]:
    """Dispatch one solve and assemble its report."""
    if method not in SOLVE_METHODS:
        raise ValidationError(f"unknown method {method!r}")
    started = time.perf_counter()
    budget = budget if budget is not None else inst.budget
    report: dict[str, Any] = {
        "schema": REPORT_SCHEMA,
        "kind": "solve",
        "instance": _instance_summary(inst),
        "seed": seed,
    }
    if method == "mincut":
        report.update(_result_report(inst, query_solver.solve_query_mincut(inst)))
    elif method == "lp":
        report.update(_result_report(inst, query_solver.solve_query_lp(inst)))
    elif method == "oracle":
        report.update(_result_report(inst, baselines.brute_force_query(inst)))
    elif method == "greedy-margin":
        report.update(_result_report(inst, baselines.max_margin_greedy(inst)))
    elif method == "greedy-rate":
        report.update(_result_report(inst, baselines.max_rate_greedy(inst, rate)))
    elif method == "keyword-exact":
        report.update(_result_report(inst, keyword_solver.solve_keyword_exact(inst)))
    elif method in ("budgeted", "lagrangian"):
        if budget is None:
            raise ValidationError(f"method {method!r} needs a budget")
        if method == "budgeted":
            sol = query_solver.solve_budgeted_lp(inst, budget)
            report.update(
                {
                    "method": method,
                    "lp_value": sol.lp_value,
                    "spend": sol.spend,
                    "shared_fraction": sol.shared_fraction,
                    "integral_ones": sorted(sol.integral_ones),
                    "integral_zeros": sorted(sol.integral_zeros),
                    "fractional": sorted(sol.fractional_ids),
                    "x": {qid: sol.x[qid] for qid in sorted(sol.x)},
                }
            )
        else:
            estimate = query_solver.solve_budgeted_lagrangian(inst, budget)
            report.update({"method": method, "lp_value_estimate": estimate})
    elif method == "keyword-lp-round":
        frac = keyword_solver.solve_relaxation(inst)
        tr = keyword_solver.rounding_trials(inst, frac, epsilon, trials, seed)
        bound = keyword_solver.utility_bound(frac, epsilon)
        mean = tr.mean_utility
        std = tr.std_utility
        report.update(
            {
                "method": method,
                "epsilon": epsilon,
                "trials": trials,
                "relaxation": {
                    "value_part": frac.v_frac,
                    "cost_part": frac.c_frac,
                    "objective": frac.objective,
                },
                "summary": {
                    "mean": mean,
                    "std": std,
                    "bound": bound,
                    "bound_satisfied": bool(
                        mean >= bound - 3 * std / math.sqrt(max(trials, 1))
                    ),
                },
                "trial_rows": [
                    {
                        "trial": i,
                        "seed": seed,
                        "utility": format_micro2(int(tr.utilities[i])),
                        "spend": format_micro2(int(tr.spends[i])),
                        "value": format_micro2(int(tr.values[i])),
                    }
                    for i in range(min(trials, len(tr.utilities)))
                ],
            }
        )
    report["wall_time_ms"] = (time.perf_counter() - started) * 1000.0
    return report


def run_plan(inst: Instance, budget) -> dict[str, Any]:
    """Budgeted LP, two-campaign split, and the throttled realization check."""
    started = time.perf_counter()
    budget = budget if budget is not None else inst.budget
    if budget is None:
        raise ValidationError("planning needs a budget")
    sol = query_solver.solve_budgeted_lp(inst, budget)
    plan = query_solver.plan_two_campaigns(inst, sol, budget)
    realized1 = query_solver.simulate_campaign(inst, plan.campaign1)
    realized2 = query_solver.simulate_campaign(inst, plan.campaign2)
    total = realized1 + realized2
    if not math.isclose(total, sol.lp_value, rel_tol=1e-6, abs_tol=1e-9):
        raise SolverError(
            f"realized value {total} does not match the fractional optimum {sol.lp_value}"
        )
    return {
        "schema": REPORT_SCHEMA,
        "kind": "plan",
        "instance": _instance_summary(inst),
        "lp_value": sol.lp_value,
        "shared_fraction": sol.shared_fraction,
        "campaign1": {
            "queries": sorted(plan.campaign1.queries),
            "budget": f"{plan.campaign1.budget:.6f}",
        },
        "campaign2": {
            "queries": sorted(plan.campaign2.queries),
            "budget": f"{plan.campaign2.budget:.6f}",
        },
        "predicted_value": plan.predicted_value,
        "realized": {"campaign1": realized1, "campaign2": realized2, "total": total},
        "wall_time_ms": (time.perf_counter() - started) * 1000.0,
    }


def run_experiment_sim(
    keywords: int, runs: int, seed: int, exact_method: str, bounds_ok: bool
) -> dict[str, Any]:
    started = time.perf_counter()
    rep = experiment.run_simulation_experiment(
        keywords, runs, seed, exact_method=exact_method, bounds_ok=bounds_ok
    )
    return {
        "schema": REPORT_SCHEMA,
        "kind": "experiment-sim",
        "keywords": rep.keywords,
        "seed": seed,
        "mode": rep.mode,
        "runs": [
            {
                "run": r.run,
                "seed": r.seed,
                "exact_broad": r.exact_broad,
                "broad_only": r.broad_only,
            }
            for r in rep.runs
        ],
        "mean_exact_broad": rep.mean_exact_broad,
        "mean_broad_only": rep.mean_broad_only,
        "max_ratio": rep.max_ratio,
        "wall_time_ms": (time.perf_counter() - started) * 1000.0,
    }


def report_to_csv(report: dict[str, Any]) -> str:
    """CSV rendering carrying the same numbers as the JSON report."""
    out = io.StringIO()
    if report.get("rows"):
        writer = csv.DictWriter(out, fieldnames=ROW_COLUMNS)
        writer.writeheader()
        for row in report["rows"]:
            writer.writerow({k: row[k] for k in ROW_COLUMNS})
    elif report.get("trial_rows"):
        writer = csv.DictWriter(out, fieldnames=["trial", "seed", "utility", "spend", "value"])
        writer.writeheader()
        for row in report["trial_rows"]:
            writer.writerow(row)
    elif report.get("kind") == "experiment-sim":
        writer = csv.DictWriter(out, fieldnames=["run", "seed", "exact_broad", "broad_only"])
        writer.writeheader()
        for row in report["runs"]:
            writer.writerow(row)
    else:
        writer = csv.writer(out)
        writer.writerow(["key", "value"])
        for key in sorted(report):
            if key in ("schema", "kind", "rows", "trial_rows", "runs", "wall_time_ms", "x"):
                continue
            value = report[key]
            if isinstance(value, dict):
                for sub in sorted(value):
                    writer.writerow([f"{key}.{sub}", value[sub]])
            elif isinstance(value, list):
                writer.writerow([key, ";".join(map(str, value))])
            else:
                writer.writerow([key, value])
    return out.getvalue()


def strip_volatile(report: dict[str, Any]) -> dict[str, Any]:
    """Report minus timing fields, for bit-exact reproducibility comparisons."""
    return {k: v for k, v in report.items() if k != "wall_time_ms"}
