"""Optimal bidding when every query can carry a broad bid.

The unbudgeted problem is solved exactly two ways: by minimum cut on the
selection network and by the LP relaxation of the pairwise program, whose
constraint matrix is an interval/network matrix, so every basic feasible
solution is integral.  The budgeted variant maximizes value subject to a
spend cap; its LP optimum has at most one distinct fractional value across
all queries, which is what makes the two-campaign realization possible.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import maxflow, simplex
from .errors import SolverError
from .model import (
    UNIT2,
    BidVector,
    DependencyGraph,
    Instance,
    Money,
    WinningSet,
    bid_from_winning_set,
    derive_dependencies,
    winning_set,
)

INTEGRALITY_TOL = 1e-7
CLUSTER_TOL = 1e-6


@dataclass(frozen=True)
class OptimalBidResult:
    winning_set: WinningSet
    bid: BidVector
    method: str
    objective: int  # utility in micro^2, equals winning_set.utility


@dataclass(frozen=True)
class BudgetedSolution:
    """Budgeted LP optimum with its {0, 1, X} structure extracted."""

    x: dict[str, float]
    integral_ones: frozenset[str]
    integral_zeros: frozenset[str]
    fractional_ids: frozenset[str]
    shared_fraction: float | None
    lp_value: float  # sum of x * value * clicks, in currency units
    spend: float  # sum of x * cost * clicks, in currency units


@dataclass(frozen=True)
class Campaign:
    queries: frozenset[str]
    budget: float  # currency units


@dataclass(frozen=True)
class CampaignPlan:
    campaign1: Campaign
    campaign2: Campaign
    predicted_value: float


def _result(inst: Instance, members: frozenset[str], method: str) -> OptimalBidResult:
    ws = winning_set(inst, members)
    bid = bid_from_winning_set(inst, members, mode="query_language")
    return OptimalBidResult(winning_set=ws, bid=bid, method=method, objective=ws.utility)


def solve_query_mincut(inst: Instance) -> OptimalBidResult:
    """Maximum-utility winning set via one min-cut computation."""
    dg = derive_dependencies(inst)
    weights = inst.weights()
    net = maxflow.build_flow_graph(inst, dg, weights)
    cut = maxflow.max_flow(net)
    members = frozenset(cut.sink_side - {maxflow.SINK})
    ws = winning_set(inst, members)
    positive_total = sum(w for w in weights.values() if w > 0)
    assert ws.utility == positive_total - cut.flow_value, "cut identity violated"
    bid = bid_from_winning_set(inst, members, mode="query_language")
    return OptimalBidResult(winning_set=ws, bid=bid, method="mincut", objective=ws.utility)


def build_query_lp(inst: Instance, dg: DependencyGraph) -> tuple[simplex.LinearProgram, float]:
    """Pairwise LP: maximize sum x_q w(q) with x_q >= x_s for each pair (s, q).

    Weights are scaled to unit magnitude; returns (lp, scale) where scale
    converts LP objective units back to micro^2.
    """
    weights = inst.weights()
    scale = float(max((abs(w) for w in weights.values()), default=1) or 1)
    index = {q.id: i for i, q in enumerate(inst.queries)}
    lp = simplex.LinearProgram(len(inst.queries))
    lp.set_objective({index[qid]: w / scale for qid, w in weights.items()})
    for s, t in sorted(dg.pairs):
        if s != t:
            lp.add_row({index[t]: 1.0, index[s]: -1.0}, ">=", 0.0)
    return lp, scale


def solve_query_lp(inst: Instance) -> OptimalBidResult:
    """Same optimum via the LP relaxation; asserts the vertex is integral."""
    dg = derive_dependencies(inst)
    lp, _ = build_query_lp(inst, dg)
    sol = simplex.solve(lp)
    if sol.status != "optimal":
        raise SolverError(f"query LP unexpectedly {sol.status}")
    deviation = max(
        (min(abs(v), abs(1 - v)) for v in sol.values),
        default=0.0,
    )
    if deviation > INTEGRALITY_TOL:
        raise SolverError(
            f"non-integral vertex (deviation {deviation:.3e}) on a network-matrix program"
        )
    members = frozenset(q.id for q, v in zip(inst.queries, sol.values) if v >= 0.5)
    return _result(inst, members, "lp")


def _value_spend_units(inst: Instance) -> tuple[dict[str, int], dict[str, int]]:
    vn = {q.id: q.value.micros * q.clicks.micros for q in inst.queries}
    cn = {q.id: q.cost.micros * q.clicks.micros for q in inst.queries}
    return vn, cn


def build_budgeted_lp(
    inst: Instance, dg: DependencyGraph, budget_micro2: int
) -> simplex.LinearProgram:
    vn, cn = _value_spend_units(inst)
    index = {q.id: i for i, q in enumerate(inst.queries)}
    v_scale = float(max(vn.values(), default=1) or 1)
    c_scale = float(max(cn.values(), default=1) or 1)
    lp = simplex.LinearProgram(len(inst.queries))
    lp.set_objective({index[qid]: v / v_scale for qid, v in vn.items()})
    for s, t in sorted(dg.pairs):
        if s != t:
            lp.add_row({index[t]: 1.0, index[s]: -1.0}, ">=", 0.0)
    lp.add_row(
        {index[qid]: c / c_scale for qid, c in cn.items() if c},
        "<=",
        budget_micro2 / c_scale,
    )
    return lp


def solve_budgeted_lp(inst: Instance, budget) -> BudgetedSolution:
    """Value-maximizing fractional solution under the spend cap.

    The returned assignment is clustered into {0, 1, X}: values within
    CLUSTER_TOL of a bound count as integral, and everything else must
    coincide in one shared fractional value; more than one surviving
    cluster means the solver failed to return a true vertex.
    """
    budget_micro2 = _budget_micro2(budget)
    if budget_micro2 < 0:
        raise ValueError("budget must be non-negative")
    dg = derive_dependencies(inst)
    lp = build_budgeted_lp(inst, dg, budget_micro2)
    sol = simplex.solve(lp)
    if sol.status != "optimal":
        raise SolverError(f"budgeted LP unexpectedly {sol.status}")
    x = {q.id: float(v) for q, v in zip(inst.queries, sol.values)}
    ones, zeros, frac = set(), set(), {}
    for qid, v in x.items():
        if v <= CLUSTER_TOL:
            zeros.add(qid)
        elif v >= 1.0 - CLUSTER_TOL:
            ones.add(qid)
        else:
            frac[qid] = v
    shared: float | None = None
    if frac:
        spread = max(frac.values()) - min(frac.values())
        if spread > CLUSTER_TOL:
            raise SolverError(
                f"more than one fractional cluster (spread {spread:.3e}); "
                "expected a single shared value at an optimal vertex"
            )
        shared = sum(frac.values()) / len(frac)
    vn, cn = _value_spend_units(inst)
    lp_value = sum(x[qid] * vn[qid] for qid in x) / UNIT2
    spend = sum(x[qid] * cn[qid] for qid in x) / UNIT2
    return BudgetedSolution(
        x=x,
        integral_ones=frozenset(ones),
        integral_zeros=frozenset(zeros),
        fractional_ids=frozenset(frac),
        shared_fraction=shared,
        lp_value=lp_value,
        spend=spend,
    )


def _budget_micro2(budget) -> int:
    """Accept Money or raw micro^2; budgets are money, spend is micro^2."""
    if isinstance(budget, Money):
        return budget.micros * 10**6
    return int(budget)


def solve_budgeted_lagrangian(inst: Instance, budget) -> float:
    """Independent estimate of the budgeted LP optimum.

    Bisects a price multiplier, solving the unbudgeted problem with weights
    (value - multiplier * cost) * clicks by min-cut at each step; the
    multiplier stays rational so every cut is exact.  The LP optimum is the
    concave spend-value envelope at the budget, recovered by interpolating
    between the two bracketing cuts.
    """
    budget_micro2 = _budget_micro2(budget)
    dg = derive_dependencies(inst)
    vn, cn = _value_spend_units(inst)

    def cut_at(lam: Fraction) -> tuple[int, int]:
        weights = {
            q.id: q.clicks.micros
            * (q.value.micros * lam.denominator - lam.numerator * q.cost.micros)
            for q in inst.queries
        }
        net = maxflow.build_flow_graph(inst, dg, weights)
        cut = maxflow.max_flow(net)
        members = cut.sink_side - {maxflow.SINK}
        return sum(vn[m] for m in members), sum(cn[m] for m in members)

    value0, spend0 = cut_at(Fraction(0))
    if spend0 <= budget_micro2:
        return value0 / UNIT2
    lam_hi = Fraction(
        max(
            (Fraction(q.value.micros, q.cost.micros) for q in inst.queries if q.cost.micros),
            default=Fraction(1),
        )
    )
    value_hi, spend_hi = cut_at(lam_hi)
    for _ in range(200):
        if spend_hi <= budget_micro2:
            break
        lam_hi *= 2
        value_hi, spend_hi = cut_at(lam_hi)
    else:
        raise SolverError("no multiplier brings spend under budget")
    lo, hi = Fraction(0), lam_hi
    lo_cut, hi_cut = (value0, spend0), (value_hi, spend_hi)
    for _ in range(120):
        mid = (lo + hi) / 2
        value_m, spend_m = cut_at(mid)
        if spend_m > budget_micro2:
            lo, lo_cut = mid, (value_m, spend_m)
        else:
            hi, hi_cut = mid, (value_m, spend_m)
        if lo_cut[1] == hi_cut[1]:
            break
    (v_over, s_over), (v_under, s_under) = lo_cut, hi_cut
    if s_under == budget_micro2 or s_over == s_under:
        return v_under / UNIT2
    # Chord of the concave envelope through the two bracketing cuts.
    frac = Fraction(budget_micro2 - s_under, s_over - s_under)
    value = Fraction(v_under) + frac * (v_over - v_under)
    return float(value) / UNIT2


def plan_two_campaigns(inst: Instance, sol: BudgetedSolution, budget) -> CampaignPlan:
    """Realize the budgeted LP optimum as two throttled campaigns.

    Campaign 1 runs the fully selected queries with exactly their spend;
    campaign 2 runs the fractional component with the leftover budget, and
    uniform-rate throttling delivers precisely the shared fraction of it.
    """
    budget_units = _budget_micro2(budget) / UNIT2
    vn, cn = _value_spend_units(inst)
    b1 = sum(cn[qid] for qid in sol.integral_ones) / UNIT2
    if b1 > budget_units + 1e-6 * max(budget_units, 1.0):
        raise SolverError(f"integral spend {b1} exceeds budget {budget_units}")
    rest = sol.fractional_ids
    value1 = sum(vn[qid] for qid in sol.integral_ones) / UNIT2
    rest_value = sum(vn[qid] for qid in rest) / UNIT2
    rest_spend = sum(cn[qid] for qid in rest) / UNIT2
    budget2 = max(budget_units - b1, 0.0) if rest else 0.0
    if not rest:
        predicted = value1
    elif rest_spend <= 0:
        predicted = value1 + rest_value
    else:
        predicted = value1 + min(budget2 / rest_spend, 1.0) * rest_value
    return CampaignPlan(
        campaign1=Campaign(queries=frozenset(sol.integral_ones), budget=b1),
        campaign2=Campaign(queries=frozenset(rest), budget=budget2),
        predicted_value=predicted,
    )


def simulate_campaign(inst: Instance, campaign: Campaign) -> float:
    """Realized value under uniform-rate throttling: full value when spend
    fits the budget, otherwise the budget/spend fraction of it."""
    vn, cn = _value_spend_units(inst)
    full_value = sum(vn[qid] for qid in campaign.queries) / UNIT2
    full_spend = sum(cn[qid] for qid in campaign.queries) / UNIT2
    if full_spend <= campaign.budget:
        return full_value
    if full_spend <= 0:
        return full_value
    return full_value * (campaign.budget / full_spend)
