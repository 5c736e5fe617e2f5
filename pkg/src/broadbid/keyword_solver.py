"""Keyword-language bidding: LP relaxation, randomized rounding, exact search.

With bids restricted to a keyword subset, optimal bidding is hard, so the
production path solves a fractional relaxation over bid price levels and
rounds it.  Variables, per keyword s and price level p (a query cost):

    W[s, p]  mass of placing the broad bid exactly p on s
    Z[s, p]  mass of broad bids on s that win a cost-p query, i.e. the
             upper tail of W from p
    R[s]     mass of the exact-match bid on s
    Y[q]     win indicator for a non-keyword query q

Only positive price levels carry W variables: a zero bid is no bid, so a
zero-cost query is won by any broad bid at all, which is exactly the upper
tail from level zero.  Rounding picks, independently per keyword, the exact
bid with probability R[s] and otherwise level p with probability
W[s, p] * (1 - epsilon), leaving the rest unbid.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass

import numpy as np

from . import simplex
from .errors import SizeLimitError, SolverError, ValidationError
from .model import (
    UNIT2,
    BidVector,
    Instance,
    derive_dependencies,
    interpret_bid,
    weight,
    winning_set,
)
from .query_solver import OptimalBidResult

DEFAULT_MAX_NODES = 10**6


@dataclass(frozen=True)
class PriceLevels:
    """Distinct query costs; only the positive ones are biddable levels."""

    all: tuple[int, ...]  # sorted unique costs, micros
    positive: tuple[int, ...]

    @classmethod
    def of(cls, inst: Instance) -> "PriceLevels":
        costs = sorted({q.cost.micros for q in inst.queries})
        return cls(all=tuple(costs), positive=tuple(c for c in costs if c > 0))


@dataclass(frozen=True)
class KeywordFractional:
    levels: PriceLevels
    w_mass: dict[tuple[str, int], float]  # (keyword, level micros) -> mass
    z_mass: dict[tuple[str, int], float]  # (keyword, cost micros) -> winning tail
    r_mass: dict[str, float]
    y_win: dict[str, float]
    v_frac: float  # value part of the objective, currency units
    c_frac: float  # cost part, currency units
    objective: float  # v_frac - c_frac


@dataclass(frozen=True)
class RoundedBid:
    bid: BidVector
    epsilon: float
    seed: int


class _IlpApprox:
    """The relaxation and its variable layout, reusable across search nodes."""

    def __init__(self, inst: Instance, allow_exact: bool = True):
        self.inst = inst
        self.dg = derive_dependencies(inst)
        self.levels = PriceLevels.of(inst)
        keywords = list(inst.biddable_ids)
        others = [q.id for q in inst.queries if not q.biddable]
        for s, t in sorted(inst.broad_match):
            if s == t:
                continue
            if inst.by_id[t].biddable:
                raise ValidationError(
                    "keyword relaxation does not model keywords matching other "
                    f"keywords (pair {s!r} -> {t!r})"
                )
            if inst.by_id[s].cost < inst.by_id[t].cost:
                raise ValidationError(
                    f"broad-match pair {s!r} -> {t!r} violates the cost filter; "
                    "the relaxation cannot account for wins through it"
                )
        self.keywords = keywords
        self.others = others
        self.w_index: dict[tuple[str, int], int] = {}
        self.z_index: dict[tuple[str, int], int] = {}
        self.r_index: dict[str, int] = {}
        self.y_index: dict[str, int] = {}
        n = 0
        for s in keywords:
            for p in self.levels.positive:
                self.w_index[(s, p)] = n
                n += 1
            for p in self.levels.all:
                self.z_index[(s, p)] = n
                n += 1
            self.r_index[s] = n
            n += 1
        for q in others:
            self.y_index[q] = n
            n += 1
        self.n_vars = n
        weights = inst.weights()
        self.scale = float(max((abs(w) for w in weights.values()), default=1) or 1)
        lp = simplex.LinearProgram(n)
        objective: dict[int, float] = {}
        for s in keywords:
            ws = weights[s] / self.scale
            objective[self.z_index[(s, inst.by_id[s].cost.micros)]] = ws
            objective[self.r_index[s]] = objective.get(self.r_index[s], 0.0) + ws
        for q in others:
            objective[self.y_index[q]] = weights[q] / self.scale
        lp.set_objective(objective)
        for s in keywords:
            for p in self.levels.all:
                tail = {
                    self.w_index[(s, t)]: -1.0 for t in self.levels.positive if t >= p
                }
                tail[self.z_index[(s, p)]] = 1.0
                lp.add_row(tail, "=", 0.0)
                lp.add_row({self.z_index[(s, p)]: 1.0, self.r_index[s]: 1.0}, "<=", 1.0)
        for q in others:
            dependees = sorted(self.dg.dependees.get(q, frozenset()) - {q})
            cq = inst.by_id[q].cost.micros
            yj = self.y_index[q]
            if not dependees:
                lp.set_bounds(yj, 0.0, 0.0)
                continue
            upper = {self.z_index[(s, cq)]: 1.0 for s in dependees}
            upper[yj] = -1.0
            lp.add_row(upper, ">=", 0.0)
            for s in dependees:
                lp.add_row({yj: 1.0, self.z_index[(s, cq)]: -1.0}, ">=", 0.0)
        if not allow_exact:
            for s in keywords:
                lp.set_bounds(self.r_index[s], 0.0, 0.0)
        self.lp = lp

    def restricted(self, fixed: dict[str, tuple[str, int]]) -> simplex.LinearProgram:
        """Clone of the LP with some keywords pinned to a pure strategy."""
        lp = copy.deepcopy(self.lp)
        for s, (kind, level) in fixed.items():
            r = self.r_index[s]
            if kind == "exact":
                lp.set_bounds(r, 1.0, 1.0)
            else:
                lp.set_bounds(r, 0.0, 0.0)
            for p in self.levels.positive:
                j = self.w_index[(s, p)]
                if kind == "broad" and p == level:
                    lp.set_bounds(j, 1.0, 1.0)
                else:
                    lp.set_bounds(j, 0.0, 0.0)
        return lp

    def extract(self, sol: simplex.VertexSolution) -> KeywordFractional:
        inst = self.inst
        w_mass = {k: sol[j] for k, j in self.w_index.items()}
        z_mass = {k: sol[j] for k, j in self.z_index.items()}
        r_mass = {s: sol[j] for s, j in self.r_index.items()}
        y_win = {q: sol[j] for q, j in self.y_index.items()}
        v_frac = 0.0
        c_frac = 0.0
        for s in self.keywords:
            q = inst.by_id[s]
            sel = z_mass[(s, q.cost.micros)] + r_mass[s]
            v_frac += sel * q.value.micros * q.clicks.micros
            c_frac += sel * q.cost.micros * q.clicks.micros
        for qid in self.others:
            q = inst.by_id[qid]
            v_frac += y_win[qid] * q.value.micros * q.clicks.micros
            c_frac += y_win[qid] * q.cost.micros * q.clicks.micros
        return KeywordFractional(
            levels=self.levels,
            w_mass=w_mass,
            z_mass=z_mass,
            r_mass=r_mass,
            y_win=y_win,
            v_frac=v_frac / UNIT2,
            c_frac=c_frac / UNIT2,
            objective=(v_frac - c_frac) / UNIT2,
        )


def build_ilp_approx(inst: Instance, allow_exact: bool = True) -> simplex.LinearProgram:
    return _IlpApprox(inst, allow_exact=allow_exact).lp


def solve_relaxation(inst: Instance, allow_exact: bool = True) -> KeywordFractional:
    builder = _IlpApprox(inst, allow_exact=allow_exact)
    sol = simplex.solve(builder.lp)
    if sol.status != "optimal":
        raise SolverError(f"keyword relaxation unexpectedly {sol.status}")
    frac = builder.extract(sol)
    check = sol.objective_value * builder.scale / UNIT2
    if not math.isclose(frac.objective, check, rel_tol=1e-7, abs_tol=1e-7):
        raise SolverError("objective decomposition drifted from the LP objective")
    return frac


def _keyword_uniform_order(frac: KeywordFractional, inst: Instance) -> list[str]:
    return sorted(s for s in inst.biddable_ids)


def round_bid_from_uniforms(
    inst: Instance, frac: KeywordFractional, epsilon: float, uniforms
) -> tuple[dict[str, int], dict[str, int]]:
    """Map one uniform draw per keyword to (exact bids, broad bids)."""
    exact: dict[str, int] = {}
    broad: dict[str, int] = {}
    for s, u in zip(_keyword_uniform_order(frac, inst), uniforms):
        r = frac.r_mass.get(s, 0.0)
        if u < r:
            exact[s] = max(inst.by_id[s].cost.micros, 1)
            continue
        acc = r
        for p in frac.levels.positive:
            acc += frac.w_mass.get((s, p), 0.0) * (1.0 - epsilon)
            if u < acc:
                broad[s] = p
                break
    return exact, broad


def round_bid(inst: Instance, frac: KeywordFractional, epsilon: float, seed: int) -> RoundedBid:
    """One randomized rounding of the fractional solution (PCG64-seeded).

    Per keyword, independently: exact bid with probability R, else broad bid
    at level p with probability W[p] * (1 - epsilon), else no bid.
    """
    if not (0.0 <= epsilon < 1.0):
        raise ValueError("epsilon must lie in [0, 1)")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    uniforms = rng.random(len(inst.biddable_ids))
    exact, broad = round_bid_from_uniforms(inst, frac, epsilon, uniforms)
    return RoundedBid(
        bid=BidVector.build(inst, exact=exact, broad=broad), epsilon=epsilon, seed=seed
    )


def selection_probability(
    inst: Instance, frac: KeywordFractional, epsilon: float, qid: str
) -> float:
    """Exact win probability of a query under the rounding distribution.

    Keywords win through their own bid; other queries through any matching
    keyword, independently, which for two dependees is the stated
    inclusion-exclusion form.
    """
    q = inst.by_id[qid]
    if q.biddable:
        return (1.0 - epsilon) * frac.z_mass[(qid, q.cost.micros)] + frac.r_mass[qid]
    dg = derive_dependencies(inst)
    dependees = sorted(dg.dependees.get(qid, frozenset()) - {qid})
    miss = 1.0
    for s in dependees:
        miss *= 1.0 - (1.0 - epsilon) * frac.z_mass[(s, q.cost.micros)]
    return 1.0 - miss


def utility_bound(frac: KeywordFractional, epsilon: float) -> float:
    """Guaranteed expected utility of the rounded bid, in currency units:
    (1-e)(1 - (1-e)/2) V - max(1, 2-2e) C over the fractional value/cost."""
    if not (0.0 <= epsilon < 1.0):
        raise ValueError("epsilon must lie in [0, 1)")
    one = 1.0 - epsilon
    return one * (1.0 - 0.5 * one) * frac.v_frac - max(1.0, 2.0 * one) * frac.c_frac


@dataclass(frozen=True)
class RoundingTrials:
    utilities: np.ndarray  # micro^2, one entry per trial
    values: np.ndarray
    spends: np.ndarray
    win_rates: dict[str, float]
    seed: int
    epsilon: float

    @property
    def mean_utility(self) -> float:
        return float(np.mean(self.utilities)) / UNIT2

    @property
    def std_utility(self) -> float:
        return float(np.std(self.utilities, ddof=1)) / UNIT2 if len(self.utilities) > 1 else 0.0


def rounding_trials(
    inst: Instance,
    frac: KeywordFractional,
    epsilon: float,
    trials: int,
    seed: int,
) -> RoundingTrials:
    """Vectorized rounding trials: one master PCG64 stream supplies a uniform
    per (trial, keyword); trial i uses row i, so a run is reproducible from
    the single seed."""
    if not (0.0 <= epsilon < 1.0):
        raise ValueError("epsilon must lie in [0, 1)")
    keywords = _keyword_uniform_order(frac, inst)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    uniforms = rng.random((trials, len(keywords)))
    nq = len(inst.queries)
    levels = list(frac.levels.positive)
    # Per keyword: bid level per trial (0 = no broad bid) and exact flag.
    bid_level = np.zeros((trials, len(keywords)), dtype=np.int64)
    exact_flag = np.zeros((trials, len(keywords)), dtype=bool)
    for j, s in enumerate(keywords):
        r = frac.r_mass.get(s, 0.0)
        u = uniforms[:, j]
        exact_flag[:, j] = u < r
        acc = r
        undecided = ~exact_flag[:, j]
        for p in levels:
            nxt = acc + frac.w_mass.get((s, p), 0.0) * (1.0 - epsilon)
            take = undecided & (u >= acc) & (u < nxt)
            bid_level[take, j] = p
            acc = nxt
    kw_pos = {s: j for j, s in enumerate(keywords)}
    won = np.zeros((trials, nq), dtype=bool)
    weights = np.zeros(nq, dtype=np.int64)
    vns = np.zeros(nq, dtype=np.int64)
    cns = np.zeros(nq, dtype=np.int64)
    for qi, q in enumerate(inst.queries):
        weights[qi] = weight(q)
        vns[qi] = q.value.micros * q.clicks.micros
        cns[qi] = q.cost.micros * q.clicks.micros
        need = max(q.cost.micros, 1)
        cols = [kw_pos[s] for s in inst.matchers.get(q.id, ()) if s in kw_pos]
        if cols:
            won[:, qi] = (bid_level[:, cols] >= need).any(axis=1)
        if q.biddable:
            # The exact bid is max(cost, one micro), which always wins q.
            won[:, qi] |= exact_flag[:, kw_pos[q.id]]
    utilities = won @ weights
    values = won @ vns
    spends = won @ cns
    rates = {q.id: float(np.mean(won[:, qi])) for qi, q in enumerate(inst.queries)}
    return RoundingTrials(
        utilities=utilities,
        values=values,
        spends=spends,
        win_rates=rates,
        seed=seed,
        epsilon=epsilon,
    )


@dataclass(frozen=True)
class ExactLimits:
    max_nodes: int = DEFAULT_MAX_NODES


def solve_keyword_exact(
    inst: Instance,
    limits: ExactLimits | None = None,
    allow_exact_match: bool = True,
) -> OptimalBidResult:
    """True optimum over keyword strategies (no bid / exact / broad at a
    positive price level).  Small strategy spaces are enumerated outright;
    larger ones run depth-first branch-and-bound with the relaxation bound.
    """
    from . import baselines

    limits = limits or ExactLimits()
    levels = PriceLevels.of(inst)
    n_options = (2 if allow_exact_match else 1) + len(levels.positive)
    n_keywords = len(inst.biddable_ids)
    if n_options**n_keywords <= min(limits.max_nodes, 200_000):
        bid, members, util, _ = baselines.brute_force_keyword(
            inst, budget_micro2=None, allow_exact=allow_exact_match
        )
        ws = winning_set(inst, members)
        return OptimalBidResult(ws, bid, "keyword-exact", ws.utility)
    return _branch_and_bound(inst, limits, allow_exact_match)


def _branch_and_bound(
    inst: Instance, limits: ExactLimits, allow_exact_match: bool
) -> OptimalBidResult:
    builder = _IlpApprox(inst, allow_exact=allow_exact_match)
    dg = builder.dg
    levels = builder.levels

    def evaluate(fixed: dict[str, tuple[str, int]]) -> tuple[int, BidVector, frozenset[str]]:
        exact = {s: max(inst.by_id[s].cost.micros, 1) for s, (k, _) in fixed.items() if k == "exact"}
        broad = {s: p for s, (k, p) in fixed.items() if k == "broad"}
        bid = BidVector.build(inst, exact=exact, broad=broad)
        ws = interpret_bid(inst, dg, bid)
        return ws.utility, bid, ws.members

    best_util, best_bid, best_members = evaluate({})
    nodes = 0
    stack: list[dict[str, tuple[str, int]]] = [{}]
    options: list[tuple[str, int]] = [("none", 0)]
    if allow_exact_match:
        options.append(("exact", 0))
    options += [("broad", p) for p in levels.positive]
    # Improvements below the LP's float noise cannot be resolved by the bound.
    prune_margin = max(1.0, 1e-7 * builder.scale)
    while stack:
        fixed = stack.pop()
        nodes += 1
        if nodes > limits.max_nodes:
            raise SizeLimitError(f"branch-and-bound exceeded {limits.max_nodes} nodes")
        sol = simplex.solve(builder.restricted(fixed))
        if sol.status == "infeasible":
            continue
        bound = sol.objective_value * builder.scale  # micro^2
        if bound <= best_util + prune_margin:
            continue
        free = [s for s in builder.keywords if s not in fixed]
        if not free:
            util, bid, members = evaluate(fixed)
            if util > best_util:
                best_util, best_bid, best_members = util, bid, members
            continue

        def mass(s: str) -> float:
            total = sol[builder.r_index[s]] if allow_exact_match else 0.0
            total += sum(sol[builder.w_index[(s, p)]] for p in levels.positive)
            return min(total, 1.0 - total) if total <= 1.0 else 0.0

        branch = max(free, key=lambda s: (mass(s), s))
        util, bid, members = evaluate(fixed)  # greedy completion of the node
        if util > best_util:
            best_util, best_bid, best_members = util, bid, members
        for kind, p in options:
            child = dict(fixed)
            child[branch] = (kind, p)
            stack.append(child)
    ws = winning_set(inst, best_members)
    return OptimalBidResult(ws, best_bid, "keyword-exact", ws.utility)
