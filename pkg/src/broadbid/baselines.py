"""Greedy baselines and exhaustive oracles.

The oracles are deliberately independent of the production solvers: plain
subset enumeration with a closure filter, used to certify the min-cut and
LP paths on small instances.
"""

from __future__ import annotations

from itertools import combinations, product

import numpy as np

from .errors import SizeLimitError
from .model import (
    BidVector,
    Instance,
    bid_from_winning_set,
    closure,
    derive_dependencies,
    interpret_bid,
    utility,
    winning_set,
)
from .query_solver import OptimalBidResult

ORACLE_MAX_QUERIES = 20

PROFIT_OVER_COST = "profit_over_cost"
VALUE_OVER_COST = "value_over_cost"


def _greedy(inst: Instance, pick_rate: str | None) -> frozenset[str]:
    dg = derive_dependencies(inst)
    vn = {q.id: q.value.micros * q.clicks.micros for q in inst.queries}
    cn = {q.id: q.cost.micros * q.clicks.micros for q in inst.queries}
    current: frozenset[str] = frozenset()
    current_u = 0
    while True:
        best_id: str | None = None
        best_key: tuple[int, int] | None = None
        for q in inst.queries:
            if q.id in current:
                continue
            grown = closure(dg, current | {q.id})
            u, _, _ = utility(inst, grown)
            margin = u - current_u
            if margin <= 0:
                continue
            added = grown - current
            if pick_rate is None:
                key = (margin, 1)
            elif pick_rate == PROFIT_OVER_COST:
                key = (margin, sum(cn[a] for a in added))
            else:
                key = (sum(vn[a] for a in added), sum(cn[a] for a in added))
            if best_key is None or _ratio_greater(key, best_key):
                best_key = key
                best_id = q.id
        if best_id is None:
            break
        current = closure(dg, current | {best_id})
        current_u, _, _ = utility(inst, current)
    return current


def _ratio_greater(a: tuple[int, int], b: tuple[int, int]) -> bool:
    """Strict numerator/denominator comparison by cross products; a
    zero-denominator gain ranks above any finite ratio.  Queries are scanned
    in id order, so keeping only strict improvements breaks ties by id."""
    an, ad = a
    bn, bd = b
    if ad == 0 and bd == 0:
        return an > bn
    if ad == 0:
        return True
    if bd == 0:
        return False
    return an * bd > bn * ad


def max_margin_greedy(inst: Instance) -> OptimalBidResult:
    """Repeatedly add the query whose closure-augmented marginal utility is
    largest; stops as soon as no addition improves the utility."""
    members = _greedy(inst, None)
    ws = winning_set(inst, members)
    bid = bid_from_winning_set(inst, members, mode="query_language")
    return OptimalBidResult(ws, bid, "greedy-margin", ws.utility)


def max_rate_greedy(inst: Instance, rate: str = PROFIT_OVER_COST) -> OptimalBidResult:
    """Greedy by marginal-profit/marginal-cost or marginal-value/marginal-cost,
    restricted to utility-improving additions; ties broken by query id."""
    if rate not in (PROFIT_OVER_COST, VALUE_OVER_COST):
        raise ValueError(f"unknown rate {rate!r}")
    members = _greedy(inst, rate)
    ws = winning_set(inst, members)
    bid = bid_from_winning_set(inst, members, mode="query_language")
    return OptimalBidResult(ws, bid, f"greedy-rate-{rate}", ws.utility)


def _closed_masks(inst: Instance, max_queries: int) -> tuple[np.ndarray, list[str]]:
    """All dependency-closed subsets of queries as bitmasks."""
    n = len(inst.queries)
    if n > max_queries:
        raise SizeLimitError(f"oracle limited to {max_queries} queries, got {n}")
    dg = derive_dependencies(inst)
    ids = [q.id for q in inst.queries]
    index = {qid: i for i, qid in enumerate(ids)}
    forced = np.zeros(n, dtype=np.int64)
    for i, qid in enumerate(ids):
        m = 0
        for t in dg.dependents.get(qid, ()):
            m |= 1 << index[t]
        forced[i] = m
    masks = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(masks.size, dtype=bool)
    for i in range(n):
        has_i = (masks >> i) & 1 == 1
        ok &= ~has_i | ((masks & forced[i]) == forced[i])
    return masks[ok], ids


def _member_sums(masks: np.ndarray, per_query: list[int]) -> np.ndarray:
    total = np.zeros(masks.size, dtype=np.int64)
    for i, w in enumerate(per_query):
        total += w * (((masks >> i) & 1).astype(np.int64))
    return total


def brute_force_query(inst: Instance, max_queries: int = ORACLE_MAX_QUERIES) -> OptimalBidResult:
    """Exhaustive maximum of utility over all dependency-closed subsets."""
    if any(abs(w) > 2**58 for w in inst.weights().values()):
        raise SizeLimitError("weights too large for the vectorized oracle")
    masks, ids = _closed_masks(inst, max_queries)
    weights = [inst.weights()[qid] for qid in ids]
    utilities = _member_sums(masks, weights)
    best = int(np.argmax(utilities))
    members = frozenset(ids[i] for i in range(len(ids)) if (int(masks[best]) >> i) & 1)
    ws = winning_set(inst, members)
    bid = bid_from_winning_set(inst, members, mode="query_language")
    return OptimalBidResult(ws, bid, "oracle", ws.utility)


def brute_force_budgeted_integral(
    inst: Instance, budget_micro2: int | None, max_queries: int = ORACLE_MAX_QUERIES
) -> tuple[frozenset[str], int]:
    """Max total value over closed sets with spend at most the budget (micro^2).

    A budget of None means unlimited.
    """
    masks, ids = _closed_masks(inst, max_queries)
    vn = [inst.by_id[qid].value.micros * inst.by_id[qid].clicks.micros for qid in ids]
    cn = [inst.by_id[qid].cost.micros * inst.by_id[qid].clicks.micros for qid in ids]
    values = _member_sums(masks, vn)
    if budget_micro2 is not None:
        spends = _member_sums(masks, cn)
        values = np.where(spends <= budget_micro2, values, np.int64(-1))
    best = int(np.argmax(values))
    members = frozenset(ids[i] for i in range(len(ids)) if (int(masks[best]) >> i) & 1)
    return members, int(values[best])


def keyword_strategies(inst: Instance) -> dict[str, list[tuple[str, int]]]:
    """Per-keyword pure strategies: no bid, exact at cost, or a broad bid at
    one of the positive price levels.  A zero bid is no bid, so the exact
    bid on a free keyword is the smallest positive amount instead."""
    levels = sorted({q.cost.micros for q in inst.queries if q.cost.micros > 0})
    out: dict[str, list[tuple[str, int]]] = {}
    for s in inst.biddable_ids:
        cost = inst.by_id[s].cost.micros
        options: list[tuple[str, int]] = [("none", 0), ("exact", max(cost, 1))]
        options += [("broad", p) for p in levels]
        out[s] = options
    return out


def brute_force_keyword(
    inst: Instance,
    budget_micro2: int | None = None,
    allow_exact: bool = True,
    max_profiles: int = 2_000_000,
) -> tuple[BidVector, frozenset[str], int, int]:
    """Enumerate all per-keyword strategy profiles.

    Returns (bid, winning set, utility, value) of the best profile; under a
    budget the objective is total value among profiles whose spend fits,
    otherwise utility.
    """
    dg = derive_dependencies(inst)
    strategies = keyword_strategies(inst)
    keys = sorted(strategies)
    count = 1
    for s in keys:
        count *= len(strategies[s] if allow_exact else [o for o in strategies[s] if o[0] != "exact"])
        if count > max_profiles:
            raise SizeLimitError(f"more than {max_profiles} keyword strategy profiles")
    best: tuple[int, BidVector, frozenset[str], int] | None = None
    options = [
        [o for o in strategies[s] if allow_exact or o[0] != "exact"] for s in keys
    ]
    for profile in product(*options):
        exact = {s: amt for s, (kind, amt) in zip(keys, profile) if kind == "exact"}
        broad = {s: amt for s, (kind, amt) in zip(keys, profile) if kind == "broad"}
        bid = BidVector.build(inst, exact=exact, broad=broad)
        ws = interpret_bid(inst, dg, bid)
        if budget_micro2 is not None:
            if ws.cost_part > budget_micro2:
                continue
            score = ws.value_part
        else:
            score = ws.utility
        if best is None or score > best[0]:
            best = (score, bid, ws.members, ws.utility)
    assert best is not None  # the all-none profile always qualifies
    score, bid, members, util = best
    value = score if budget_micro2 is not None else utility(inst, members)[1]
    return bid, members, util, value


def max_independent_set_size(nodes: list[str], edges: list[tuple[str, str]]) -> int:
    """Brute-force maximum independent set, for reduction cross-checks."""
    if len(nodes) > 20:
        raise SizeLimitError("independent-set brute force limited to 20 nodes")
    index = {v: i for i, v in enumerate(nodes)}
    adj = [0] * len(nodes)
    for u, v in edges:
        adj[index[u]] |= 1 << index[v]
        adj[index[v]] |= 1 << index[u]
    best = 0
    for mask in range(1 << len(nodes)):
        if any((mask >> i) & 1 and (mask & adj[i]) for i in range(len(nodes))):
            continue
        best = max(best, bin(mask).count("1"))
    return best


def max_coverage_value(
    sets: dict[str, list[str]], element_weights: dict[str, int], k: int
) -> int:
    """Brute-force maximum weight coverable by at most k of the given sets."""
    names = sorted(sets)
    if len(names) > 16:
        raise SizeLimitError("coverage brute force limited to 16 sets")
    best = 0
    for r in range(0, min(k, len(names)) + 1):
        for chosen in combinations(names, r):
            covered = set()
            for name in chosen:
                covered.update(sets[name])
            best = max(best, sum(element_weights.get(e, 0) for e in covered))
    return best
