"""Exact-vs-broad-only experiment over simulated keyword campaigns.

Each run draws a fresh uniform-cost instance over K keywords and all pairs,
then compares the best bidding strategy using exact and broad match against
the best using broad match alone.  Broad-only is a restriction of the
strategy space, so its optimum never exceeds the combined one; the report
tracks how small the gap stays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import keyword_solver
from .errors import SizeLimitError, ValidationError
from .generators import simulation
from .model import UNIT2, Instance, weight

EXACT_K_LIMIT = 12

CLOSED_FORM = "closed-form"
BRANCH_BOUND = "bb"
BRUTE = "brute"


def derive_run_seed(seed: int, run: int) -> int:
    """Per-run seed: first 64-bit word of SeedSequence([seed, run])."""
    return int(np.random.SeedSequence([seed, run]).generate_state(1, dtype=np.uint64)[0])


def uniform_cost_optimum(inst: Instance, allow_exact: bool) -> int:
    """Exact keyword optimum for single-price-level instances, in micro^2.

    With one price level, a broad bid on a keyword wins the keyword and its
    matches atomically and exact bids are independent top-ups, so the
    optimum decomposes over subsets of broadly-bid keywords.
    """
    keywords = list(inst.biddable_ids)
    others = [q for q in inst.queries if not q.biddable]
    costs = {q.cost.micros for q in inst.queries}
    if len(costs) != 1 or min(costs) <= 0:
        raise ValidationError("closed-form optimum needs one shared positive cost")
    k = len(keywords)
    if k > 22:
        raise SizeLimitError("closed-form enumeration limited to 22 keywords")
    kw_pos = {s: i for i, s in enumerate(keywords)}
    masks = np.arange(1 << k, dtype=np.int64)
    kw_w = np.array([weight(inst.by_id[s]) for s in keywords], dtype=np.int64)
    member_w = np.zeros(masks.size, dtype=np.int64)
    for i in range(k):
        member_w += kw_w[i] * ((masks >> i) & 1)
    touched_w = np.zeros(masks.size, dtype=np.int64)
    for q in others:
        parents = [kw_pos[s] for s in inst.matchers.get(q.id, ()) if s in kw_pos]
        if not parents:
            continue
        hit = np.zeros(masks.size, dtype=np.int64)
        for i in parents:
            hit |= (masks >> i) & 1
        touched_w += weight(q) * hit
    totals = member_w + touched_w
    if allow_exact:
        pos = np.maximum(kw_w, 0)
        exact_total = int(pos.sum())
        covered = np.zeros(masks.size, dtype=np.int64)
        for i in range(k):
            covered += pos[i] * ((masks >> i) & 1)
        totals = totals + exact_total - covered
    return int(totals.max())


@dataclass(frozen=True)
class SimRun:
    run: int
    seed: int
    exact_broad: float  # currency units (an LP bound in bounds mode)
    broad_only: float
    mode: str  # exact | bounds


@dataclass(frozen=True)
class SimReport:
    keywords: int
    runs: list[SimRun]
    mean_exact_broad: float
    mean_broad_only: float
    max_ratio: float
    mode: str


def _exact_value(inst: Instance, method: str, allow_exact: bool) -> int:
    if method == CLOSED_FORM:
        return uniform_cost_optimum(inst, allow_exact)
    if method == BRUTE:
        from .baselines import brute_force_keyword

        _, _, util, _ = brute_force_keyword(inst, None, allow_exact=allow_exact)
        return util
    if method == BRANCH_BOUND:
        res = keyword_solver.solve_keyword_exact(inst, allow_exact_match=allow_exact)
        return res.objective
    raise ValueError(f"unknown exact method {method!r}")


def run_simulation_experiment(
    keywords: int,
    runs: int,
    seed: int,
    exact_method: str = CLOSED_FORM,
    bounds_ok: bool = False,
) -> SimReport:
    if keywords > EXACT_K_LIMIT and not bounds_ok:
        raise SizeLimitError(
            f"exact optimization is limited to {EXACT_K_LIMIT} keywords; "
            "enable bounds mode to report relaxation bounds instead"
        )
    mode = "exact" if keywords <= EXACT_K_LIMIT else "bounds"
    out: list[SimRun] = []
    for run in range(runs):
        run_seed = derive_run_seed(seed, run)
        inst = simulation(keywords, run_seed)
        if mode == "exact":
            both = _exact_value(inst, exact_method, allow_exact=True) / UNIT2
            broad = _exact_value(inst, exact_method, allow_exact=False) / UNIT2
        else:
            both = keyword_solver.solve_relaxation(inst, allow_exact=True).objective
            broad = keyword_solver.solve_relaxation(inst, allow_exact=False).objective
        out.append(SimRun(run=run, seed=run_seed, exact_broad=both, broad_only=broad, mode=mode))
    mean_both = sum(r.exact_broad for r in out) / len(out)
    mean_broad = sum(r.broad_only for r in out) / len(out)
    ratios = [r.exact_broad / r.broad_only for r in out if r.broad_only > 0]
    return SimReport(
        keywords=keywords,
        runs=out,
        mean_exact_broad=mean_both,
        mean_broad_only=mean_broad,
        max_ratio=max(ratios) if ratios else float("nan"),
        mode=mode,
    )
