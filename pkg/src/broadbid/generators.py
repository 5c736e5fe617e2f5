"""Adversarial and benchmark instance families.

Every generator is a deterministic function of its parameters (the
simulation family threads a PCG64 seed).  Emitted broad-match relations are
closed under composition, so a bid realizing a dependency-closed set wins
exactly that set.
"""

from __future__ import annotations

import numpy as np

from .model import MICRO, Clicks, Instance, Money, Query


def greedy_trap(n: int) -> Instance:
    """n keywords (value 2, cost 1) plus every pair (value 1 - 1.5/n, cost 1).

    Each keyword broad-matches the pairs containing it, so any single
    addition looks like a loss to a one-step greedy while winning everything
    is profitable.
    """
    if n < 2:
        raise ValueError("greedy_trap needs n >= 2")
    pair_value = MICRO - round(1_500_000 / n)
    one = Money(MICRO)
    queries = [
        Query(f"k{i:02d}", Money(2 * MICRO), one, Clicks(MICRO), True) for i in range(n)
    ]
    matches = []
    for i in range(n):
        for j in range(i + 1, n):
            pid = f"k{i:02d}+k{j:02d}"
            queries.append(Query(pid, Money(pair_value), one, Clicks(MICRO), False))
            matches.append((f"k{i:02d}", pid))
            matches.append((f"k{j:02d}", pid))
    return Instance.build(queries, matches)


def integrality_gap(
    k: int,
    n_chain: int,
    cost_anchor: Money,
    cost_satellite: Money,
    value_anchor: Money,
    strict: bool = True,
) -> Instance:
    """Budget-gap family: k+1 anchors, k+1 satellites, k+1 cost-1 chains.

    Anchor i (cost c, value M) pulls in every satellite j != i (cost c',
    value 1) and its own chain of n unit-cost zero-value queries, so one
    anchor spends exactly the generated budget c + k c' + n for value M + k,
    while a fractional solution can spread mass over all anchors and share
    the satellites.  The strict ordering c > 10 c' > 100 n keeps the costs
    separated by scale; ``strict=False`` admits scaled-down parameters
    (still c > c' > 0) for oracle-checkable sizes.
    """
    c = cost_anchor.micros
    cp = cost_satellite.micros
    if strict:
        ok = c > 10 * cp and 10 * cp > 100 * n_chain * MICRO and n_chain >= 1
    else:
        ok = c > cp > 0 and n_chain >= 1
    if not ok:
        raise ValueError(
            "integrality_gap needs cost_anchor > 10*cost_satellite "
            "> 100*n_chain (in currency units); pass strict=False for "
            "scaled-down surrogates with cost_anchor > cost_satellite"
        )
    if k < 1:
        raise ValueError("integrality_gap needs k >= 1")
    one_click = Clicks(MICRO)
    one = Money(MICRO)
    queries: list[Query] = []
    matches: list[tuple[str, str]] = []
    anchors = [f"l{i}" for i in range(k + 1)]
    satellites = [f"r{i}" for i in range(k + 1)]
    for i in range(k + 1):
        queries.append(Query(anchors[i], value_anchor, cost_anchor, one_click, True))
        queries.append(Query(satellites[i], one, cost_satellite, one_click, True))
    for i in range(k + 1):
        for j in range(k + 1):
            if i != j:
                matches.append((anchors[i], satellites[j]))
        chain = [f"t{i}_{j}" for j in range(n_chain)]
        for j, tid in enumerate(chain):
            queries.append(Query(tid, Money(0), one, one_click, True))
            # The relation is composition-closed: the anchor and every
            # earlier chain node match each later one.
            matches.append((anchors[i], tid))
            for later in chain[j + 1 :]:
                matches.append((tid, later))
    budget = Money(c + k * cp + n_chain * MICRO)
    return Instance.build(queries, matches, budget=budget)


def independent_set(nodes: list[str], edges: list[tuple[str, str]]) -> Instance:
    """Keyword-language encoding of maximum independent set.

    One keyword per node with weight -(deg-1) and one pair query per edge
    with weight +1, all at one shared cost so a broad bid on a node wins the
    node together with its edges and nothing finer.  The best achievable
    utility equals the maximum independent set size.
    """
    names = sorted(dict.fromkeys(nodes))
    deg = {v: 0 for v in names}
    seen: set[tuple[str, str]] = set()
    for u, v in edges:
        if u not in deg or v not in deg:
            raise ValueError(f"edge ({u!r}, {v!r}) references unknown node")
        if u == v:
            raise ValueError("self-loops not allowed")
        e = (min(u, v), max(u, v))
        if e in seen:
            continue
        seen.add(e)
        deg[u] += 1
        deg[v] += 1
    shared_cost = max(1, max(deg.values(), default=1) - 1)
    cost = Money(shared_cost * MICRO)
    one_click = Clicks(MICRO)
    queries = [
        Query(v, Money((shared_cost - (deg[v] - 1)) * MICRO), cost, one_click, True)
        for v in names
    ]
    matches = []
    for u, v in sorted(seen):
        eid = f"{u}+{v}"
        queries.append(Query(eid, Money((shared_cost + 1) * MICRO), cost, one_click, False))
        matches.append((u, eid))
        matches.append((v, eid))
    return Instance.build(queries, matches)


def max_coverage(
    sets: dict[str, list[str]], element_weights: dict[str, float], k: int
) -> Instance:
    """Budgeted keyword-language encoding of maximum coverage: a unit-cost
    zero-value keyword per set, a free query per element worth its weight,
    and budget k."""
    if k < 0:
        raise ValueError("k must be non-negative")
    one_click = Clicks(MICRO)
    queries = [
        Query(f"set:{name}", Money(0), Money(MICRO), one_click, True) for name in sorted(sets)
    ]
    elements = sorted({e for members in sets.values() for e in members})
    for e in elements:
        w = element_weights.get(e, 0.0)
        queries.append(Query(f"elem:{e}", Money.of(w), Money(0), one_click, False))
    matches = [
        (f"set:{name}", f"elem:{e}")
        for name in sorted(sets)
        for e in sorted(set(sets[name]))
    ]
    return Instance.build(queries, matches, budget=Money(k * MICRO))


def simulation(n_keywords: int, seed: int) -> Instance:
    """Uniform-cost instance over n keywords and all keyword pairs.

    Keyword net values are standard normal draws; each pair's net value is
    the average, max, or min of its keywords' draws, chosen uniformly at
    random.  The shared cost is set high enough that no value goes negative.
    """
    if n_keywords < 2:
        raise ValueError("simulation needs at least 2 keywords")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    nets = rng.standard_normal(n_keywords)
    kinds = rng.integers(0, 3, size=n_keywords * (n_keywords - 1) // 2)
    net_micros = [round(float(x) * MICRO) for x in nets]
    pair_net_micros: list[int] = []
    idx = 0
    pair_index: list[tuple[int, int]] = []
    for i in range(n_keywords):
        for j in range(i + 1, n_keywords):
            a, b = net_micros[i], net_micros[j]
            kind = int(kinds[idx])
            idx += 1
            if kind == 0:
                pair_net_micros.append((a + b) // 2)
            elif kind == 1:
                pair_net_micros.append(max(a, b))
            else:
                pair_net_micros.append(min(a, b))
            pair_index.append((i, j))
    lowest = min(net_micros + pair_net_micros)
    cost_units = 1 if lowest >= 0 else (-lowest + MICRO - 1) // MICRO + 1
    cost_micros = cost_units * MICRO
    cost = Money(cost_micros)
    one_click = Clicks(MICRO)
    queries = [
        Query(f"k{i:02d}", Money(cost_micros + net_micros[i]), cost, one_click, True)
        for i in range(n_keywords)
    ]
    matches = []
    for (i, j), net in zip(pair_index, pair_net_micros):
        pid = f"k{i:02d}+k{j:02d}"
        queries.append(Query(pid, Money(cost_micros + net), cost, one_click, False))
        matches.append((f"k{i:02d}", pid))
        matches.append((f"k{j:02d}", pid))
    return Instance.build(queries, matches)


def random_keyword_instance(
    rng: np.random.Generator,
    max_keywords: int = 5,
    max_dependents: int = 8,
    max_dependees: int = 2,
) -> Instance:
    """Random keyword-language instance: a few biddable keywords plus
    non-biddable queries matched by at most ``max_dependees`` of them, with
    every match respecting the cost filter (keyword at least as costly)."""
    n_kw = int(rng.integers(1, max_keywords + 1))
    n_dep = int(rng.integers(1, max_dependents + 1))
    grain = MICRO // 1000
    queries: list[Query] = []
    matches: list[tuple[str, str]] = []
    kw_costs = [int(x) * grain for x in rng.integers(50, 2001, size=n_kw)]
    for i in range(n_kw):
        value = int(rng.integers(0, 4001)) * grain
        clicks = int(rng.integers(200, 2001)) * grain
        queries.append(
            Query(f"s{i:02d}", Money(value), Money(kw_costs[i]), Clicks(clicks), True)
        )
    for j in range(n_dep):
        n_parents = int(rng.integers(1, max_dependees + 1))
        parents = sorted(rng.choice(n_kw, size=min(n_parents, n_kw), replace=False))
        cost_cap = min(kw_costs[int(p)] for p in parents)
        cost = int(rng.integers(0, cost_cap // grain + 1)) * grain
        value = int(rng.integers(0, 4001)) * grain
        clicks = int(rng.integers(200, 2001)) * grain
        qid = f"q{j:02d}"
        queries.append(Query(qid, Money(value), Money(cost), Clicks(clicks), False))
        matches += [(f"s{int(p):02d}", qid) for p in parents]
    return Instance.build(queries, matches)


def parse_edge_list(text: str) -> tuple[list[str], list[tuple[str, str]]]:
    """Edge list: one 'u v' pair per line; lone tokens declare isolated nodes.
    Blank lines and #-comments are skipped."""
    nodes: list[str] = []
    edges: list[tuple[str, str]] = []
    known: set[str] = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) == 1:
            (u,) = parts
            if u not in known:
                known.add(u)
                nodes.append(u)
            continue
        if len(parts) != 2:
            raise ValueError(f"bad edge list line: {line!r}")
        u, v = parts
        for w in (u, v):
            if w not in known:
                known.add(w)
                nodes.append(w)
        edges.append((u, v))
    return nodes, edges


def random_instance(
    rng: np.random.Generator,
    max_queries: int = 14,
    all_biddable: bool = True,
    budget: bool = False,
) -> Instance:
    """Random cost-filter-consistent instance for oracle comparisons.

    Broad-match pairs point from a costlier query to a cheaper one (drawn
    along a descending-cost order) and are then transitively closed, so bid
    interpretation agrees with closed-set semantics.  Costs are multiples
    of 0.001 so the minimal positive bid never reaches a costed query.
    """
    n = int(rng.integers(1, max_queries + 1))
    grain = MICRO // 1000
    costs = [int(x) * grain for x in rng.integers(0, 4001, size=n)]
    values = [int(x) * grain for x in rng.integers(0, 4001, size=n)]
    clicks = [int(x) * grain for x in rng.integers(1, 3001, size=n)]
    order = [int(i) for i in np.argsort([-c for c in costs], kind="stable")]
    adj: dict[int, set[int]] = {i: set() for i in range(n)}
    density = float(rng.uniform(0.05, 0.4))
    for pos, i in enumerate(order):
        for j in order[pos + 1 :]:
            if rng.random() < density:
                adj[i].add(j)
    for a in reversed(order):
        extra: set[int] = set()
        for b in adj[a]:
            extra |= adj[b]
        adj[a] |= extra
    biddable = [all_biddable or bool(adj[i]) or bool(rng.random() < 0.6) for i in range(n)]
    queries = [
        Query(f"q{i:02d}", Money(values[i]), Money(costs[i]), Clicks(clicks[i]), biddable[i])
        for i in range(n)
    ]
    matches = [
        (f"q{a:02d}", f"q{b:02d}") for a, outs in adj.items() for b in outs
    ]
    money_budget = None
    if budget:
        total_spend_units = sum(costs[i] * clicks[i] for i in range(n)) // (MICRO * MICRO)
        money_budget = Money(int(rng.integers(0, total_spend_units + 2)) * MICRO)
    return Instance.build(queries, matches, budget=money_budget)
