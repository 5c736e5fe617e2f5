"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the verdict lines.
"""

import json
import math
import time

import numpy as np
from click.testing import CliRunner

from broadbid import keyword_solver as ks
from broadbid.baselines import (
    brute_force_budgeted_integral,
    brute_force_keyword,
    brute_force_query,
    max_coverage_value,
    max_independent_set_size,
    max_margin_greedy,
    max_rate_greedy,
)
from broadbid.cli import main as cli_main
from broadbid.generators import (
    greedy_trap,
    independent_set,
    integrality_gap,
    max_coverage,
    random_instance,
    random_keyword_instance,
)
from broadbid.model import MICRO, UNIT2, Money, derive_dependencies, weight
from broadbid.query_solver import (
    build_query_lp,
    plan_two_campaigns,
    simulate_campaign,
    solve_budgeted_lagrangian,
    solve_budgeted_lp,
    solve_query_lp,
    solve_query_mincut,
)
from broadbid.reports import strip_volatile
from broadbid.simplex import solve as lp_solve

ORACLE_SEED = 20240601
BUDGET_SEED = 20240602
ROUNDING_SEED = 20240603
GRAPH_SEED = 20240604


def _verdict(ok: bool, label: str, detail: str = "") -> bool:
    print(f"acceptance {label}: {'PASS' if ok else 'FAIL'}{' - ' + detail if detail else ''}")
    return ok


def _oracle_instances():
    rng = np.random.default_rng(ORACLE_SEED)
    return [random_instance(rng, max_queries=14) for _ in range(200)]


def test_criterion_1_oracle_equivalence():
    started = time.perf_counter()
    mismatches = 0
    for inst in _oracle_instances():
        if solve_query_mincut(inst).objective != brute_force_query(inst).objective:
            mismatches += 1
    elapsed = time.perf_counter() - started
    ok = mismatches == 0 and elapsed < 10.0
    assert _verdict(
        ok, "1 oracle equivalence", f"200 instances, {mismatches} mismatches, {elapsed:.2f}s"
    )


def test_criterion_2_lp_method_agreement():
    worst_dev = 0.0
    mismatches = 0
    for inst in _oracle_instances():
        lp, _ = build_query_lp(inst, derive_dependencies(inst))
        sol = lp_solve(lp)
        dev = max((min(abs(v), abs(1 - v)) for v in sol.values), default=0.0)
        worst_dev = max(worst_dev, dev)
        if solve_query_lp(inst).objective != solve_query_mincut(inst).objective:
            mismatches += 1
    ok = worst_dev <= 1e-7 and mismatches == 0
    assert _verdict(
        ok, "2 LP integrality/agreement", f"max deviation {worst_dev:.2e}, {mismatches} mismatches"
    )


def test_criterion_3_greedy_counterexample():
    inst = greedy_trap(8)
    greedy_zero = (
        max_margin_greedy(inst).objective == 0
        and max_rate_greedy(inst, "profit_over_cost").objective == 0
        and max_rate_greedy(inst, "value_over_cost").objective == 0
    )
    mincut = solve_query_mincut(inst).objective
    # Independent enumeration: a closed set on r keywords contains every
    # pair touching any of them, C(8,2) - C(8-r,2) in total; pairs alone
    # are never profitable, so scanning r suffices.
    kw_w = weight(inst.by_id["k00"])
    pair_w = weight(inst.by_id["k00+k01"])
    best = 0
    for r in range(9):
        forced_pairs = 28 - (8 - r) * (7 - r) // 2
        best = max(best, r * kw_w + forced_pairs * pair_w)
    ok = greedy_zero and mincut == best == 2_750_000_000_000
    assert _verdict(
        ok,
        "3 greedy counterexample",
        f"greedy 0: {greedy_zero}, mincut {mincut / UNIT2} vs enumerated {best / UNIT2}",
    )


def _budgeted_cases():
    rng = np.random.default_rng(BUDGET_SEED)
    return [random_instance(rng, max_queries=30, budget=True) for _ in range(100)]


def test_criterion_4_budgeted_structure():
    bad = []
    for idx, inst in enumerate(_budgeted_cases()):
        sol = solve_budgeted_lp(inst, inst.budget)
        dg = derive_dependencies(inst)
        anchors = {0.0, 1.0} | (
            {sol.shared_fraction} if sol.shared_fraction is not None else set()
        )
        clustered = all(
            min(abs(v - a) for a in anchors) <= 1e-6 for v in sol.x.values()
        )
        rows_hold = all(sol.x[t] >= sol.x[s] - 1e-9 for s, t in dg.pairs)
        budget_units = inst.budget.micros / MICRO
        spend_ok = sol.spend <= budget_units + 1e-6 * max(budget_units, 1.0)
        plan = plan_two_campaigns(inst, sol, inst.budget)
        realized = simulate_campaign(inst, plan.campaign1) + simulate_campaign(
            inst, plan.campaign2
        )
        plan_ok = math.isclose(realized, sol.lp_value, rel_tol=1e-6, abs_tol=1e-9)
        if not (clustered and rows_hold and spend_ok and plan_ok):
            bad.append((idx, clustered, rows_hold, spend_ok, plan_ok))
    assert _verdict(not bad, "4 budgeted structure", f"100 instances, failures: {bad[:3]}")


def test_criterion_5_lagrangian_cross_check():
    worst = 0.0
    for inst in _budgeted_cases():
        sol = solve_budgeted_lp(inst, inst.budget)
        est = solve_budgeted_lagrangian(inst, inst.budget)
        if sol.lp_value < 1e-9:
            worst = max(worst, abs(est))
        else:
            worst = max(worst, abs(est - sol.lp_value) / sol.lp_value)
    ok = worst <= 1e-5
    assert _verdict(ok, "5 Lagrangian cross-check", f"worst relative gap {worst:.2e}")


def _gap_integral_oracle(k: int, n_chain: int, c: int, cp: int, m: int, budget: int) -> int:
    """Independent closed-form enumeration of the budgeted integer optimum
    for the gap family, in currency units: choose how many anchors to take
    (forcing satellites and their chains) plus extra satellites."""
    best = 0
    for a in range(k + 2):
        forced_sats = 0 if a == 0 else (k if a == 1 else k + 1)
        for extra in range(k + 2 - forced_sats):
            spend = a * c + (forced_sats + extra) * cp + a * n_chain
            if spend <= budget:
                best = max(best, a * m + forced_sats + extra)
    return best


def test_criterion_6_integrality_gap_family():
    # Validated scale ordering: anchor cost > 10x satellite cost > 100x chain.
    c, cp, n_chain, m = 250, 20, 1, 2000
    integral_ok = True
    ratios = {}
    for k in (3, 5, 8):
        inst = integrality_gap(k, n_chain, Money.of(c), Money.of(cp), Money.of(m))
        budget_units = c + k * cp + n_chain
        expected = m + k
        closed_form = _gap_integral_oracle(k, n_chain, c, cp, m, budget_units)
        if k <= 5:  # exhaustive cross-check while the oracle still fits
            _, value = brute_force_budgeted_integral(inst, inst.budget.micros * MICRO)
            integral_ok &= value == expected * UNIT2
        integral_ok &= closed_form == expected
        sol = solve_budgeted_lp(inst, inst.budget)
        ratios[k] = sol.lp_value / expected
    ratio_ok = all(ratios[k] >= k * 0.95 for k in ratios)
    detail = (
        f"integral value M+k exact: {integral_ok}; LP/integral ratios "
        + ", ".join(f"k={k}: {r:.3f}" for k, r in ratios.items())
    )
    _verdict(integral_ok and ratio_ok, "6 integrality gap", detail)
    assert integral_ok, "integral optimum must equal M + k exactly"
    # Under the dependency cost filter an anchor can never cost less than a
    # satellite, which caps the fractional advantage at roughly
    # (c + k c' + n) / (c + c' + n) < (k + 1) / 2, and the validated scale
    # ordering pushes it near 1.  A ratio of ~k is therefore not attainable
    # by this family; the assertion below records that finding honestly.
    assert ratio_ok, (
        f"LP/integral ratios {ratios} fall short of 0.95*k: with the "
        "validated parameter ordering the fractional optimum can only beat "
        "the integral one by the shared-satellite factor "
        "(c + k*c' + n)/(c + c' + n), which is close to 1, not k"
    )


def _rounding_cases():
    rng = np.random.default_rng(ROUNDING_SEED)
    picked = []
    while len(picked) < 20:
        inst = random_keyword_instance(rng, max_keywords=4, max_dependents=6)
        frac = ks.solve_relaxation(inst)
        if frac.v_frac <= 0 or frac.c_frac > frac.v_frac / 4:
            continue
        picked.append((inst, frac))
    return picked


def test_criterion_7_rounding_guarantee():
    started = time.perf_counter()
    rate_trials = 100_000
    mean_trials = 10_000
    delta = 4 * math.sqrt(0.25 / rate_trials)
    failures = []
    for idx, (inst, frac) in enumerate(_rounding_cases()):
        dg = derive_dependencies(inst)
        for eps in (0.0, 0.5):
            tr = ks.rounding_trials(inst, frac, eps, rate_trials, seed=idx * 7 + int(eps * 2))
            head = tr.utilities[:mean_trials]
            mean = float(np.mean(head)) / UNIT2
            std = float(np.std(head, ddof=1)) / UNIT2
            bound = ks.utility_bound(frac, eps)
            if mean < bound - 3 * std / math.sqrt(mean_trials):
                failures.append((idx, eps, "mean", mean, bound))
            for q in inst.queries:
                rate = tr.win_rates[q.id]
                if q.biddable:
                    continue
                y = frac.y_win[q.id]
                lo = y * (1 - eps) * (1 - 0.5 * (1 - eps)) - delta
                hi = 2 * (1 - eps) * y + delta
                if not (lo <= rate <= hi):
                    failures.append((idx, eps, q.id, rate, (lo, hi)))
    elapsed = time.perf_counter() - started
    ok = not failures and elapsed < 60.0
    assert _verdict(
        ok, "7 rounding guarantee", f"20 instances x 2 epsilons, {elapsed:.1f}s, failures: {failures[:3]}"
    )


def test_criterion_8_hardness_reduction_identities():
    rng = np.random.default_rng(GRAPH_SEED)
    graph_ok = True
    for _ in range(20):
        n = int(rng.integers(2, 11))
        nodes = [f"v{i}" for i in range(n)]
        edges = [
            (nodes[i], nodes[j])
            for i in range(n)
            for j in range(i + 1, n)
            if rng.random() < 0.35
        ]
        inst = independent_set(nodes, edges)
        got = ks.solve_keyword_exact(inst).objective
        graph_ok &= got == max_independent_set_size(nodes, edges) * UNIT2
    coverage_ok = True
    for _ in range(10):
        n_sets = int(rng.integers(2, 6))
        elements = [f"e{i}" for i in range(int(rng.integers(3, 8)))]
        sets = {
            f"s{i}": [e for e in elements if rng.random() < 0.5] or [elements[0]]
            for i in range(n_sets)
        }
        weights = {e: float(rng.integers(1, 6)) for e in elements}
        k = int(rng.integers(1, n_sets + 1))
        inst = max_coverage(sets, weights, k)
        _, _, _, value = brute_force_keyword(inst, budget_micro2=inst.budget.micros * MICRO)
        expected = max_coverage_value(
            sets, {e: int(w * UNIT2) for e, w in weights.items()}, k
        )
        coverage_ok &= value == expected
    ok = graph_ok and coverage_ok
    assert _verdict(
        ok, "8 hardness reductions", f"independent set: {graph_ok}, coverage: {coverage_ok}"
    )


def test_criterion_9_simulation_experiment():
    started = time.perf_counter()
    runner = CliRunner()
    res = runner.invoke(
        cli_main,
        ["experiment", "sim", "--keywords", "12", "--runs", "15", "--seed", "424242"],
        catch_exceptions=False,
    )
    elapsed = time.perf_counter() - started
    assert res.exit_code == 0, res.output
    body = json.loads(res.output)
    dominance = all(r["broad_only"] <= r["exact_broad"] + 1e-12 for r in body["runs"])
    ok = dominance and elapsed < 60.0 and body["max_ratio"] >= 1.0
    assert _verdict(
        ok,
        "9 simulation experiment",
        f"15 runs in {elapsed:.1f}s, max exact/broad-only ratio gap "
        f"{(body['max_ratio'] - 1) * 100:.1f}% (reported, not thresholded)",
    )


def test_criterion_10_determinism():
    runner = CliRunner()
    with runner.isolated_filesystem():
        for args in (
            ["generate", "--family", "simulation", "--keywords", "8", "--seed", "77",
             "--out", "sim.json"],
            ["generate", "--family", "greedy-trap", "--n", "8", "--out", "trap.json"],
        ):
            gen = runner.invoke(cli_main, args, catch_exceptions=False)
            assert gen.exit_code == 0
        commands = [
            ["solve", "--instance", "trap.json", "--method", "mincut"],
            ["solve", "--instance", "sim.json", "--method", "keyword-lp-round",
             "--epsilon", "0.5", "--trials", "500", "--seed", "13"],
            ["solve", "--instance", "sim.json", "--method", "lagrangian", "--budget", "7"],
            ["experiment", "sim", "--keywords", "6", "--runs", "5", "--seed", "99"],
            ["plan", "--instance", "sim.json", "--budget", "4"],
        ]
        stable = True
        for cmd in commands:
            first = json.loads(runner.invoke(cli_main, cmd, catch_exceptions=False).output)
            second = json.loads(runner.invoke(cli_main, cmd, catch_exceptions=False).output)
            if strip_volatile(first) != strip_volatile(second):
                stable = False
        regen = runner.invoke(
            cli_main,
            ["generate", "--family", "simulation", "--keywords", "8", "--seed", "77",
             "--out", "sim2.json"],
            catch_exceptions=False,
        )
        assert regen.exit_code == 0
        from pathlib import Path

        stable &= Path("sim.json").read_text() == Path("sim2.json").read_text()
    assert _verdict(stable, "10 determinism", "CLI reruns reproduce reports bit-exactly")
