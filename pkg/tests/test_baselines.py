import numpy as np
import pytest

from broadbid import generators as gen
from broadbid.baselines import (
    brute_force_budgeted_integral,
    brute_force_keyword,
    brute_force_query,
    max_coverage_value,
    max_independent_set_size,
    max_margin_greedy,
    max_rate_greedy,
)
from broadbid.errors import SizeLimitError
from broadbid.model import UNIT2, Clicks, Instance, Money, Query, dump_instance


def q(qid, value, cost, clicks=1, biddable=True):
    return Query(qid, Money.of(value), Money.of(cost), Clicks.of(clicks), biddable)


def test_margin_greedy_on_independent_positives():
    inst = Instance.build([q("a", 2, 1), q("b", 3, 1), q("c", 0.5, 1)])
    res = max_margin_greedy(inst)
    assert res.winning_set.members == {"a", "b"}


def test_margin_greedy_chain_pickup():
    inst = Instance.build([q("a", 2, 1), q("ab", 0.9, 1, biddable=False)], [("a", "ab")])
    res = max_margin_greedy(inst)
    assert res.winning_set.members == {"a", "ab"}
    assert res.objective == 900_000_000_000


@pytest.mark.parametrize("n", [4, 6, 8])
def test_margin_greedy_traps_to_zero(n):
    assert max_margin_greedy(gen.greedy_trap(n)).objective == 0


@pytest.mark.parametrize("rate", ["profit_over_cost", "value_over_cost"])
def test_rate_greedy_trap8_zero(rate):
    assert max_rate_greedy(gen.greedy_trap(8), rate).objective == 0


def test_rate_greedy_single_and_pair_positives():
    inst = Instance.build([q("a", 2, 1)])
    assert max_rate_greedy(inst).winning_set.members == {"a"}
    inst = Instance.build([q("a", 2, 1), q("b", 5, 2)])
    assert max_rate_greedy(inst).winning_set.members == {"a", "b"}
    assert max_rate_greedy(inst, "value_over_cost").winning_set.members == {"a", "b"}


def test_rate_greedy_rejects_unknown_rate():
    with pytest.raises(ValueError):
        max_rate_greedy(Instance.build([q("a", 2, 1)]), "clicks_over_cost")


def test_greedy_never_beats_oracle():
    rng = np.random.default_rng(31)
    for _ in range(25):
        inst = gen.random_instance(rng, max_queries=10)
        best = brute_force_query(inst).objective
        assert max_margin_greedy(inst).objective <= best
        assert max_rate_greedy(inst).objective <= best


def test_oracle_empty_instance():
    inst = Instance.build([])
    assert brute_force_query(inst).objective == 0


def test_oracle_trap6_value():
    res = brute_force_query(gen.greedy_trap(6), max_queries=21)
    assert res.objective == 2_250_000_000_000  # (6 + 3) / 4 currency units
    assert len(res.winning_set.members) == 21


def test_oracle_negative_chain():
    inst = Instance.build([q("a", 2, 1), q("ab", -0.5, 1, biddable=False)], [("a", "ab")])
    res = brute_force_query(inst)
    assert res.winning_set.members == frozenset()
    assert res.objective == 0


def test_oracle_size_limit():
    with pytest.raises(SizeLimitError):
        brute_force_query(gen.greedy_trap(8))


def test_budgeted_oracle_trivia():
    inst = Instance.build([q("a", 2, 1), q("b", 3, 2)])
    members, value = brute_force_budgeted_integral(inst, None)
    assert members == {"a", "b"} and value == 5 * UNIT2
    members, value = brute_force_budgeted_integral(inst, 0)
    assert members == frozenset() and value == 0


def test_budgeted_oracle_fig_surrogate():
    inst = gen.integrality_gap(3, 3, Money.of(100), Money.of(10), Money.of(50), strict=False)
    _, value = brute_force_budgeted_integral(inst, inst.budget.micros * 10**6)
    assert value == 53 * UNIT2


def test_generate_trap_counts():
    assert len(gen.greedy_trap(4).queries) == 10
    assert len(gen.simulation(30, seed=1).queries) == 465


def test_generate_independent_set_triangle():
    inst = gen.independent_set(["a", "b", "c"], [("a", "b"), ("b", "c"), ("a", "c")])
    keywords = [qq for qq in inst.queries if qq.biddable]
    assert len(keywords) == 3
    assert all(k.cost == Money.of(1) for k in keywords)
    _, _, util, _ = brute_force_keyword(inst)
    assert util == UNIT2


def test_generators_are_deterministic():
    a = dump_instance(gen.simulation(12, seed=99))
    b = dump_instance(gen.simulation(12, seed=99))
    assert a == b
    c = dump_instance(gen.simulation(12, seed=100))
    assert c != a


def test_generator_validators():
    with pytest.raises(ValueError):
        gen.greedy_trap(1)
    with pytest.raises(ValueError):
        gen.integrality_gap(3, 3, Money.of(100), Money.of(10), Money.of(50))
    with pytest.raises(ValueError):
        gen.integrality_gap(0, 1, Money.of(1000), Money.of(20), Money.of(50), strict=False)
    with pytest.raises(ValueError):
        gen.independent_set(["a"], [("a", "a")])
    with pytest.raises(ValueError):
        gen.max_coverage({"s": ["e"]}, {"e": 1.0}, -1)
    with pytest.raises(ValueError):
        gen.simulation(1, seed=0)


def test_independent_set_reduction_on_random_graphs():
    from broadbid.keyword_solver import solve_keyword_exact

    rng = np.random.default_rng(17)
    for _ in range(8):
        n = int(rng.integers(3, 8))
        nodes = [f"v{i}" for i in range(n)]
        edges = [
            (nodes[i], nodes[j])
            for i in range(n)
            for j in range(i + 1, n)
            if rng.random() < 0.4
        ]
        inst = gen.independent_set(nodes, edges)
        got = solve_keyword_exact(inst).objective
        assert got == max_independent_set_size(nodes, edges) * UNIT2


def test_max_coverage_reduction():
    sets = {"s1": ["a", "b"], "s2": ["b", "c"], "s3": ["c", "d"]}
    weights = {"a": 1.0, "b": 2.0, "c": 3.0, "d": 4.0}
    inst = gen.max_coverage(sets, weights, k=2)
    _, _, _, value = brute_force_keyword(inst, budget_micro2=inst.budget.micros * 10**6)
    best = max_coverage_value(sets, {e: int(w * UNIT2) for e, w in weights.items()}, 2)
    assert value == best


def test_edge_list_parsing():
    nodes, edges = gen.parse_edge_list("a b\nb c # comment\nd\n\n")
    assert nodes == ["a", "b", "c", "d"]
    assert edges == [("a", "b"), ("b", "c")]
    with pytest.raises(ValueError):
        gen.parse_edge_list("a b c")
