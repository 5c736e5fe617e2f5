import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from broadbid.errors import ParseError, ValidationError
from broadbid.generators import greedy_trap, random_instance, simulation
from broadbid.model import (
    MICRO,
    UNIT2,
    BidVector,
    Clicks,
    Instance,
    Money,
    Query,
    bid_from_winning_set,
    closure,
    derive_dependencies,
    dump_instance,
    format_micro2,
    format_micros,
    interpret_bid,
    is_closed,
    load_instance,
    parse_micros,
    utility,
    weight,
)


def q(qid, value, cost, clicks=1, biddable=True):
    return Query(qid, Money.of(value), Money.of(cost), Clicks.of(clicks), biddable)


def test_parse_micros_examples():
    assert parse_micros("1") == MICRO
    assert parse_micros("0.1875") == 187_500
    assert parse_micros("-0.3") == -300_000
    assert parse_micros("2.000001") == 2_000_001


@pytest.mark.parametrize("bad", ["", "1.2345678", "1e3", "abc", "1.", ".5"])
def test_parse_micros_rejects(bad):
    with pytest.raises(ParseError):
        parse_micros(bad)


@given(st.integers(min_value=-(10**12), max_value=10**12))
def test_money_round_trip(micros):
    assert parse_micros(format_micros(micros)) == micros


@given(st.integers(min_value=-(10**15), max_value=10**15))
def test_micro2_formatting_is_exact(v):
    text = format_micro2(v)
    whole, _, frac = text.partition(".")
    rebuilt = int(whole.lstrip("-") or 0) * UNIT2 + int((frac or "0").ljust(12, "0"))
    assert rebuilt * (-1 if text.startswith("-") else 1) == v


def test_load_empty_instance():
    inst = load_instance({"queries": []})
    assert inst.queries == ()


def test_load_adds_reflexive_pairs():
    doc = {
        "queries": [
            {"id": "a", "value": "2", "cost": "1", "clicks": "1", "biddable": True},
            {"id": "ab", "value": "1", "cost": "1", "clicks": "1", "biddable": False},
        ],
        "broad_match": [["a", "ab"]],
    }
    inst = load_instance(json.dumps(doc))
    assert inst.broad_match == frozenset({("a", "a"), ("a", "ab")})


def test_load_simulation_scale():
    inst = load_instance(dump_instance(simulation(30, seed=3)))
    assert len(inst.queries) == 465


def test_load_round_trips_through_dump(tmp_path):
    inst = greedy_trap(5)
    path = tmp_path / "trap.json"
    path.write_text(json.dumps(dump_instance(inst)))
    again = load_instance(path)
    assert again.queries == inst.queries
    assert again.broad_match == inst.broad_match


def test_validation_errors():
    with pytest.raises(ParseError):
        load_instance("{not json")
    with pytest.raises(ValidationError):
        Instance.build([q("a", 1, 1), q("a", 1, 1)])
    with pytest.raises(ValidationError):
        Instance.build([q("a", 1, 1)], [("a", "zz")])
    with pytest.raises(ValidationError):
        Instance.build([q("a", 1, 1), q("b", 1, 1, biddable=False)], [("b", "a")])
    with pytest.raises(ValidationError):
        Instance.build([q("a", 1, -1)])
    with pytest.raises(ValidationError):
        Instance.build([q("a", 1, 1, clicks=-2)])


def test_derive_dependencies_cost_filter():
    inst = Instance.build([q("a", 2, 1), q("ab", 1, 1, biddable=False)], [("a", "ab")])
    assert ("a", "ab") in derive_dependencies(inst).pairs
    inst = Instance.build([q("a", 2, 1), q("ab", 1, 2, biddable=False)], [("a", "ab")])
    assert ("a", "ab") not in derive_dependencies(inst).pairs


def test_derive_dependencies_trap_count():
    dg = derive_dependencies(greedy_trap(4))
    assert len(dg.pairs) == 16  # 4 reflexive + 12 keyword-to-pair


def test_dependency_maps_are_transposes():
    dg = derive_dependencies(greedy_trap(5))
    for s, t in dg.pairs:
        assert s in dg.dependees[t]
        assert t in dg.dependents[s]
    total = sum(len(v) for v in dg.dependees.values())
    assert total == len(dg.pairs) == sum(len(v) for v in dg.dependents.values())


def test_interpret_bid_zero_bids_win_nothing():
    inst = greedy_trap(4)
    ws = interpret_bid(inst, derive_dependencies(inst), BidVector())
    assert ws.members == frozenset()
    assert ws.utility == 0


def test_interpret_bid_max_aggregation():
    inst = Instance.build([q("a", 2, 1), q("ab", 1, 1, biddable=False)], [("a", "ab")])
    dg = derive_dependencies(inst)
    ws = interpret_bid(inst, dg, BidVector.build(inst, broad={"a": MICRO}))
    assert ws.members == {"a", "ab"}


def test_interpret_bid_trap8_all_keywords():
    inst = greedy_trap(8)
    dg = derive_dependencies(inst)
    bid = BidVector.build(inst, broad={f"k{i:02d}": MICRO for i in range(8)})
    ws = interpret_bid(inst, dg, bid)
    assert len(ws.members) == 36
    assert ws.utility == 2_750_000_000_000  # 2.75 currency units


def test_interpret_bid_exact_does_not_propagate():
    inst = Instance.build([q("a", 2, 1), q("ab", 9, 1, biddable=False)], [("a", "ab")])
    dg = derive_dependencies(inst)
    ws = interpret_bid(inst, dg, BidVector.build(inst, exact={"a": MICRO}))
    assert ws.members == {"a"}


def test_closure_examples():
    inst = Instance.build(
        [q("a", 2, 1), q("ab", 1, 1), q("abc", 1, 1, biddable=False)],
        [("a", "ab"), ("a", "abc"), ("ab", "abc")],
    )
    dg = derive_dependencies(inst)
    assert closure(dg, []) == frozenset()
    assert closure(dg, ["a"]) == {"a", "ab", "abc"}
    assert closure(dg, ["ab"]) == {"ab", "abc"}


@settings(max_examples=60)
@given(st.integers(min_value=0, max_value=10**9), st.integers(min_value=1, max_value=12))
def test_closure_idempotent_and_extensive(seed, size):
    inst = random_instance(np.random.default_rng(seed), max_queries=size)
    dg = derive_dependencies(inst)
    ids = [qq.id for qq in inst.queries]
    subset = frozenset(ids[:: max(1, len(ids) // 3)])
    once = closure(dg, subset)
    assert subset <= once
    assert closure(dg, once) == once
    assert is_closed(dg, once)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_interpreted_sets_are_closed(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, max_queries=10)
    dg = derive_dependencies(inst)
    biddable = list(inst.biddable_ids)
    broad = {
        s: int(rng.integers(0, 4 * MICRO))
        for s in biddable
        if rng.random() < 0.7
    }
    ws = interpret_bid(inst, dg, BidVector.build(inst, broad=broad))
    assert is_closed(dg, ws.members)


def test_utility_examples():
    inst = Instance.build([q("a", 2, 1)])
    assert utility(inst, []) == (0, 0, 0)
    assert utility(inst, ["a"]) == (UNIT2, 2 * UNIT2, UNIT2)
    trap = greedy_trap(8)
    u, v, c = utility(trap, [qq.id for qq in trap.queries])
    assert u == 2_750_000_000_000
    assert u == v - c


def test_weight_is_exact():
    assert weight(q("a", 2, 1, clicks=1)) == UNIT2
    assert weight(q("a", 0.812500, 1, clicks=1)) == -187_500_000_000


def test_bid_from_winning_set_examples():
    inst = Instance.build([q("a", 2, 1), q("ab", 0.9, 1, biddable=False)], [("a", "ab")])
    dg = derive_dependencies(inst)
    bid = bid_from_winning_set(inst, ["a", "ab"])
    assert bid.broad == {"a": MICRO}
    ws = interpret_bid(inst, dg, bid)
    assert ws.members == {"a", "ab"}

    assert bid_from_winning_set(inst, []).broad == {}
    with pytest.raises(ValidationError):
        bid_from_winning_set(inst, ["a"])  # not closed


def test_bid_from_winning_set_drops_zero_weight():
    inst = Instance.build([q("a", 2, 1), q("b", 1, 1)])
    ws_in = ["a", "b"]
    bid = bid_from_winning_set(inst, ws_in)
    dg = derive_dependencies(inst)
    got = interpret_bid(inst, dg, bid)
    assert got.members == {"a"}
    assert got.utility == utility(inst, ws_in)[0]


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_bid_realizes_closed_sets_without_losing_utility(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, max_queries=10)
    dg = derive_dependencies(inst)
    ids = [qq.id for qq in inst.queries]
    pick = frozenset(x for x in ids if rng.random() < 0.5)
    members = closure(dg, pick)
    bid = bid_from_winning_set(inst, members)
    got = interpret_bid(inst, dg, bid)
    assert got.members <= members
    assert got.utility >= utility(inst, members)[0]


def test_monotone_dependency_derivation():
    inst = greedy_trap(4)
    dg_full = derive_dependencies(inst)
    smaller = Instance.build(
        inst.queries, [p for p in inst.broad_match if p != ("k00", "k00+k01")]
    )
    dg_small = derive_dependencies(smaller)
    assert dg_small.pairs <= dg_full.pairs


def test_instances_are_immutable():
    inst = greedy_trap(3)
    with pytest.raises(AttributeError):
        inst.budget = Money.of(1)
    with pytest.raises(AttributeError):
        inst.queries[0].value = Money.of(9)
