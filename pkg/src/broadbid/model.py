"""Instance data model and bid semantics for broad-match auctions.

Money and expected clicks are fixed-point values stored as integer counts of
micro-units (1e-6), so all utility accounting is exact integer arithmetic.
Per-query weights live in micro^2 units (money micros times click micros);
``UNIT2`` converts one currency-unit-times-click back to that scale.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ParseError, ValidationError

MICRO = 10**6
UNIT2 = MICRO * MICRO  # one currency unit x one click, in micro^2

_DECIMAL_RE = re.compile(r"^([+-]?)(\d+)(?:\.(\d{1,6}))?$")


def parse_micros(text: str) -> int:
    """Parse a decimal string with at most 6 fractional digits into micros."""
    m = _DECIMAL_RE.match(text.strip())
    if not m:
        raise ParseError(f"bad decimal value {text!r} (at most 6 fractional digits)")
    sign, whole, frac = m.groups()
    micros = int(whole) * MICRO + int((frac or "").ljust(6, "0"))
    return -micros if sign == "-" else micros


def format_micros(micros: int) -> str:
    """Render micros as the shortest decimal string that round-trips."""
    sign = "-" if micros < 0 else ""
    whole, frac = divmod(abs(micros), MICRO)
    if frac == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:06d}".rstrip("0")


def format_micro2(value: int) -> str:
    """Render a micro^2 quantity (utility, spend) as exact currency units."""
    sign = "-" if value < 0 else ""
    whole, frac = divmod(abs(value), UNIT2)
    if frac == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:012d}".rstrip("0")


@dataclass(frozen=True, order=True)
class Money:
    """Monetary value in integer micro-units of currency."""

    micros: int

    @classmethod
    def parse(cls, text: str) -> "Money":
        return cls(parse_micros(text))

    @classmethod
    def of(cls, units: int | float) -> "Money":
        return cls(round(units * MICRO))

    def __str__(self) -> str:
        return format_micros(self.micros)


@dataclass(frozen=True, order=True)
class Clicks:
    """Expected click count with 1e-6 resolution, never negative."""

    micros: int

    @classmethod
    def parse(cls, text: str) -> "Clicks":
        return cls(parse_micros(text))

    @classmethod
    def of(cls, count: int | float) -> "Clicks":
        return cls(round(count * MICRO))

    def __str__(self) -> str:
        return format_micros(self.micros)


@dataclass(frozen=True)
class Query:
    id: str
    value: Money
    cost: Money
    clicks: Clicks
    biddable: bool


def weight(q: Query) -> int:
    """Per-click profit times clicks: (value - cost) * clicks, in micro^2."""
    return (q.value.micros - q.cost.micros) * q.clicks.micros


@dataclass(frozen=True)
class Instance:
    """A bid-optimization problem: queries, the broad-match relation and an
    optional budget.  ``broad_match`` pairs (s, q) mean "q matches s broadly";
    s must be biddable.  The relation is reflexive on biddable queries.
    """

    queries: tuple[Query, ...]
    broad_match: frozenset[tuple[str, str]]
    budget: Money | None = None
    by_id: Mapping[str, Query] = field(repr=False, compare=False, default_factory=dict)
    matchers: Mapping[str, tuple[str, ...]] = field(repr=False, compare=False, default_factory=dict)

    @classmethod
    def build(
        cls,
        queries: Iterable[Query],
        broad_match: Iterable[tuple[str, str]] = (),
        budget: Money | None = None,
    ) -> "Instance":
        qs = tuple(sorted(queries, key=lambda q: q.id))
        by_id = {q.id: q for q in qs}
        if len(by_id) != len(qs):
            seen: set[str] = set()
            dup = next(q.id for q in qs if q.id in seen or seen.add(q.id))
            raise ValidationError(f"duplicate query id {dup!r}")
        for q in qs:
            if q.cost.micros < 0:
                raise ValidationError(f"negative cost on {q.id!r}")
            if q.clicks.micros < 0:
                raise ValidationError(f"negative clicks on {q.id!r}")
        pairs = {(s, q) for s, q in broad_match}
        pairs.update((q.id, q.id) for q in qs if q.biddable)
        for s, t in pairs:
            if s not in by_id or t not in by_id:
                raise ValidationError(f"broad_match pair ({s!r}, {t!r}) references unknown id")
            if not by_id[s].biddable:
                raise ValidationError(f"broad_match source {s!r} is not biddable")
        matchers: dict[str, list[str]] = {q.id: [] for q in qs}
        for s, t in sorted(pairs):
            matchers[t].append(s)
        return cls(
            queries=qs,
            broad_match=frozenset(pairs),
            budget=budget,
            by_id=by_id,
            matchers={t: tuple(ms) for t, ms in matchers.items()},
        )

    @property
    def biddable_ids(self) -> tuple[str, ...]:
        return tuple(q.id for q in self.queries if q.biddable)

    def weights(self) -> dict[str, int]:
        return {q.id: weight(q) for q in self.queries}


def load_instance(source: str | Path | Mapping) -> Instance:
    """Load an instance document from a mapping, a JSON string or a file path.

    A ``str`` whose first non-space character is ``{`` is treated as JSON
    text, anything else as a path.
    """
    if isinstance(source, Mapping):
        doc = source
    else:
        if isinstance(source, Path):
            text = source.read_text()
        elif isinstance(source, str) and source.lstrip().startswith("{"):
            text = source
        else:
            text = Path(source).read_text()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"malformed instance document: {e}") from e
    if not isinstance(doc, Mapping):
        raise ParseError("instance document must be a JSON object")
    try:
        raw_queries = doc.get("queries", [])
        queries = [
            Query(
                id=str(rq["id"]),
                value=Money.parse(str(rq["value"])),
                cost=Money.parse(str(rq["cost"])),
                clicks=Clicks.parse(str(rq["clicks"])),
                biddable=bool(rq.get("biddable", False)),
            )
            for rq in raw_queries
        ]
        raw_pairs = doc.get("broad_match", [])
        pairs = [(str(s), str(t)) for s, t in raw_pairs]
        budget = None
        if doc.get("budget") is not None:
            budget = Money.parse(str(doc["budget"]))
    except (KeyError, TypeError) as e:
        raise ParseError(f"malformed instance document: {e}") from e
    return Instance.build(queries, pairs, budget)


def dump_instance(inst: Instance) -> dict:
    """Serialize an instance back to its canonical document form."""
    doc: dict = {
        "queries": [
            {
                "id": q.id,
                "value": str(q.value),
                "cost": str(q.cost),
                "clicks": str(q.clicks),
                "biddable": q.biddable,
            }
            for q in inst.queries
        ],
        "broad_match": sorted([s, t] for s, t in inst.broad_match if s != t),
    }
    if inst.budget is not None:
        doc["budget"] = str(inst.budget)
    return doc


@dataclass(frozen=True)
class DependencyGraph:
    """Implication pairs: (s, q) present iff q matches s broadly and
    c(s) >= c(q), so any bid winning s also wins q."""

    pairs: frozenset[tuple[str, str]]
    dependees: Mapping[str, frozenset[str]]  # q -> {s | (s, q) in pairs}
    dependents: Mapping[str, frozenset[str]]  # s -> {q | (s, q) in pairs}


def derive_dependencies(inst: Instance) -> DependencyGraph:
    pairs = frozenset(
        (s, t)
        for s, t in inst.broad_match
        if inst.by_id[s].cost >= inst.by_id[t].cost
    )
    dependees: dict[str, set[str]] = {q.id: set() for q in inst.queries}
    dependents: dict[str, set[str]] = {q.id: set() for q in inst.queries}
    for s, t in pairs:
        dependees[t].add(s)
        dependents[s].add(t)
    return DependencyGraph(
        pairs=pairs,
        dependees={k: frozenset(v) for k, v in dependees.items()},
        dependents={k: frozenset(v) for k, v in dependents.items()},
    )


@dataclass(frozen=True)
class BidVector:
    """Per-phrase bids in micros; a missing entry or a zero bid is no bid."""

    exact: Mapping[str, int] = field(default_factory=dict)
    broad: Mapping[str, int] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        inst: Instance,
        exact: Mapping[str, int] | None = None,
        broad: Mapping[str, int] | None = None,
    ) -> "BidVector":
        out: list[dict[str, int]] = []
        for kind, bids in (("exact", exact), ("broad", broad)):
            clean: dict[str, int] = {}
            for qid, micros in (bids or {}).items():
                if qid not in inst.by_id or not inst.by_id[qid].biddable:
                    raise ValidationError(f"{kind} bid on non-biddable or unknown id {qid!r}")
                if micros < 0:
                    raise ValidationError(f"negative {kind} bid on {qid!r}")
                if micros > 0:
                    clean[qid] = micros
            out.append(clean)
        return cls(exact=out[0], broad=out[1])


@dataclass(frozen=True)
class WinningSet:
    members: frozenset[str]
    utility: int
    value_part: int
    cost_part: int


def utility(inst: Instance, members: Iterable[str]) -> tuple[int, int, int]:
    """Exact (utility, value_part, cost_part) sums over ``members``, micro^2."""
    value_part = 0
    cost_part = 0
    for qid in members:
        q = inst.by_id[qid]
        value_part += q.value.micros * q.clicks.micros
        cost_part += q.cost.micros * q.clicks.micros
    return value_part - cost_part, value_part, cost_part


def winning_set(inst: Instance, members: Iterable[str]) -> WinningSet:
    ms = frozenset(members)
    u, v, c = utility(inst, ms)
    return WinningSet(members=ms, utility=u, value_part=v, cost_part=c)


def interpret_bid(inst: Instance, dg: DependencyGraph, bid: BidVector) -> WinningSet:
    """Evaluate a bid: the interpreted broad bid at q is the max broad bid
    over the phrases q matches, and q is won when that (or its own exact bid)
    meets c(q).  Evaluation uses the raw broad-match relation, not the
    dependency graph, so instances violating the cost filter still evaluate
    correctly.
    """
    won: set[str] = set()
    for q in inst.queries:
        cost = q.cost.micros
        ex = bid.exact.get(q.id, 0)
        if ex > 0 and ex >= cost:
            won.add(q.id)
            continue
        interpreted = max(
            (bid.broad.get(s, 0) for s in inst.matchers.get(q.id, ())),
            default=0,
        )
        if interpreted > 0 and interpreted >= cost:
            won.add(q.id)
    return winning_set(inst, won)


def closure(dg: DependencyGraph, members: Iterable[str]) -> frozenset[str]:
    """Smallest superset of ``members`` closed under the dependency pairs."""
    out = set(members)
    stack = list(out)
    while stack:
        s = stack.pop()
        for t in dg.dependents.get(s, ()):
            if t not in out:
                out.add(t)
                stack.append(t)
    return frozenset(out)


def is_closed(dg: DependencyGraph, members: frozenset[str]) -> bool:
    return all(dg.dependents.get(s, frozenset()) <= members for s in members)


def bid_from_winning_set(
    inst: Instance, members: Iterable[str], mode: str = "query_language"
) -> BidVector:
    """Bid c(q) broadly on every positive-weight member; no bid elsewhere.

    For a feasible (dependency-closed) set this wins a subset of ``members``
    with at least the same utility: every positive-weight member wins itself,
    and anything else a bid reaches is a cost-dominated broad match, hence in
    the closed set.  Zero/negative members not pulled by a positive one are
    dropped, which can only help.
    """
    if mode not in ("query_language", "keyword_language"):
        raise ValueError(f"unknown mode {mode!r}")
    dg = derive_dependencies(inst)
    ms = frozenset(members)
    if not is_closed(dg, ms):
        raise ValidationError("winning set is not closed under the dependency pairs")
    broad: dict[str, int] = {}
    for qid in sorted(ms):
        q = inst.by_id[qid]
        if weight(q) <= 0:
            continue
        if not q.biddable:
            if mode == "query_language":
                raise ValidationError(
                    f"positive-weight member {qid!r} is not biddable; cannot realize the set"
                )
            continue
        # A zero bid is no bid, so a free query needs the smallest real bid.
        broad[qid] = max(q.cost.micros, 1)
    return BidVector.build(inst, broad=broad)
