"""Exact maximum flow / minimum cut on the winning-set selection network.

The network encodes the choice of a dependency-closed winning set: the
source feeds every non-positive-weight query with capacity |w|, every
positive-weight query feeds the sink with capacity w, and each dependency
pair contributes an uncuttable arc from consequent to antecedent.  The sink
side of a minimum cut is then a maximum-utility closed set, with

    utility = sum of positive weights - cut value.

Capacities are Python integers, so flows and cut values are exact.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .model import DependencyGraph, Instance

SOURCE = "__source__"
SINK = "__sink__"


@dataclass(frozen=True)
class Arc:
    tail: str
    head: str
    capacity: int


@dataclass(frozen=True)
class FlowNetwork:
    nodes: tuple[str, ...]
    arcs: tuple[Arc, ...]
    inf_surrogate: int


@dataclass(frozen=True)
class CutResult:
    flow_value: int
    source_side: frozenset[str]
    sink_side: frozenset[str]


def build_flow_graph(
    inst: Instance, dg: DependencyGraph, weights: dict[str, int] | None = None
) -> FlowNetwork:
    w = weights if weights is not None else inst.weights()
    positive_total = sum(x for x in w.values() if x > 0)
    inf_surrogate = positive_total + 1
    arcs: list[Arc] = []
    for q in inst.queries:
        wq = w[q.id]
        if wq > 0:
            arcs.append(Arc(q.id, SINK, wq))
        else:
            arcs.append(Arc(SOURCE, q.id, -wq))
    # Consequent -> antecedent: an uncuttable arc keeps the sink side closed
    # under the dependency pairs, for any sign combination of the endpoints.
    for s, t in sorted(dg.pairs):
        if s != t:
            arcs.append(Arc(t, s, inf_surrogate))
    nodes = (SOURCE, SINK) + tuple(q.id for q in inst.queries)
    return FlowNetwork(nodes=nodes, arcs=tuple(arcs), inf_surrogate=inf_surrogate)


class _Dinic:
    """Dinic's algorithm on an adjacency-list residual graph."""

    def __init__(self, n: int):
        self.n = n
        self.to: list[int] = []
        self.cap: list[int] = []
        self.adj: list[list[int]] = [[] for _ in range(n)]

    def add_edge(self, u: int, v: int, capacity: int) -> None:
        self.adj[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(capacity)
        self.adj[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0)

    def _bfs(self, s: int, t: int) -> bool:
        self.level = [-1] * self.n
        self.level[s] = 0
        dq = deque([s])
        while dq:
            u = dq.popleft()
            for eid in self.adj[u]:
                v = self.to[eid]
                if self.cap[eid] > 0 and self.level[v] < 0:
                    self.level[v] = self.level[u] + 1
                    dq.append(v)
        return self.level[t] >= 0

    def _augment(self, s: int, t: int) -> int:
        # Iterative blocking-flow step: walk the level graph keeping a path
        # stack, retreating when a node has no admissible arc left.
        path: list[int] = []
        u = s
        while True:
            if u == t:
                pushed = min(self.cap[eid] for eid in path)
                for eid in path:
                    self.cap[eid] -= pushed
                    self.cap[eid ^ 1] += pushed
                return pushed
            advanced = False
            while self.it[u] < len(self.adj[u]):
                eid = self.adj[u][self.it[u]]
                v = self.to[eid]
                if self.cap[eid] > 0 and self.level[v] == self.level[u] + 1:
                    path.append(eid)
                    u = v
                    advanced = True
                    break
                self.it[u] += 1
            if advanced:
                continue
            if u == s:
                return 0
            self.level[u] = -1
            u = self.to[path.pop() ^ 1]
            self.it[u] += 1

    def max_flow(self, s: int, t: int) -> int:
        flow = 0
        while self._bfs(s, t):
            self.it = [0] * self.n
            while True:
                pushed = self._augment(s, t)
                if pushed == 0:
                    break
                flow += pushed
        return flow

    def reachable(self, s: int) -> set[int]:
        seen = {s}
        dq = deque([s])
        while dq:
            u = dq.popleft()
            for eid in self.adj[u]:
                v = self.to[eid]
                if self.cap[eid] > 0 and v not in seen:
                    seen.add(v)
                    dq.append(v)
        return seen


def max_flow(net: FlowNetwork) -> CutResult:
    """Exact max flow; the cut is recovered from residual reachability.

    Asserts the max-flow = min-cut identity on the produced cut and that no
    uncuttable arc crosses it.
    """
    index = {name: i for i, name in enumerate(net.nodes)}
    dinic = _Dinic(len(net.nodes))
    for arc in net.arcs:
        dinic.add_edge(index[arc.tail], index[arc.head], arc.capacity)
    value = dinic.max_flow(index[SOURCE], index[SINK])
    reach = dinic.reachable(index[SOURCE])
    source_side = frozenset(n for n in net.nodes if index[n] in reach)
    sink_side = frozenset(n for n in net.nodes if index[n] not in reach)
    cut_capacity = 0
    for arc in net.arcs:
        if arc.tail in source_side and arc.head in sink_side:
            assert arc.capacity < net.inf_surrogate, "uncuttable arc crosses the cut"
            cut_capacity += arc.capacity
    assert cut_capacity == value, f"flow {value} != cut {cut_capacity}"
    return CutResult(flow_value=value, source_side=source_side, sink_side=sink_side)


def dimacs_dump(net: FlowNetwork) -> str:
    """Network in DIMACS max-flow format, for cross-checking externally."""
    index = {name: i + 1 for i, name in enumerate(net.nodes)}
    lines = [
        f"p max {len(net.nodes)} {len(net.arcs)}",
        f"n {index[SOURCE]} s",
        f"n {index[SINK]} t",
    ]
    lines += [f"a {index[a.tail]} {index[a.head]} {a.capacity}" for a in net.arcs]
    return "\n".join(lines) + "\n"
