"""Information flow graphs with classical and entanglement-assisted cut valuation.

A graph is a time-expanded record of a storage system: one ``Source``, an
``XIn -> XOut`` pair per node instance joined by a storage edge of capacity
alpha, helper links from ``XOut`` of each helper to ``XIn`` of each newcomer,
and optionally a data collector fed by ``k`` node outputs.

Classical cuts are ordinary edge sums.  In quantum mode the ``d`` helper
links of one repair round are valued as a bundle: if the newcomer's ``XIn`` is
on the sink side and ``c`` of its helpers are on the source side the round
contributes ``min(2*c*beta, d*beta)``.  This valuation is not an edge sum, so
quantum min cuts come from exhaustive bipartition enumeration.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import networkx as nx
import numpy as np

from .bounds import (
    Mode,
    OperatingPoint,
    ParameterError,
    RationalLike,
    SystemParams,
    as_fraction,
    capacity,
)

INF = math.inf

#: Default guard on total graph size for :func:`verify_bound`.
DEFAULT_VERTEX_CAP = 24
#: Guard on the number of free vertices enumerated by :func:`min_cut`.
DEFAULT_FREE_CAP = 22

CUT_FUNCTION_NOTE = (
    "quantum cut value uses a per-round helper bundle: min(2*c*beta, d*beta) "
    "for c source-side helpers of a sink-side newcomer; entanglement shared "
    "across distinct repair rounds is not modelled"
)


class GraphError(ValueError):
    """Invalid graph operation (unknown or inactive node, wrong helper count, ...)."""


class EnumerationCapError(RuntimeError):
    """The graph is too large for exhaustive cut enumeration."""


class VertexKind(str, enum.Enum):
    SOURCE = "source"
    XIN = "in"
    XOUT = "out"
    DC = "dc"


@dataclass(frozen=True, order=True)
class Vertex:
    kind: VertexKind
    node_id: int = -1
    generation: int = -1

    @property
    def label(self) -> str:
        if self.kind is VertexKind.SOURCE:
            return "S"
        if self.kind is VertexKind.DC:
            return "DC"
        return f"{self.kind.value}:{self.node_id}@{self.generation}"

    @classmethod
    def from_label(cls, label: str) -> "Vertex":
        if label == "S":
            return SOURCE
        if label == "DC":
            return COLLECTOR
        kind, rest = label.split(":")
        node, gen = rest.split("@")
        return cls(VertexKind(kind), int(node), int(gen))


SOURCE = Vertex(VertexKind.SOURCE)
COLLECTOR = Vertex(VertexKind.DC)

Instance = tuple[int, int]  # (node_id, generation)


def xin(inst: Instance) -> Vertex:
    return Vertex(VertexKind.XIN, inst[0], inst[1])


def xout(inst: Instance) -> Vertex:
    return Vertex(VertexKind.XOUT, inst[0], inst[1])


@dataclass(frozen=True)
class RepairRound:
    round_index: int
    newcomer: Vertex
    helpers: tuple[Vertex, ...]
    beta: Fraction
    failed: Instance


@dataclass(frozen=True)
class Edge:
    tail: Vertex
    head: Vertex
    capacity: Union[Fraction, float]
    kind: str  # "source" | "storage" | "helper" | "dc"
    round_index: Optional[int] = None


@dataclass(frozen=True)
class FlowGraph:
    """Immutable information flow graph.  Build with :func:`build_initial`."""

    params: SystemParams
    alpha: Fraction
    mode: Mode
    instances: tuple[Instance, ...]
    current: tuple[int, ...]  # current generation of each node_id
    rounds: tuple[RepairRound, ...] = ()
    collector: Optional[tuple[Instance, ...]] = None

    @property
    def active(self) -> tuple[Instance, ...]:
        return tuple((i, g) for i, g in enumerate(self.current))

    @property
    def vertices(self) -> list[Vertex]:
        out = [SOURCE]
        for inst in self.instances:
            out += [xin(inst), xout(inst)]
        if self.collector is not None:
            out.append(COLLECTOR)
        return out

    @property
    def edges(self) -> list[Edge]:
        out = []
        for inst in self.instances:
            if inst[1] == 0:
                out.append(Edge(SOURCE, xin(inst), INF, "source"))
            out.append(Edge(xin(inst), xout(inst), self.alpha, "storage"))
        for rnd in self.rounds:
            for h in rnd.helpers:
                out.append(Edge(h, rnd.newcomer, rnd.beta, "helper", rnd.round_index))
        if self.collector is not None:
            for inst in self.collector:
                out.append(Edge(xout(inst), COLLECTOR, INF, "dc"))
        return out

    def with_mode(self, mode: Union[Mode, str]) -> "FlowGraph":
        return replace(self, mode=Mode.parse(mode))


def build_initial(params: SystemParams, alpha: RationalLike, mode: Union[Mode, str] = Mode.CLASSICAL) -> FlowGraph:
    alpha = as_fraction(alpha, "alpha")
    if alpha < 0:
        raise ParameterError("alpha must be nonnegative")
    return FlowGraph(
        params=params,
        alpha=alpha,
        mode=Mode.parse(mode),
        instances=tuple((i, 0) for i in range(params.n)),
        current=(0,) * params.n,
    )


def _check_node(graph: FlowGraph, node_id: int) -> None:
    if not isinstance(node_id, int) or not 0 <= node_id < graph.params.n:
        raise GraphError(f"unknown node {node_id!r}")


def apply_repair(graph: FlowGraph, failed_node_id: int, helper_ids: Sequence[int], beta: RationalLike) -> FlowGraph:
    """Replace ``failed_node_id`` by a newcomer fed by ``helper_ids``.

    The failed instance stays in the graph as history.  The newcomer reuses
    the node id with the next generation number.
    """
    beta = as_fraction(beta, "beta")
    if beta < 0:
        raise ParameterError("beta must be nonnegative")
    _check_node(graph, failed_node_id)
    helper_ids = list(helper_ids)
    d = graph.params.d
    if len(helper_ids) != d:
        raise GraphError(f"repair needs exactly d={d} helpers, got {len(helper_ids)}")
    if len(set(helper_ids)) != d:
        raise GraphError(f"helpers must be distinct: {helper_ids}")
    for h in helper_ids:
        _check_node(graph, h)
        if h == failed_node_id:
            raise GraphError("the failed node cannot help its own repair")
    generation = len(graph.rounds) + 1
    newcomer = (failed_node_id, generation)
    rnd = RepairRound(
        round_index=generation,
        newcomer=xin(newcomer),
        helpers=tuple(xout((h, graph.current[h])) for h in helper_ids),
        beta=beta,
        failed=(failed_node_id, graph.current[failed_node_id]),
    )
    current = list(graph.current)
    current[failed_node_id] = generation
    return replace(
        graph,
        instances=graph.instances + (newcomer,),
        current=tuple(current),
        rounds=graph.rounds + (rnd,),
    )


def attach_dc(graph: FlowGraph, nodes: Sequence[Union[int, Instance]]) -> FlowGraph:
    """Connect a data collector to ``k`` active nodes.

    Entries are node ids (meaning their current instance) or explicit
    ``(node_id, generation)`` pairs, which must be the current instance.  A
    collector already attached stays in place through later repairs.
    """
    k = graph.params.k
    chosen = []
    for item in nodes:
        if isinstance(item, int) and not isinstance(item, bool):
            _check_node(graph, item)
            chosen.append((item, graph.current[item]))
        else:
            node_id, generation = item
            _check_node(graph, node_id)
            if graph.current[node_id] != generation:
                raise GraphError(f"instance {(node_id, generation)} is not active")
            chosen.append((node_id, generation))
    if len(chosen) != k or len(set(chosen)) != k:
        raise GraphError(f"data collector needs {k} distinct active nodes, got {chosen}")
    return replace(graph, collector=tuple(chosen))


# ---------------------------------------------------------------------------
# cut valuation

def _normalize_cut(graph: FlowGraph, source_side: Iterable[Vertex]) -> frozenset[Vertex]:
    side = frozenset(source_side)
    vertices = set(graph.vertices)
    if not side <= vertices:
        raise GraphError(f"cut mentions unknown vertices: {sorted(v.label for v in side - vertices)}")
    if SOURCE not in side:
        raise GraphError("source side must contain S")
    if COLLECTOR in side:
        raise GraphError("data collector must be on the sink side")
    return side


def cut_value(graph: FlowGraph, source_side: Iterable[Vertex]) -> Union[Fraction, float]:
    """Value of the cut whose source side is ``source_side``; ``math.inf`` if unbounded."""
    side = _normalize_cut(graph, source_side)
    total = Fraction(0)
    for e in graph.edges:
        if e.kind == "helper":
            continue
        if e.tail in side and e.head not in side:
            if e.capacity == INF:
                return INF
            total += e.capacity
    d = graph.params.d
    for rnd in graph.rounds:
        if rnd.newcomer in side:
            continue
        crossing = sum(1 for h in rnd.helpers if h in side)
        if graph.mode is Mode.QUANTUM:
            total += min(2 * crossing * rnd.beta, d * rnd.beta)
        else:
            total += crossing * rnd.beta
    return total


@dataclass
class CutEnumeration:
    """All finite candidate cuts of a graph, valued under both modes.

    Row ``r`` of ``sink`` says which of ``free`` sit on the sink side; every
    other vertex has a forced side.  Values are integers scaled by ``scale``.
    """

    graph: FlowGraph
    free: list[Vertex]
    forced_sink: frozenset[Vertex]
    sink: np.ndarray
    classical: np.ndarray
    quantum: np.ndarray
    scale: int

    def values(self, mode: Union[Mode, str, None] = None) -> np.ndarray:
        mode = self.graph.mode if mode is None else Mode.parse(mode)
        return self.quantum if mode is Mode.QUANTUM else self.classical

    def minimum(self, mode: Union[Mode, str, None] = None) -> tuple[Fraction, frozenset[Vertex]]:
        vals = self.values(mode)
        row = int(np.argmin(vals))
        return Fraction(int(vals[row]), self.scale), self.source_side(row)

    def source_side(self, row: int) -> frozenset[Vertex]:
        sink = set(self.forced_sink)
        sink.update(v for v, s in zip(self.free, self.sink[row]) if s)
        return frozenset(v for v in self.graph.vertices if v not in sink)


def _dc_ancestors(graph: FlowGraph) -> set[Vertex]:
    preds: dict[Vertex, list[Vertex]] = {}
    for e in graph.edges:
        preds.setdefault(e.head, []).append(e.tail)
    seen = {COLLECTOR}
    stack = [COLLECTOR]
    while stack:
        v = stack.pop()
        for u in preds.get(v, ()):
            if u not in seen:
                seen.add(u)
                stack.append(u)
    return seen


def enumerate_cuts(graph: FlowGraph, free_cap: int = DEFAULT_FREE_CAP) -> CutEnumeration:
    """Value every finite cut that can matter, in both modes at once.

    Pruning:

    * S and initial ``XIn`` vertices sit on the source side (infinite edges);
    * DC and the ``XOut`` vertices feeding it sit on the sink side;
    * vertices that cannot reach DC go to the source side.  Moving them there
      never increases a cut value in either mode, since none of their
      outgoing edges then cross and their rounds feed no sink-side newcomer.
    """
    if graph.collector is None:
        raise GraphError("min cut needs an attached data collector")
    relevant = _dc_ancestors(graph)
    forced_sink = {COLLECTOR} | {xout(inst) for inst in graph.collector}
    free = [
        v for v in graph.vertices
        if v in relevant
        and v not in forced_sink
        and v.kind is not VertexKind.SOURCE
        and not (v.kind is VertexKind.XIN and v.generation == 0)
    ]
    m = len(free)
    if m > free_cap:
        raise EnumerationCapError(f"{m} free vertices exceed the enumeration cap of {free_cap}")

    index = {v: j for j, v in enumerate(free)}
    rows = np.arange(1 << m, dtype=np.int64)
    sink = ((rows[:, None] >> np.arange(m, dtype=np.int64)) & 1).astype(bool)
    ones = np.ones(len(rows), dtype=bool)
    zeros = np.zeros(len(rows), dtype=bool)

    def on_sink(v: Vertex) -> np.ndarray:
        if v in index:
            return sink[:, index[v]]
        return ones if v in forced_sink else zeros

    denominators = [graph.alpha.denominator] + [r.beta.denominator for r in graph.rounds]
    scale = math.lcm(*denominators)
    alpha = int(graph.alpha * scale)

    storage = np.zeros(len(rows), dtype=np.int64)
    for inst in graph.instances:
        out_v = xout(inst)
        if out_v not in relevant:
            continue
        storage += alpha * (~on_sink(xin(inst)) & on_sink(out_v))

    classical = storage.copy()
    quantum = storage.copy()
    d = graph.params.d
    for rnd in graph.rounds:
        if rnd.newcomer not in relevant:
            continue
        beta = int(rnd.beta * scale)
        newcomer_sink = on_sink(rnd.newcomer)
        crossing = np.zeros(len(rows), dtype=np.int64)
        for h in rnd.helpers:
            crossing += ~on_sink(h)
        crossing *= newcomer_sink
        classical += beta * crossing
        quantum += np.minimum(2 * beta * crossing, d * beta)
    return CutEnumeration(
        graph=graph,
        free=free,
        forced_sink=frozenset(forced_sink),
        sink=sink,
        classical=classical,
        quantum=quantum,
        scale=scale,
    )


def max_flow_value(graph: FlowGraph) -> Fraction:
    """Classical S-to-DC max flow, exact (capacities scaled to integers)."""
    if graph.collector is None:
        raise GraphError("max flow needs an attached data collector")
    edges = graph.edges
    scale = math.lcm(*[e.capacity.denominator for e in edges if e.capacity != INF])
    g = nx.DiGraph()
    for e in edges:
        if e.capacity == INF:
            g.add_edge(e.tail, e.head)  # no capacity attribute means unbounded
        else:
            g.add_edge(e.tail, e.head, capacity=int(e.capacity * scale))
    return Fraction(nx.maximum_flow_value(g, SOURCE, COLLECTOR), scale)


@dataclass(frozen=True)
class MinCutResult:
    value: Fraction
    source_side: frozenset[Vertex]
    max_flow: Optional[Fraction] = None


def min_cut_certificate(graph: FlowGraph, free_cap: int = DEFAULT_FREE_CAP) -> MinCutResult:
    """Min cut with its witnessing partition.

    Classical graphs are solved twice, by max flow and by enumeration, and
    the two must agree.
    """
    cuts = enumerate_cuts(graph, free_cap)
    value, side = cuts.minimum()
    flow = None
    if graph.mode is Mode.CLASSICAL:
        flow = max_flow_value(graph)
        if flow != value:
            raise AssertionError(f"max flow {flow} disagrees with enumerated min cut {value}")
    return MinCutResult(value=value, source_side=side, max_flow=flow)


def min_cut(graph: FlowGraph, free_cap: int = DEFAULT_FREE_CAP) -> Fraction:
    return min_cut_certificate(graph, free_cap).value


# ---------------------------------------------------------------------------
# worst case and randomized verification

def canonical_evolution(params: SystemParams, alpha: RationalLike, beta: RationalLike,
                        mode: Union[Mode, str] = Mode.CLASSICAL) -> FlowGraph:
    """Nodes 0..k-1 fail in turn; newcomer j is helped by newcomers 0..j-1 and
    the first ``d - j`` surviving initial nodes; DC reads the k newcomers."""
    graph = build_initial(params, alpha, mode)
    n, k, d = params.n, params.k, params.d
    for j in range(k):
        initial = [i for i in range(j + 1, n)][: d - j]
        graph = apply_repair(graph, j, list(range(j)) + initial, beta)
    return attach_dc(graph, range(k))


def canonical_worst_case(params: SystemParams, alpha: RationalLike, beta: RationalLike,
                         mode: Union[Mode, str] = Mode.CLASSICAL) -> tuple[FlowGraph, Fraction]:
    graph = canonical_evolution(params, alpha, beta, mode)
    return graph, min_cut(graph)


def random_evolution(params: SystemParams, alpha: Fraction, beta: Fraction, mode: Mode,
                     rng: random.Random) -> FlowGraph:
    """Up to k repairs with random failures, random helper sets and a random DC."""
    graph = build_initial(params, alpha, mode)
    n, k, d = params.n, params.k, params.d
    for _ in range(rng.randint(0, k)):
        failed = rng.randrange(n)
        others = [i for i in range(n) if i != failed]
        graph = apply_repair(graph, failed, rng.sample(others, d), beta)
    return attach_dc(graph, rng.sample(range(n), k))


def vertex_count(params: SystemParams, repairs: int) -> int:
    return 2 * (params.n + repairs) + 2


@dataclass
class VerificationReport:
    params: SystemParams
    point: OperatingPoint
    closed_form: Fraction
    canonical_value: Fraction
    canonical_matches: bool
    canonical_cut: frozenset[Vertex]
    trials: int
    seed: int
    min_random_value: Optional[Fraction]
    random_ok: bool
    cut_dominance: bool
    graphs_checked: int
    note: str = CUT_FUNCTION_NOTE

    @property
    def passed(self) -> bool:
        return self.canonical_matches and self.random_ok and self.cut_dominance

    def to_dict(self) -> dict:
        return {
            "params": {"n": self.params.n, "k": self.params.k, "d": self.params.d, "B": self.params.B},
            "point": {"alpha": self.point.alpha, "beta": self.point.beta, "mode": self.point.mode.value},
            "closed_form": self.closed_form,
            "canonical_value": self.canonical_value,
            "canonical_matches": self.canonical_matches,
            "canonical_cut": sorted(v.label for v in self.canonical_cut),
            "trials": self.trials,
            "seed": self.seed,
            "min_random_value": self.min_random_value,
            "random_ok": self.random_ok,
            "cut_dominance": self.cut_dominance,
            "graphs_checked": self.graphs_checked,
            "passed": self.passed,
            "note": self.note,
        }


def _check_graph(graph: FlowGraph) -> tuple[Fraction, frozenset[Vertex], bool]:
    cuts = enumerate_cuts(graph)
    value, side = cuts.minimum()
    if graph.mode is Mode.CLASSICAL:
        flow = max_flow_value(graph)
        if flow != value:
            raise AssertionError(f"max flow {flow} disagrees with enumerated min cut {value}")
    dominance = bool(np.all(cuts.quantum >= cuts.classical))
    return value, side, dominance


def verify_bound(params: SystemParams, point: OperatingPoint, trials: int = 100, seed: int = 0,
                 vertex_cap: int = DEFAULT_VERTEX_CAP) -> VerificationReport:
    """Check the closed-form capacity against enumerated min cuts.

    The canonical evolution must hit the closed form exactly; ``trials``
    seeded random evolutions must never fall below it.  Every enumerated cut
    is also checked for quantum value >= classical value.
    """
    if vertex_count(params, params.k) > vertex_cap:
        raise EnumerationCapError(
            f"(n={params.n}, k={params.k}) needs up to {vertex_count(params, params.k)} vertices, cap is {vertex_cap}"
        )
    closed = capacity(params, point.alpha, point.beta, point.mode)
    canonical = canonical_evolution(params, point.alpha, point.beta, point.mode)
    canon_value, canon_side, dominance = _check_graph(canonical)

    rng = random.Random(seed)
    lowest: Optional[Fraction] = None
    for _ in range(trials):
        graph = random_evolution(params, point.alpha, point.beta, point.mode, rng)
        value, _, dom = _check_graph(graph)
        dominance = dominance and dom
        if lowest is None or value < lowest:
            lowest = value
    return VerificationReport(
        params=params,
        point=point,
        closed_form=closed,
        canonical_value=canon_value,
        canonical_matches=canon_value == closed,
        canonical_cut=canon_side,
        trials=trials,
        seed=seed,
        min_random_value=lowest,
        random_ok=lowest is None or lowest >= closed,
        cut_dominance=dominance,
        graphs_checked=trials + 1,
    )


def graph_to_dict(graph: FlowGraph, cut: Optional[Iterable[Vertex]] = None) -> dict:
    """Vertices, edges, repair rounds and optional cut; Fractions are left for the renderer."""

    def cap(c):
        return "inf" if c == INF else c

    out = {
        "n": graph.params.n,
        "k": graph.params.k,
        "d": graph.params.d,
        "mode": graph.mode.value,
        "alpha": graph.alpha,
        "vertices": [v.label for v in graph.vertices],
        "edges": [
            {"from": e.tail.label, "to": e.head.label, "capacity": cap(e.capacity), "kind": e.kind,
             "round": e.round_index}
            for e in graph.edges
        ],
        "rounds": [
            {"round": r.round_index, "newcomer": r.newcomer.label, "failed": list(r.failed),
             "helpers": [h.label for h in r.helpers], "beta": r.beta}
            for r in graph.rounds
        ],
        "collector": None if graph.collector is None else [list(i) for i in graph.collector],
    }
    if cut is not None:
        out["cut_source_side"] = sorted(v.label for v in cut)
    return out
