"""Event-driven failure/repair simulation with exact resource accounting.

The simulator moves no payload.  It tracks what a repair costs (dits sent,
qudits sent, entangled qudits consumed) and whether the time-expanded flow
graph still lets any ``k`` nodes recover ``B`` dits.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Sequence, Union

from .bounds import Mode, OperatingPoint, SystemParams, capacity, is_feasible
from .flowgraph import (
    EnumerationCapError,
    FlowGraph,
    GraphError,
    apply_repair,
    attach_dc,
    build_initial,
    min_cut,
)

#: Largest C(n, k) checked exhaustively without an explicit sampling budget.
DEFAULT_SUBSET_CAP = 5000

ENTANGLEMENT_NOTE = (
    "entanglement is charged per repair as d*beta entangled qudits "
    "(the helpers' pre-shared system); bulk pre-distribution is not amortized"
)


class InfeasibleError(ValueError):
    """Operating point violates the cut-set bound for its mode."""

    def __init__(self, params: SystemParams, point: OperatingPoint, cap: Fraction):
        self.capacity = cap
        self.shortfall = params.B - cap
        super().__init__(
            f"{point.mode.value} point alpha={point.alpha}, beta={point.beta} supports only "
            f"{cap} < B={params.B} dits (shortfall {self.shortfall})"
        )


class SimulationError(RuntimeError):
    """Event not valid for the current cluster state."""


@dataclass(frozen=True)
class Fail:
    node_id: Optional[int] = None  # None: pick uniformly from active nodes


@dataclass(frozen=True)
class Repair:
    newcomer_id: int
    helper_ids: Optional[tuple[int, ...]] = None  # None: uniform random d-subset


@dataclass(frozen=True)
class CheckRetrieval:
    subset_budget: Optional[int] = None  # None: all k-subsets


Event = Union[Fail, Repair, CheckRetrieval]


@dataclass(frozen=True)
class ResourceLedger:
    dits_stored: Fraction
    classical_dits_sent: Fraction = Fraction(0)
    qudits_sent: Fraction = Fraction(0)
    entangled_qudits_consumed: Fraction = Fraction(0)
    repairs_completed: int = 0

    def charge(self, mode: Mode, d: int, beta: Fraction) -> "ResourceLedger":
        sent = d * beta
        if mode is Mode.QUANTUM:
            return replace(
                self,
                qudits_sent=self.qudits_sent + sent,
                entangled_qudits_consumed=self.entangled_qudits_consumed + sent,
                repairs_completed=self.repairs_completed + 1,
            )
        return replace(
            self,
            classical_dits_sent=self.classical_dits_sent + sent,
            repairs_completed=self.repairs_completed + 1,
        )

    def to_dict(self) -> dict:
        return {
            "dits_stored": self.dits_stored,
            "classical_dits_sent": self.classical_dits_sent,
            "qudits_sent": self.qudits_sent,
            "entangled_qudits_consumed": self.entangled_qudits_consumed,
            "repairs_completed": self.repairs_completed,
        }


@dataclass(frozen=True)
class RetrievalReport:
    checked_subsets: int
    failing_subsets: tuple[tuple[int, ...], ...]
    min_cut: Optional[Fraction]

    @property
    def passed(self) -> bool:
        return not self.failing_subsets

    def to_dict(self) -> dict:
        return {
            "checked_subsets": self.checked_subsets,
            "failing_subsets": [list(s) for s in self.failing_subsets],
            "min_cut": self.min_cut,
            "pass": self.passed,
        }


class Cluster:
    """Single-owner mutable cluster state.  Create with :func:`new_cluster`."""

    def __init__(self, params: SystemParams, point: OperatingPoint):
        self.params = params
        self.point = point
        self.graph: FlowGraph = build_initial(params, point.alpha, point.mode)
        self.ledger = ResourceLedger(dits_stored=params.n * point.alpha)
        self.history: list[Event] = []
        self.reports: list[RetrievalReport] = []
        self.pending: Optional[int] = None

    @property
    def degraded(self) -> bool:
        return self.pending is not None

    @property
    def active_nodes(self) -> tuple[tuple[int, int], ...]:
        return self.graph.active

    def step(self, event: Event, rng: Optional[random.Random] = None) -> ResourceLedger:
        rng = rng or random.Random(0)
        n, d = self.params.n, self.params.d
        if isinstance(event, Fail):
            if self.pending is not None:
                raise SimulationError(f"node {self.pending} is still awaiting repair")
            node = rng.randrange(n) if event.node_id is None else event.node_id
            if not 0 <= node < n:
                raise SimulationError(f"unknown node {node}")
            self.pending = node
            event = Fail(node)
        elif isinstance(event, Repair):
            if self.pending != event.newcomer_id:
                raise SimulationError(
                    f"repair of node {event.newcomer_id} without a matching failure (pending: {self.pending})"
                )
            helpers = event.helper_ids
            if helpers is None:
                survivors = [i for i in range(n) if i != event.newcomer_id]
                helpers = tuple(sorted(rng.sample(survivors, d)))
            try:
                self.graph = apply_repair(self.graph, event.newcomer_id, helpers, self.point.beta)
            except GraphError as exc:
                raise SimulationError(str(exc)) from exc
            self.ledger = self.ledger.charge(self.point.mode, d, self.point.beta)
            self.pending = None
            event = Repair(event.newcomer_id, tuple(helpers))
        elif isinstance(event, CheckRetrieval):
            self.reports.append(self.check_retrieval(event.subset_budget, rng=rng))
        else:
            raise TypeError(f"not an event: {event!r}")
        self.history.append(event)
        return self.ledger

    def check_retrieval(self, subset_budget: Optional[int] = None, rng: Optional[random.Random] = None,
                        subset_cap: int = DEFAULT_SUBSET_CAP) -> RetrievalReport:
        """Attach a data collector to k-subsets of active nodes and compare min cuts with B."""
        if self.degraded:
            raise SimulationError("cluster has an unrepaired failure; retrieval is defined after repair")
        n, k = self.params.n, self.params.k
        total = math.comb(n, k)
        if subset_budget is None:
            if total > subset_cap:
                raise EnumerationCapError(f"C({n},{k})={total} subsets exceed cap {subset_cap}; give a budget")
            subsets = list(itertools.combinations(range(n), k))
        elif subset_budget >= total:
            subsets = list(itertools.combinations(range(n), k))
        else:
            rng = rng or random.Random(0)
            picked: set[tuple[int, ...]] = set()
            while len(picked) < subset_budget:
                picked.add(tuple(sorted(rng.sample(range(n), k))))
            subsets = sorted(picked)
        failing = []
        lowest: Optional[Fraction] = None
        for subset in subsets:
            value = min_cut(attach_dc(self.graph, subset))
            lowest = value if lowest is None else min(lowest, value)
            if value < self.params.B:
                failing.append(subset)
        return RetrievalReport(len(subsets), tuple(failing), lowest)


def new_cluster(params: SystemParams, point: OperatingPoint, strict: bool = True) -> Cluster:
    """Fresh cluster at generation 0.

    ``strict=False`` admits infeasible points, which is only useful for
    demonstrating retrieval failures.
    """
    if strict and not is_feasible(params, point):
        raise InfeasibleError(params, point, capacity(params, point.alpha, point.beta, point.mode))
    return Cluster(params, point)


def event_to_dict(event: Event) -> dict:
    if isinstance(event, Fail):
        return {"event": "fail", "node": event.node_id}
    if isinstance(event, Repair):
        helpers = None if event.helper_ids is None else list(event.helper_ids)
        return {"event": "repair", "node": event.newcomer_id, "helpers": helpers}
    return {"event": "check_retrieval", "budget": event.subset_budget}


def event_from_dict(data: dict) -> Event:
    kind = data["event"]
    if kind == "fail":
        return Fail(data.get("node"))
    if kind == "repair":
        helpers = data.get("helpers")
        if helpers in (None, "random"):
            return Repair(data["node"], None)
        return Repair(data["node"], tuple(helpers))
    if kind == "check_retrieval":
        budget = data.get("budget")
        return CheckRetrieval(None if budget in (None, "all") else int(budget))
    raise ValueError(f"unknown event kind {kind!r}")


def worst_case_script(params: SystemParams, repairs: Optional[int] = None) -> list[Event]:
    """Fail nodes 0..r-1 in turn, each newcomer helped by all earlier newcomers."""
    n, k, d = params.n, params.k, params.d
    r = k if repairs is None else repairs
    if not 0 <= r <= n:
        raise ValueError(f"need 0 <= repairs <= n, got {r}")
    script: list[Event] = []
    for j in range(r):
        earlier = list(range(j))
        initial = list(range(j + 1, n))[: d - len(earlier)]
        helpers = (earlier + initial)[:d]
        script += [Fail(j), Repair(j, tuple(helpers))]
    return script


@dataclass
class SimulationLog:
    params: SystemParams
    point: OperatingPoint
    seed: int
    entries: list[dict] = field(default_factory=list)
    final_ledger: Optional[ResourceLedger] = None
    reports: list[RetrievalReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    def to_dict(self) -> dict:
        return {
            "params": {"n": self.params.n, "k": self.params.k, "d": self.params.d, "B": self.params.B},
            "point": {"alpha": self.point.alpha, "beta": self.point.beta, "mode": self.point.mode.value},
            "seed": self.seed,
            "entries": self.entries,
            "final_ledger": self.final_ledger.to_dict() if self.final_ledger else None,
            "reports": [r.to_dict() for r in self.reports],
            "pass": self.passed,
            "notes": [ENTANGLEMENT_NOTE],
        }


def run_script(cluster: Cluster, script: Sequence[Event], seed: int = 0) -> SimulationLog:
    """Replay ``script``; the seed only drives events that ask for random choices."""
    rng = random.Random(seed)
    log = SimulationLog(cluster.params, cluster.point, seed)
    for index, event in enumerate(script):
        n_reports = len(cluster.reports)
        ledger = cluster.step(event, rng)
        entry = {"index": index, "event": event_to_dict(cluster.history[-1]), "ledger": ledger.to_dict()}
        if len(cluster.reports) > n_reports:
            entry["report"] = cluster.reports[-1].to_dict()
            log.reports.append(cluster.reports[-1])
        log.entries.append(entry)
    log.final_ledger = cluster.ledger
    return log
