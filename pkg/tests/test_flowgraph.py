import itertools
import json
import math
import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qregen.bounds import Mode, OperatingPoint, ParameterError, SystemParams, capacity
from qregen.flowgraph import (
    COLLECTOR,
    SOURCE,
    EnumerationCapError,
    GraphError,
    Vertex,
    VertexKind,
    apply_repair,
    attach_dc,
    build_initial,
    canonical_evolution,
    canonical_worst_case,
    cut_value,
    enumerate_cuts,
    graph_to_dict,
    max_flow_value,
    min_cut,
    min_cut_certificate,
    random_evolution,
    verify_bound,
    xin,
    xout,
)
from qregen.records import render

P423 = SystemParams(4, 2, 3)


def fig1_graph(mode, alpha=3, beta=1):
    g = build_initial(P423, alpha, mode)
    g = apply_repair(g, 0, [1, 2, 3], beta)
    return attach_dc(g, [0, 1])  # the newcomer and one survivor


def brute_min_cut(graph):
    """Every S/DC bipartition, no pruning, scalar valuation."""
    inner = [v for v in graph.vertices if v not in (SOURCE, COLLECTOR)]
    best = math.inf
    for mask in itertools.product((False, True), repeat=len(inner)):
        side = {SOURCE} | {v for v, s in zip(inner, mask) if s}
        best = min(best, cut_value(graph, side))
    return best


# --- construction --------------------------------------------------------

def test_build_initial_4_2_3():
    g = build_initial(P423, 3)
    kinds = [v.kind for v in g.vertices]
    assert len(g.vertices) == 9
    assert kinds.count(VertexKind.SOURCE) == 1
    assert kinds.count(VertexKind.XIN) == kinds.count(VertexKind.XOUT) == 4
    assert VertexKind.DC not in kinds
    storage = [e for e in g.edges if e.kind == "storage"]
    assert len(storage) == 4 and all(e.capacity == 3 for e in storage)
    assert all(e.capacity == math.inf for e in g.edges if e.kind == "source")


def test_build_initial_8_4_7():
    g = build_initial(SystemParams(8, 4, 7), F(1, 4))
    storage = [e for e in g.edges if e.kind == "storage"]
    assert len(storage) == 8 and {e.capacity for e in storage} == {F(1, 4)}


def test_single_node_system_rejected():
    with pytest.raises(ParameterError):
        build_initial(SystemParams(1, 1, 1), 1)


def test_apply_repair_records_round():
    g = apply_repair(build_initial(P423, 3), 0, [1, 2, 3], 1)
    assert len(g.rounds) == 1
    rnd = g.rounds[0]
    assert rnd.newcomer == xin((0, 1))
    assert rnd.helpers == (xout((1, 0)), xout((2, 0)), xout((3, 0)))
    assert len([e for e in g.edges if e.kind == "helper"]) == 3
    assert g.current == (1, 0, 0, 0)
    # the failed instance is kept as history
    assert xout((0, 0)) in g.vertices


@pytest.mark.parametrize("failed,helpers", [
    (0, [1, 2, 3, 0]),  # d+1 helpers
    (0, [1, 2]),        # too few
    (0, [1, 1, 2]),     # duplicates
    (0, [0, 1, 2]),     # self-help
    (7, [1, 2, 3]),     # unknown failed node
    (0, [1, 2, 9]),     # unknown helper
])
def test_apply_repair_rejects_bad_rounds(failed, helpers):
    with pytest.raises(GraphError):
        apply_repair(build_initial(P423, 3), failed, helpers, 1)


def test_cross_generation_helper_link():
    g = apply_repair(build_initial(P423, 3), 0, [1, 2, 3], 1)
    g = apply_repair(g, 1, [0, 2, 3], 1)
    assert xout((0, 1)) in g.rounds[1].helpers
    edge = [e for e in g.edges if e.tail == xout((0, 1))]
    assert edge and edge[0].head == xin((1, 2))


def test_attach_dc():
    g = fig1_graph(Mode.CLASSICAL)
    assert g.collector == ((0, 1), (1, 0))
    assert COLLECTOR in g.vertices
    with pytest.raises(GraphError):
        attach_dc(g, [0])
    with pytest.raises(GraphError):
        attach_dc(g, [(0, 0), (1, 0)])  # (0, 0) failed in round 1
    g2 = apply_repair(g, 1, [0, 2, 3], 1)
    with pytest.raises(GraphError):
        attach_dc(g2, [(0, 0), (1, 0)])  # both historical now


# --- cut values ----------------------------------------------------------

def fig1_cut(graph):
    """Storage edge of node 1 and the links from helpers 2, 3 are cut."""
    sink = {COLLECTOR, xout((1, 0)), xin((0, 1)), xout((0, 1))}
    return {v for v in graph.vertices if v not in sink}


def test_fig1_cut_classical():
    g = fig1_graph(Mode.CLASSICAL)
    assert cut_value(g, fig1_cut(g)) == 5


def test_fig1_cut_quantum():
    g = fig1_graph(Mode.QUANTUM)
    assert cut_value(g, fig1_cut(g)) == 6


def test_infinite_cut():
    g = fig1_graph(Mode.CLASSICAL)
    assert cut_value(g, set(g.vertices) - {COLLECTOR}) == math.inf


def test_malformed_cuts():
    g = fig1_graph(Mode.CLASSICAL)
    with pytest.raises(GraphError):
        cut_value(g, {xin((1, 0))})  # no source
    with pytest.raises(GraphError):
        cut_value(g, {SOURCE, COLLECTOR})
    with pytest.raises(GraphError):
        cut_value(g, {SOURCE, Vertex(VertexKind.XIN, 9, 9)})


def test_source_side_newcomer_contributes_no_helper_links():
    # newcomer on the source side: its helper bundle contributes nothing
    g = fig1_graph(Mode.QUANTUM)
    sink = {COLLECTOR, xout((0, 1)), xout((1, 0)), xout((2, 0)), xout((3, 0))}
    side = {v for v in g.vertices if v not in sink}
    # storage of newcomer (3) + node 1 (3) + node 2,3 XOut on sink side (3+3)
    assert cut_value(g, side) == 12


# --- min cuts ------------------------------------------------------------

def test_min_cut_fig1():
    assert min_cut(fig1_graph(Mode.CLASSICAL)) == 5
    assert min_cut(fig1_graph(Mode.QUANTUM)) == 6


@pytest.mark.parametrize("mode", list(Mode))
def test_min_cut_without_repairs_is_k_alpha(mode):
    g = attach_dc(build_initial(SystemParams(4, 2, 2), F(5, 2), mode), [1, 3])
    assert min_cut(g) == 5


def test_min_cut_needs_collector():
    with pytest.raises(GraphError):
        min_cut(build_initial(P423, 3))


def test_certificate_is_a_real_cut():
    for mode in Mode:
        g = fig1_graph(mode)
        res = min_cut_certificate(g)
        assert cut_value(g, res.source_side) == res.value
    assert min_cut_certificate(fig1_graph(Mode.CLASSICAL)).max_flow == 5


def small_evolutions(seed, count):
    rng = random.Random(seed)
    for _ in range(count):
        n = rng.randint(3, 5)
        k = rng.randint(1, n - 1)
        d = rng.randint(k, n - 1)
        params = SystemParams(n, k, d)
        alpha = F(rng.randint(1, 8), rng.choice([1, 2, 3]))
        beta = F(rng.randint(1, 6), rng.choice([1, 2, 4]))
        for mode in Mode:
            g = random_evolution(params, alpha, beta, mode, random.Random(rng.random()))
            if len(g.vertices) <= 15:
                yield g


def test_pruned_enumeration_matches_unpruned_bruteforce():
    checked = 0
    for g in small_evolutions(11, 40):
        assert min_cut(g) == brute_min_cut(g)
        checked += 1
    assert checked > 30


def test_vectorized_values_match_scalar_cut_value():
    for g in small_evolutions(5, 10):
        cuts = enumerate_cuts(g)
        for row in range(0, len(cuts.sink), max(1, len(cuts.sink) // 16)):
            side = cuts.source_side(row)
            for mode in Mode:
                assert cut_value(g.with_mode(mode), side) == F(int(cuts.values(mode)[row]), cuts.scale)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_max_flow_agrees_with_enumeration(seed):
    rng = random.Random(seed)
    n = rng.randint(3, 6)
    k = rng.randint(1, min(n - 1, 5))
    d = rng.randint(k, n - 1)
    params = SystemParams(n, k, d)
    g = random_evolution(params, F(rng.randint(1, 4)), F(1, rng.choice([1, 2, 4])), Mode.CLASSICAL, rng)
    cuts = enumerate_cuts(g)
    assert max_flow_value(g) == cuts.minimum(Mode.CLASSICAL)[0]
    assert np.all(cuts.quantum >= cuts.classical)


def test_enumeration_cap():
    g = canonical_evolution(SystemParams(8, 4, 7), 1, 1)
    with pytest.raises(EnumerationCapError):
        enumerate_cuts(g, free_cap=3)


# --- canonical worst case ------------------------------------------------

def test_canonical_examples():
    assert canonical_worst_case(P423, 3, 1, Mode.CLASSICAL)[1] == 5
    assert canonical_worst_case(P423, 3, 1, Mode.QUANTUM)[1] == 6
    assert canonical_worst_case(SystemParams(8, 4, 7), F(1, 4), F(1, 28), Mode.QUANTUM)[1] == 1


def test_canonical_structure():
    g = canonical_evolution(SystemParams(6, 3, 4), 2, 1)
    for j, rnd in enumerate(g.rounds):
        earlier = {xout((i, i + 1)) for i in range(j)}
        assert earlier <= set(rnd.helpers)
    assert g.collector == ((0, 1), (1, 2), (2, 3))


def test_canonical_tightness_grid():
    alphas = [F(a) for a in (1, 2, 3, 4)]
    betas = [F(1, 4), F(1, 2), F(1), F(2)]
    for n in range(2, 8):
        for k in range(1, n):
            for d in range(k, n):
                params = SystemParams(n, k, d)
                for a, b, mode in itertools.product(alphas, betas, Mode):
                    _, value = canonical_worst_case(params, a, b, mode)
                    assert value == capacity(params, a, b, mode), (params, a, b, mode)


def test_repair_after_dc_never_lowers_min_cut():
    rng = random.Random(3)
    for _ in range(30):
        params = SystemParams(5, 2, rng.randint(2, 4))
        for mode in Mode:
            g = random_evolution(params, F(rng.randint(1, 4)), F(1, 2), mode, rng)
            before = min_cut(g)
            failed = rng.randrange(5)
            g2 = apply_repair(g, failed, rng.sample([i for i in range(5) if i != failed], params.d), F(1, 2))
            assert g2.collector == g.collector
            assert min_cut(g2) >= before


# --- verification --------------------------------------------------------

def test_verify_fig1_quantum():
    report = verify_bound(P423, OperatingPoint(3, 1, Mode.QUANTUM), trials=100, seed=1)
    assert report.passed and report.canonical_value == 6
    assert report.min_random_value >= 6
    assert "per-round" in report.note


def test_verify_large_alpha_classical():
    report = verify_bound(SystemParams(5, 2, 3), OperatingPoint(1000, 1, Mode.CLASSICAL), trials=30, seed=2)
    assert report.passed and report.canonical_value == 5


def test_verify_is_deterministic():
    point = OperatingPoint(2, F(1, 2), Mode.QUANTUM)
    a = verify_bound(SystemParams(5, 2, 3), point, trials=20, seed=9).to_dict()
    b = verify_bound(SystemParams(5, 2, 3), point, trials=20, seed=9).to_dict()
    assert a == b


def test_verify_vertex_cap():
    with pytest.raises(EnumerationCapError):
        verify_bound(SystemParams(9, 4, 8), OperatingPoint(1, 1), trials=1)


def test_graph_serialization_roundtrip():
    g = fig1_graph(Mode.QUANTUM)
    res = min_cut_certificate(g)
    data = json.loads(json.dumps(render(graph_to_dict(g, res.source_side))))
    assert data["vertices"][0] == "S"
    assert {e["kind"] for e in data["edges"]} == {"source", "storage", "helper", "dc"}
    assert data["rounds"][0]["helpers"] == ["out:1@0", "out:2@0", "out:3@0"]
    side = {Vertex.from_label(v) for v in data["cut_source_side"]}
    assert cut_value(g, side) == 6
