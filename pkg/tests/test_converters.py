import numpy as np
import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from valnet.converters import (
    BalloonGraph,
    Dag,
    RecursiveCausalGraph,
    UndirectedGraph,
    d_separated,
    from_dag,
    from_dbg,
    from_rcg,
    from_ug,
    moral_separated,
    ug_separated,
)
from valnet.errors import DomainError, GraphError
from valnet.generate import random_model
from valnet.independence import ci_structural, disjoint_triples


def nodes_of(net):
    return sorted((n.name, n.domain, tuple(sorted(n.head))) for n in net.nodes)


def domains(net):
    return sorted(n.domain for n in net.nodes)


FIG9 = Dag("VWXYZ", [("V", "W"), ("V", "X"), ("W", "Y"), ("X", "Y"), ("Y", "Z")])
COLLIDER = Dag("ABC", [("A", "C"), ("B", "C")])
CHAIN = Dag("ABC", [("A", "B"), ("B", "C")])


# --- undirected ---------------------------------------------------------------


def test_ug_fig8(load):
    net = load("fig8").network()
    assert domains(net) == [("W", "X"), ("W", "Z"), ("X", "Y"), ("Y", "Z")]
    assert all(not n.head for n in net.nodes)


def test_ug_edgeless_and_triangle():
    assert domains(from_ug(UndirectedGraph("AB"))) == [("A",), ("B",)]
    tri = from_ug(UndirectedGraph("ABC", [("A", "B"), ("B", "C"), ("A", "C")]))
    assert nodes_of(tri) == [("A_B_C", ("A", "B", "C"), ("A", "B", "C"))]


def test_ug_errors():
    with pytest.raises(GraphError):
        UndirectedGraph("AB", [("A", "A")])
    with pytest.raises(GraphError):
        UndirectedGraph("AB", [("A", "B"), ("B", "A")])
    with pytest.raises(GraphError):
        UndirectedGraph("AB", [("A", "Q")])


# --- DAG ----------------------------------------------------------------------


def test_dag_fig9():
    assert nodes_of(from_dag(FIG9)) == [
        ("V", ("V",), ("V",)),
        ("W", ("V", "W"), ("W",)),
        ("X", ("V", "X"), ("X",)),
        ("Y", ("W", "X", "Y"), ("Y",)),
        ("Z", ("Y", "Z"), ("Z",)),
    ]


def test_dag_single_vertex_and_chain():
    assert nodes_of(from_dag(Dag("X"))) == [("X", ("X",), ("X",))]
    # same shape as the W, X, Y, Z chain of conditionals
    assert nodes_of(from_dag(CHAIN)) == [
        ("A", ("A",), ("A",)),
        ("B", ("A", "B"), ("B",)),
        ("C", ("B", "C"), ("C",)),
    ]


def test_dag_cycle():
    with pytest.raises(GraphError, match="cycle"):
        Dag("AB", [("A", "B"), ("B", "A")])


# --- balloons -----------------------------------------------------------------


def test_dbg_fig10(load):
    net = load("fig10").network()
    ex3 = load("example3").network()
    assert nodes_of(net) == nodes_of(ex3)
    a4 = net.node("a4")
    assert a4.head == {"X5", "X6", "X7"} and set(a4.tail) == {"X2"}


def test_dbg_singletons_equal_dag():
    for seed in range(20):
        dag = random_model("dag", 6, seed, tables=False).structure
        assert nodes_of(from_dbg(BalloonGraph.from_dag(dag))) == nodes_of(from_dag(dag))


def test_dbg_one_balloon():
    net = from_dbg(BalloonGraph("ABC", {"all": ("A", "B", "C")}))
    assert nodes_of(net) == [("all", ("A", "B", "C"), ("A", "B", "C"))]
    assert not net.node("all").tail


def test_dbg_errors():
    with pytest.raises(GraphError, match="no balloon"):
        BalloonGraph("ABC", {"a": ("A",), "b": ("B",)})
    with pytest.raises(GraphError):
        BalloonGraph("AB", {"a": ("A", "B"), "b": ("B",)})
    with pytest.raises(GraphError, match="own balloon"):
        BalloonGraph("AB", {"a": ("A", "B")}, {"a": ("A",)})
    with pytest.raises(GraphError, match="cycle"):
        BalloonGraph("AB", {"a": ("A",), "b": ("B",)}, {"a": ("B",), "b": ("A",)})


# --- recursive causal graphs --------------------------------------------------


def test_rcg_fig11(load):
    assert nodes_of(load("fig11").network()) == [
        ("V_W", ("V", "W"), ()),
        ("V_X", ("V", "X"), ()),
        ("Y", ("W", "X", "Y"), ("Y",)),
        ("Z", ("X", "Z"), ("Z",)),
    ]
    ex4 = load("example4").network()
    assert domains(load("fig11").network()) == domains(ex4)
    assert sorted(tuple(sorted(n.head)) for n in ex4.nodes) == [(), (), ("Y",), ("Z",)]


def test_rcg_without_endogenous_is_ug():
    edges = [("A", "B"), ("B", "C"), ("C", "D")]
    rcg = RecursiveCausalGraph("ABCD", "ABCD", edges)
    assert nodes_of(from_rcg(rcg)) == nodes_of(from_ug(UndirectedGraph("ABCD", edges)))


def test_rcg_with_one_exogenous_is_dag():
    for seed in range(20):
        dag = random_model("dag", 6, seed, tables=False).structure
        roots = [x for x in dag.names if not dag.parents(x)]
        rcg = RecursiveCausalGraph(dag.vertices, roots[:1], (), dag.arcs)
        assert nodes_of(from_rcg(rcg)) == nodes_of(from_dag(dag))


def test_rcg_errors():
    with pytest.raises(GraphError, match="exogenous"):
        RecursiveCausalGraph("ABC", "A", [("A", "B")])
    with pytest.raises(GraphError, match="exogenous"):
        RecursiveCausalGraph("ABC", "AB", [], [("C", "A")])
    with pytest.raises(GraphError):
        RecursiveCausalGraph("ABC", "A", [], [("B", "C"), ("C", "B")])


# --- separation oracles -------------------------------------------------------


def test_d_separation_examples():
    assert d_separated(FIG9, {"W"}, {"X"}, {"V"})
    assert not d_separated(FIG9, {"W"}, {"X"}, {"V", "Z"})
    assert d_separated(COLLIDER, {"A"}, {"B"}, set())
    assert not d_separated(COLLIDER, {"A"}, {"B"}, {"C"})
    assert d_separated(CHAIN, {"A"}, {"C"}, {"B"})
    assert not d_separated(CHAIN, {"A"}, {"C"}, set())


def test_moralization_examples():
    assert moral_separated(FIG9, {"W"}, {"X"}, {"V"})
    assert not moral_separated(FIG9, {"W"}, {"X"}, {"V", "Z"})
    assert moral_separated(COLLIDER, {"A"}, {"B"}, set())
    assert not moral_separated(COLLIDER, {"A"}, {"B"}, {"C"})


def test_separation_overlap():
    with pytest.raises(DomainError):
        d_separated(CHAIN, {"A"}, {"A"}, set())
    with pytest.raises(DomainError):
        moral_separated(CHAIN, {"A"}, {"B"}, {"B"})


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_oracles_agree(seed):
    n = int(np.random.default_rng(seed).integers(2, 7))
    dag = random_model("dag", n, seed, tables=False).structure
    g = dag.to_networkx()
    net = from_dag(dag)
    for r, s, v in disjoint_triples(dag.names):
        d = d_separated(dag, r, s, v)
        assert d == moral_separated(dag, r, s, v)
        assert d == nx.is_d_separator(g, set(r), set(s), set(v))
        if d:
            assert ci_structural(net, r, s, v).independent


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_ug_separation_is_represented(seed):
    n = int(np.random.default_rng(seed).integers(2, 8))
    ug = random_model("ug", n, seed, tables=False).structure
    g = ug.to_networkx()
    net = from_ug(ug)
    for r, s, v in disjoint_triples(ug.names):
        if len(r) > 2 or len(s) > 2:
            continue
        if ug_separated(g, r, s, v):
            assert ci_structural(net, r, s, v).independent
