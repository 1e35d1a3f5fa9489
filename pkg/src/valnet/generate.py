"""Seeded random models for property tests and the ``random`` command.

Probability tables are strictly positive: entries are drawn from [0.1, 1] and
conditionals are normalized over their head for every tail configuration.
Kappa tables are small integers with each conditional's head minimum shifted
to 0.  The seed fully determines the output.
"""

from __future__ import annotations

import string

import numpy as np

from valnet.algebra import Kind, Valuation, Variable
from valnet.converters import BalloonGraph, Dag, RecursiveCausalGraph, UndirectedGraph
from valnet.modelfile import ModelFile
from valnet.network import ValuationNetwork, ValuationNode

__all__ = [
    "variable_names",
    "random_dag",
    "random_ug",
    "random_dbg",
    "random_rcg",
    "random_vn_nodes",
    "random_table",
    "random_joint",
    "random_model",
]


def variable_names(n: int) -> list[str]:
    if n <= 26:
        return list(string.ascii_uppercase[:n])
    return [f"X{i}" for i in range(1, n + 1)]


def _variables(rng, n: int, max_frame: int) -> list[Variable]:
    return [Variable(x, int(rng.integers(2, max_frame + 1))) for x in variable_names(n)]


def _subset(rng, pool, k: int) -> list:
    k = min(k, len(pool))
    if k <= 0:
        return []
    idx = sorted(rng.choice(len(pool), size=k, replace=False))
    return [pool[i] for i in idx]


def random_dag(rng, variables, p: float = 0.4, max_parents: int = 3) -> Dag:
    names = [v.name for v in variables]
    order = [names[i] for i in rng.permutation(len(names))]
    arcs = []
    for j, child in enumerate(order):
        cands = [a for a in order[:j] if rng.random() < p]
        for a in cands[:max_parents]:
            arcs.append((a, child))
    return Dag(variables, arcs)


def random_ug(rng, variables, p: float = 0.4) -> UndirectedGraph:
    names = [v.name for v in variables]
    edges = [
        (names[i], names[j])
        for i in range(len(names))
        for j in range(i + 1, len(names))
        if rng.random() < p
    ]
    return UndirectedGraph(variables, edges)


def random_dbg(rng, variables, max_balloon: int = 3) -> BalloonGraph:
    names = [v.name for v in variables]
    order = [names[i] for i in rng.permutation(len(names))]
    balloons, parents = {}, {}
    i = 0
    while i < len(order):
        size = int(rng.integers(1, max_balloon + 1))
        name = f"B{len(balloons) + 1}"
        balloons[name] = tuple(order[i : i + size])
        parents[name] = tuple(_subset(rng, order[:i], int(rng.integers(0, 3))))
        i += size
    return BalloonGraph(variables, balloons, parents)


def random_rcg(rng, variables, p: float = 0.5) -> RecursiveCausalGraph:
    names = [v.name for v in variables]
    order = [names[i] for i in rng.permutation(len(names))]
    n_exo = int(rng.integers(0, len(order) + 1))
    exo = order[:n_exo]
    edges = [
        (exo[i], exo[j])
        for i in range(len(exo))
        for j in range(i + 1, len(exo))
        if rng.random() < p
    ]
    arcs = []
    for j in range(n_exo, len(order)):
        for a in _subset(rng, order[:j], int(rng.integers(0, 4))):
            arcs.append((a, order[j]))
    return RecursiveCausalGraph(variables, exo, edges, arcs)


def random_vn_nodes(rng, variables, max_nodes: int = 6) -> list[ValuationNode]:
    """Plain valuations and conditionals with disjoint, acyclic heads."""
    names = [v.name for v in variables]
    order = [names[i] for i in rng.permutation(len(names))]
    m = int(rng.integers(1, min(max_nodes, len(names)) + 1))
    nodes: list[ValuationNode] = []
    used = 0
    for k in range(m):
        label = f"f{k + 1}"
        if used < len(order) and rng.random() < 0.6:
            size = int(rng.integers(1, min(2, len(order) - used) + 1))
            head = order[used : used + size]
            tail = _subset(rng, order[:used], int(rng.integers(0, 3)))
            used += size
            nodes.append(ValuationNode(label, tuple(tail) + tuple(head), frozenset(head)))
        else:
            dom = _subset(rng, names, int(rng.integers(1, 4)))
            nodes.append(ValuationNode(label, tuple(dom)))
    covered = {x for n in nodes for x in n.domain}
    # unheaded variables may join any node without creating a conditional cycle
    for x in names:
        if x in covered:
            continue
        if x in order[:used]:
            raise AssertionError("heads are always covered")
        i = int(rng.integers(0, len(nodes)))
        n = nodes[i]
        nodes[i] = ValuationNode(n.name, n.domain + (x,), n.head)
    return nodes


def random_table(rng, kind: Kind, shape, head_axes=()) -> np.ndarray:
    head_axes = tuple(head_axes)
    kind = Kind(kind)
    if kind is Kind.KAPPA:
        raw = rng.integers(0, 6, size=shape).astype(float)
        if head_axes:
            raw = raw - raw.min(axis=head_axes, keepdims=True)
        return raw
    raw = rng.uniform(0.1, 1.0, size=shape)
    if not head_axes:
        return raw
    if kind is Kind.PROBABILITY:
        return raw / raw.sum(axis=head_axes, keepdims=True)
    return raw / raw.max(axis=head_axes, keepdims=True)


def random_joint(rng, n: int, max_frame: int = 2, kind: Kind = Kind.PROBABILITY) -> Valuation:
    variables = _variables(rng, n, max_frame)
    shape = tuple(v.frame_size for v in variables)
    return Valuation(kind, variables, random_table(rng, kind, shape))


def _attach_tables(rng, net: ValuationNetwork, kind: Kind) -> dict[str, tuple[float, ...]]:
    tables = {}
    for n in net.nodes:
        shape = tuple(net.variables[x].frame_size for x in n.domain)
        axes = [i for i, x in enumerate(n.domain) if x in n.head]
        tables[n.name] = tuple(float(x) for x in random_table(rng, kind, shape, axes).ravel())
    return tables


def random_model(
    model: str,
    n_vars: int,
    seed: int,
    *,
    kind: Kind | str = Kind.PROBABILITY,
    max_frame: int = 2,
    tables: bool = True,
) -> ModelFile:
    kind = Kind(kind)
    rng = np.random.default_rng(seed)
    variables = _variables(rng, n_vars, max_frame)
    if model == "vn":
        structure = random_vn_nodes(rng, variables)
    elif model == "ug":
        structure = random_ug(rng, variables)
    elif model == "dag":
        structure = random_dag(rng, variables)
    elif model == "dbg":
        structure = random_dbg(rng, variables)
    elif model == "rcg":
        structure = random_rcg(rng, variables)
    else:
        raise ValueError(f"unknown model kind {model!r}")
    mf = ModelFile(model, kind, variables, structure)
    if tables:
        mf.tables = _attach_tables(rng, mf.structure_network(), kind)
    return mf
