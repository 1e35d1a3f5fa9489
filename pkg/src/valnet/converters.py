"""Graphical models to valuation networks, and two DAG separation oracles.

Node naming is deterministic: a DAG or RCG node is named after the variable it
conditions, a DBG node after its balloon, and a clique node after its members
joined with ``_`` in variable order.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import networkx as nx

from valnet.algebra import Variable
from valnet.errors import DomainError, GraphError
from valnet.network import ValuationNetwork, ValuationNode, build_network

__all__ = [
    "UndirectedGraph",
    "Dag",
    "BalloonGraph",
    "RecursiveCausalGraph",
    "from_ug",
    "from_dag",
    "from_dbg",
    "from_rcg",
    "d_separated",
    "moral_separated",
    "ug_separated",
]


def _as_variables(vertices) -> tuple[Variable, ...]:
    out = tuple(v if isinstance(v, Variable) else Variable(v, 2) for v in vertices)
    names = [v.name for v in out]
    if len(set(names)) != len(names):
        raise GraphError(f"duplicate vertex in {names}")
    return out


def _norm_pairs(pairs, names: set[str], what: str) -> tuple[tuple[str, str], ...]:
    out = []
    for a, b in pairs:
        if a not in names or b not in names:
            raise GraphError(f"{what} {a}-{b} uses an unknown vertex")
        if a == b:
            raise GraphError(f"self-loop on {a!r}")
        out.append((a, b))
    return tuple(out)


@dataclass(frozen=True)
class UndirectedGraph:
    vertices: tuple[Variable, ...]
    edges: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", _as_variables(self.vertices))
        names = {v.name for v in self.vertices}
        edges = _norm_pairs(self.edges, names, "edge")
        seen = set()
        for a, b in edges:
            key = frozenset((a, b))
            if key in seen:
                raise GraphError(f"duplicate edge {a}-{b}")
            seen.add(key)
        object.__setattr__(self, "edges", edges)

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.vertices]

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.names)
        g.add_edges_from(self.edges)
        return g


@dataclass(frozen=True)
class Dag:
    vertices: tuple[Variable, ...]
    arcs: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", _as_variables(self.vertices))
        names = {v.name for v in self.vertices}
        arcs = _norm_pairs(self.arcs, names, "arc")
        if len(set(arcs)) != len(arcs):
            raise GraphError("duplicate arc")
        object.__setattr__(self, "arcs", arcs)
        g = self.to_networkx()
        if not nx.is_directed_acyclic_graph(g):
            cycle = [u for u, _ in nx.find_cycle(g)]
            raise GraphError(f"cycle detected through {cycle}")

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.vertices]

    def parents(self, x: str) -> list[str]:
        ps = {a for a, b in self.arcs if b == x}
        return [n for n in self.names if n in ps]

    def children(self, x: str) -> list[str]:
        cs = {b for a, b in self.arcs if a == x}
        return [n for n in self.names if n in cs]

    def ancestors(self, xs: Iterable[str]) -> set[str]:
        """``xs`` together with all of their ancestors."""
        out = set(xs)
        stack = list(out)
        while stack:
            for p in self.parents(stack.pop()):
                if p not in out:
                    out.add(p)
                    stack.append(p)
        return out

    def to_networkx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.names)
        g.add_edges_from(self.arcs)
        return g


@dataclass(frozen=True)
class BalloonGraph:
    """A partition of the variables into named balloons, each with parents."""

    vertices: tuple[Variable, ...]
    balloons: dict = field(default_factory=dict)
    parents: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "vertices", _as_variables(self.vertices))
        names = [v.name for v in self.vertices]
        owner: dict[str, str] = {}
        balloons = {}
        for b, members in self.balloons.items():
            members = tuple(members)
            if not members:
                raise GraphError(f"balloon {b!r} is empty")
            for x in members:
                if x not in names:
                    raise GraphError(f"balloon {b!r} uses unknown variable {x!r}")
                if x in owner:
                    raise GraphError(f"{x!r} is in balloons {owner[x]!r} and {b!r}")
                owner[x] = b
            balloons[b] = members
        missing = [x for x in names if x not in owner]
        if missing:
            raise GraphError(f"variables {missing} are in no balloon")
        parents = {}
        for b in balloons:
            ps = tuple(self.parents.get(b, ()))
            for p in ps:
                if p not in names:
                    raise GraphError(f"parent {p!r} of {b!r} is unknown")
                if owner[p] == b:
                    raise GraphError(f"parent {p!r} lies inside its own balloon {b!r}")
            parents[b] = ps
        extra = set(self.parents) - set(balloons)
        if extra:
            raise GraphError(f"parents given for unknown balloons {sorted(extra)}")
        object.__setattr__(self, "balloons", balloons)
        object.__setattr__(self, "parents", parents)
        g = nx.DiGraph()
        g.add_nodes_from(balloons)
        g.add_edges_from((owner[p], b) for b, ps in parents.items() for p in ps)
        if not nx.is_directed_acyclic_graph(g):
            cycle = [u for u, _ in nx.find_cycle(g)]
            raise GraphError(f"balloon cycle through {cycle}")

    @classmethod
    def from_dag(cls, dag: Dag) -> BalloonGraph:
        return cls(
            dag.vertices,
            {x: (x,) for x in dag.names},
            {x: tuple(dag.parents(x)) for x in dag.names},
        )


@dataclass(frozen=True)
class RecursiveCausalGraph:
    """Undirected edges among exogenous variables, arcs into endogenous ones."""

    vertices: tuple[Variable, ...]
    exogenous: frozenset[str] = frozenset()
    edges: tuple[tuple[str, str], ...] = ()
    arcs: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", _as_variables(self.vertices))
        object.__setattr__(self, "exogenous", frozenset(self.exogenous))
        names = {v.name for v in self.vertices}
        unknown = self.exogenous - names
        if unknown:
            raise GraphError(f"unknown exogenous variables {sorted(unknown)}")
        edges = _norm_pairs(self.edges, names, "edge")
        for a, b in edges:
            if a not in self.exogenous or b not in self.exogenous:
                raise GraphError(f"undirected edge {a}-{b} must join exogenous variables")
        arcs = _norm_pairs(self.arcs, names, "arc")
        for a, b in arcs:
            if b in self.exogenous:
                raise GraphError(f"arc {a}->{b} points to an exogenous variable")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "arcs", arcs)
        # validates uniqueness and acyclicity of the directed part
        self.directed_part()

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.vertices]

    @property
    def endogenous(self) -> list[str]:
        return [x for x in self.names if x not in self.exogenous]

    def exogenous_graph(self) -> UndirectedGraph:
        return UndirectedGraph(
            [v for v in self.vertices if v.name in self.exogenous], self.edges
        )

    def directed_part(self) -> Dag:
        return Dag(self.vertices, self.arcs)


def _clique_nodes(g: UndirectedGraph) -> list[ValuationNode]:
    """One node per maximal clique.

    A graph with a single maximal clique describes the whole (normalized) joint
    of its vertices, so that node is a conditional with an empty tail.
    """
    if not g.vertices:
        return []
    pos = {x: i for i, x in enumerate(g.names)}
    cliques = [sorted(c, key=pos.__getitem__) for c in nx.find_cliques(g.to_networkx())]
    cliques.sort(key=lambda c: [pos[x] for x in c])
    single = len(cliques) == 1
    return [
        ValuationNode("_".join(c), tuple(c), frozenset(c) if single else frozenset())
        for c in cliques
    ]


def from_ug(g: UndirectedGraph) -> ValuationNetwork:
    return build_network(g.vertices, _clique_nodes(g))


def _dag_nodes(dag: Dag, only: Sequence[str] | None = None) -> list[ValuationNode]:
    names = dag.names if only is None else only
    return [ValuationNode(x, tuple(dag.parents(x)) + (x,), {x}) for x in names]


def from_dag(g: Dag) -> ValuationNetwork:
    return build_network(g.vertices, _dag_nodes(g))


def from_dbg(g: BalloonGraph) -> ValuationNetwork:
    nodes = [
        ValuationNode(b, tuple(g.parents[b]) + tuple(members), frozenset(members))
        for b, members in g.balloons.items()
    ]
    return build_network(g.vertices, nodes)


def from_rcg(g: RecursiveCausalGraph) -> ValuationNetwork:
    nodes = _clique_nodes(g.exogenous_graph())
    nodes += _dag_nodes(g.directed_part(), g.endogenous)
    return build_network(g.vertices, nodes)


def _triple(r, s, v) -> tuple[set[str], set[str], set[str]]:
    r, s, v = set(r), set(s), set(v)
    if r & s or r & v or s & v:
        raise DomainError("r, s and v must be pairwise disjoint")
    return r, s, v


def d_separated(g: Dag, a, b, c) -> bool:
    """True iff no path between ``a`` and ``b`` is active given ``c``.

    Reachability over (vertex, direction) states: a trail may pass a
    non-collider only outside ``c``, and a collider only when the collider is
    in ``c`` or has a descendant in ``c``.
    """
    a, b, c = _triple(a, b, c)
    unknown = (a | b | c) - set(g.names)
    if unknown:
        raise GraphError(f"unknown vertices {sorted(unknown)}")
    opens_collider = g.ancestors(c)
    # direction "up": arrived from a child; "down": arrived from a parent
    start = [(x, "up") for x in a]
    seen = set(start)
    queue = deque(start)
    while queue:
        x, came = queue.popleft()
        if x in b:
            return False
        nxt = []
        if came == "up":
            if x not in c:
                nxt += [(p, "up") for p in g.parents(x)]
                nxt += [(ch, "down") for ch in g.children(x)]
        else:
            if x not in c:
                nxt += [(ch, "down") for ch in g.children(x)]
            if x in opens_collider:
                nxt += [(p, "up") for p in g.parents(x)]
        for state in nxt:
            if state not in seen:
                seen.add(state)
                queue.append(state)
    return True


def ug_separated(g: nx.Graph, a, b, c) -> bool:
    """Plain vertex separation: removing ``c`` disconnects ``a`` from ``b``."""
    a, b, c = _triple(a, b, c)
    seen = set(a)
    queue = deque(a)
    while queue:
        x = queue.popleft()
        if x in b:
            return False
        for y in g.neighbors(x):
            if y not in seen and y not in c:
                seen.add(y)
                queue.append(y)
    return True


def moral_separated(g: Dag, a, b, c) -> bool:
    """Separation in the moral graph of the ancestral set of ``a | b | c``."""
    a, b, c = _triple(a, b, c)
    unknown = (a | b | c) - set(g.names)
    if unknown:
        raise GraphError(f"unknown vertices {sorted(unknown)}")
    keep = g.ancestors(a | b | c)
    moral = nx.Graph()
    moral.add_nodes_from(keep)
    for x in keep:
        ps = g.parents(x)
        moral.add_edges_from((p, x) for p in ps)
        moral.add_edges_from(
            (ps[i], ps[j]) for i in range(len(ps)) for j in range(i + 1, len(ps))
        )
    return ug_separated(moral, a, b, c)
