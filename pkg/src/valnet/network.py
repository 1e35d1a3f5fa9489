"""Valuation networks: variables, valuation nodes, edges and arcs."""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from valnet.algebra import Kind, Valuation, combine_all
from valnet.errors import (
    AlgebraMismatchError,
    ConditionalCycleError,
    DomainError,
    HeadConflictError,
    NetworkError,
    StructureOnlyError,
    UnknownVariableError,
)

__all__ = [
    "ValuationNode",
    "ValuationNetwork",
    "CIStatement",
    "INDEPENDENT",
    "NOT_DERIVABLE",
    "NOT_INDEPENDENT",
    "build_network",
    "joint",
    "separated",
    "check_triple",
    "conditional_dependency_cycle",
    "format_set",
    "to_dot",
]

INDEPENDENT = "independent"
NOT_DERIVABLE = "not-derivable"
NOT_INDEPENDENT = "not-independent"
CRITERIA = ("vn-separation", "d-separation", "moralization", "numeric")


@dataclass(frozen=True)
class ValuationNode:
    """A valuation (or its structure-only placeholder) placed in a network.

    ``head`` empty means a plain valuation; otherwise the node is a conditional
    for ``head`` given ``tail = domain - head``.
    """

    name: str
    domain: tuple[str, ...]
    head: frozenset[str] = frozenset()
    valuation: Valuation | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(self.domain))
        object.__setattr__(self, "head", frozenset(self.head))
        if len(set(self.domain)) != len(self.domain):
            raise DomainError(f"node {self.name!r} lists a variable twice")
        if not self.head <= set(self.domain):
            raise DomainError(f"head of {self.name!r} is not inside its domain")
        if self.valuation is not None and self.valuation.names != self.domain:
            raise DomainError(
                f"table of {self.name!r} is over {list(self.valuation.names)}, "
                f"node domain is {list(self.domain)}"
            )

    @property
    def tail(self) -> frozenset[str]:
        return frozenset(self.domain) - self.head

    @property
    def is_conditional(self) -> bool:
        return bool(self.head)

    @property
    def has_table(self) -> bool:
        return self.valuation is not None

    def __eq__(self, other):
        if not isinstance(other, ValuationNode):
            return NotImplemented
        if (self.name, self.domain, self.head) != (other.name, other.domain, other.head):
            return False
        if (self.valuation is None) != (other.valuation is None):
            return False
        return self.valuation is None or self.valuation == other.valuation

    def __hash__(self):
        return hash((self.name, self.domain, self.head))

    def strip(self) -> ValuationNode:
        return ValuationNode(self.name, self.domain, self.head)


@dataclass(frozen=True)
class ValuationNetwork:
    """The four-tuple of variables, nodes, edges and arcs.

    Edges and arcs are derived from node domains and heads, so they can never
    drift out of sync with the nodes.  Node domains are listed in the
    network's variable order.
    """

    variables: dict
    nodes: tuple[ValuationNode, ...]
    kind: Kind | None = None

    @property
    def variable_names(self) -> tuple[str, ...]:
        return tuple(self.variables)

    @property
    def edges(self) -> frozenset[tuple[str, str]]:
        return frozenset((n.name, x) for n in self.nodes for x in n.tail)

    @property
    def arcs(self) -> frozenset[tuple[str, str]]:
        return frozenset((n.name, x) for n in self.nodes for x in n.head)

    @property
    def structure_only(self) -> bool:
        return any(not n.has_table for n in self.nodes)

    def node(self, name: str) -> ValuationNode:
        for n in self.nodes:
            if n.name == name:
                return n
        raise KeyError(name)

    def strip(self) -> ValuationNetwork:
        return ValuationNetwork(
            dict(self.variables), tuple(n.strip() for n in self.nodes), self.kind
        )

    def neighbors(self, var: str) -> list[ValuationNode]:
        return [n for n in self.nodes if var in n.domain]

    def head_owner(self) -> dict[str, str]:
        return {x: n.name for n in self.nodes for x in n.head}


def _order_domain(domain: Iterable[str], order: Sequence[str]) -> tuple[str, ...]:
    pos = {x: i for i, x in enumerate(order)}
    return tuple(sorted(domain, key=pos.__getitem__))


def conditional_dependency_cycle(nodes: Sequence[ValuationNode]) -> list[str] | None:
    """Return node names on a cycle of the head->tail dependency, if any.

    Node ``m`` depends on node ``n`` when a head variable of ``n`` lies in the
    tail of ``m``.
    """
    conds = [n for n in nodes if n.head]
    succ = {
        n.name: [m.name for m in conds if m is not n and n.head & m.tail] for n in conds
    }
    state: dict[str, int] = {}
    path: list[str] = []

    def visit(u: str) -> list[str] | None:
        state[u] = 1
        path.append(u)
        for w in succ[u]:
            if state.get(w) == 1:
                return path[path.index(w) :]
            if w not in state:
                found = visit(w)
                if found:
                    return found
        state[u] = 2
        path.pop()
        return None

    for n in conds:
        if n.name not in state:
            found = visit(n.name)
            if found:
                return found
    return None


def build_network(variables, nodes: Iterable[ValuationNode]) -> ValuationNetwork:
    """Validate and assemble a network.

    ``variables`` is an iterable of :class:`~valnet.algebra.Variable`.  Node
    domains are reordered to follow the declaration order of ``variables``
    (tables are transposed to match).
    """
    varmap = {}
    for v in variables:
        if v.name in varmap:
            raise NetworkError(f"duplicate variable {v.name!r}")
        varmap[v.name] = v
    order = list(varmap)
    built = []
    names = set()
    kinds = set()
    owners: dict[str, str] = {}
    for n in nodes:
        if n.name in names:
            raise NetworkError(f"duplicate node name {n.name!r}")
        names.add(n.name)
        unknown = [x for x in n.domain if x not in varmap]
        if unknown:
            raise UnknownVariableError(f"node {n.name!r} uses undeclared {unknown}")
        for x in n.head:
            if x in owners:
                raise HeadConflictError(
                    f"{x!r} is in the head of both {owners[x]!r} and {n.name!r}"
                )
            owners[x] = n.name
        dom = _order_domain(n.domain, order)
        val = n.valuation
        if val is not None:
            kinds.add(val.kind)
            for v in val.domain:
                if varmap[v.name] != v:
                    raise DomainError(
                        f"table of {n.name!r} disagrees on the frame of {v.name!r}"
                    )
            val = val.reorder(dom)
        built.append(ValuationNode(n.name, dom, n.head, val))
    if len(kinds) > 1:
        raise AlgebraMismatchError(f"mixed algebra kinds {sorted(map(str, kinds))}")
    cycle = conditional_dependency_cycle(built)
    if cycle:
        raise ConditionalCycleError(f"conditional cycle through {cycle}")
    kind = kinds.pop() if kinds else None
    return ValuationNetwork(varmap, tuple(built), kind)


def joint(network: ValuationNetwork) -> Valuation:
    """Combination of every node's table."""
    if network.structure_only:
        raise StructureOnlyError("joint needs a table on every node")
    if not network.nodes:
        raise NetworkError("network has no nodes")
    return combine_all(n.valuation for n in network.nodes)


def check_triple(network: ValuationNetwork, r, s, v) -> tuple[frozenset, frozenset, frozenset]:
    r, s, v = frozenset(r), frozenset(s), frozenset(v)
    if r & s or r & v or s & v:
        raise DomainError("r, s and v must be pairwise disjoint")
    unknown = sorted((r | s | v) - set(network.variables))
    if unknown:
        raise UnknownVariableError(f"unknown variables {unknown}")
    return r, s, v


def separated(network: ValuationNetwork, r, s, v) -> bool:
    """True iff every node-variable path from ``r`` to ``s`` meets ``v``."""
    r, s, v = check_triple(network, r, s, v)
    by_var: dict[str, list[ValuationNode]] = {}
    for n in network.nodes:
        for x in n.domain:
            by_var.setdefault(x, []).append(n)
    seen_vars = set(r)
    seen_nodes: set[str] = set()
    queue = deque(r)
    while queue:
        x = queue.popleft()
        if x in s:
            return False
        for n in by_var.get(x, ()):
            if n.name in seen_nodes:
                continue
            seen_nodes.add(n.name)
            for y in n.domain:
                if y not in seen_vars and y not in v:
                    seen_vars.add(y)
                    queue.append(y)
    return True


def format_set(xs: Iterable[str]) -> str:
    return "{" + ",".join(sorted(xs)) + "}"


@dataclass(frozen=True)
class CIStatement:
    r: frozenset[str]
    s: frozenset[str]
    v: frozenset[str]
    verdict: str
    criterion: str

    def __post_init__(self):
        for f in ("r", "s", "v"):
            object.__setattr__(self, f, frozenset(getattr(self, f)))
        if not self.r or not self.s:
            raise DomainError("r and s must be non-empty")
        if self.r & self.s or self.r & self.v or self.s & self.v:
            raise DomainError("r, s and v must be pairwise disjoint")
        if self.criterion not in CRITERIA:
            raise ValueError(f"unknown criterion {self.criterion!r}")

    @property
    def independent(self) -> bool:
        return self.verdict == INDEPENDENT

    def __str__(self) -> str:
        return (
            f"r={format_set(self.r)} s={format_set(self.s)} v={format_set(self.v)} "
            f"verdict={self.verdict} criterion={self.criterion}"
        )


def _dot_id(prefix: str, name: str) -> str:
    return '"' + f"{prefix}:{name}".replace('"', r"\"") + '"'


def to_dot(network: ValuationNetwork) -> str:
    """Bipartite drawing: variables as circles, nodes as diamonds, arcs into heads."""
    lines = ["digraph vn {"]
    for x in network.variables:
        lines.append(f'  {_dot_id("var", x)} [shape=circle, label="{x}"];')
    for n in network.nodes:
        lines.append(f'  {_dot_id("node", n.name)} [shape=diamond, label="{n.name}"];')
    for n in network.nodes:
        for x in n.domain:
            src, dst = _dot_id("node", n.name), _dot_id("var", x)
            if x in n.head:
                lines.append(f"  {src} -> {dst};")
            else:
                lines.append(f"  {src} -> {dst} [dir=none];")
    lines.append("}")
    return "\n".join(lines) + "\n"

