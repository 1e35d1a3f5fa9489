"""Fusion (variable elimination) on valuation networks.

Fusing a variable ``Y`` combines every node whose domain contains ``Y`` and
marginalizes ``Y`` out of the result; all other nodes are untouched.  The
combination of what remains equals the joint marginalized to the surviving
variables, which is what makes local computation of marginals possible.

Conditionals are tracked through fusion.  When every fused node is a
conditional, their heads are disjoint and their head->tail dependency is
acyclic, the product is again a conditional whose head is the union of the
heads.  Deleting a head variable shrinks the head; once the head is empty the
node is an identity and is dropped.  Deleting a tail variable keeps the head:
the result is still a kernel up to a constant factor, and with tables that
constant survives as a scalar node over no variables.  Anything else produces
a plain node, which can only hide separations, never invent them.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from valnet.algebra import (
    Valuation,
    combine_all,
    identity_valuation,
    marginalize,
    valuations_close,
)
from valnet.errors import DomainError, StructureOnlyError, UnknownVariableError
from valnet.network import (
    ValuationNetwork,
    ValuationNode,
    conditional_dependency_cycle,
    format_set,
)

__all__ = [
    "FusionStep",
    "FusionTrace",
    "fuse_var",
    "eliminate",
    "marginal",
    "pick_order",
    "greedy_eliminate",
]


@dataclass(frozen=True)
class FusionStep:
    variable: str
    combined: tuple[str, ...]
    result: str | None
    domain: tuple[str, ...]
    head: frozenset[str]
    dropped: bool

    @property
    def tail(self) -> frozenset[str]:
        return frozenset(self.domain) - self.head

    def __str__(self) -> str:
        line = (
            f"fuse {self.variable}: combine {format_set(self.combined)} "
            f"-> domain {format_set(self.domain)} head {format_set(self.head)}"
        )
        return line + " dropped" if self.dropped else line


@dataclass
class FusionTrace:
    steps: list[FusionStep] = field(default_factory=list)
    drop_identities: bool = True

    @property
    def order(self) -> list[str]:
        return [s.variable for s in self.steps]

    @property
    def dropped(self) -> list[FusionStep]:
        return [s for s in self.steps if s.dropped]

    def replay(self, network: ValuationNetwork) -> ValuationNetwork:
        out, _ = eliminate(network, self.order, drop_identities=self.drop_identities)
        return out

    def __str__(self) -> str:
        return "".join(f"{s}\n" for s in self.steps)


def _fused_head(nodes: Sequence[ValuationNode]) -> frozenset[str]:
    """Head of the combination of ``nodes``, or empty if it is not a conditional."""
    if not all(n.is_conditional for n in nodes):
        return frozenset()
    head: frozenset[str] = frozenset()
    for n in nodes:
        if head & n.head:
            return frozenset()
        head |= n.head
    if len(nodes) > 1 and conditional_dependency_cycle(nodes):
        return frozenset()
    return head


def _constant(table: Valuation) -> tuple[bool, Valuation | None]:
    """Whether ``table`` is constant, and the constant as an empty-domain
    scalar when it differs from the identity."""
    c = table.flat[0] if table.flat.size else identity_valuation(table.kind, []).flat[0]
    const = Valuation(table.kind, [], [c])
    if not valuations_close(table, combine_all([const, identity_valuation(table.kind, table.domain)])):
        return False, None
    if valuations_close(const, identity_valuation(table.kind, [])):
        return True, None
    return True, const


def _fuse(
    network: ValuationNetwork, var: str, drop_identities: bool
) -> tuple[ValuationNetwork, FusionStep]:
    if var not in network.variables:
        raise UnknownVariableError(f"unknown variable {var!r}")
    order = list(network.variables)
    variables = {k: v for k, v in network.variables.items() if k != var}
    hit = [n for n in network.nodes if var in n.domain]
    if not hit:
        step = FusionStep(var, (), None, (), frozenset(), True)
        return ValuationNetwork(variables, network.nodes, network.kind), step

    union = {x for n in hit for x in n.domain}
    domain = tuple(x for x in order if x in union and x != var)
    head = _fused_head(hit)
    # a tail variable leaves the head alone: summing it out of a kernel gives a
    # kernel scaled by its frame size (probability) or an exact kernel (kappa)
    identity = var in head and head == {var}
    head = head - {var}

    table = None
    scale = None
    if all(n.has_table for n in hit):
        table = marginalize(combine_all(n.valuation for n in hit), domain)
        if identity:
            identity, scale = _constant(table)
            if not identity:
                # zero tail slices (or unnormalized input): not an identity, and
                # keeping it preserves the marginal
                identity = False

    name = hit[0].name if len(hit) == 1 else "(" + "+".join(n.name for n in hit) + ")"
    dropped = identity and drop_identities
    step = FusionStep(var, tuple(n.name for n in hit), name, domain, head, dropped)

    nodes = []
    placed = False
    for n in network.nodes:
        if var not in n.domain:
            nodes.append(n)
        elif not placed:
            placed = True
            if not dropped:
                nodes.append(ValuationNode(name, domain, head, table))
    if dropped and scale is not None:
        nodes.append(ValuationNode(f"scale({name})", (), frozenset(), scale))
    if dropped:
        # Absorbing the identity into survivors is exact only over variables they
        # contain.  Elsewhere keep singleton identities: summing ones over a
        # frame is not 1 in the probability algebra.
        covered = {x for n in nodes for x in n.domain}
        for x in domain:
            if x not in covered:
                val = None
                if table is not None:
                    val = identity_valuation(table.kind, [network.variables[x]])
                nodes.append(ValuationNode(f"iota({x})", (x,), frozenset(), val))
    return ValuationNetwork(variables, tuple(nodes), network.kind), step


def fuse_var(
    network: ValuationNetwork, var: str, *, drop_identities: bool = True
) -> ValuationNetwork:
    return _fuse(network, var, drop_identities)[0]


def eliminate(
    network: ValuationNetwork, order: Iterable[str], *, drop_identities: bool = True
) -> tuple[ValuationNetwork, FusionTrace]:
    """Fuse the variables of ``order`` one after another."""
    order = list(order)
    if len(set(order)) != len(order):
        raise DomainError(f"elimination order repeats a variable: {order}")
    unknown = [x for x in order if x not in network.variables]
    if unknown:
        raise UnknownVariableError(f"unknown variables {unknown}")
    trace = FusionTrace(drop_identities=drop_identities)
    for var in order:
        network, step = _fuse(network, var, drop_identities)
        trace.steps.append(step)
    return network, trace


def greedy_eliminate(
    network: ValuationNetwork, keep: Iterable[str], *, drop_identities: bool = True
) -> tuple[ValuationNetwork, FusionTrace]:
    """Fuse out everything outside ``keep``, always taking a variable of
    minimum degree next (the number of nodes containing it, ties to the
    smaller name).
    """
    keep = set(keep)
    unknown = sorted(keep - set(network.variables))
    if unknown:
        raise UnknownVariableError(f"unknown variables {unknown}")
    todo = {x for x in network.variables if x not in keep}
    trace = FusionTrace(drop_identities=drop_identities)
    while todo:
        deg = dict.fromkeys(todo, 0)
        for n in network.nodes:
            for x in n.domain:
                if x in deg:
                    deg[x] += 1
        var = min(todo, key=lambda x: (deg[x], x))
        todo.discard(var)
        network, step = _fuse(network, var, drop_identities)
        trace.steps.append(step)
    return network, trace


def pick_order(network: ValuationNetwork, keep: Iterable[str]) -> list[str]:
    """Greedy min-degree elimination order for everything outside ``keep``.

    Degrees are recomputed after each simulated (structure-only) fusion.
    """
    return greedy_eliminate(network.strip(), keep)[1].order


def marginal(network: ValuationNetwork, target: Iterable[str]) -> Valuation:
    """Marginal of the joint on ``target``, computed by fusion."""
    target = list(target)
    if network.structure_only or network.kind is None:
        raise StructureOnlyError("marginal needs a table on every node")
    unknown = [x for x in target if x not in network.variables]
    if unknown:
        raise UnknownVariableError(f"unknown variables {unknown}")
    reduced, _ = eliminate(network, pick_order(network, target))
    frame = identity_valuation(network.kind, [network.variables[x] for x in target])
    out = combine_all([frame] + [n.valuation for n in reduced.nodes])
    return marginalize(out, target)
