"""Line-oriented model files.

::

    # comment
    kind probability            # or kappa / possibility
    model dag                   # vn | ug | dag | dbg | rcg
    var V 2
    arc V W
    table W 0.3 0.7 0.6 0.4

Structure lines per model: ``val NAME x ...`` and ``cond NAME head h ... tail t ...``
(vn), ``edge A B`` (ug), ``arc A B`` (dag), ``balloon NAME m ... parents p ...``
(dbg), ``exo A`` / ``edge A B`` / ``arc A B`` (rcg).  A ``table`` line gives the
node's values row-major over its domain listed in ``var`` declaration order,
last variable fastest.  ``inf`` is accepted for kappa tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from valnet.algebra import Kind, Valuation, Variable
from valnet.converters import (
    BalloonGraph,
    Dag,
    RecursiveCausalGraph,
    UndirectedGraph,
    from_dag,
    from_dbg,
    from_rcg,
    from_ug,
)
from valnet.errors import ModelSyntaxError, TableLengthError, ValnetError
from valnet.network import ValuationNetwork, ValuationNode, build_network

__all__ = ["ModelFile", "parse_model", "serialize_model", "load_model", "MODEL_KINDS"]

MODEL_KINDS = ("vn", "ug", "dag", "dbg", "rcg")


@dataclass
class ModelFile:
    """A parsed model: graph structure plus optional node tables.

    ``structure`` holds the model-specific object: a list of
    :class:`ValuationNode` (vn) or the matching graph dataclass.
    """

    model: str
    kind: Kind
    variables: list[Variable]
    structure: object
    tables: dict[str, tuple[float, ...]] = field(default_factory=dict)
    source: str = field(default="", compare=False, repr=False)

    def __post_init__(self):
        self.kind = Kind(self.kind)
        if self.model == "vn":
            pos = {v.name: i for i, v in enumerate(self.variables)}
            self.structure = [
                ValuationNode(
                    n.name,
                    sorted(n.domain, key=lambda x: pos.get(x, len(pos))),
                    n.head,
                    n.valuation,
                )
                for n in self.structure
            ]

    def structure_network(self) -> ValuationNetwork:
        if self.model == "vn":
            return build_network(self.variables, self.structure)
        convert = {"ug": from_ug, "dag": from_dag, "dbg": from_dbg, "rcg": from_rcg}
        net = convert[self.model](self.structure)
        return ValuationNetwork(net.variables, net.nodes, self.kind)

    def network(self) -> ValuationNetwork:
        """The valuation network, with tables attached when every node has one."""
        net = self.structure_network()
        names = {n.name for n in net.nodes}
        unknown = sorted(set(self.tables) - names)
        if unknown:
            raise ValnetError(f"table given for unknown nodes {unknown}")
        if not self.tables:
            return ValuationNetwork(net.variables, net.nodes, self.kind)
        missing = sorted(names - set(self.tables))
        if missing:
            raise ValnetError(f"nodes without tables: {missing}")
        nodes = []
        for n in net.nodes:
            values = self.tables[n.name]
            doms = [net.variables[x] for x in n.domain]
            size = math.prod(v.frame_size for v in doms)
            if len(values) != size:
                raise TableLengthError(
                    f"table for node {n.name!r} has {len(values)} entries, expected {size}"
                )
            try:
                val = Valuation(self.kind, doms, values)
            except ValueError as exc:
                raise ValnetError(f"table for node {n.name!r}: {exc}") from None
            nodes.append(ValuationNode(n.name, n.domain, n.head, val))
        return build_network(net.variables.values(), nodes)

    @property
    def dag(self) -> Dag | None:
        """The underlying DAG when the model is one (or an RCG)."""
        if self.model == "dag":
            return self.structure
        if self.model == "rcg":
            return self.structure.directed_part()
        return None


def _fmt_value(x: float, kind: Kind) -> str:
    if math.isinf(x):
        return "inf"
    if kind is Kind.KAPPA:
        return str(int(x))
    return repr(float(x))


def _parse_value(tok: str, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ModelSyntaxError(lineno, f"bad number {tok!r}") from None


def parse_model(text: str) -> ModelFile:
    kind = Kind.PROBABILITY
    model = None
    variables: dict[str, Variable] = {}
    vn_nodes: list[ValuationNode] = []
    edges: list[tuple[str, str]] = []
    arcs: list[tuple[str, str]] = []
    exo: list[str] = []
    balloons: dict[str, tuple[str, ...]] = {}
    parents: dict[str, tuple[str, ...]] = {}
    tables: dict[str, tuple[float, ...]] = {}

    allowed = {
        "vn": {"val", "cond"},
        "ug": {"edge"},
        "dag": {"arc"},
        "dbg": {"balloon"},
        "rcg": {"exo", "edge", "arc"},
    }

    for lineno, raw in enumerate(text.splitlines(), 1):
        toks = raw.split("#", 1)[0].split()
        if not toks:
            continue
        key, args = toks[0], toks[1:]
        if key == "kind":
            if len(args) != 1 or args[0] not in {k.value for k in Kind}:
                raise ModelSyntaxError(lineno, "expected: kind probability|kappa|possibility")
            kind = Kind(args[0])
        elif key == "model":
            if model is not None:
                raise ModelSyntaxError(lineno, "model declared twice")
            if len(args) != 1 or args[0] not in MODEL_KINDS:
                raise ModelSyntaxError(lineno, f"expected: model {'|'.join(MODEL_KINDS)}")
            model = args[0]
        elif key == "var":
            if len(args) != 2:
                raise ModelSyntaxError(lineno, "expected: var NAME SIZE")
            name, size = args
            if name in variables:
                raise ModelSyntaxError(lineno, f"variable {name!r} declared twice")
            if not size.isdigit() or int(size) < 1:
                raise ModelSyntaxError(lineno, f"bad frame size {size!r}")
            variables[name] = Variable(name, int(size))
        elif key == "table":
            if not args:
                raise ModelSyntaxError(lineno, "expected: table NODE x1 x2 ...")
            if args[0] in tables:
                raise ModelSyntaxError(lineno, f"second table for {args[0]!r}")
            tables[args[0]] = tuple(_parse_value(t, lineno) for t in args[1:])
        elif key in {"val", "cond", "edge", "arc", "exo", "balloon"}:
            if model is None:
                raise ModelSyntaxError(lineno, f"{key!r} before the model line")
            if key not in allowed[model]:
                raise ModelSyntaxError(lineno, f"{key!r} is not valid in a {model} model")
            if key == "val":
                if len(args) < 1:
                    raise ModelSyntaxError(lineno, "expected: val NAME vars...")
                if len(set(args[1:])) != len(args) - 1:
                    raise ModelSyntaxError(lineno, f"{args[0]!r} lists a variable twice")
                vn_nodes.append(ValuationNode(args[0], tuple(args[1:])))
            elif key == "cond":
                if len(args) < 2 or args[1] != "head" or "tail" not in args:
                    raise ModelSyntaxError(lineno, "expected: cond NAME head h... tail t...")
                cut = args.index("tail")
                head, tail = args[2:cut], args[cut + 1 :]
                if not head:
                    raise ModelSyntaxError(lineno, "conditional with empty head")
                if len(set(head + tail)) != len(head) + len(tail):
                    raise ModelSyntaxError(lineno, f"{args[0]!r} lists a variable twice")
                vn_nodes.append(ValuationNode(args[0], tuple(head) + tuple(tail), head))
            elif key in {"edge", "arc"}:
                if len(args) != 2:
                    raise ModelSyntaxError(lineno, f"expected: {key} A B")
                (edges if key == "edge" else arcs).append((args[0], args[1]))
            elif key == "exo":
                if not args:
                    raise ModelSyntaxError(lineno, "expected: exo A ...")
                exo.extend(args)
            else:
                if len(args) < 2:
                    raise ModelSyntaxError(lineno, "expected: balloon NAME m... parents p...")
                name = args[0]
                if name in balloons:
                    raise ModelSyntaxError(lineno, f"balloon {name!r} declared twice")
                if "parents" in args:
                    cut = args.index("parents")
                    members, ps = args[1:cut], args[cut + 1 :]
                else:
                    members, ps = args[1:], []
                balloons[name] = tuple(members)
                parents[name] = tuple(ps)
        else:
            raise ModelSyntaxError(lineno, f"unknown keyword {key!r}")

    if model is None:
        raise ModelSyntaxError(0, "missing model line")
    vars_ = list(variables.values())
    if model == "vn":
        structure: object = vn_nodes
    elif model == "ug":
        structure = UndirectedGraph(vars_, edges)
    elif model == "dag":
        structure = Dag(vars_, arcs)
    elif model == "dbg":
        structure = BalloonGraph(vars_, balloons, parents)
    else:
        structure = RecursiveCausalGraph(vars_, exo, edges, arcs)
    mf = ModelFile(model, kind, vars_, structure, tables, text)
    mf.network()  # validates structure and tables
    return mf


def serialize_model(mf: ModelFile) -> str:
    lines = [f"kind {mf.kind.value}", f"model {mf.model}"]
    lines += [f"var {v.name} {v.frame_size}" for v in mf.variables]
    s = mf.structure
    if mf.model == "vn":
        for n in s:
            if n.is_conditional:
                head = [x for x in n.domain if x in n.head]
                tail = [x for x in n.domain if x not in n.head]
                lines.append(" ".join(["cond", n.name, "head", *head, "tail", *tail]))
            else:
                lines.append(" ".join(["val", n.name, *n.domain]))
    elif mf.model == "ug":
        lines += [f"edge {a} {b}" for a, b in s.edges]
    elif mf.model == "dag":
        lines += [f"arc {a} {b}" for a, b in s.arcs]
    elif mf.model == "dbg":
        for b, members in s.balloons.items():
            lines.append(" ".join(["balloon", b, *members, "parents", *s.parents[b]]))
    else:
        exo = [x for x in s.names if x in s.exogenous]
        if exo:
            lines.append(" ".join(["exo", *exo]))
        lines += [f"edge {a} {b}" for a, b in s.edges]
        lines += [f"arc {a} {b}" for a, b in s.arcs]
    for name, values in mf.tables.items():
        lines.append(" ".join(["table", name, *(_fmt_value(x, mf.kind) for x in values)]))
    return "\n".join(lines) + "\n"


def load_model(path) -> ModelFile:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())
