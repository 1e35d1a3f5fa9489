"""Command-line front end.

Exit status: 0 success, 1 a query answered "not-derivable"/"not-independent"
(or ``compare`` found a problem), 2 usage or parse error, 3 model error.
"""

from __future__ import annotations

import argparse
import itertools
import sys

from valnet.algebra import Kind
from valnet.converters import d_separated, moral_separated
from valnet.errors import ModelSyntaxError, ValnetError
from valnet.fusion import eliminate, marginal
from valnet.generate import random_model
from valnet.independence import ci_numeric, ci_structural, disjoint_triples, enumerate_ci
from valnet.modelfile import MODEL_KINDS, ModelFile, load_model, serialize_model
from valnet.network import (
    INDEPENDENT,
    NOT_DERIVABLE,
    CIStatement,
    ValuationNode,
    joint,
    to_dot,
)

CRITERIA = {
    "vn": "vn-separation",
    "dsep": "d-separation",
    "moral": "moralization",
    "numeric": "numeric",
}


class UsageError(Exception):
    pass


def _names(text: str | None) -> list[str]:
    if not text:
        return []
    return [x for x in text.split(",") if x]


def _format_value(x: float, kind: Kind) -> str:
    if kind is Kind.KAPPA:
        return "inf" if x == float("inf") else str(int(x))
    return repr(float(x))


def _criterion(mf: ModelFile, name: str):
    """A callable (r, s, v) -> CIStatement for the chosen criterion."""
    if name == "vn":
        net = mf.network()
        return lambda r, s, v: ci_structural(net, r, s, v)
    if name in ("dsep", "moral"):
        if mf.model != "dag":
            raise UsageError(f"criterion {name} needs a dag model, got {mf.model}")
        test = d_separated if name == "dsep" else moral_separated
        crit = CRITERIA[name]

        def run(r, s, v):
            ok = test(mf.structure, r, s, v)
            return CIStatement(r, s, v, INDEPENDENT if ok else NOT_DERIVABLE, crit)

        return run
    if name == "numeric":
        if not mf.tables:
            raise UsageError("criterion numeric needs tables")
        tau = joint(mf.network())
        return lambda r, s, v: ci_numeric(tau, r, s, v)
    raise UsageError(f"unknown criterion {name!r}")


def cmd_query(args, out) -> int:
    mf = load_model(args.file)
    r, s, v = _names(args.r), _names(args.s), _names(args.v)
    if not r or not s:
        raise UsageError("--r and --s must name at least one variable")
    stmt = _criterion(mf, args.criterion)(r, s, v)
    out.write(f"{stmt.verdict} ({stmt.criterion})\n")
    return 0 if stmt.independent else 1


def cmd_enumerate(args, out) -> int:
    mf = load_model(args.file)
    for stmt in enumerate_ci(mf.network(), args.max_size):
        if args.independent_only and not stmt.independent:
            continue
        out.write(f"{stmt}\n")
    return 0


def cmd_marginal(args, out) -> int:
    mf = load_model(args.file)
    net = mf.network()
    target = _names(args.target)
    val = marginal(net, target)
    out.write(f"marginal {{{','.join(target)}}} kind {val.kind.value}\n")
    frames = [range(v.frame_size) for v in val.domain]
    for config, x in zip(itertools.product(*frames), val.flat):
        cells = " ".join(f"{n}={i}" for n, i in zip(val.names, config))
        out.write(f"{cells} {_format_value(x, val.kind)}".lstrip() + "\n")
    return 0


def cmd_convert(args, out) -> int:
    mf = load_model(args.file)
    net = mf.structure_network()
    nodes = [ValuationNode(n.name, n.domain, n.head) for n in net.nodes]
    vn = ModelFile("vn", mf.kind, list(mf.variables), nodes, dict(mf.tables))
    vn.network()
    out.write(serialize_model(vn))
    return 0


def cmd_compare(args, out) -> int:
    mf = load_model(args.file)
    names = ["vn"]
    if mf.model == "dag":
        names += ["dsep", "moral"]
    if mf.tables and mf.kind is not Kind.POSSIBILITY:
        names.append("numeric")
    crits = {n: _criterion(mf, n) for n in names}
    structural = [n for n in names if n != "numeric"]
    pairs = list(itertools.combinations(names, 2))
    disagree = {p: 0 for p in pairs}
    problems = []
    count = 0
    for r, s, v in disjoint_triples([x.name for x in mf.variables]):
        if len(r) > args.max_size or len(s) > args.max_size:
            continue
        count += 1
        verdicts = {n: crits[n](r, s, v) for n in names}
        for a, b in pairs:
            if verdicts[a].independent != verdicts[b].independent:
                disagree[(a, b)] += 1
        triple = str(verdicts["vn"]).split(" verdict=")[0]
        if "numeric" in verdicts and not verdicts["numeric"].independent:
            for n in structural:
                if verdicts[n].independent:
                    problems.append(f"unsound {n}: {triple} independent but numeric says not")
        if "dsep" in verdicts and verdicts["dsep"].independent != verdicts["moral"].independent:
            problems.append(f"oracle mismatch: {triple} dsep and moral disagree")
    out.write(f"triples {count}\n")
    out.write(f"criteria {' '.join(names)}\n")
    for (a, b), k in disagree.items():
        out.write(f"disagreements {a}/{b} {k}\n")
    for line in problems:
        out.write(line + "\n")
    out.write(f"problems {len(problems)}\n")
    return 1 if problems else 0


def cmd_random(args, out) -> int:
    if args.vars < 1:
        raise UsageError("--vars must be at least 1")
    mf = random_model(
        args.kind,
        args.vars,
        args.seed,
        kind=args.algebra,
        max_frame=args.max_frame,
        tables=not args.no_tables,
    )
    out.write(serialize_model(mf))
    return 0


def cmd_dot(args, out) -> int:
    out.write(to_dot(load_model(args.file).structure_network()))
    return 0


def cmd_fuse(args, out) -> int:
    mf = load_model(args.file)
    net = mf.network()
    _, trace = eliminate(net, _names(args.order))
    out.write(str(trace))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="valnet", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("query", help="answer one conditional-independence query")
    q.add_argument("file")
    q.add_argument("--r", required=True)
    q.add_argument("--s", required=True)
    q.add_argument("--v", default="")
    q.add_argument("--criterion", choices=list(CRITERIA), default="vn")
    q.set_defaults(func=cmd_query)

    e = sub.add_parser("enumerate", help="structural verdicts for all disjoint triples")
    e.add_argument("file")
    e.add_argument("--max-size", type=int, default=2)
    e.add_argument("--independent-only", action="store_true")
    e.set_defaults(func=cmd_enumerate)

    m = sub.add_parser("marginal", help="marginal by fusion")
    m.add_argument("file")
    m.add_argument("--target", default="")
    m.set_defaults(func=cmd_marginal)

    c = sub.add_parser("convert", help="rewrite a graph model as a valuation network")
    c.add_argument("file")
    c.add_argument("--to", choices=["vn"], default="vn")
    c.set_defaults(func=cmd_convert)

    k = sub.add_parser("compare", help="run every applicable criterion on every triple")
    k.add_argument("file")
    k.add_argument("--max-size", type=int, default=2)
    k.set_defaults(func=cmd_compare)

    g = sub.add_parser("random", help="emit a seeded random model")
    g.add_argument("--kind", choices=MODEL_KINDS, default="dag")
    g.add_argument("--vars", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--algebra", choices=[k.value for k in Kind], default="probability")
    g.add_argument("--max-frame", type=int, default=2)
    g.add_argument("--no-tables", action="store_true")
    g.set_defaults(func=cmd_random)

    d = sub.add_parser("dot", help="Graphviz drawing of the valuation network")
    d.add_argument("file")
    d.set_defaults(func=cmd_dot)

    f = sub.add_parser("fuse", help="print the fusion trace for an elimination order")
    f.add_argument("file")
    f.add_argument("--order", required=True)
    f.set_defaults(func=cmd_fuse)
    return p


def run_command(argv, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args, out)
    except (UsageError, ModelSyntaxError, OSError) as exc:
        err.write(f"valnet: {exc}\n")
        return 2
    except ValnetError as exc:
        err.write(f"valnet: {exc}\n")
        return 3


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
