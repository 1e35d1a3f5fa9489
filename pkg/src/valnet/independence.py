"""Conditional independence: structural, numeric, and axiom checks."""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from valnet.algebra import (
    Kind,
    Valuation,
    combine,
    marginalize,
    max_deviation,
    normalize,
    remove,
    valuations_close,
)
from valnet.errors import DomainError, UnsupportedOperationError
from valnet.fusion import greedy_eliminate
from valnet.network import (
    INDEPENDENT,
    NOT_DERIVABLE,
    NOT_INDEPENDENT,
    CIStatement,
    ValuationNetwork,
    check_triple,
    separated,
)

__all__ = [
    "Conditional",
    "conditional_of",
    "ci_structural",
    "ci_numeric",
    "verify_theorem21",
    "TheoremReport",
    "check_semigraphoid",
    "SemigraphoidReport",
    "Violation",
    "disjoint_triples",
    "enumerate_ci",
]


def _ordered(sigma: Valuation, names: Iterable[str]) -> list[str]:
    names = set(names)
    return [x for x in sigma.names if x in names]


def _require_removal(kind: Kind) -> None:
    if kind is Kind.POSSIBILITY:
        raise UnsupportedOperationError("conditionals need removal, undefined for possibility")


@dataclass(frozen=True)
class Conditional:
    valuation: Valuation
    head: frozenset[str]
    tail: frozenset[str]
    source: str = ""

    def invariant_deviation(self) -> float:
        """Worst departure from a normalized kernel over tail configurations
        whose tail marginal is not null (sum 1 for probability, min 0 for kappa).
        """
        val = self.valuation
        tail = _ordered(val, self.tail)
        head = _ordered(val, self.head)
        arr = val.reorder(tail + head).values.reshape(
            int(np.prod([val.variable(x).frame_size for x in tail], dtype=int)), -1
        )
        if val.kind is Kind.PROBABILITY:
            mass = arr.sum(axis=1)
            live = mass > 0
            return float(np.abs(mass[live] - 1).max(initial=0.0))
        low = arr.min(axis=1)
        live = np.isfinite(low)
        return float(np.abs(low[live]).max(initial=0.0))

    def is_valid(self, rtol: float = 1e-9) -> bool:
        dev = self.invariant_deviation()
        return dev == 0 if self.valuation.kind is Kind.KAPPA else dev <= rtol


def conditional_of(sigma: Valuation, b: Iterable[str], a: Iterable[str], source: str = "") -> Conditional:
    """The conditional for ``b`` given ``a``: sigma on a|b with sigma on a removed."""
    _require_removal(sigma.kind)
    b, a = frozenset(b), frozenset(a)
    if a & b:
        raise DomainError("head and tail of a conditional must be disjoint")
    if not (a | b) <= set(sigma.names):
        raise DomainError(f"{sorted(a | b)} not inside {list(sigma.names)}")
    val = remove(marginalize(sigma, _ordered(sigma, a | b)), marginalize(sigma, _ordered(sigma, a)))
    return Conditional(val, b, a, source)


def ci_structural(network: ValuationNetwork, r, s, v) -> CIStatement:
    """Fuse out everything outside r|s|v, then test whether v separates r from s."""
    r, s, v = check_triple(network, r, s, v)
    if not r or not s:
        raise DomainError("r and s must be non-empty")
    keep = r | s | v
    reduced, _ = greedy_eliminate(network.strip(), keep)
    verdict = INDEPENDENT if separated(reduced, r, s, v) else NOT_DERIVABLE
    return CIStatement(r, s, v, verdict, "vn-separation")


def ci_numeric(tau: Valuation, r, s, v, rtol: float = 1e-9) -> CIStatement:
    """Pointwise factorization test on a probability or kappa joint.

    Probability: p(rsv) p(v) = p(rv) p(sv).  Kappa: k(rsv) + k(v) = k(rv) + k(sv),
    where configurations with k(v) = inf hold vacuously (both sides are inf).
    """
    _require_removal(tau.kind)
    r, s, v = frozenset(r), frozenset(s), frozenset(v)
    if r & s or r & v or s & v:
        raise DomainError("r, s and v must be pairwise disjoint")
    if not (r | s | v) <= set(tau.names):
        raise DomainError(f"{sorted(r | s | v)} not inside {list(tau.names)}")
    m = marginalize(tau, _ordered(tau, r | s | v))
    lhs = combine(m, marginalize(m, _ordered(m, v)))
    rhs = combine(marginalize(m, _ordered(m, r | v)), marginalize(m, _ordered(m, s | v)))
    ok = valuations_close(lhs, rhs, rtol)
    return CIStatement(r, s, v, INDEPENDENT if ok else NOT_INDEPENDENT, "numeric")


@dataclass
class TheoremReport:
    """Per-statement verdicts: ``results[label] = (passed, max deviation)``."""

    results: dict[str, tuple[bool, float]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(ok for ok, _ in self.results.values())

    def __str__(self) -> str:
        return "\n".join(
            f"({k}) {'pass' if ok else 'FAIL'} deviation={dev:.3g}"
            for k, (ok, dev) in self.results.items()
        )


def _subsets(xs: Sequence[str]) -> Iterable[frozenset[str]]:
    for k in range(len(xs) + 1):
        for combo in itertools.combinations(xs, k):
            yield frozenset(combo)


def verify_theorem21(sigma: Valuation, a, b, c, rtol: float = 1e-9) -> TheoremReport:
    """Numerically check the seven standard properties of conditionals.

    ``sigma`` is normalized first, since the properties are stated for
    normal valuations.
    """
    _require_removal(sigma.kind)
    a, b, c = frozenset(a), frozenset(b), frozenset(c)
    if a & b or a & c or b & c:
        raise DomainError("a, b and c must be pairwise disjoint")
    if not (a | b | c) <= set(sigma.names):
        raise DomainError(f"{sorted(a | b | c)} not inside {list(sigma.names)}")
    sigma = normalize(sigma)

    def cond(head, tail) -> Valuation:
        return conditional_of(sigma, head, tail).valuation

    def marg(val, names) -> Valuation:
        return marginalize(val, _ordered(val, names))

    report = TheoremReport()

    def check(label, lhs, rhs):
        ok = valuations_close(lhs, rhs, rtol)
        dev = max_deviation(lhs, rhs)
        prev = report.results.get(label)
        if prev is not None:
            ok, dev = ok and prev[0], max(dev, prev[1])
        report.results[label] = (ok, dev)

    s_a = cond(a, ())
    b_a = cond(b, a)
    c_ab = cond(c, a | b)
    check("i", s_a, marg(sigma, a))
    check("ii", combine(s_a, b_a), cond(a | b, ()))
    check("iii", combine(b_a, c_ab), cond(b | c, a))
    for bp in _subsets(sorted(b)):
        check("iv", marg(b_a, a | bp), cond(bp, a))
    check("v", marg(combine(b_a, c_ab), a | c), cond(c, a))
    check("vi", combine(marg(b_a, a), s_a), s_a)
    dev = Conditional(b_a, b, a).invariant_deviation()
    ok = dev == 0 if sigma.kind is Kind.KAPPA else dev <= rtol
    report.results["vii"] = (ok, dev)
    return report


@dataclass(frozen=True)
class Violation:
    axiom: str
    premises: tuple[tuple[frozenset, frozenset, frozenset], ...]
    conclusion: tuple[frozenset, frozenset, frozenset]

    def __str__(self) -> str:
        def fmt(t):
            return "({}, {}, {})".format(*("{" + ",".join(sorted(x)) + "}" for x in t))

        prem = " & ".join(fmt(p) for p in self.premises)
        return f"{self.axiom}: {prem} but not {fmt(self.conclusion)}"


@dataclass
class SemigraphoidReport:
    violations: list[Violation] = field(default_factory=list)
    checked: dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations


def disjoint_triples(universe: Sequence[str]) -> Iterable[tuple[frozenset, frozenset, frozenset]]:
    """Every (r, s, v) of pairwise disjoint subsets with r and s non-empty."""
    universe = sorted(universe)
    for labels in itertools.product(range(4), repeat=len(universe)):
        parts = [frozenset(x for x, l in zip(universe, labels) if l == k) for k in (1, 2, 3)]
        if parts[0] and parts[1]:
            yield parts[0], parts[1], parts[2]


def _split(xs: frozenset) -> Iterable[tuple[frozenset, frozenset]]:
    """Ordered splits of ``xs`` into two non-empty parts."""
    items = sorted(xs)
    for sub in _subsets(items):
        if sub and sub != xs:
            yield sub, xs - sub


def check_semigraphoid(
    ci: Callable, universe: Iterable[str], *, intersection: bool = False
) -> SemigraphoidReport:
    """Exhaustively test symmetry, decomposition, weak union and contraction
    (plus intersection when asked) for the relation answered by ``ci``.

    ``ci(r, s, v)`` may return a bool or a :class:`CIStatement`.
    """
    cache: dict = {}

    def holds(r, s, v) -> bool:
        key = (r, s, v)
        if key not in cache:
            out = ci(r, s, v)
            cache[key] = out.independent if isinstance(out, CIStatement) else bool(out)
        return cache[key]

    report = SemigraphoidReport()
    counts = dict.fromkeys(
        ["symmetry", "decomposition", "weak union", "contraction"]
        + (["intersection"] if intersection else []),
        0,
    )

    def fail(axiom, premises, conclusion):
        report.violations.append(Violation(axiom, tuple(premises), conclusion))

    for r, big, v in disjoint_triples(list(universe)):
        counts["symmetry"] += 1
        if holds(r, big, v) and not holds(big, r, v):
            fail("symmetry", [(r, big, v)], (big, r, v))
        for s, w in _split(big):
            if holds(r, big, v):
                counts["decomposition"] += 1
                if not holds(r, s, v):
                    fail("decomposition", [(r, big, v)], (r, s, v))
                counts["weak union"] += 1
                if not holds(r, s, v | w):
                    fail("weak union", [(r, big, v)], (r, s, v | w))
            if holds(r, s, v) and holds(r, w, v | s):
                counts["contraction"] += 1
                if not holds(r, big, v):
                    fail("contraction", [(r, s, v), (r, w, v | s)], (r, big, v))
            if intersection and holds(r, s, v | w) and holds(r, w, v | s):
                counts["intersection"] += 1
                if not holds(r, big, v):
                    fail("intersection", [(r, s, v | w), (r, w, v | s)], (r, big, v))
    report.checked = counts
    return report


def _components(network: ValuationNetwork, blocked: frozenset) -> dict[str, int]:
    """Component label of each unblocked variable, linking variables that share a node."""
    parent: dict[str, str] = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for x in network.variables:
        if x not in blocked:
            parent[x] = x
    for n in network.nodes:
        live = [x for x in n.domain if x not in blocked]
        for y in live[1:]:
            parent[find(y)] = find(live[0])
    roots: dict[str, int] = {}
    return {x: roots.setdefault(find(x), len(roots)) for x in parent}


def enumerate_ci(network: ValuationNetwork, max_set_size: int) -> list[CIStatement]:
    """Structural verdicts for every disjoint triple with |r|, |s| <= max_set_size.

    Same verdicts as calling :func:`ci_structural` triple by triple; the
    reduction is shared by all triples with the same r|s|v, and the separation
    test by all splits of that set with the same v.
    """
    bare = network.strip()
    names = sorted(network.variables)
    out = []
    for keep in _subsets(names):
        if len(keep) < 2:
            continue
        reduced = greedy_eliminate(bare, keep)[0]
        for v in _subsets(sorted(keep)):
            rest = sorted(keep - v)
            if len(rest) < 2:
                continue
            comp = _components(reduced, v)
            for r in _subsets(rest):
                s = frozenset(rest) - r
                if not r or not s or len(r) > max_set_size or len(s) > max_set_size:
                    continue
                sep = not {comp[x] for x in r} & {comp[x] for x in s}
                out.append(CIStatement(r, s, v, INDEPENDENT if sep else NOT_DERIVABLE, "vn-separation"))
    out.sort(key=str)
    return out
