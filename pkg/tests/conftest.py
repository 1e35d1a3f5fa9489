"""Shared fixtures and brute-force oracles.

The oracles below walk configurations one at a time with plain Python
dictionaries, so they share no code path with the numpy broadcasting in
``valnet.algebra``.
"""

from __future__ import annotations

import itertools
import math
from importlib import resources

import pytest

from valnet.algebra import Kind, Valuation, Variable
from valnet.modelfile import load_model


def var(name: str, size: int = 2) -> Variable:
    return Variable(name, size)


def val(kind, names_sizes, values) -> Valuation:
    dom = [Variable(n, s) for n, s in names_sizes]
    return Valuation(kind, dom, values)


def table_dict(a: Valuation) -> dict:
    """{ {name: state} as a frozenset of items : value }"""
    frames = [range(v.frame_size) for v in a.domain]
    return {
        frozenset(zip(a.names, cfg)): float(x)
        for cfg, x in zip(itertools.product(*frames), a.flat)
    }


def brute_combine(a: Valuation, b: Valuation) -> dict:
    ta, tb = table_dict(a), table_dict(b)
    dom = list(a.domain) + [v for v in b.domain if v not in a.domain]
    out = {}
    for cfg in itertools.product(*[range(v.frame_size) for v in dom]):
        full = dict(zip([v.name for v in dom], cfg))
        ka = frozenset((n, full[n]) for n in a.names)
        kb = frozenset((n, full[n]) for n in b.names)
        x, y = ta[ka], tb[kb]
        if a.kind is Kind.PROBABILITY:
            out[frozenset(full.items())] = x * y
        elif a.kind is Kind.KAPPA:
            out[frozenset(full.items())] = x + y
        else:
            out[frozenset(full.items())] = min(x, y)
    return out


def brute_marginal(a: Valuation, target) -> dict:
    target = set(target)
    out: dict = {}
    for key, x in table_dict(a).items():
        k = frozenset((n, s) for n, s in key if n in target)
        if k not in out:
            out[k] = x
        elif a.kind is Kind.PROBABILITY:
            out[k] += x
        elif a.kind is Kind.KAPPA:
            out[k] = min(out[k], x)
        else:
            out[k] = max(out[k], x)
    return out


def brute_joint(tables) -> dict:
    """Pointwise combination of many valuations over their joint frame."""
    out = None
    for t in tables:
        if out is None:
            out = t
            continue
        out = Valuation(out.kind, *_from_dict(out.kind, brute_combine(out, t), out, t))
    return table_dict(out)


def _from_dict(kind, d, a, b):
    dom = list(a.domain) + [v for v in b.domain if v not in a.domain]
    values = []
    for cfg in itertools.product(*[range(v.frame_size) for v in dom]):
        values.append(d[frozenset(zip([v.name for v in dom], cfg))])
    return dom, values


def dicts_close(x: dict, y: dict, rel: float = 1e-9) -> bool:
    if x.keys() != y.keys():
        return False
    for k in x:
        a, b = x[k], y[k]
        if math.isinf(a) or math.isinf(b):
            if a != b:
                return False
        elif not math.isclose(a, b, rel_tol=rel, abs_tol=1e-15):
            return False
    return True


def model_path(name: str):
    return resources.files("valnet") / "models" / f"{name}.vn"


@pytest.fixture
def load():
    return lambda name: load_model(model_path(name))
