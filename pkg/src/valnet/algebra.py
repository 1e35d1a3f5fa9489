"""Valuation algebra over finite frames.

Three instantiations share one dense-table representation:

* ``probability`` -- combination is pointwise product, marginalization sums.
* ``kappa`` (Spohn ranking functions) -- combination adds, marginalization
  takes the minimum; ``inf`` is the top element.
* ``possibility`` -- combination is pointwise min, marginalization takes the max.

Tables are row-major over the domain with the last variable varying fastest,
which is exactly numpy's C order for an array shaped by the frame sizes.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from math import prod

import numpy as np

from valnet.errors import (
    AlgebraMismatchError,
    DomainError,
    InconsistentRemovalError,
    NormalizationError,
    UnsupportedOperationError,
)

__all__ = [
    "Kind",
    "Variable",
    "Valuation",
    "combine",
    "combine_all",
    "marginalize",
    "remove",
    "identity_valuation",
    "zero_valuation",
    "normalize",
    "valuations_close",
    "max_deviation",
    "RTOL",
]

RTOL = 1e-9


class Kind(str, enum.Enum):
    PROBABILITY = "probability"
    KAPPA = "kappa"
    POSSIBILITY = "possibility"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, order=True)
class Variable:
    name: str
    frame_size: int = 2

    def __post_init__(self):
        if not self.name:
            raise ValueError("variable name must be non-empty")
        if int(self.frame_size) != self.frame_size or self.frame_size < 1:
            raise ValueError(f"frame size of {self.name!r} must be an integer >= 1")


VarLike = Variable | str


def _names(vars_: Iterable[VarLike]) -> list[str]:
    return [v.name if isinstance(v, Variable) else v for v in vars_]


class Valuation:
    """An immutable dense table over the product frame of ``domain``."""

    __slots__ = ("kind", "domain", "_values")

    def __init__(self, kind: Kind | str, domain: Sequence[Variable], values):
        kind = Kind(kind)
        domain = tuple(domain)
        names = [v.name for v in domain]
        if len(set(names)) != len(names):
            raise DomainError(f"duplicate variable in domain {names}")
        shape = tuple(v.frame_size for v in domain)
        arr = np.array(values, dtype=float)
        if arr.size != prod(shape):
            raise DomainError(
                f"table has {arr.size} entries, domain {names} needs {prod(shape)}"
            )
        arr = arr.reshape(shape)
        if np.isnan(arr).any():
            raise ValueError("NaN in valuation table")
        if (arr < 0).any():
            raise ValueError("valuation entries must be nonnegative")
        if kind is Kind.KAPPA:
            finite = arr[np.isfinite(arr)]
            if (finite != np.round(finite)).any():
                raise ValueError("kappa entries must be integers or inf")
        elif np.isinf(arr).any():
            raise ValueError(f"{kind} entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "_values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Valuation is immutable")

    @property
    def values(self) -> np.ndarray:
        """Read-only array shaped by the frame sizes."""
        return self._values

    @property
    def flat(self) -> np.ndarray:
        return self._values.reshape(-1)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.domain)

    @property
    def is_zero(self) -> bool:
        if self.kind is Kind.KAPPA:
            return bool(np.isinf(self._values).all())
        return bool((self._values == 0).all())

    def variable(self, name: str) -> Variable:
        for v in self.domain:
            if v.name == name:
                return v
        raise DomainError(f"{name!r} not in domain {list(self.names)}")

    def reorder(self, order: Iterable[VarLike]) -> Valuation:
        """Same valuation with its domain listed in ``order``."""
        order = _names(order)
        if sorted(order) != sorted(self.names):
            raise DomainError(f"{order} is not a permutation of {list(self.names)}")
        axes = [self.names.index(n) for n in order]
        return Valuation(
            self.kind,
            [self.domain[i] for i in axes],
            np.transpose(self._values, axes),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Valuation):
            return NotImplemented
        if self.kind != other.kind or set(self.domain) != set(other.domain):
            return False
        return bool(np.array_equal(self._values, other.reorder(self.names)._values))

    __hash__ = None

    def __repr__(self) -> str:
        dom = ",".join(f"{v.name}({v.frame_size})" for v in self.domain)
        return f"Valuation({self.kind.value}, {{{dom}}}, {self.flat.tolist()})"


def _check_kinds(a: Valuation, b: Valuation) -> None:
    if a.kind != b.kind:
        raise AlgebraMismatchError(f"cannot mix {a.kind} and {b.kind} valuations")


def _union(a: Sequence[Variable], b: Sequence[Variable]) -> tuple[Variable, ...]:
    out = list(a)
    names = {v.name for v in a}
    for v in b:
        if v.name in names:
            if v not in out:
                raise DomainError(f"variable {v.name!r} has conflicting frame sizes")
            continue
        out.append(v)
    return tuple(out)


def _expand(a: Valuation, target: Sequence[Variable]) -> np.ndarray:
    """View of ``a`` broadcastable against an array over ``target``."""
    tnames = [v.name for v in target]
    present = [n for n in tnames if n in a.names]
    arr = np.transpose(a.values, [a.names.index(n) for n in present])
    shape = [v.frame_size if v.name in a.names else 1 for v in target]
    return arr.reshape(shape)


def combine(a: Valuation, b: Valuation) -> Valuation:
    _check_kinds(a, b)
    dom = _union(a.domain, b.domain)
    x, y = _expand(a, dom), _expand(b, dom)
    if a.kind is Kind.PROBABILITY:
        out = x * y
    elif a.kind is Kind.KAPPA:
        out = x + y
    else:
        out = np.minimum(x, y)
    out = np.broadcast_to(out, tuple(v.frame_size for v in dom))
    return Valuation(a.kind, dom, out)


def combine_all(vals: Iterable[Valuation]) -> Valuation:
    vals = list(vals)
    if not vals:
        raise ValueError("nothing to combine")
    out = vals[0]
    for v in vals[1:]:
        out = combine(out, v)
    return out


_REDUCERS = {
    Kind.PROBABILITY: np.sum,
    Kind.KAPPA: np.min,
    Kind.POSSIBILITY: np.max,
}


def marginalize(a: Valuation, target: Iterable[VarLike]) -> Valuation:
    """Delete every variable of ``a`` outside ``target``, one at a time.

    The result's domain is listed in the order given by ``target``.
    """
    target = _names(target)
    missing = [n for n in target if n not in a.names]
    if missing:
        raise DomainError(f"{missing} not in domain {list(a.names)}")
    if len(set(target)) != len(target):
        raise DomainError(f"duplicate variable in target {target}")
    reduce = _REDUCERS[a.kind]
    out = a
    for name in a.names:
        if name in target:
            continue
        axis = out.names.index(name)
        out = Valuation(
            a.kind,
            out.domain[:axis] + out.domain[axis + 1 :],
            reduce(out.values, axis=axis),
        )
    return out.reorder(target)


def remove(a: Valuation, b: Valuation) -> Valuation:
    """Undo a combination with ``b``; ``b``'s domain must lie inside ``a``'s."""
    _check_kinds(a, b)
    if a.kind is Kind.POSSIBILITY:
        raise UnsupportedOperationError("removal is undefined for possibility valuations")
    if not set(b.names) <= set(a.names):
        raise DomainError(f"cannot remove {list(b.names)} from {list(a.names)}")
    x = a.values
    y = np.broadcast_to(_expand(b, a.domain), x.shape)
    if a.kind is Kind.PROBABILITY:
        bad = (y == 0) & (x != 0)
        if bad.any():
            raise InconsistentRemovalError("division of a positive entry by zero")
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(y == 0, 0.0, x / np.where(y == 0, 1.0, y))
    else:
        bad = np.isinf(y) & np.isfinite(x)
        if bad.any():
            raise InconsistentRemovalError("subtracting inf from a finite rank")
        with np.errstate(invalid="ignore"):
            out = np.where(np.isinf(y) & np.isinf(x), 0.0, x - y)
    return Valuation(a.kind, a.domain, out)


def identity_valuation(kind: Kind | str, domain: Sequence[Variable]) -> Valuation:
    kind = Kind(kind)
    shape = tuple(v.frame_size for v in domain)
    fill = 0.0 if kind is Kind.KAPPA else 1.0
    return Valuation(kind, domain, np.full(shape, fill))


def zero_valuation(kind: Kind | str, domain: Sequence[Variable]) -> Valuation:
    kind = Kind(kind)
    shape = tuple(v.frame_size for v in domain)
    fill = np.inf if kind is Kind.KAPPA else 0.0
    return Valuation(kind, domain, np.full(shape, fill))


def normalize(a: Valuation) -> Valuation:
    if a.is_zero:
        raise NormalizationError("cannot normalize a zero valuation")
    x = a.values
    if a.kind is Kind.PROBABILITY:
        out = x / x.sum()
    elif a.kind is Kind.KAPPA:
        out = x - x.min()
    else:
        out = x / x.max()
    return Valuation(a.kind, a.domain, out)


def max_deviation(a: Valuation, b: Valuation) -> float:
    """Largest absolute entrywise difference; matching infinities count as 0."""
    _check_kinds(a, b)
    if set(a.names) != set(b.names):
        raise DomainError(f"domains differ: {list(a.names)} vs {list(b.names)}")
    x, y = a.values, b.reorder(a.names).values
    both_inf = np.isinf(x) & np.isinf(y)
    with np.errstate(invalid="ignore"):
        diff = np.where(both_inf, 0.0, np.abs(x - y))
    return float(diff.max()) if diff.size else 0.0


def valuations_close(a: Valuation, b: Valuation, rtol: float = RTOL) -> bool:
    """Kappa tables compare exactly; real-valued tables to relative ``rtol``."""
    _check_kinds(a, b)
    if set(a.names) != set(b.names):
        return False
    x, y = a.values, b.reorder(a.names).values
    if a.kind is Kind.KAPPA:
        return bool(np.array_equal(x, y))
    scale = max(float(np.abs(x).max(initial=0.0)), float(np.abs(y).max(initial=0.0)))
    return bool(np.allclose(x, y, rtol=rtol, atol=rtol * 1e-3 * scale))
