"""Finite groups stored as full multiplication tables.

Element 0 is always the identity.  Tables are ``int64`` numpy arrays with
``table[i, j]`` the index of ``i*j``.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Sequence

import numpy as np

from .errors import CapExceededError, MalformedInputError, PreconditionError

DEFAULT_ORDER_CAP = 10_000
_EXHAUSTIVE_ASSOC_LIMIT = 64
_ASSOC_SAMPLES = 4096


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a validator: ``ok`` plus the first violated rule and a witness."""

    ok: bool
    rule: str | None = None
    message: str = ""
    witness: dict = field(default_factory=dict)

    def __bool__(self):
        return self.ok

    @classmethod
    def passed(cls):
        return cls(True)

    @classmethod
    def failed(cls, rule, message, **witness):
        return cls(False, rule, message, {k: _plain(v) for k, v in witness.items()})

    def to_dict(self):
        return {"ok": self.ok, "rule": self.rule, "message": self.message, "witness": self.witness}


def _plain(v):
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (tuple, list)):
        return [_plain(x) for x in v]
    return v


class FiniteGroup:
    """A finite group given by its Cayley table.

    The constructor only checks shapes and index ranges; use
    :func:`validate_group` for the group axioms.
    """

    def __init__(self, table, names: Sequence[str] | None = None, name: str = ""):
        tab = np.asarray(table)
        if tab.ndim != 2 or tab.shape[0] != tab.shape[1] or tab.shape[0] == 0:
            raise MalformedInputError(f"table must be a non-empty square array, got shape {tab.shape}")
        if not np.issubdtype(tab.dtype, np.integer):
            raise MalformedInputError("table entries must be integers")
        n = tab.shape[0]
        if tab.min() < 0 or tab.max() >= n:
            raise MalformedInputError("table entry out of range")
        self.table = np.array(tab, dtype=np.int64)
        self.table.setflags(write=False)
        self.order = n
        self.identity = 0
        if names is None:
            names = ["e"] + [f"g{i}" for i in range(1, n)]
        if len(names) != n:
            raise MalformedInputError("names length does not match order")
        self.names = tuple(str(s) for s in names)
        self.name = name

    def __repr__(self):
        label = self.name or "group"
        return f"<FiniteGroup {label} order={self.order}>"

    def __eq__(self, other):
        return (
            isinstance(other, FiniteGroup)
            and self.order == other.order
            and np.array_equal(self.table, other.table)
        )

    def __hash__(self):
        return hash((self.order, self.table.tobytes()))

    def mul(self, x: int, y: int) -> int:
        return int(self.table[x, y])

    @cached_property
    def inverses(self) -> np.ndarray:
        inv = np.argmax(self.table == 0, axis=1)
        inv.setflags(write=False)
        return inv

    def inv(self, x: int) -> int:
        return int(self.inverses[x])

    def power(self, x: int, k: int) -> int:
        if k < 0:
            x, k = self.inv(x), -k
        out = 0
        for _ in range(k):
            out = int(self.table[out, x])
        return out

    @cached_property
    def element_orders(self) -> np.ndarray:
        orders = np.array([element_order(self, x) for x in range(self.order)], dtype=np.int64)
        orders.setflags(write=False)
        return orders

    # -- constructors ------------------------------------------------------

    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroup":
        idx = np.arange(n)
        return cls((idx[:, None] + idx[None, :]) % n, [str(i) for i in range(n)], f"Z/{n}")

    @classmethod
    def from_permutations(cls, gens, name: str = "") -> "FiniteGroup":
        """Close a set of permutations (lists/tuples) under composition.

        Products compose left to right: ``(g*h)(i) = h(g(i))``.
        """
        gens = [tuple(int(x) for x in g) for g in gens]
        if not gens:
            raise MalformedInputError("need at least one generator")
        degree = len(gens[0])
        ident = tuple(range(degree))
        elems = [ident]
        index = {ident: 0}
        frontier = [ident]
        while frontier:
            nxt = []
            for h in frontier:
                for g in gens:
                    prod = tuple(g[h[i]] for i in range(degree))
                    if prod not in index:
                        index[prod] = len(elems)
                        elems.append(prod)
                        nxt.append(prod)
            frontier = nxt
        arr = np.array(elems, dtype=np.int64)
        n = len(elems)
        table = np.empty((n, n), dtype=np.int64)
        for i, h in enumerate(arr):
            for j, g in enumerate(arr):
                table[i, j] = index[tuple(g[h])]
        names = ["e"] + ["(" + " ".join(map(str, e)) + ")" for e in elems[1:]]
        grp = cls(table, names, name)
        grp.permutations = arr
        return grp

    @classmethod
    def dihedral(cls, n: int) -> "FiniteGroup":
        """Symmetries of the n-gon, order 2n."""
        rot = [(i + 1) % n for i in range(n)]
        ref = [(-i) % n for i in range(n)]
        return cls.from_permutations([rot, ref], f"D{2 * n}")

    @classmethod
    def symmetric(cls, n: int) -> "FiniteGroup":
        if n < 2:
            return cls(np.zeros((1, 1), dtype=np.int64), ["e"], f"S{n}")
        cyc = [(i + 1) % n for i in range(n)]
        swap = [1, 0] + list(range(2, n))
        return cls.from_permutations([cyc, swap], f"S{n}")

    @classmethod
    def quaternion(cls) -> "FiniteGroup":
        # left-regular permutation action of Q8 on itself
        i = [2, 3, 1, 0, 6, 7, 5, 4]
        j = [4, 5, 7, 6, 1, 0, 2, 3]
        return cls.from_permutations([i, j], "Q8")

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "order": self.order,
            "table": self.table.tolist(),
            "names": list(self.names),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FiniteGroup":
        try:
            table = d["table"]
            order = int(d["order"])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInputError(f"bad group record: {exc}") from exc
        if len(table) != order or any(len(row) != order for row in table):
            raise MalformedInputError("table dimensions do not match order")
        return cls(np.array(table, dtype=np.int64), d.get("names"), d.get("name", ""))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FiniteGroup":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class GroupHom:
    source: FiniteGroup
    target: FiniteGroup
    image: np.ndarray

    def __call__(self, x: int) -> int:
        return int(self.image[x])

    def is_homomorphism(self) -> bool:
        img = np.asarray(self.image)
        if img[0] != 0:
            return False
        lhs = img[self.source.table]
        rhs = self.target.table[img[:, None], img[None, :]]
        return bool(np.array_equal(lhs, rhs))

    def is_injective(self) -> bool:
        return len(set(np.asarray(self.image).tolist())) == self.source.order


def validate_group(g: FiniteGroup) -> ValidationReport:
    t = g.table
    n = g.order
    if t.shape != (n, n):
        return ValidationReport.failed("shape", "table dimensions do not match order")
    ident = np.arange(n)
    if not (np.array_equal(t[0], ident) and np.array_equal(t[:, 0], ident)):
        bad = int(np.nonzero((t[0] != ident) | (t[:, 0] != ident))[0][0])
        return ValidationReport.failed("identity", "element 0 is not a two-sided identity", element=bad)
    srt = np.sort(t, axis=1)
    rows = np.nonzero((srt != ident).any(axis=1))[0]
    if len(rows):
        return ValidationReport.failed("latin", "row is not a permutation", row=rows[0])
    srt = np.sort(t, axis=0)
    cols = np.nonzero((srt != ident[:, None]).any(axis=0))[0]
    if len(cols):
        return ValidationReport.failed("latin", "column is not a permutation", column=cols[0])
    # Latin square + identity gives one-sided inverses; check two-sidedness
    right = np.argmax(t == 0, axis=1)
    if not np.all(t[right, ident] == 0):
        x = int(np.nonzero(t[right, ident] != 0)[0][0])
        return ValidationReport.failed("inverse", "right inverse is not a left inverse", element=x)
    if n <= _EXHAUSTIVE_ASSOC_LIMIT:
        a, b, c = np.meshgrid(ident, ident, ident, indexing="ij")
        a, b, c = a.ravel(), b.ravel(), c.ravel()
    else:
        rng = np.random.default_rng(0)
        a, b, c = rng.integers(0, n, size=(3, _ASSOC_SAMPLES))
    lhs = t[t[a, b], c]
    rhs = t[a, t[b, c]]
    bad = np.nonzero(lhs != rhs)[0]
    if len(bad):
        i = bad[0]
        return ValidationReport.failed(
            "associativity", "(xy)z != x(yz)", triple=(a[i], b[i], c[i])
        )
    return ValidationReport.passed()


def element_order(g: FiniteGroup, x: int) -> int:
    if not 0 <= x < g.order:
        raise PreconditionError(f"element {x} out of range for order {g.order}")
    k, y = 1, x
    while y != 0:
        y = int(g.table[y, x])
        k += 1
        if k > g.order:
            raise MalformedInputError("element has no finite order; table is not a group")
    return k


def direct_product(
    gs: Sequence[FiniteGroup], cap: int = DEFAULT_ORDER_CAP
) -> tuple[FiniteGroup, list[GroupHom]]:
    """Direct product with its coordinate embeddings.

    Elements are encoded mixed-radix with the first factor most significant,
    so ``(0, ..., 0)`` is element 0.
    """
    gs = list(gs)
    if not gs:
        raise PreconditionError("direct product needs at least one factor")
    orders = [g.order for g in gs]
    total = math.prod(orders)
    if total > cap:
        raise CapExceededError(f"direct product order {total} exceeds cap {cap}")
    coords = np.array(list(itertools.product(*[range(o) for o in orders])), dtype=np.int64)
    coords = coords.reshape(total, len(gs))
    strides = np.array([math.prod(orders[i + 1:]) for i in range(len(gs))], dtype=np.int64)
    table = np.zeros((total, total), dtype=np.int64)
    for i, g in enumerate(gs):
        table += g.table[coords[:, i][:, None], coords[:, i][None, :]] * strides[i]
    names = [
        "(" + ",".join(g.names[c] for g, c in zip(gs, row)) + ")" for row in coords.tolist()
    ]
    label = " x ".join(g.name or f"G{i}" for i, g in enumerate(gs))
    prod = FiniteGroup(table, names, label)
    prod.coordinates = coords
    embeds = [
        GroupHom(g, prod, np.arange(g.order, dtype=np.int64) * strides[i]) for i, g in enumerate(gs)
    ]
    return prod, embeds


def _checked_lcm(a: int, b: int) -> int:
    return a // math.gcd(a, b) * b


@dataclass(frozen=True)
class QuotientLcm:
    """Result of :func:`quotient_lcm`: the lcm plus the data it was built from."""

    lcm: int
    gcd: int
    quotients: tuple[int, ...]


def quotient_lcm(n: int, ls: Sequence[int]) -> QuotientLcm:
    """lcm over i of ``n*d / gcd(n*d, ls[i])`` where ``d = gcd(ls)``.

    The result always equals ``n``; the driver uses the quotients to predict
    cycle lengths after layering ``n*d`` copies.
    """
    ls = [int(x) for x in ls]
    if not ls:
        raise PreconditionError("lcm over an empty sequence is undefined")
    if n < 1 or any(x < 1 for x in ls):
        raise PreconditionError("arguments must be positive integers")
    d = reduce(math.gcd, ls)
    nd = n * d
    quotients = tuple(nd // math.gcd(nd, x) for x in ls)
    return QuotientLcm(reduce(_checked_lcm, quotients), d, quotients)
