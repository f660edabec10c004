"""Free products (optionally amalgamated) and their words.

A word is a tuple of :class:`Letter`.  Factors ``0..len(factors)-1`` are
finite groups; indices past that are infinite cyclic free generators whose
letters carry a nonzero integer exponent in ``elem``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property, reduce as _fold
from typing import NamedTuple, Sequence

import numpy as np

from .errors import MalformedInputError, PreconditionError
from .groups import FiniteGroup, ValidationReport, validate_group


class Letter(NamedTuple):
    factor: int
    elem: int


Word = tuple  # tuple[Letter, ...]


def word(*pairs) -> tuple:
    """``word((0, 1), (1, 2))`` -> tuple of Letters."""
    return tuple(Letter(int(f), int(e)) for f, e in pairs)


@dataclass(frozen=True)
class Amalgam:
    """Per-factor subgroups B_i and their identifications with one abstract B.

    ``maps[i][j]`` is the abstract-B index of ``subgroups[i][j]``.  Abstract
    index 0 is the identity.
    """

    subgroups: tuple[tuple[int, ...], ...]
    maps: tuple[tuple[int, ...], ...]

    @property
    def order(self) -> int:
        return len(self.subgroups[0])


class FactorSystem:
    def __init__(
        self,
        factors: Sequence[FiniteGroup],
        amalgam: Amalgam | None = None,
        free_rank: int = 0,
    ):
        self.factors = tuple(factors)
        if not self.factors and free_rank == 0:
            raise MalformedInputError("factor system needs at least one factor")
        if amalgam is not None and free_rank:
            raise MalformedInputError("amalgamation with free generators is not supported")
        if amalgam is not None:
            if len(amalgam.subgroups) != len(self.factors) or len(amalgam.maps) != len(self.factors):
                raise MalformedInputError("amalgam needs one subgroup and one map per factor")
            amalgam = Amalgam(
                tuple(tuple(int(x) for x in s) for s in amalgam.subgroups),
                tuple(tuple(int(x) for x in m) for m in amalgam.maps),
            )
            if amalgam.order <= 1:
                amalgam = None
        self.amalgam = amalgam
        self.free_rank = int(free_rank)
        self._to_b = []
        self._from_b = []
        for i, g in enumerate(self.factors):
            to_b = np.full(g.order, -1, dtype=np.int64)
            if amalgam is None:
                to_b[0] = 0
                from_b = np.zeros(1, dtype=np.int64)
            else:
                sub, mp = amalgam.subgroups[i], amalgam.maps[i]
                if len(sub) != len(mp) or len(sub) != amalgam.order:
                    raise MalformedInputError(f"amalgam subgroup {i} has the wrong size")
                if any(not 0 <= x < g.order for x in sub) or any(not 0 <= b < amalgam.order for b in mp):
                    raise MalformedInputError(f"amalgam data for factor {i} out of range")
                to_b[list(sub)] = mp
                from_b = np.full(amalgam.order, -1, dtype=np.int64)
                from_b[list(mp)] = sub
            self._to_b.append(to_b)
            self._from_b.append(from_b)

    def __repr__(self):
        names = " * ".join(g.name or f"A{i}" for i, g in enumerate(self.factors))
        if self.free_rank:
            names += " * F" + str(self.free_rank)
        return f"<FactorSystem {names}{' (amalgamated)' if self.amalgam else ''}>"

    @property
    def nfinite(self) -> int:
        return len(self.factors)

    @property
    def nfactors(self) -> int:
        return len(self.factors) + self.free_rank

    @property
    def amalgam_order(self) -> int:
        return 1 if self.amalgam is None else self.amalgam.order

    def is_free(self, i: int) -> bool:
        return i >= len(self.factors)

    def in_amalgam(self, i: int, a: int) -> bool:
        return not self.is_free(i) and self._to_b[i][a] >= 0

    def to_amalgam(self, i: int, a: int) -> int:
        return int(self._to_b[i][a])

    def from_amalgam(self, i: int, b: int) -> int:
        return int(self._from_b[i][b])

    def convert(self, src: int, a: int, dst: int) -> int:
        """Carry an amalgam element of factor ``src`` into factor ``dst``."""
        return self.from_amalgam(dst, self.to_amalgam(src, a))

    def amalgam_mul(self, b1: int, b2: int) -> int:
        g = self.factors[0]
        return self.to_amalgam(0, g.mul(self.from_amalgam(0, b1), self.from_amalgam(0, b2)))

    @cached_property
    def _coset_data(self):
        # left-coset transversal: rep(y) = min(y*B_i), carry(y) = rep^-1 * y in B
        out = []
        for i, g in enumerate(self.factors):
            sub = np.array(self.amalgam.subgroups[i] if self.amalgam else [0], dtype=np.int64)
            coset = g.table[:, sub]
            rep = coset.min(axis=1)
            carry = g.table[g.inverses[rep], np.arange(g.order)]
            out.append((rep, carry))
        return out

    def coset_split(self, i: int, y: int) -> tuple[int, int]:
        """y = r * c with r the canonical coset representative and c in B_i."""
        rep, carry = self._coset_data[i]
        return int(rep[y]), int(carry[y])

    # -- validation and serialization --------------------------------------

    def validate(self) -> ValidationReport:
        for i, g in enumerate(self.factors):
            rep = validate_group(g)
            if not rep:
                return ValidationReport.failed(
                    f"factor-{rep.rule}", f"factor {i}: {rep.message}", factor=i, **rep.witness
                )
        if self.amalgam is None:
            return ValidationReport.passed()
        order = self.amalgam.order
        for i, g in enumerate(self.factors):
            sub = self.amalgam.subgroups[i]
            mp = self.amalgam.maps[i]
            if len(set(sub)) != order or len(set(mp)) != order:
                return ValidationReport.failed("amalgam-bijection", f"map {i} is not a bijection", factor=i)
            if 0 not in sub or self.to_amalgam(i, 0) != 0:
                return ValidationReport.failed("amalgam-identity", f"B_{i} identity not mapped to 0", factor=i)
            s = set(sub)
            for x in sub:
                if g.inv(x) not in s:
                    return ValidationReport.failed("amalgam-closure", "B_i not closed under inverses", factor=i, elem=x)
                for y in sub:
                    xy = g.mul(x, y)
                    if xy not in s:
                        return ValidationReport.failed(
                            "amalgam-closure", "B_i not closed under products", factor=i, pair=(x, y)
                        )
                    # phi_i must agree with the product transported from factor 0
                    if self.to_amalgam(i, xy) != self.amalgam_mul(self.to_amalgam(i, x), self.to_amalgam(i, y)):
                        return ValidationReport.failed(
                            "amalgam-isomorphism",
                            "identification does not preserve products",
                            factor=i,
                            pair=(x, y),
                        )
        return ValidationReport.passed()

    def to_dict(self) -> dict:
        d = {
            "factors": [g.to_dict() for g in self.factors],
            "amalgam": None
            if self.amalgam is None
            else {
                "subgroups": [list(s) for s in self.amalgam.subgroups],
                "maps": [list(m) for m in self.amalgam.maps],
            },
        }
        if self.free_rank:
            d["free_rank"] = self.free_rank
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FactorSystem":
        try:
            factors = [FiniteGroup.from_dict(g) for g in d["factors"]]
        except (KeyError, TypeError) as exc:
            raise MalformedInputError(f"bad factor system record: {exc}") from exc
        am = d.get("amalgam")
        amalgam = None if am is None else Amalgam(tuple(map(tuple, am["subgroups"])), tuple(map(tuple, am["maps"])))
        return cls(factors, amalgam, int(d.get("free_rank", 0)))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FactorSystem":
        return cls.from_dict(json.loads(text))

    # -- letter arithmetic -------------------------------------------------

    def check_letter(self, letter) -> Letter:
        f, e = int(letter[0]), int(letter[1])
        if not 0 <= f < self.nfactors:
            raise MalformedInputError(f"letter factor {f} out of range")
        if not self.is_free(f) and not 0 <= e < self.factors[f].order:
            raise MalformedInputError(f"letter element {e} out of range for factor {f}")
        return Letter(f, e)

    def letter_mul(self, f: int, x: int, y: int) -> int:
        if self.is_free(f):
            return x + y
        return self.factors[f].mul(x, y)

    def letter_inv(self, f: int, x: int) -> int:
        if self.is_free(f):
            return -x
        return self.factors[f].inv(x)


def word_to_json(w) -> str:
    return json.dumps([{"factor": int(f), "elem": int(e)} for f, e in w])


def word_from_json(text: str | list):
    data = json.loads(text) if isinstance(text, str) else text
    try:
        return tuple(Letter(int(d["factor"]), int(d["elem"])) for d in data)
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInputError(f"bad word record: {exc}") from exc


def inverse(fs: FactorSystem, w) -> tuple:
    return tuple(Letter(f, fs.letter_inv(f, e)) for f, e in reversed(w))


def power(fs: FactorSystem, w, k: int) -> tuple:
    if k < 0:
        w, k = inverse(fs, w), -k
    return tuple(w) * k


def _push(fs: FactorSystem, stack: list, f: int, a: int) -> None:
    if a == 0:
        return
    if not stack:
        stack.append(Letter(f, a))
        return
    g, c = stack[-1]
    if g == f:
        stack.pop()
        _push(fs, stack, f, fs.letter_mul(f, c, a))
    elif fs.in_amalgam(f, a):
        # an amalgam letter is absorbed into its left neighbour
        stack.pop()
        _push(fs, stack, g, fs.letter_mul(g, c, fs.convert(f, a, g)))
    elif len(stack) == 1 and fs.in_amalgam(g, c):
        stack.pop()
        _push(fs, stack, f, fs.letter_mul(f, fs.convert(g, c, f), a))
    else:
        stack.append(Letter(f, a))


def reduce(fs: FactorSystem, w) -> tuple:
    """Canonical reduced form of ``w``.

    Adjacent letters never share a factor and no letter lies in the
    amalgamated subgroup unless the whole word is that single letter, which
    is then expressed in factor 0.  With an amalgam, every letter but the
    last is the least element of its coset ``x*B``, so equal group elements
    reduce to identical letter tuples.
    """
    stack: list[Letter] = []
    for letter in w:
        f, a = fs.check_letter(letter)
        _push(fs, stack, f, a)
    if fs.amalgam is None or not stack:
        return tuple(stack)
    if len(stack) == 1:
        f, a = stack[0]
        if fs.in_amalgam(f, a):
            return (Letter(0, fs.convert(f, a, 0)),)
        return tuple(stack)
    out = []
    carry = 0
    last = len(stack) - 1
    for idx, (f, x) in enumerate(stack):
        y = fs.factors[f].mul(fs.from_amalgam(f, carry), x)
        if idx == last:
            out.append(Letter(f, y))
        else:
            r, c = fs.coset_split(f, y)
            out.append(Letter(f, r))
            carry = fs.to_amalgam(f, c)
    return tuple(out)


def multiply(fs: FactorSystem, *ws) -> tuple:
    return reduce(fs, tuple(letter for w in ws for letter in w))


def syllable_count(w) -> int:
    return len(w)


def is_cyclically_reduced(w) -> bool:
    return len(w) <= 1 or w[0].factor != w[-1].factor


def cyclic_reduce(fs: FactorSystem, w) -> tuple[tuple, tuple]:
    """Return ``(core, conj)`` with ``w == conj * core * conj^-1``."""
    cur = reduce(fs, w)
    conj: tuple = ()
    while len(cur) >= 2 and cur[0].factor == cur[-1].factor:
        x = cur[0]
        cur = reduce(fs, inverse(fs, (x,)) + cur + (x,))
        conj = reduce(fs, conj + (x,))
    return cur, conj


def direct_image(fs: FactorSystem, w) -> tuple[int, ...]:
    """Per-factor ordered product of ``w``'s letters (the map onto the direct product)."""
    if fs.amalgam is not None:
        raise PreconditionError("the direct-product map is defined for plain free products only")
    if fs.free_rank:
        raise PreconditionError("the direct-product map needs finite factors")
    coords = [0] * fs.nfinite
    for letter in w:
        f, a = fs.check_letter(letter)
        coords[f] = fs.factors[f].mul(coords[f], a)
    return tuple(coords)


def in_cartesian_subgroup(fs: FactorSystem, w) -> bool:
    return all(c == 0 for c in direct_image(fs, w))


def cartesian_power(fs: FactorSystem, w) -> int:
    """Least n >= 1 with ``w**n`` in the kernel of the direct-product map."""
    core, _ = cyclic_reduce(fs, w)
    if syllable_count(core) < 2:
        raise PreconditionError("word must have infinite order (cyclically reduced length >= 2)")
    img = direct_image(fs, w)
    orders = [int(fs.factors[i].element_orders[x]) for i, x in enumerate(img)]
    return _fold(lambda a, b: a * b // math.gcd(a, b), orders, 1)
