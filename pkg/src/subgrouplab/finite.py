"""Finite groups given by multiplication tables with string element ids."""

from __future__ import annotations

import itertools
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np


class GroupTableError(ValueError):
    pass


class FiniteGroup:
    """A finite group as a Cayley table over string ids.

    ``table[i][j]`` is the id of ``elements[i] * elements[j]``.
    """

    def __init__(self, elements: Sequence[str], table: Sequence[Sequence[str]], name: str = ""):
        self.elements = tuple(str(e) for e in elements)
        self.name = name or f"F{len(self.elements)}"
        self.index = {e: i for i, e in enumerate(self.elements)}
        if len(self.index) != len(self.elements):
            raise GroupTableError("duplicate element ids")
        n = len(self.elements)
        if len(table) != n or any(len(row) != n for row in table):
            raise GroupTableError("table must be |F| x |F|")
        try:
            mult = np.array([[self.index[str(x)] for x in row] for row in table], dtype=np.int64)
        except KeyError as exc:
            raise GroupTableError(f"unknown id {exc} in table") from None
        self._mul = mult
        self._validate()

    def _validate(self) -> None:
        T = self._mul
        n = len(self.elements)
        ar = np.arange(n)
        for row in T:
            if len(set(row.tolist())) != n:
                raise GroupTableError("table is not a Latin square")
        ids = [i for i in range(n) if (T[i] == ar).all() and (T[:, i] == ar).all()]
        if not ids:
            raise GroupTableError("no identity element")
        self._e = ids[0]
        # (ab)c == a(bc) for all triples
        left = T[T[:, :, None], ar[None, None, :]]
        right = T[ar[:, None, None], T[None, :, :]]
        if not np.array_equal(left, right):
            raise GroupTableError("multiplication is not associative")
        self._inv = np.array([int(np.nonzero(T[i] == self._e)[0][0]) for i in range(n)])

    # basic operations ---------------------------------------------------
    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name}, order={len(self)})"

    @property
    def identity(self) -> str:
        return self.elements[self._e]

    def mul(self, a: str, b: str) -> str:
        return self.elements[self._mul[self.index[a], self.index[b]]]

    def inv(self, a: str) -> str:
        return self.elements[self._inv[self.index[a]]]

    def table(self) -> list[list[str]]:
        return [[self.elements[j] for j in row] for row in self._mul]

    def order_of(self, a: str) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self.mul(x, a)
            k += 1
        return k

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self._mul, self._mul.T))

    def closure(self, gens: Iterable[str]) -> tuple[str, ...]:
        """Subgroup generated by ``gens`` (ids in table order)."""
        seen = {self._e}
        frontier = [self.index[g] for g in gens]
        gi = list(frontier)
        while frontier:
            x = frontier.pop()
            if x in seen:
                continue
            seen.add(x)
            for g in gi:
                y = int(self._mul[x, g])
                if y not in seen:
                    frontier.append(y)
        return tuple(self.elements[i] for i in sorted(seen))

    @cached_property
    def generators(self) -> tuple[str, ...]:
        gens: list[str] = []
        span = {self.identity}
        for e in sorted(self.elements, key=lambda x: -self.order_of(x)):
            if e not in span:
                gens.append(e)
                span = set(self.closure(gens))
            if len(span) == len(self):
                break
        return tuple(gens)

    def automorphisms(self) -> list[dict[str, str]]:
        """All automorphisms, identity first."""
        return self.isomorphisms(self)

    def isomorphisms(self, other: "FiniteGroup") -> list[dict[str, str]]:
        """All isomorphisms onto ``other``, found by extending images of the generators."""
        if len(self) != len(other):
            return []
        gens = self.generators
        if not gens:
            return [{self.identity: other.identity}]
        words = self._words(gens)
        out = []
        candidates = [[y for y in other.elements if other.order_of(y) == self.order_of(g)] for g in gens]
        for images in itertools.product(*candidates):
            phi = {}
            for x, word in words.items():
                y = other.identity
                for k in word:
                    y = other.mul(y, images[k])
                phi[x] = y
            if len(set(phi.values())) != len(self):
                continue
            if self.is_homomorphism(phi, other):
                out.append(phi)
        ident = [f for f in out if all(k == v for k, v in f.items())]
        rest = [f for f in out if not all(k == v for k, v in f.items())]
        return ident + rest

    def _words(self, gens: Sequence[str]) -> dict[str, tuple[int, ...]]:
        words = {self.identity: ()}
        frontier = [self.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for k, g in enumerate(gens):
                    y = self.mul(x, g)
                    if y not in words:
                        words[y] = words[x] + (k,)
                        nxt.append(y)
            frontier = nxt
        return words

    def is_homomorphism(self, phi: Mapping[str, str], target: "FiniteGroup") -> bool:
        return all(phi[self.mul(a, b)] == target.mul(phi[a], phi[b])
                   for a in self.elements for b in self.elements)

    # constructors --------------------------------------------------------
    @classmethod
    def from_function(cls, elements: Sequence[str], mul, name: str = "") -> "FiniteGroup":
        return cls(elements, [[mul(a, b) for b in elements] for a in elements], name=name)

    @classmethod
    def trivial(cls) -> "FiniteGroup":
        return cls(["e"], [["e"]], name="1")

    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroup":
        els = [str(k) for k in range(n)]
        return cls.from_function(els, lambda a, b: str((int(a) + int(b)) % n), name=f"Z{n}")

    @classmethod
    def dihedral(cls, n: int) -> "FiniteGroup":
        """Symmetries of the n-gon, order 2n; ids ``r{k}`` and ``s{k}`` for r^k and r^k s."""
        els = [f"r{k}" for k in range(n)] + [f"s{k}" for k in range(n)]

        def mul(x, y):
            a, b = int(x[1:]), x[0] == "s"
            c, d = int(y[1:]), y[0] == "s"
            k = (a - c if b else a + c) % n
            return ("s" if b != d else "r") + str(k)

        return cls.from_function(els, mul, name=f"D{n}")

    @classmethod
    def symmetric(cls, k: int) -> "FiniteGroup":
        perms = list(itertools.permutations(range(k)))
        ids = ["".join(map(str, p)) for p in perms]
        lookup = {p: s for p, s in zip(perms, ids)}

        def mul(a, b):
            pa, pb = tuple(map(int, a)), tuple(map(int, b))
            return lookup[tuple(pa[pb[i]] for i in range(k))]

        return cls.from_function(ids, mul, name=f"S{k}")

    @classmethod
    def direct_product(cls, G: "FiniteGroup", H: "FiniteGroup") -> "FiniteGroup":
        els = [f"{g},{h}" for g in G.elements for h in H.elements]

        def mul(x, y):
            g1, h1 = x.split(",")
            g2, h2 = y.split(",")
            return f"{G.mul(g1, g2)},{H.mul(h1, h2)}"

        return cls.from_function(els, mul, name=f"{G.name}x{H.name}")

    # JSON -----------------------------------------------------------------
    @classmethod
    def from_json(cls, data: Mapping) -> "FiniteGroup":
        table = data["table"]
        elements = data.get("elements") or list(table[0])
        return cls(elements, table, name=data.get("name", ""))

    def to_json(self) -> dict:
        return {"elements": list(self.elements), "table": self.table()}
