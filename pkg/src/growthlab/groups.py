"""Concrete group families with exact arithmetic on canonical coordinates.

Every element is a tuple of Python ints, so elements hash and compare
directly.  Families that admit an array formula also expose
``batch_multiply`` for the vectorised product-set engine in ``balls``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import intlinalg

Element = tuple


class UnsupportedOperation(Exception):
    """Raised when an operation is not decidable or not implemented for a family."""


class Group:
    family = "abstract"
    batch_multiply = None  # optional numpy law: (N,k) x (N,k) -> (N,k)

    def identity(self) -> Element:
        raise NotImplementedError

    def multiply(self, a: Element, b: Element) -> Element:
        raise NotImplementedError

    def inverse(self, a: Element) -> Element:
        raise NotImplementedError

    def canonical(self, a: Sequence[int]) -> Element:
        return tuple(int(x) for x in a)

    def is_finite(self) -> bool:
        return False

    def order(self) -> int | None:
        return None

    def elements(self) -> list[Element]:
        raise UnsupportedOperation(f"{self.family} group is not finite")

    def standard_generators(self) -> list[Element]:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    # derived operations

    def power(self, a: Element, k: int) -> Element:
        if k < 0:
            a, k = self.inverse(a), -k
        result = self.identity()
        base = a
        while k:
            if k & 1:
                result = self.multiply(result, base)
            k >>= 1
            if k:
                base = self.multiply(base, base)
        return result

    def commutator(self, a: Element, b: Element) -> Element:
        """[a, b] = a^-1 b^-1 a b."""
        ia, ib = self.inverse(a), self.inverse(b)
        return self.multiply(self.multiply(ia, ib), self.multiply(a, b))

    def product(self, items: Iterable[Element]) -> Element:
        out = self.identity()
        for g in items:
            out = self.multiply(out, g)
        return out

    def is_central(self, a: Element) -> bool:
        return all(self.multiply(a, g) == self.multiply(g, a) for g in self.standard_generators())

    def fingerprint(self) -> str:
        import json
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    def __eq__(self, other):
        return isinstance(other, Group) and self.fingerprint() == other.fingerprint()

    def __hash__(self):
        return hash(self.fingerprint())


class AbelianQuotient(Group):
    """Z^rank modulo the lattice spanned by ``relations``, written additively."""

    family = "abelian"

    def __init__(self, rank: int, relations: Sequence[Sequence[int]] = ()):
        self.rank = rank
        self.relations = [tuple(int(x) for x in r) for r in relations]
        self.basis = intlinalg.hnf(self.relations, rank)
        self._pivots = intlinalg.pivot_columns(self.basis)

    def identity(self):
        return (0,) * self.rank

    def canonical(self, a):
        return intlinalg.reduce_vector(tuple(int(x) for x in a), self.basis)

    def multiply(self, a, b):
        return self.canonical([x + y for x, y in zip(a, b)])

    def inverse(self, a):
        return self.canonical([-x for x in a])

    def power(self, a, k):
        return self.canonical([k * x for x in a])

    def is_central(self, a):
        return True

    def is_finite(self):
        return len(self.basis) == self.rank

    def order(self):
        if not self.is_finite():
            return None
        out = 1
        for row, col in zip(self.basis, self._pivots):
            out *= row[col]
        return out

    def elements(self):
        if not self.is_finite():
            raise UnsupportedOperation("abelian quotient is infinite")
        ranges = [range(row[col]) for row, col in zip(self.basis, self._pivots)]
        import itertools
        return [tuple(v) for v in itertools.product(*ranges)]

    def standard_generators(self):
        return [self.canonical([int(i == j) for j in range(self.rank)]) for i in range(self.rank)]

    def batch_multiply(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = a + b
        for row, col in zip(self.basis, self._pivots):
            q = np.floor_divide(out[:, col], row[col])
            out -= q[:, None] * np.asarray(row, dtype=np.int64)[None, :]
        return out

    def to_json(self):
        return {"family": self.family, "rank": self.rank, "relations": [list(r) for r in self.relations]}


HEISENBERG_QUOTIENTS = ("none", "central", "normal", "full")


class HeisenbergQuotient(Group):
    """Integer Heisenberg group in normal form x^a y^b z^c with z = [x, y].

    ``quotient`` selects the kernel: ``none``; ``central`` = <z^m>;
    ``normal`` = normal closure of x^m, which is {x^(am) z^(cm)};
    ``full`` = <x^m, y^m, z^m>, giving the finite group over Z/m.
    """

    family = "heisenberg"

    def __init__(self, quotient: str = "none", modulus: int = 0):
        if quotient not in HEISENBERG_QUOTIENTS:
            raise ValueError(f"unknown Heisenberg quotient {quotient!r}")
        if quotient != "none" and modulus < 1:
            raise ValueError("quotient needs a positive modulus")
        self.quotient = quotient
        self.modulus = modulus if quotient != "none" else 0

    def identity(self):
        return (0, 0, 0)

    def canonical(self, a):
        x, y, z = (int(t) for t in a)
        m = self.modulus
        if self.quotient == "central":
            z %= m
        elif self.quotient == "normal":
            x %= m
            z %= m
        elif self.quotient == "full":
            x, y, z = x % m, y % m, z % m
        return (x, y, z)

    def multiply(self, a, b):
        return self.canonical((a[0] + b[0], a[1] + b[1], a[2] + b[2] - b[0] * a[1]))

    def inverse(self, a):
        return self.canonical((-a[0], -a[1], -a[2] - a[0] * a[1]))

    def is_finite(self):
        return self.quotient == "full"

    def order(self):
        return self.modulus ** 3 if self.quotient == "full" else None

    def elements(self):
        if self.quotient != "full":
            raise UnsupportedOperation("Heisenberg quotient is infinite")
        m = self.modulus
        return [(a, b, c) for a in range(m) for b in range(m) for c in range(m)]

    def standard_generators(self):
        return [self.canonical((1, 0, 0)), self.canonical((0, 1, 0))]

    def batch_multiply(self, a, b):
        out = a + b
        out[:, 2] -= b[:, 0] * a[:, 1]
        m = self.modulus
        if self.quotient == "central":
            out[:, 2] %= m
        elif self.quotient == "normal":
            out[:, 0] %= m
            out[:, 2] %= m
        elif self.quotient == "full":
            out %= m
        return out

    def to_json(self):
        return {"family": self.family, "quotient": self.quotient, "modulus": self.modulus}


class FreeNilpotentGroup(Group):
    """Free nilpotent group of rank r and class c in Mal'cev coordinates."""

    family = "free_nilpotent"

    def __init__(self, rank: int, nil_class: int):
        from .free_nilpotent import NilpotentArithmetic, hall_basis
        self.rank = rank
        self.nil_class = nil_class
        self.basis = hall_basis(rank, nil_class)
        self.arith = NilpotentArithmetic(self.basis)
        if nil_class <= 2:
            # collecting x^b past x^a only creates [x_i, x_j]^(a_i b_j) for i > j
            self._pairs = [(e.index, e.left, e.right) for e in self.basis.entries if e.left is not None]
            self.batch_multiply = self._batch_multiply_class2

    def _batch_multiply_class2(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = a + b
        for k, i, j in self._pairs:
            out[:, k] += a[:, i] * b[:, j]
        return out

    def identity(self):
        return (0,) * len(self.basis)

    def multiply(self, a, b):
        return self.arith.multiply(a, b)

    def inverse(self, a):
        return self.arith.inverse(a)

    def power(self, a, k):
        return self.arith.power(a, k)

    def standard_generators(self):
        d = len(self.basis)
        return [tuple(int(i == j) for j in range(d)) for i in range(self.rank)]

    def basis_element(self, i: int) -> Element:
        return tuple(int(i == j) for j in range(len(self.basis)))

    def to_json(self):
        return {"family": self.family, "rank": self.rank, "class": self.nil_class}


def _matmul(a, b):
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0])))
                 for i in range(len(a)))


def _matvec(a, v):
    return tuple(sum(a[i][k] * v[k] for k in range(len(v))) for i in range(len(a)))


def _identity_matrix(n):
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


class SemidirectZdByFinite(Group):
    """Z^d ⋊ K for a finite group K of integer matrices.

    Elements are ``(v_1, ..., v_d, k)`` where ``k`` indexes the closure of the
    given matrices (index 0 is the identity matrix).  The law is
    (v, A)(w, B) = (v + A w, A B).
    """

    family = "semidirect"

    def __init__(self, dimension: int, matrices: Sequence[Sequence[Sequence[int]]], max_order: int = 10_000):
        self.dimension = dimension
        self.generators_matrices = [tuple(tuple(int(x) for x in row) for row in m) for m in matrices]
        ident = _identity_matrix(dimension)
        closure = [ident]
        seen = {ident}
        i = 0
        while i < len(closure):
            for g in self.generators_matrices:
                h = _matmul(closure[i], g)
                if h not in seen:
                    seen.add(h)
                    closure.append(h)
                    if len(closure) > max_order:
                        raise ValueError("matrix group is not finite (closure too large)")
            i += 1
        self.matrices = closure
        self._index = {m: i for i, m in enumerate(closure)}
        self._inv = [self._index[next(n for n in closure if _matmul(m, n) == ident)] for m in closure]

    def identity(self):
        return (0,) * self.dimension + (0,)

    def multiply(self, a, b):
        d = self.dimension
        A = self.matrices[a[d]]
        w = _matvec(A, b[:d])
        k = self._index[_matmul(A, self.matrices[b[d]])]
        return tuple(x + y for x, y in zip(a[:d], w)) + (k,)

    def inverse(self, a):
        d = self.dimension
        k = self._inv[a[d]]
        v = _matvec(self.matrices[k], a[:d])
        return tuple(-x for x in v) + (k,)

    def standard_generators(self):
        d = self.dimension
        gens = [tuple(int(i == j) for j in range(d)) + (0,) for i in range(d)]
        gens += [(0,) * d + (self._index[m],) for m in self.generators_matrices]
        return gens

    def to_json(self):
        return {"family": self.family, "dimension": self.dimension,
                "matrices": [[list(r) for r in m] for m in self.generators_matrices]}


class IntegerMatrixGroup(Group):
    """Subgroup of GL_n(Z) generated by explicit matrices; elements are flattened matrices."""

    family = "matrix"

    def __init__(self, size: int, generators: Sequence[Sequence[Sequence[int]]]):
        self.size = size
        self.generators = [tuple(tuple(int(x) for x in row) for row in g) for g in generators]
        for g in self.generators:
            if abs(intlinalg.det(g)) != 1:
                raise ValueError("generator is not invertible over Z")

    def _mat(self, a):
        n = self.size
        return tuple(tuple(a[i * n:(i + 1) * n]) for i in range(n))

    @staticmethod
    def _flat(m):
        return tuple(x for row in m for x in row)

    def identity(self):
        return self._flat(_identity_matrix(self.size))

    def multiply(self, a, b):
        return self._flat(_matmul(self._mat(a), self._mat(b)))

    def inverse(self, a):
        m = self._mat(a)
        n = self.size
        cols = [intlinalg.solve(m, [int(i == j) for i in range(n)]) for j in range(n)]
        inv = tuple(tuple(int(cols[j][i]) for j in range(n)) for i in range(n))
        return self._flat(inv)

    def standard_generators(self):
        return [self._flat(g) for g in self.generators]

    def to_json(self):
        return {"family": self.family, "size": self.size,
                "generators": [[list(r) for r in g] for g in self.generators]}


class FiniteTable(Group):
    """Finite group given by a full multiplication table on 0..N-1; elements are 1-tuples."""

    family = "finite_table"

    def __init__(self, table: Sequence[Sequence[int]]):
        self.table = [list(map(int, row)) for row in table]
        n = len(self.table)
        if any(len(row) != n for row in self.table):
            raise ValueError("multiplication table must be square")
        ident = [e for e in range(n) if all(self.table[e][g] == g and self.table[g][e] == g for g in range(n))]
        if len(ident) != 1:
            raise ValueError("table has no unique identity")
        self._e = ident[0]
        self._inv = []
        for g in range(n):
            inv = [h for h in range(n) if self.table[g][h] == self._e]
            if len(inv) != 1:
                raise ValueError("table element without a unique inverse")
            self._inv.append(inv[0])

    def identity(self):
        return (self._e,)

    def multiply(self, a, b):
        return (self.table[a[0]][b[0]],)

    def inverse(self, a):
        return (self._inv[a[0]],)

    def is_finite(self):
        return True

    def order(self):
        return len(self.table)

    def elements(self):
        return [(g,) for g in range(len(self.table))]

    def standard_generators(self):
        return self.elements()

    def to_json(self):
        return {"family": self.family, "table": self.table}


def cyclic_table(n: int) -> FiniteTable:
    return FiniteTable([[(i + j) % n for j in range(n)] for i in range(n)])


def group_from_json(doc: dict) -> Group:
    fam = doc.get("family")
    try:
        if fam == "abelian":
            return AbelianQuotient(int(doc["rank"]), doc.get("relations", []))
        if fam == "heisenberg":
            return HeisenbergQuotient(doc.get("quotient", "none"), int(doc.get("modulus", 0)))
        if fam == "free_nilpotent":
            return FreeNilpotentGroup(int(doc["rank"]), int(doc["class"]))
        if fam == "semidirect":
            return SemidirectZdByFinite(int(doc["dimension"]), doc["matrices"])
        if fam == "matrix":
            return IntegerMatrixGroup(int(doc["size"]), doc["generators"])
        if fam == "finite_table":
            return FiniteTable(doc["table"])
    except KeyError as exc:
        raise ValueError(f"group spec missing field {exc}") from None
    raise ValueError(f"unknown group family {fam!r}")


@dataclass(frozen=True)
class GeneratingSet:
    elements: tuple
    symmetric: bool
    contains_identity: bool

    @classmethod
    def build(cls, group: Group, gens: Iterable[Sequence[int]], symmetrize: bool = True,
              with_identity: bool = True) -> "GeneratingSet":
        items = {group.canonical(g) for g in gens}
        if symmetrize:
            items |= {group.inverse(g) for g in items}
        if with_identity:
            items.add(group.identity())
        ident = group.identity() in items
        sym = all(group.inverse(g) in items for g in items)
        return cls(tuple(sorted(items)), sym, ident)

    def __len__(self):
        return len(self.elements)

    def validate(self, group: Group) -> None:
        items = set(self.elements)
        if self.symmetric and any(group.inverse(g) not in items for g in items):
            raise ValueError("generating set flagged symmetric but not closed under inverses")
        if self.contains_identity and group.identity() not in items:
            raise ValueError("generating set flagged with identity but identity missing")

    def to_json(self) -> dict:
        return {"elements": [list(g) for g in self.elements], "symmetric": self.symmetric,
                "contains_identity": self.contains_identity}

    @classmethod
    def from_json(cls, group: Group, doc) -> "GeneratingSet":
        if isinstance(doc, list):
            return cls.build(group, doc)
        gens = [group.canonical(g) for g in doc["elements"]]
        gs = cls(tuple(gens), bool(doc.get("symmetric", False)), bool(doc.get("contains_identity", False)))
        gs.validate(group)
        return gs


def evaluate_word(group: Group, generators: Sequence[Element], word: Sequence[int]) -> Element:
    """Evaluate a word of signed 1-based generator indices (``-2`` means g_2^-1)."""
    out = group.identity()
    for letter in word:
        idx = abs(letter) - 1
        if letter == 0 or idx >= len(generators):
            raise IndexError(f"invalid generator index {letter}")
        g = generators[idx]
        out = group.multiply(out, g if letter > 0 else group.inverse(g))
    return out
