"""Product sets, powers and breadth-first ball profiles in Cayley graphs."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import chain
from typing import Iterable, Iterator, Sequence

import numpy as np

from .groups import AbelianQuotient, Element, GeneratingSet, Group, HeisenbergQuotient, UnsupportedOperation
from . import intlinalg

MEMORY_CAP = 20_000_000
_CHUNK_ROWS = 4_000_000
_INT_LIMIT = 2 ** 40  # coordinates beyond this leave the numpy path


class ResourceCapExceeded(Exception):
    pass


# ---------------------------------------------------------------------------
# row-set helpers for the numpy path


def _encode(rows: np.ndarray, lo: np.ndarray, span: np.ndarray) -> np.ndarray:
    key = np.zeros(len(rows), dtype=np.int64)
    for j in range(rows.shape[1]):
        key = key * span[j] + (rows[:, j] - lo[j])
    return key


def _decode(keys: np.ndarray, lo: np.ndarray, span: np.ndarray) -> np.ndarray:
    out = np.empty((len(keys), len(span)), dtype=np.int64)
    rest = keys.copy()
    for j in range(len(span) - 1, -1, -1):
        out[:, j] = rest % span[j] + lo[j]
        rest //= span[j]
    return out


def _bounds(*arrays: np.ndarray):
    arrays = [a for a in arrays if len(a)]
    # column by column: reducing along axis 0 of a narrow array is several times slower
    ncols = arrays[0].shape[1]
    lo = np.array([min(a[:, j].min() for a in arrays) for j in range(ncols)], dtype=np.int64)
    hi = np.array([max(a[:, j].max() for a in arrays) for j in range(ncols)], dtype=np.int64)
    span = hi - lo + 1
    if float(np.prod(span.astype(float))) >= 2.0 ** 62:
        return None
    return lo, span


def _unique_rows(rows: np.ndarray) -> np.ndarray:
    if len(rows) == 0:
        return rows
    b = _bounds(rows)
    if b is None:
        return np.unique(rows, axis=0)
    lo, span = b
    return _decode(np.unique(_encode(rows, lo, span)), lo, span)


def _pairwise(group: Group, a: np.ndarray, b: np.ndarray) -> Iterator[np.ndarray]:
    """All products x*y, x in a, y in b, in deduplicated chunks."""
    step = max(1, _CHUNK_ROWS // max(1, len(b)))
    for start in range(0, len(a), step):
        block = a[start:start + step]
        left = np.repeat(block, len(b), axis=0)
        right = np.tile(b, (len(block), 1))
        yield _unique_rows(group.batch_multiply(left, right))


def _vectorisable(group: Group, *sets: Iterable[Element]) -> bool:
    if group.batch_multiply is None:
        return False
    for s in sets:
        s = s if isinstance(s, (list, tuple, set, frozenset)) else list(s)
        if not s:
            continue
        try:
            flat = np.fromiter(chain.from_iterable(s), dtype=np.int64)
        except OverflowError:
            return False
        if np.abs(flat).max() > 2 ** 20:
            return False
    return True


# ---------------------------------------------------------------------------
# generic product sets


def product_set(group: Group, a: Iterable[Element], b: Iterable[Element]) -> set:
    a, b = list(a), list(b)
    if _vectorisable(group, a, b) and len(a) * len(b) > 5000:
        A = np.asarray(a, dtype=np.int64)
        B = np.asarray(b, dtype=np.int64)
        parts = list(_pairwise(group, A, B))
        rows = _unique_rows(np.concatenate(parts)) if parts else np.empty((0, A.shape[1]), dtype=np.int64)
        return set(map(tuple, rows.tolist()))
    mul = group.multiply
    return {mul(x, y) for x in a for y in b}


def inverse_set(group: Group, a: Iterable[Element]) -> set:
    return {group.inverse(x) for x in a}


class PowerSequence:
    """Iterates A^0 = {1}, A^1, A^2, ... for a finite set A containing 1.

    Uses A^n = A^(n-1) ∪ (A^(n-1) \\ A^(n-2)) A, so each step multiplies only
    the newest layer.  ``sizes`` records |A^n|; ``current`` is the set A^n.
    """

    def __init__(self, group: Group, a: Iterable[Element], memory_cap: int = MEMORY_CAP, right: bool = True):
        self.group = group
        self.a = sorted(set(a))
        if group.identity() not in self.a:
            raise ValueError("power sequences need the identity in the set")
        self.memory_cap = memory_cap
        self.right = right
        self.n = 0
        self.sizes = [1]
        self.truncated = False
        self._numpy = _vectorisable(group, self.a) and len(self.a) > 1
        ident = group.identity()
        if self._numpy:
            self._A = np.asarray(self.a, dtype=np.int64)
            self._visited = np.asarray([ident], dtype=np.int64)
            self._frontier = self._visited.copy()
            self._vlo = self._vhi = self._visited[0].copy()
        else:
            self._visited_set = {ident}
            self._frontier_set = {ident}

    @property
    def current(self) -> set:
        if self._numpy:
            return set(map(tuple, self._visited.tolist()))
        return set(self._visited_set)

    @property
    def newest(self) -> set:
        if self._numpy:
            return set(map(tuple, self._frontier.tolist()))
        return set(self._frontier_set)

    @property
    def on_numpy(self) -> bool:
        return self._numpy

    def current_array(self) -> np.ndarray:
        if self._numpy:
            return self._visited
        return np.asarray(sorted(self._visited_set), dtype=np.int64)

    def step(self) -> int:
        if self.truncated:
            raise ResourceCapExceeded("power sequence already truncated")
        if self._numpy:
            try:
                self._step_numpy()
            except OverflowError:
                self._leave_numpy()
                self._step_python()
        else:
            self._step_python()
        self.n += 1
        size = len(self._visited) if self._numpy else len(self._visited_set)
        self.sizes.append(size)
        if size > self.memory_cap:
            self.truncated = True
        return size

    def _leave_numpy(self):
        self._visited_set = set(map(tuple, self._visited.tolist()))
        self._frontier_set = set(map(tuple, self._frontier.tolist()))
        self._numpy = False

    def _step_python(self):
        mul = self.group.multiply
        fresh = set()
        seen = self._visited_set
        if self.right:
            for x in self._frontier_set:
                for s in self.a:
                    y = mul(x, s)
                    if y not in seen:
                        fresh.add(y)
        else:
            for x in self._frontier_set:
                for s in self.a:
                    y = mul(s, x)
                    if y not in seen:
                        fresh.add(y)
        seen |= fresh
        self._frontier_set = fresh

    def _step_numpy(self):
        if len(self._frontier) == 0:
            return
        if np.abs(self._frontier).max() > _INT_LIMIT:
            raise OverflowError
        if self.right:
            parts = list(_pairwise(self.group, self._frontier, self._A))
        else:
            parts = [_unique_rows(p) for p in _pairwise_left(self.group, self._A, self._frontier)]
        cand = _unique_rows(np.concatenate(parts))
        b = _bounds(cand, np.stack([self._vlo, self._vhi]))
        if b is None:
            raise OverflowError
        lo, span = b
        hi = lo + span - 1
        ck = _encode(cand, lo, span)
        vk = _encode(self._visited, lo, span)
        mask = ~np.isin(ck, vk, assume_unique=True)
        fresh = cand[mask]
        self._visited = np.concatenate([self._visited, fresh])
        self._frontier = fresh
        self._vlo, self._vhi = lo, hi

    def run(self, n: int) -> "PowerSequence":
        while self.n < n and not self.truncated:
            self.step()
        return self


def _pairwise_left(group, a, b):
    step = max(1, _CHUNK_ROWS // max(1, len(a)))
    for start in range(0, len(b), step):
        block = b[start:start + step]
        left = np.tile(a, (len(block), 1))
        right = np.repeat(block, len(a), axis=0)
        yield group.batch_multiply(left, right)


def power_set(group: Group, a: Iterable[Element], n: int, memory_cap: int = MEMORY_CAP) -> set:
    """A^n for a set containing the identity (the identity is added if absent)."""
    items = set(a) | {group.identity()}
    seq = PowerSequence(group, items, memory_cap).run(n)
    if seq.truncated:
        raise ResourceCapExceeded(f"|A^{seq.n}| exceeded the memory cap")
    return seq.current


def power_set_exact(group: Group, a: Iterable[Element], n: int, memory_cap: int = MEMORY_CAP) -> set:
    """A^n for an arbitrary finite set (identity not assumed)."""
    items = set(a)
    if group.identity() in items:
        return power_set(group, items, n, memory_cap)
    if n == 0:
        return {group.identity()}
    out = set(items)
    for _ in range(n - 1):
        out = product_set(group, out, items)
        if len(out) > memory_cap:
            raise ResourceCapExceeded("product set exceeded the memory cap")
    return out


# ---------------------------------------------------------------------------
# ball profiles


@dataclass
class BallProfile:
    radius: int
    beta: list[int]
    fingerprint: str = ""
    truncated: bool = False
    sigma: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.sigma:
            self.sigma = [self.beta[0]] + [b - a for a, b in zip(self.beta, self.beta[1:])]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "beta", "sigma"])
        for n, (b, s) in enumerate(zip(self.beta, self.sigma)):
            w.writerow([n, b, s])
        if self.truncated:
            w.writerow(["truncated", len(self.beta) - 1, ""])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"radius": self.radius, "beta": self.beta, "sigma": self.sigma,
                "group": self.fingerprint, "truncated": self.truncated}

    @classmethod
    def from_json(cls, doc: dict) -> "BallProfile":
        return cls(int(doc["radius"]), [int(x) for x in doc["beta"]], doc.get("group", ""),
                   bool(doc.get("truncated", False)))

    @classmethod
    def from_csv(cls, text: str) -> "BallProfile":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0][:3]] != ["n", "beta", "sigma"]:
            raise ValueError("profile CSV needs header n,beta,sigma")
        beta = []
        truncated = False
        for row in rows[1:]:
            if not row:
                continue
            if row[0] == "truncated":
                truncated = True
                continue
            n, b = int(row[0]), int(row[1])
            if n != len(beta):
                raise ValueError("profile rows must be consecutive from n=0")
            beta.append(b)
        if not beta:
            raise ValueError("empty profile")
        return cls(len(beta) - 1, beta, truncated=truncated)

    @classmethod
    def parse(cls, text: str) -> "BallProfile":
        stripped = text.lstrip()
        if stripped.startswith("{"):
            return cls.from_json(json.loads(stripped))
        return cls.from_csv(text)


def _check_generating_set(group: Group, s: GeneratingSet | Sequence[Element]) -> list[Element]:
    if isinstance(s, GeneratingSet):
        s.validate(group)
        elems = list(s.elements)
        if not (s.symmetric and s.contains_identity):
            raise ValueError("ball profiles need a symmetric generating set containing the identity")
        return elems
    elems = list(s)
    items = set(elems)
    if group.identity() not in items or any(group.inverse(g) not in items for g in items):
        raise ValueError("ball profiles need a symmetric generating set containing the identity")
    return elems


def ball_profile(group: Group, s, radius: int, memory_cap: int = MEMORY_CAP) -> BallProfile:
    """Exact β(0..radius) by breadth-first search on canonical forms.

    If the ball outgrows ``memory_cap`` the profile stops early and is marked
    truncated.
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    elems = _check_generating_set(group, s)
    seq = PowerSequence(group, elems, memory_cap)
    order = group.order()
    while seq.n < radius and not seq.truncated:
        seq.step()
        if order is not None and seq.sizes[-1] == order:
            # saturated: the rest of the profile is constant
            seq.sizes.extend([order] * (radius - seq.n))
            seq.n = radius
    beta = seq.sizes[: radius + 1]
    truncated = seq.truncated
    if truncated:
        beta = beta[:-1]
    return BallProfile(radius, beta, group.fingerprint(), truncated)


def diameter(group: Group, s, memory_cap: int = MEMORY_CAP) -> int:
    order = group.order()
    if order is None:
        raise UnsupportedOperation("diameter needs a finite group")
    elems = _check_generating_set(group, s)
    seq = PowerSequence(group, elems, memory_cap)
    while seq.sizes[-1] < order:
        before = seq.sizes[-1]
        seq.step()
        if seq.sizes[-1] == before:
            raise ValueError("set does not generate the group")
        if seq.truncated:
            raise ResourceCapExceeded("diameter search exceeded the memory cap")
    return seq.n


def doubling_profile(profile: BallProfile) -> list[tuple[int, Fraction, Fraction | None]]:
    """Rows (n, β(2n)/β(n), β(3n)/β(n)) for every n with 2n within the profile."""
    beta = profile.beta
    out = []
    for n in range(1, len(beta)):
        if 2 * n >= len(beta):
            break
        triple = Fraction(beta[3 * n], beta[n]) if 3 * n < len(beta) else None
        out.append((n, Fraction(beta[2 * n], beta[n]), triple))
    return out


# ---------------------------------------------------------------------------
# subgroups with decidable coset keys


class Subgroup:
    def contains(self, g: Element) -> bool:
        raise NotImplementedError

    def coset_key(self, g: Element):
        """A canonical label of the left coset gH."""
        raise NotImplementedError


class LatticeSubgroup(Subgroup):
    """Subgroup of an abelian quotient spanned by integer vectors."""

    def __init__(self, group: AbelianQuotient, rows: Sequence[Sequence[int]]):
        if not isinstance(group, AbelianQuotient):
            raise UnsupportedOperation("lattice subgroups live in abelian quotients")
        self.group = group
        self.rows = [tuple(r) for r in rows]
        self.basis = intlinalg.hnf(list(group.relations) + self.rows, group.rank)

    def contains(self, g):
        return intlinalg.in_lattice(g, self.basis)

    def coset_key(self, g):
        return intlinalg.reduce_vector(g, self.basis)


class HeisenbergCenter(Subgroup):
    """The subgroup {z^c} of a Heisenberg quotient."""

    def __init__(self, group: HeisenbergQuotient):
        if not isinstance(group, HeisenbergQuotient):
            raise UnsupportedOperation("Heisenberg centre needs a Heisenberg group")
        self.group = group

    def contains(self, g):
        return g[0] == 0 and g[1] == 0

    def coset_key(self, g):
        return (g[0], g[1])


class FiniteSubgroup(Subgroup):
    """A subgroup given by its (finite) element list."""

    def __init__(self, group: Group, elements: Iterable[Element]):
        self.group = group
        self.elements = frozenset(group.canonical(g) for g in elements)
        if group.identity() not in self.elements:
            raise ValueError("subgroup must contain the identity")

    def contains(self, g):
        return g in self.elements

    def coset_key(self, g):
        return min(self.group.multiply(g, h) for h in self.elements)


def coset_ball_counts(group: Group, s, subgroup: Subgroup, radius: int,
                      memory_cap: int = MEMORY_CAP) -> list[int]:
    """Number of distinct left cosets gH met by S^n for n = 0..radius."""
    elems = _check_generating_set(group, s)
    seq = PowerSequence(group, elems, memory_cap)
    keys = {subgroup.coset_key(group.identity())}
    counts = [len(keys)]
    while seq.n < radius:
        seq.step()
        if seq.truncated:
            raise ResourceCapExceeded("coset count exceeded the memory cap")
        keys |= {subgroup.coset_key(g) for g in seq.newest}
        counts.append(len(keys))
    return counts


def subgroup_closure(group: Group, gens: Iterable[Element], cap: int = 1_000_000) -> set:
    """Subgroup generated by finitely many elements of a finite group."""
    gens = set(gens) | {group.identity()}
    gens |= {group.inverse(g) for g in gens}
    seq = PowerSequence(group, gens, cap)
    while True:
        before = seq.sizes[-1]
        seq.step()
        if seq.truncated:
            raise ResourceCapExceeded("subgroup closure exceeded the cap")
        if seq.sizes[-1] == before:
            return seq.current


# ---------------------------------------------------------------------------
# array-level helpers for callers that keep sets as row arrays


def rows_product(group: Group, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    parts = list(_pairwise(group, a, b))
    if not parts:
        return np.empty((0, a.shape[1]), dtype=np.int64)
    return _unique_rows(np.concatenate(parts))


def rows_setdiff(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if len(a) == 0 or len(b) == 0:
        return a
    bnd = _bounds(a, b)
    if bnd is None:
        bset = {tuple(r) for r in b.tolist()}
        return np.asarray([r for r in a.tolist() if tuple(r) not in bset], dtype=np.int64).reshape(-1, a.shape[1])
    lo, span = bnd
    return a[~np.isin(_encode(a, lo, span), _encode(b, lo, span))]


def as_rows(items: Iterable[Element]) -> np.ndarray:
    return np.asarray(sorted(items), dtype=np.int64)


def vectorisable(group: Group, *sets) -> bool:
    return _vectorisable(group, *sets)


def rows_subset(a: np.ndarray, b: np.ndarray) -> bool:
    if len(a) == 0:
        return True
    return len(rows_setdiff(a, b)) == 0 if len(b) else False


def right_saturate_rows(group: Group, rows: np.ndarray, gens: Sequence[Element], cap: int = MEMORY_CAP) -> np.ndarray:
    g_rows = as_rows(gens)
    total = _unique_rows(rows)
    frontier = total
    while len(frontier):
        nxt = rows_product(group, frontier, g_rows)
        frontier = rows_setdiff(nxt, total)
        total = np.concatenate([total, frontier])
        if len(total) > cap:
            raise ResourceCapExceeded("coset saturation exceeded the cap")
    return total


def subgroup_generators(group: Group, h: Iterable[Element]) -> list[Element]:
    """A generating subset of the finite subgroup H, picked greedily."""
    gens: list[Element] = []
    span = {group.identity()}
    for x in sorted(h):
        if x not in span:
            gens.append(x)
            span = subgroup_closure(group, gens)
    return gens


def right_saturate(group: Group, a: Iterable[Element], h: Iterable[Element], cap: int = MEMORY_CAP) -> set:
    """A·H for a finite subgroup H, by closing A under right multiplication by generators of H."""
    gens = subgroup_generators(group, h)
    a = set(a)
    if not gens:
        return a
    if _vectorisable(group, a, gens):
        return set(map(tuple, right_saturate_rows(group, as_rows(a), gens, cap).tolist()))
    out, frontier = set(a), set(a)
    while frontier:
        frontier = {group.multiply(x, y) for x in frontier for y in gens} - out
        out |= frontier
        if len(out) > cap:
            raise ResourceCapExceeded("coset saturation exceeded the cap")
    return out
