"""Hall basic commutators, collection, BCH and Mal'cev arithmetic.

Group elements of the free nilpotent group of rank r and class c are exponent
vectors over the ordered basic commutators u_1, ..., u_d, meaning the product
u_1^l_1 ... u_d^l_d.  Commutators follow [a, b] = a^-1 b^-1 a b and the Lie
bracket [X, Y] = XY - YX.

Two independent routes are kept on purpose:

* ``NilpotentArithmetic.collect`` runs the collection process on a
  polycyclic presentation (conjugation table) of the basis;
* ``magnus`` / ``coordinates`` use the group-like embedding x_i -> exp(X_i)
  into the rational tensor algebra truncated above degree c, which is
  faithful for free nilpotent groups and sends group elements to series
  whose logarithms are Lie.  It builds the conjugation table once and serves
  as a test oracle for collection.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .intlinalg import DegreeSolver

SIZE_CAP = 20_000_000


# ---------------------------------------------------------------------------
# basic commutators


@dataclass(frozen=True)
class BasicCommutator:
    index: int
    left: int | None  # u_index = [u_left, u_right]; None for generators
    right: int | None
    weight: int
    chi: tuple[int, ...]


@dataclass(frozen=True)
class HallBasis:
    rank: int
    nil_class: int
    entries: tuple[BasicCommutator, ...]

    def __len__(self):
        return len(self.entries)

    @property
    def weights(self) -> tuple[int, ...]:
        return tuple(e.weight for e in self.entries)

    def label(self, i: int) -> str:
        e = self.entries[i]
        if e.left is None:
            return f"x{i + 1}"
        return f"[{self.label(e.left)},{self.label(e.right)}]"

    def ranks_by_weight(self) -> list[int]:
        counts = [0] * self.nil_class
        for e in self.entries:
            counts[e.weight - 1] += 1
        return counts

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "class": self.nil_class,
            "entries": [
                {"index": e.index, "label": self.label(e.index), "left": e.left, "right": e.right,
                 "weight": e.weight, "chi": list(e.chi)}
                for e in self.entries
            ],
        }


def hall_basis(r: int, c: int, size_cap: int = SIZE_CAP) -> HallBasis:
    """Basic commutators of weight at most ``c`` on ``r`` generators.

    Within one weight the order is by weight vector, decreasing
    lexicographically (so x_1-heavy entries first), then by the pair of
    constituent indices.
    """
    if r < 1 or c < 1:
        raise ValueError("rank and class must be positive")
    if (4 * r) ** c > size_cap:
        raise MemoryError(f"(4r)^c = {(4 * r) ** c} exceeds the size cap {size_cap}")
    entries: list[BasicCommutator] = [
        BasicCommutator(i, None, None, 1, tuple(int(i == j) for j in range(r))) for i in range(r)
    ]
    for k in range(2, c + 1):
        fresh = []
        for i, ui in enumerate(entries):
            for j in range(i):
                uj = entries[j]
                if ui.weight + uj.weight != k:
                    continue
                if ui.right is not None and j < ui.right:
                    continue
                chi = tuple(a + b for a, b in zip(ui.chi, uj.chi))
                fresh.append((tuple(-x for x in chi), i, j, chi))
        fresh.sort()
        for _, i, j, chi in fresh:
            entries.append(BasicCommutator(len(entries), i, j, k, chi))
    return HallBasis(r, c, tuple(entries))


def bass_guivarch(ranks: Sequence[int]) -> int:
    """Growth degree sum_i i * r(i) from the ranks of the lower central quotients."""
    if any(x < 0 for x in ranks):
        raise ValueError("ranks must be non-negative")
    return sum((i + 1) * x for i, x in enumerate(ranks))


# ---------------------------------------------------------------------------
# truncated tensor algebra: dict word -> coefficient, () is the unit


def t_add(a: dict, b: dict, scale=1) -> dict:
    out = dict(a)
    for w, v in b.items():
        nv = out.get(w, 0) + scale * v
        if nv:
            out[w] = nv
        else:
            out.pop(w, None)
    return out


def t_mul(a: dict, b: dict, c: int) -> dict:
    out: dict = {}
    for w1, v1 in a.items():
        room = c - len(w1)
        if room < 0:
            continue
        for w2, v2 in b.items():
            if len(w2) <= room:
                w = w1 + w2
                nv = out.get(w, 0) + v1 * v2
                if nv:
                    out[w] = nv
                else:
                    out.pop(w, None)
    return out


def t_one() -> dict:
    return {(): 1}


def t_part(a: dict, degree: int) -> dict:
    return {w: v for w, v in a.items() if len(w) == degree}


def t_inverse(a: dict, c: int) -> dict:
    """Inverse of a series with constant term 1."""
    nil = t_add(a, t_one(), -1)
    out = t_one()
    term = t_one()
    for _ in range(c):
        term = t_mul(term, nil, c)
        term = {w: -v for w, v in term.items()}
        out = t_add(out, term)
    return out


def t_power(a: dict, k: int, c: int) -> dict:
    if k < 0:
        a, k = t_inverse(a, c), -k
    out = t_one()
    base = a
    while k:
        if k & 1:
            out = t_mul(out, base, c)
        k >>= 1
        if k:
            base = t_mul(base, base, c)
    return out


def t_exp(x: dict, c: int) -> dict:
    out = t_one()
    term = t_one()
    for k in range(1, c + 1):
        term = t_mul(term, x, c)
        term = {w: Fraction(v, k) for w, v in term.items()}
        out = t_add(out, term)
    return out


def t_log(a: dict, c: int) -> dict:
    nil = t_add(a, t_one(), -1)
    out: dict = {}
    term = t_one()
    for k in range(1, c + 1):
        term = t_mul(term, nil, c)
        out = t_add(out, {w: Fraction((-1) ** (k + 1), k) * v for w, v in term.items()})
    return out


def t_bracket(a: dict, b: dict, c: int) -> dict:
    return t_add(t_mul(a, b, c), t_mul(b, a, c), -1)


# ---------------------------------------------------------------------------
# Mal'cev arithmetic


def _as_number(q: Fraction):
    return int(q) if q.denominator == 1 else q


class NilpotentArithmetic:
    """Group law and logarithm for one Hall basis (see module docstring)."""

    def __init__(self, basis: HallBasis):
        self.basis = basis
        self.c = basis.nil_class
        self.d = len(basis)
        c = self.c
        images: list[dict] = []
        for e in basis.entries:
            if e.left is None:
                images.append(t_exp({(e.index,): 1}, c))
            else:
                a, b = images[e.left], images[e.right]
                ia, ib = t_inverse(a, c), t_inverse(b, c)
                images.append(t_mul(t_mul(ia, ib, c), t_mul(a, b, c), c))
        self.images = images
        self.inverse_images = [t_inverse(m, c) for m in images]
        # leading homogeneous parts are the basic Lie brackets
        self.leads = [t_part(m, e.weight) for m, e in zip(images, basis.entries)]
        self.by_weight = {k: [e.index for e in basis.entries if e.weight == k] for k in range(1, c + 1)}
        self.solvers = {k: DegreeSolver([self.leads[i] for i in idx]) for k, idx in self.by_weight.items() if idx}
        self._logs: list[dict] | None = None
        self._conj: dict = {}
        for i in range(self.d):
            for j in range(i):
                for s in (1, -1):
                    self._conj[(i, j, s)] = self._conjugate_word(i, j, s)

    # -- Magnus route -------------------------------------------------------

    @property
    def logs(self) -> list[dict]:
        if self._logs is None:
            self._logs = [t_log(m, self.c) for m in self.images]
        return self._logs

    def basis_power_image(self, i: int, e) -> dict:
        if isinstance(e, int) or (isinstance(e, Fraction) and e.denominator == 1):
            e = int(e)
            if e >= 0:
                return t_power(self.images[i], e, self.c)
            return t_power(self.inverse_images[i], -e, self.c)
        return t_exp({w: e * v for w, v in self.logs[i].items()}, self.c)

    def magnus(self, exps: Sequence) -> dict:
        out = t_one()
        for i, e in enumerate(exps):
            if e:
                out = t_mul(out, self.basis_power_image(i, e), self.c)
        return out

    def word_image(self, word: Sequence[int]) -> dict:
        out = t_one()
        for letter in word:
            i = abs(letter) - 1
            out = t_mul(out, self.images[i] if letter > 0 else self.inverse_images[i], self.c)
        return out

    def coordinates(self, series: dict) -> tuple:
        """Mal'cev exponents of a group-like series (integers when integral)."""
        g = dict(series)
        exps: list = [0] * self.d
        for k in range(1, self.c + 1):
            idx = self.by_weight.get(k)
            if not idx:
                continue
            part = t_part(g, k)
            if not part:
                continue
            coeffs = self.solvers[k].coordinates(part)
            for i, q in zip(idx, coeffs):
                if q:
                    exps[i] = _as_number(q)
                    g = t_mul(self.basis_power_image(i, -exps[i]), g, self.c)
        leftover = t_add(g, t_one(), -1)
        if leftover:
            raise ValueError("series is not in the image of the group")
        return tuple(exps)

    def multiply_magnus(self, a: Sequence, b: Sequence) -> tuple:
        return self.coordinates(t_mul(self.magnus(a), self.magnus(b), self.c))

    # -- collection route ---------------------------------------------------

    def _conjugate_word(self, i: int, j: int, s: int) -> tuple:
        """Letters of u_j^-s u_i u_j^s in normal form; starts with u_i, then indices > i."""
        a = self.images[j] if s > 0 else self.inverse_images[j]
        ia = self.inverse_images[j] if s > 0 else self.images[j]
        exps = self.coordinates(t_mul(t_mul(ia, self.images[i], self.c), a, self.c))
        assert exps[i] == 1 and all(e == 0 for e in exps[:i])
        return tuple(_letters(exps))

    def collect_letters(self, letters: Sequence[tuple[int, int]], start: Sequence[int] | None = None) -> tuple:
        """Collect a word of basis letters ``(index, ±1)`` onto a normal form.

        Leftmost-uncollected policy: the collected prefix is always a normal
        form u_1^e_1 ... u_d^e_d; the next letter u_k^s is moved left past the
        tail u_{k+1}^e_{k+1} ... u_d^e_d by rewriting that tail as its
        conjugate by u_k^s and pushing the rewritten letters back on the stack.
        """
        exps = list(start) if start is not None else [0] * self.d
        stack = list(reversed(letters))
        d = self.d
        conj = self._conj
        while stack:
            k, s = stack.pop()
            tail = [(m, exps[m]) for m in range(k + 1, d) if exps[m]]
            exps[k] += s
            if not tail:
                continue
            for m, _ in tail:
                exps[m] = 0
            for m, e in reversed(tail):
                w = conj[(m, k, s)]
                if e > 0:
                    rev = w[::-1]
                    for _ in range(e):
                        stack.extend(rev)
                else:
                    inv = tuple((t, -sg) for t, sg in w)  # reversed word, negated letters
                    for _ in range(-e):
                        stack.extend(inv)
        return tuple(exps)

    def collect(self, word: Sequence[int]) -> tuple:
        """Normal form of a word in signed 1-based generator indices."""
        letters = []
        for letter in word:
            i = abs(letter) - 1
            if letter == 0 or i >= self.basis.rank:
                raise IndexError(f"invalid generator index {letter}")
            letters.append((i, 1 if letter > 0 else -1))
        return self.collect_letters(letters)

    def multiply(self, a: Sequence[int], b: Sequence[int]) -> tuple:
        return self.collect_letters(_letters(b), start=a)

    def inverse(self, a: Sequence[int]) -> tuple:
        letters = []
        for i in range(self.d - 1, -1, -1):
            e = a[i]
            letters.extend([(i, -1 if e > 0 else 1)] * abs(e))
        return self.collect_letters(letters)

    def power(self, a: Sequence[int], k: int) -> tuple:
        if k < 0:
            a, k = self.inverse(a), -k
        out = (0,) * self.d
        base = tuple(a)
        while k:
            if k & 1:
                out = self.multiply(out, base)
            k >>= 1
            if k:
                base = self.multiply(base, base)
        return out

    # -- logarithms ---------------------------------------------------------

    def lie_coordinates(self, series: dict) -> list[Fraction]:
        """Coordinates of a Lie series (no constant term) on the basic Lie brackets."""
        out = [Fraction(0)] * self.d
        for k, idx in self.by_weight.items():
            if not idx:
                continue
            part = t_part(series, k)
            if part:
                for i, q in zip(idx, self.solvers[k].coordinates(part)):
                    out[i] = q
        return out

    def lie_series(self, coords: Sequence) -> dict:
        out: dict = {}
        for i, q in enumerate(coords):
            if q:
                out = t_add(out, self.leads[i], Fraction(q))
        return out

    def log(self, exps: Sequence) -> list[Fraction]:
        return self.lie_coordinates(t_log(self.magnus(exps), self.c))

    def exp(self, coords: Sequence) -> tuple:
        return self.coordinates(t_exp(self.lie_series(coords), self.c))

    def rational_power(self, exps: Sequence, eta) -> tuple:
        eta = Fraction(eta)
        return self.exp([eta * q for q in self.log(exps)])

    def commutator_logs(self) -> list[list[Fraction]]:
        """Change of basis: log(u_i) written on the basic Lie brackets."""
        return [self.lie_coordinates(lg) for lg in self.logs]


def _letters(exps: Sequence[int]) -> list[tuple[int, int]]:
    out = []
    for i, e in enumerate(exps):
        if e:
            out.extend([(i, 1 if e > 0 else -1)] * abs(int(e)))
    return out


@functools.lru_cache(maxsize=None)
def arithmetic(r: int, c: int) -> NilpotentArithmetic:
    return NilpotentArithmetic(hall_basis(r, c))


@dataclass(frozen=True)
class MalcevElement:
    rank: int
    nil_class: int
    exponents: tuple

    @property
    def integral(self) -> bool:
        return all(isinstance(e, int) or Fraction(e).denominator == 1 for e in self.exponents)


def collect(word: Sequence[int], r: int, c: int) -> MalcevElement:
    return MalcevElement(r, c, arithmetic(r, c).collect(word))


def multiply(a: MalcevElement, b: MalcevElement) -> MalcevElement:
    if (a.rank, a.nil_class) != (b.rank, b.nil_class):
        raise ValueError("elements live over different bases")
    ar = arithmetic(a.rank, a.nil_class)
    if a.integral and b.integral:
        return MalcevElement(a.rank, a.nil_class, ar.multiply(a.exponents, b.exponents))
    return MalcevElement(a.rank, a.nil_class, ar.multiply_magnus(a.exponents, b.exponents))


def rational_power(a: MalcevElement, eta) -> MalcevElement:
    return MalcevElement(a.rank, a.nil_class, arithmetic(a.rank, a.nil_class).rational_power(a.exponents, eta))


# ---------------------------------------------------------------------------
# Lie structure and BCH


def dynkin_terms(c: int) -> dict[tuple[int, ...], Fraction]:
    """Dynkin's series for log(e^X e^Y) up to degree c.

    Keys are words over {0: X, 1: Y}; each stands for the right-nested bracket
    [w_1, [w_2, ... [w_{n-1}, w_n]]].
    """
    out: dict[tuple[int, ...], Fraction] = {}
    pairs = [(r, s) for r in range(c + 1) for s in range(c + 1) if 0 < r + s <= c]
    for n in range(1, c + 1):
        sign = Fraction((-1) ** (n - 1), n)
        for combo in itertools.product(pairs, repeat=n):
            total = sum(r + s for r, s in combo)
            if total > c:
                continue
            word: tuple[int, ...] = ()
            denom = total
            for r, s in combo:
                word += (0,) * r + (1,) * s
                denom *= math.factorial(r) * math.factorial(s)
            if len(word) > 1 and word[-1] == word[-2]:
                continue  # innermost bracket [a, a] vanishes
            out[word] = out.get(word, 0) + sign / denom
    return {w: q for w, q in out.items() if q}


class LieStructure:
    """Free nilpotent Lie algebra over Q on the basic Lie brackets."""

    def __init__(self, r: int, c: int):
        self.arith = arithmetic(r, c)
        self.basis = self.arith.basis
        self.d = len(self.basis)
        self.c = c
        self.table: dict[tuple[int, int], list[Fraction]] = {}
        ar = self.arith
        for a in range(self.d):
            for b in range(a + 1, self.d):
                if self.basis.entries[a].weight + self.basis.entries[b].weight > c:
                    self.table[(a, b)] = [Fraction(0)] * self.d
                    continue
                br = t_bracket(ar.leads[a], ar.leads[b], c)
                self.table[(a, b)] = ar.lie_coordinates(br)
        self.dynkin = dynkin_terms(c)

    def bracket_basis(self, a: int, b: int) -> list[Fraction]:
        if a == b:
            return [Fraction(0)] * self.d
        if a < b:
            return self.table[(a, b)]
        return [-q for q in self.table[(b, a)]]

    def bracket(self, u: Sequence, v: Sequence) -> list[Fraction]:
        out = [Fraction(0)] * self.d
        for a, ua in enumerate(u):
            if not ua:
                continue
            for b, vb in enumerate(v):
                if not vb or a == b:
                    continue
                coeff = ua * vb
                for k, q in enumerate(self.bracket_basis(a, b)):
                    if q:
                        out[k] += coeff * q
        return out

    def bch(self, x: Sequence, y: Sequence) -> list[Fraction]:
        """log(exp(x) exp(y)) via Dynkin's formula evaluated with the bracket table."""
        gens = ([Fraction(q) for q in x], [Fraction(q) for q in y])
        cache: dict[tuple[int, ...], list[Fraction]] = {}

        def nested(word):
            if word in cache:
                return cache[word]
            if len(word) == 1:
                val = gens[word[0]]
            else:
                val = self.bracket(gens[word[0]], nested(word[1:]))
            cache[word] = val
            return val

        out = [Fraction(0)] * self.d
        for word, q in self.dynkin.items():
            val = nested(word)
            for k, t in enumerate(val):
                if t:
                    out[k] += q * t
        return out

    def to_json(self) -> dict:
        triples = []
        for (a, b), coords in sorted(self.table.items()):
            for k, q in enumerate(coords):
                if q:
                    triples.append([a, b, k, q.numerator, q.denominator])
        return {
            "basis": self.basis.to_json(),
            "brackets": triples,
            "bch": [[list(w), q.numerator, q.denominator] for w, q in sorted(self.dynkin.items())],
        }


@functools.lru_cache(maxsize=None)
def bch_structure(r: int, c: int) -> LieStructure:
    if (4 * r) ** c > SIZE_CAP:
        raise MemoryError("rank/class too large for the BCH structure")
    return LieStructure(r, c)
