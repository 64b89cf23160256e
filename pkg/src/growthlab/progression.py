"""Progressions P(u; L), upper-triangular form, projected Lie progressions.

A ``Progression`` lives in a raw group Γ.  With a ``Projection`` it also
describes the pushed-forward set π(P̃)·H inside a target group, where π is
either coordinate reduction or a homomorphism out of Z^s given by images of
the standard basis, and H is an explicit finite symmetry subgroup.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import intlinalg
import numpy as np

from .balls import (MEMORY_CAP, PowerSequence, ResourceCapExceeded, as_rows, inverse_set, power_set, product_set,
                    right_saturate, right_saturate_rows, rows_product, rows_setdiff, subgroup_generators,
                    vectorisable)
from .free_nilpotent import hall_basis
from .groups import AbelianQuotient, Element, FreeNilpotentGroup, Group, HeisenbergQuotient


def as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(str(x)) if isinstance(x, str) else Fraction(x)


def fraction_str(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel of a projector, described directly on raw coordinates.

    kinds: ``lattice`` (integer row vectors; coordinates must lie in their
    span), ``central`` (<z^m> in a Heisenberg raw group), ``normal-xz``
    ({x^(am) z^(cm)} in a Heisenberg raw group), ``trivial``.
    """

    kind: str
    modulus: int = 0
    rows: tuple = ()

    def contains(self, g: Element) -> bool:
        if self.kind == "trivial":
            return not any(g)
        if self.kind == "lattice":
            return intlinalg.in_lattice(g, self.basis)
        m = self.modulus
        if self.kind == "central":
            return g[0] == 0 and g[1] == 0 and g[2] % m == 0
        if self.kind == "normal-xz":
            return g[0] % m == 0 and g[1] == 0 and g[2] % m == 0
        raise ValueError(f"unknown kernel kind {self.kind!r}")

    @functools.cached_property
    def basis(self) -> list:
        return intlinalg.hnf(self.rows, len(self.rows[0])) if self.rows else []

    def is_closed(self, group: Group, samples: int = 4) -> bool:
        """Check that lattice kernels are closed under the group law on small combinations."""
        if self.kind != "lattice":
            return True
        rows = [tuple(r) for r in self.rows]
        pool = rows + [group.inverse(r) for r in rows]
        for a, b in itertools.product(pool, repeat=2):
            if not self.contains(group.multiply(a, b)):
                return False
        return True

    def to_json(self) -> dict:
        return {"kind": self.kind, "modulus": self.modulus, "rows": [list(r) for r in self.rows]}

    @classmethod
    def from_json(cls, doc: dict) -> "KernelSpec":
        return cls(doc["kind"], int(doc.get("modulus", 0)), tuple(tuple(r) for r in doc.get("rows", [])))


@dataclass(frozen=True)
class Projection:
    target: Group
    kind: str = "reduce"  # or "images"
    images: tuple = ()
    symmetry: tuple = ()  # finite subgroup H of the target, as an element tuple
    kernel: KernelSpec | None = None

    def project(self, source: Group, g: Element) -> Element:
        if self.kind == "reduce":
            return self.target.canonical(g)
        out = self.target.identity()
        for img, e in zip(self.images, g):
            if e:
                out = self.target.multiply(out, self.target.power(img, e))
        return out

    @property
    def h_set(self) -> frozenset:
        return frozenset(self.symmetry) if self.symmetry else frozenset({self.target.identity()})

    def in_kernel(self, source: Group, g: Element) -> bool:
        if self.kernel is not None:
            return self.kernel.contains(g)
        return self.project(source, g) in self.h_set


@dataclass(frozen=True)
class Progression:
    group: Group
    generators: tuple
    lengths: tuple
    projection: Projection | None = None

    def __post_init__(self):
        if len(self.generators) != len(self.lengths):
            raise ValueError("one length per generator")
        object.__setattr__(self, "generators", tuple(self.group.canonical(g) for g in self.generators))
        object.__setattr__(self, "lengths", tuple(as_fraction(x) for x in self.lengths))
        if any(x < 0 for x in self.lengths):
            raise ValueError("lengths must be non-negative")

    @property
    def dim(self) -> int:
        return len(self.generators)

    def int_lengths(self) -> tuple[int, ...]:
        return tuple(math.floor(x) for x in self.lengths)

    def with_lengths(self, lengths) -> "Progression":
        return Progression(self.group, self.generators, tuple(lengths), self.projection)

    def to_json(self) -> dict:
        doc = {
            "group": self.group.to_json(),
            "generators": [list(g) for g in self.generators],
            "lengths": [fraction_str(x) for x in self.lengths],
        }
        if self.projection is not None:
            p = self.projection
            doc["projection"] = {
                "target": p.target.to_json(), "kind": p.kind,
                "images": [list(g) for g in p.images],
                "symmetry": [list(g) for g in p.symmetry],
                "kernel": p.kernel.to_json() if p.kernel else None,
            }
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "Progression":
        from .groups import group_from_json
        group = group_from_json(doc["group"])
        proj = None
        if doc.get("projection"):
            pd = doc["projection"]
            target = group_from_json(pd["target"])
            proj = Projection(
                target, pd.get("kind", "reduce"),
                tuple(target.canonical(g) for g in pd.get("images", [])),
                tuple(target.canonical(g) for g in pd.get("symmetry", [])),
                KernelSpec.from_json(pd["kernel"]) if pd.get("kernel") else None,
            )
        return cls(group, tuple(tuple(g) for g in doc["generators"]),
                   tuple(as_fraction(x) for x in doc["lengths"]), proj)


# ---------------------------------------------------------------------------
# enumeration


def enumerate_raw(p: Progression, cap: int = MEMORY_CAP) -> set:
    """The set {u_1^l_1 ... u_d^l_d : |l_i| <= L_i} in the raw group."""
    g = p.group
    bound = 1
    for n in p.int_lengths():
        bound *= 2 * n + 1
    if bound > cap:
        raise ResourceCapExceeded(f"progression has up to {bound} elements (cap {cap})")
    current = {g.identity()}
    # build left to right: P_k = P_{k-1} * {u_k^l}
    for u, n in zip(p.generators, p.int_lengths()):
        powers = [g.power(u, e) for e in range(-n, n + 1)]
        current = product_set(g, current, powers)
    return current


def push_forward(p: Progression, raw: Iterable[Element]) -> set:
    """π(raw)·H in the target group (identity map when there is no projection)."""
    if p.projection is None:
        return set(raw)
    proj = p.projection
    images = {proj.project(p.group, x) for x in raw}
    h = proj.h_set
    if len(h) == 1:
        return images
    return product_set(proj.target, images, h)


def enumerate_progression(p: Progression, cap: int = MEMORY_CAP) -> set:
    return push_forward(p, enumerate_raw(p, cap))


def power_sequence(p: Progression, cap: int = MEMORY_CAP):
    """The power sequence of π(P̃) ∪ {1} (or of P itself), with the symmetry set to saturate by."""
    if p.projection is None:
        group, base, h = p.group, enumerate_raw(p, cap), None
    else:
        group = p.projection.target
        base = {p.projection.project(p.group, x) for x in enumerate_raw(p, cap)}
        h = p.projection.h_set
    return PowerSequence(group, base | {group.identity()}, cap), h


def saturated_power(seq: PowerSequence, h, cap: int = MEMORY_CAP, rows: bool = False):
    """The current power times H; a row array when ``rows`` is set and the sequence runs on numpy."""
    if seq.truncated:
        raise ResourceCapExceeded("progression power exceeded the cap")
    plain = h is None or len(h) == 1
    if rows and seq.on_numpy:
        cur = seq.current_array()
        return cur if plain else right_saturate_rows(seq.group, cur, subgroup_generators(seq.group, h), cap)
    return seq.current if plain else right_saturate(seq.group, seq.current, h, cap)


def progression_power(p: Progression, n: int, cap: int = MEMORY_CAP) -> set:
    """P^n in the target (for projected progressions) or raw group.

    The symmetry group H is normal, so (π(P̃)H)^n = π(P̃)^n H and the power is
    taken before multiplying by H.
    """
    seq, h = power_sequence(p, cap)
    return saturated_power(seq.run(n), h, cap)


def coordinate_exponents(p: Progression, g: Element) -> tuple | None:
    """Exponents (l_1..l_d) with g = u_1^l_1 ... u_d^l_d when the generators are
    the coordinate basis of the raw group (up to sign), else ``None``."""
    grp = p.group
    d = len(g)
    if isinstance(grp, AbelianQuotient) and grp.relations:
        return None
    if isinstance(grp, HeisenbergQuotient) and grp.quotient != "none":
        return None
    if not isinstance(grp, (AbelianQuotient, HeisenbergQuotient, FreeNilpotentGroup)):
        return None
    if len(p.generators) != d:
        return None
    signs = []
    for k, u in enumerate(p.generators):
        if any(u[j] for j in range(d) if j != k) or abs(u[k]) != 1:
            return None
        signs.append(u[k])
    return tuple(s * x for s, x in zip(signs, g))


# ---------------------------------------------------------------------------
# upper-triangular form


@dataclass
class UpperTriangularReport:
    constant: int | None
    expressions: dict = field(default_factory=dict)  # (i, j, si, sj) -> tail exponents
    failure: tuple | None = None

    @property
    def ok(self) -> bool:
        return self.failure is None


def _tail_solutions(group: Group, tail: Sequence[Element], bounds: Sequence[int], target: Element,
                    cap: int) -> list[tuple[int, ...]]:
    """All exponent vectors e (|e_k| <= bounds_k) with prod tail_k^e_k = target."""
    if not tail:
        return [()] if target == group.identity() else []
    half = len(tail) // 2
    left_gens, right_gens = tail[:half], tail[half:]
    left_b, right_b = bounds[:half], bounds[half:]
    size_l = math.prod(2 * b + 1 for b in left_b)
    size_r = math.prod(2 * b + 1 for b in right_b)
    if size_l + size_r > cap:
        raise ResourceCapExceeded("upper-triangular search space exceeds the cap")

    def table(gens, bnds):
        out = {group.identity(): [()]}
        for u, b in zip(gens, bnds):
            pw = [(e, group.power(u, e)) for e in range(-b, b + 1)]
            nxt: dict = {}
            for elem, vecs in out.items():
                for e, ue in pw:
                    key = group.multiply(elem, ue)
                    nxt.setdefault(key, []).extend(v + (e,) for v in vecs)
            out = nxt
        return out

    left = table(left_gens, left_b)
    sols = []
    for relem, rvecs in table(right_gens, right_b).items():
        need = group.multiply(target, group.inverse(relem))
        for lv in left.get(need, ()):
            for rv in rvecs:
                sols.append(lv + rv)
    return sols


def check_upper_triangular(group: Group, gens: Sequence[Element], lengths: Sequence,
                           c_max: int = 64, cap: int = 4_000_000) -> UpperTriangularReport:
    """Least integer C >= 1 with [u_i^±, u_j^±] in P(u_{j+1..d}; C L_k/(L_i L_j)) for all i < j."""
    gens = [group.canonical(u) for u in gens]
    lengths = [as_fraction(x) for x in lengths]
    d = len(gens)
    report = UpperTriangularReport(constant=1)
    probe = Progression(group, tuple(gens), tuple(lengths))
    direct = None
    if coordinate_exponents(probe, group.identity()) is not None:
        def direct(x):
            return coordinate_exponents(probe, x)
    for i in range(d):
        for j in range(i + 1, d):
            li, lj = lengths[i], lengths[j]
            tail = gens[j + 1:]
            tail_l = lengths[j + 1:]
            scale = li * lj
            if scale == 0:
                bounds = [0] * len(tail)
            else:
                bounds = [math.ceil(c_max * lk / scale) for lk in tail_l]
            for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                a = group.power(gens[i], si)
                b = group.power(gens[j], sj)
                target = group.commutator(a, b)
                best = None
                if direct is not None:
                    exps = direct(target)
                    sols = [exps[j + 1:]] if not any(exps[:j + 1]) else []
                    sols = [s for s in sols if all(abs(e) <= bd for e, bd in zip(s, bounds))]
                else:
                    sols = _tail_solutions(group, tail, bounds, target, cap)
                for sol in sols:
                    need = 1
                    feasible = True
                    for e, lk in zip(sol, tail_l):
                        if e == 0:
                            continue
                        if lk == 0:
                            feasible = False
                            break
                        need = max(need, math.ceil(abs(e) * scale / lk))
                    if not feasible or need > c_max:
                        continue
                    key = (need, sum(abs(e) for e in sol), sol)
                    if best is None or key < best:
                        best = key
                if best is None:
                    report.constant = None
                    report.failure = (i, j, si, sj)
                    return report
                report.expressions[(i, j, si, sj)] = best[2]
                report.constant = max(report.constant, best[0])
    return report


@dataclass(frozen=True)
class ZetaWeights:
    weights: tuple
    expressions: dict


def zeta_weights(report: UpperTriangularReport, d: int) -> ZetaWeights:
    """ζ(k) = 1 unless u_k occurs in a recorded expression of [u_i^±, u_j^±];
    then ζ(k) = max ζ(i) + ζ(j) over such occurrences (indices processed upward)."""
    if not report.ok:
        raise ValueError("zeta weights need a successful upper-triangular check")
    zeta = [1] * d
    for k in range(d):
        best = None
        for (i, j, _, _), sol in report.expressions.items():
            offset = j + 1
            if offset <= k < offset + len(sol) and sol[k - offset] != 0:
                cand = zeta[i] + zeta[j]
                best = cand if best is None else max(best, cand)
        if best is not None:
            zeta[k] = best
    return ZetaWeights(tuple(zeta), dict(report.expressions))


def nilpotent_progression(group: Group, xs: Sequence[Element], lengths: Sequence, nil_class: int) -> Progression:
    """Generators: every basic commutator of weight <= nil_class in xs; lengths L^χ."""
    basis = hall_basis(len(xs), nil_class)
    lengths = [as_fraction(x) for x in lengths]
    elems: list[Element] = []
    ls: list[Fraction] = []
    for e in basis.entries:
        if e.left is None:
            elems.append(group.canonical(xs[e.index]))
        else:
            elems.append(group.commutator(elems[e.left], elems[e.right]))
        ls.append(math.prod((lengths[t] ** c for t, c in enumerate(e.chi)), start=Fraction(1)))
    return Progression(group, tuple(elems), tuple(ls))


# ---------------------------------------------------------------------------
# injectivity radii


@dataclass(frozen=True)
class RadiusBound:
    value: int
    capped: bool  # True means "at least value"

    def __str__(self):
        return f">={self.value}" if self.capped else str(self.value)

    def at_least(self, n: int) -> bool:
        return self.value >= n

    def to_json(self):
        return {"value": self.value, "capped": self.capped}


def injectivity_radius(p: Progression, j_max: int, cap: int = MEMORY_CAP) -> RadiusBound:
    """sup{j : ker π ∩ P̃^j = {1}}, searched up to j_max."""
    if p.projection is None:
        raise ValueError("injectivity radius needs a projection")
    if p.projection.kernel is not None and p.projection.kernel.kind == "trivial":
        return RadiusBound(j_max, True)
    g = p.group
    base = enumerate_raw(p, cap) | {g.identity()}
    seq = PowerSequence(g, base, cap)
    ident = g.identity()
    for j in range(1, j_max + 1):
        seq.step()
        if seq.truncated:
            raise ResourceCapExceeded("P̃^j exceeded the cap")
        if seq._numpy:
            newest = [tuple(int(v) for v in r) for r in _kernel_rows(p, seq._frontier)]
        else:
            newest = seq.newest
        for x in newest:
            if x != ident and p.projection.in_kernel(g, x):
                return RadiusBound(j - 1, False)
    return RadiusBound(j_max, True)


def inj_mod_center(p: Progression, j_max: int, cap: int = MEMORY_CAP) -> RadiusBound:
    """sup{j : ker π ∩ P̃^j P̃^-j ⊆ Z(Γ)}, searched up to j_max.

    Uses P̃^j P̃^-j = P̃ (P̃^(j-1) P̃^-(j-1)) P̃^-1.
    """
    if p.projection is None:
        raise ValueError("injectivity radius needs a projection")
    g = p.group
    if p.projection.kernel is not None and p.projection.kernel.kind in ("trivial", "central"):
        # the kernel is central by construction
        return RadiusBound(j_max, True)
    base = enumerate_raw(p, cap) | {g.identity()}
    inv = inverse_set(g, base)

    def violations(items):
        return any(p.projection.in_kernel(g, x) and not g.is_central(x) for x in items)

    if vectorisable(g, base, inv):
        b_rows, i_rows = as_rows(base), as_rows(inv)
        current = as_rows([g.identity()])
        for j in range(1, j_max + 1):
            nxt = rows_product(g, rows_product(g, b_rows, current), i_rows)
            if len(nxt) > cap:
                raise ResourceCapExceeded("P̃^j P̃^-j exceeded the cap")
            fresh = rows_setdiff(nxt, current)
            if violations(tuple(int(v) for v in r) for r in _kernel_rows(p, fresh)):
                return RadiusBound(j - 1, False)
            current = nxt
        return RadiusBound(j_max, True)
    current = {g.identity()}
    for j in range(1, j_max + 1):
        nxt = product_set(g, product_set(g, base, current), inv)
        if len(nxt) > cap:
            raise ResourceCapExceeded("P̃^j P̃^-j exceeded the cap")
        if violations(nxt - current):
            return RadiusBound(j - 1, False)
        current = nxt
    return RadiusBound(j_max, True)


def _kernel_rows(p: Progression, rows: np.ndarray) -> np.ndarray:
    """Cheap vectorised prefilter: rows that may lie in the kernel."""
    proj = p.projection
    k = proj.kernel
    if k is not None and k.kind in ("central", "normal-xz") and rows.shape[1] == 3:
        m = k.modulus
        if k.kind == "central":
            mask = (rows[:, 0] == 0) & (rows[:, 1] == 0) & (rows[:, 2] % m == 0)
        else:
            mask = (rows[:, 0] % m == 0) & (rows[:, 1] == 0) & (rows[:, 2] % m == 0)
        return rows[mask]
    if k is not None and k.kind == "trivial":
        return rows[~rows.any(axis=1)]
    if k is not None and k.kind == "lattice":
        rest = rows.copy()
        for b in k.basis:
            col = next(i for i, x in enumerate(b) if x)
            rest -= (rest[:, col] // b[col])[:, None] * np.asarray(b, dtype=np.int64)[None, :]
        return rows[~rest.any(axis=1)]
    if k is None and proj.kind == "reduce" and proj.target.batch_multiply is not None and len(proj.h_set) == 1:
        zero = np.zeros_like(rows)
        reduced = proj.target.batch_multiply(rows, zero)
        ident = np.asarray(proj.target.identity(), dtype=np.int64)
        return rows[np.all(reduced == ident, axis=1)]
    return rows


def symmetry_set(p: Progression, cap: int = MEMORY_CAP) -> set:
    """{g : gP = P} for the (pushed-forward) progression set P."""
    pset = frozenset(enumerate_progression(p, cap))
    group = p.projection.target if p.projection else p.group
    candidates = pset if group.identity() in pset else set()
    out = set()
    for c in candidates:
        if all(group.multiply(c, x) in pset for x in pset):
            out.add(c)
    return out


def finite_subgroup_in_power(p: Progression, k: Iterable[Element], j_max: int = 16,
                             cap: int = MEMORY_CAP) -> dict:
    """If K lies in P^⌊inj P/2⌋, report whether K ≤ H (it always should)."""
    k = set(k)
    inj = injectivity_radius(p, j_max, cap)
    half = inj.value // 2
    power = progression_power(p, half, cap)
    if not k <= power:
        return {"precondition": False, "inj": str(inj), "contained_in_H": None}
    h = p.projection.h_set
    return {"precondition": True, "inj": str(inj), "contained_in_H": k <= h}


# ---------------------------------------------------------------------------
# approximate groups and identities


@dataclass
class ApproxReport:
    size: int
    doubling: Fraction
    tripling: Fraction
    cover: list
    greedy_k: int


def approx_diagnostics(group: Group, a: Iterable[Element]) -> ApproxReport:
    """Doubling, tripling, and a greedy X with A^2 ⊆ XA (|X| bounds K from above)."""
    a = set(a)
    if group.identity() not in a or any(group.inverse(x) not in a for x in a):
        raise ValueError("approximate-group diagnostics need a symmetric set with identity")
    a2 = product_set(group, a, a)
    a3 = product_set(group, a2, a)
    uncovered = set(a2)
    cover = []
    candidates = sorted(a3)
    while uncovered:
        best, best_gain = None, -1
        for x in candidates:
            gain = sum(1 for y in a if group.multiply(x, y) in uncovered)
            if gain > best_gain:
                best, best_gain = x, gain
        cover.append(best)
        uncovered -= {group.multiply(best, y) for y in a}
    return ApproxReport(len(a), Fraction(len(a2), len(a)), Fraction(len(a3), len(a)), cover, len(cover))


def _cover_depth(group: Group, base: set, targets: set, limit: int, cap: int) -> tuple[int | None, set]:
    """Least n <= limit with targets ⊆ base^n (base contains 1)."""
    seq = PowerSequence(group, base, cap)
    missing = set(targets) - seq.current
    while missing and seq.n < limit:
        seq.step()
        if seq.truncated:
            raise ResourceCapExceeded("containment search exceeded the cap")
        missing -= seq.newest
    return (seq.n if not missing else None), missing


def progression_identities_check(p: Progression, m: int = 2, cap: int = MEMORY_CAP) -> dict:
    """Check P^-1 ⊆ P^d and P(u; mL) ⊆ P^(2dm) in the raw group."""
    g = p.group
    d = p.dim
    pset = enumerate_raw(p, cap) | {g.identity()}
    inv = inverse_set(g, pset)
    n_inv, miss_inv = _cover_depth(g, pset, inv, d, cap)
    dilated = enumerate_raw(p.with_lengths([m * x for x in p.lengths]), cap)
    n_dil, miss_dil = _cover_depth(g, pset, dilated, 2 * d * m, cap)
    return {
        "inverse_ok": n_inv is not None, "inverse_depth": n_inv, "inverse_witnesses": sorted(miss_inv)[:5],
        "dilate_ok": n_dil is not None, "dilate_depth": n_dil, "dilate_witnesses": sorted(miss_dil)[:5],
    }


def zeta_dilation_constant(p: Progression, zeta: Sequence[int], n: int, cap: int = MEMORY_CAP) -> Fraction:
    """Least c with P^n ⊆ P(u; c n^ζ L) (exact, via coordinates or enumeration)."""
    power = progression_power(Progression(p.group, p.generators, p.lengths), n, cap)
    scale = [Fraction(n) ** z * lk for z, lk in zip(zeta, p.lengths)]
    probe = coordinate_exponents(p, p.group.identity())
    if probe is not None:
        c = Fraction(0)
        for x in power:
            for e, s in zip(coordinate_exponents(p, x), scale):
                if e:
                    if s == 0:
                        raise ValueError("zero length with nonzero exponent")
                    c = max(c, Fraction(abs(e)) / s)
        return c
    c = Fraction(1)
    for _ in range(12):
        box = enumerate_raw(p.with_lengths([c * s for s in scale]), cap)
        if power <= box:
            return c
        c *= 2
    raise ResourceCapExceeded("no dilation constant found below 2^12")


def lower_bound_lengths(p: Progression, s: Iterable[Element], m: int, c_max: int = 64,
                        cap: int = MEMORY_CAP) -> dict:
    """If P ⊇ S^m and P is C-upper-triangular, every length should obey L_i · C^(ζ(i)-1) >= m^ζ(i).

    Reports ``precondition: False`` when P misses part of S^m or fails the
    upper-triangular search; otherwise one row per generator.
    """
    group = p.projection.target if p.projection else p.group
    ball = power_set(group, set(s) | {group.identity()}, m, cap)
    if not ball <= enumerate_progression(p, cap):
        return {"precondition": False, "reason": "S^m is not inside P"}
    report = check_upper_triangular(p.group, p.generators, p.lengths, c_max=c_max)
    if not report.ok:
        return {"precondition": False, "reason": f"no upper-triangular constant up to {c_max}"}
    c = report.constant
    zeta = zeta_weights(report, p.dim).weights
    rows = [{"length": fraction_str(lk), "zeta": z, "holds": lk * c ** (z - 1) >= m ** z}
            for lk, z in zip(p.lengths, zeta)]
    return {"precondition": True, "constant": c, "zeta": list(zeta), "rows": rows,
            "holds": all(r["holds"] for r in rows)}


def local_normality(group: Group, p: Progression, xs: Iterable[Element], s: Iterable[Element], eta: int,
                    in_span: Callable[[Element], bool], cap: int = MEMORY_CAP) -> dict:
    """Check xPx^-1 ⊆ P^η for x in X, given X ∩ <P> = {1}, XP ⊆ S and S^2 ⊆ X P^η.

    ``in_span`` decides membership in <P>; normality of <P> is the caller's
    responsibility.  The conclusion is only evaluated when the checkable
    hypotheses hold.
    """
    xs, s = set(xs), set(s)
    ident = group.identity()
    pset = enumerate_progression(p, cap)
    p_eta = progression_power(p, eta, cap)
    hyp = {
        "x_meets_span_trivially": all(x == ident or not in_span(x) for x in xs),
        "xp_inside_s": product_set(group, xs, pset) <= s,
        "s2_inside_xp_eta": product_set(group, s, s) <= product_set(group, xs, p_eta),
    }
    if not all(hyp.values()):
        return {"precondition": False, **hyp}
    bad = [x for x in xs
           if not {group.multiply(group.multiply(x, y), group.inverse(x)) for y in pset} <= p_eta]
    return {"precondition": True, **hyp, "holds": not bad, "witnesses": sorted(bad)[:5]}
