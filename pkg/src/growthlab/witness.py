"""Fine-scale witnesses: a chain of projected progressions describing S^m at every scale.

A witness lists scales r_0 < ... < r_k, progressions P_i projected into the
group, translate sets X_i and the constants that the checks use.  Each
conclusion is verified exactly on sampled radii m = r_i * 2^j up to
``max_radius`` and reported as pass, fail, skipped or reported.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

from . import intlinalg
import numpy as np

from .balls import (PowerSequence, ResourceCapExceeded, as_rows, product_set, rows_product, rows_subset,
                    subgroup_closure)
from .free_nilpotent import bass_guivarch, hall_basis
from .groups import (AbelianQuotient, Element, FreeNilpotentGroup, GeneratingSet, Group, HeisenbergQuotient,
                     group_from_json)
from .progression import (KernelSpec, Progression, Projection, as_fraction, enumerate_progression, fraction_str,
                          inj_mod_center, injectivity_radius, power_sequence, saturated_power)

EXACT_GL_ORDERS = {1: 2, 3: 48, 5: 3840}


def finite_gl_bound(d: int) -> int:
    """Upper bound for the largest finite subgroup of GL_d(Z): exact for d = 1, 3, 5, else (2d)!."""
    return EXACT_GL_ORDERS.get(d, math.factorial(2 * d))


def homogeneous_dimension(group: Group) -> int:
    if isinstance(group, AbelianQuotient) and not group.relations:
        return group.rank
    if isinstance(group, HeisenbergQuotient) and group.quotient == "none":
        return 4
    if isinstance(group, FreeNilpotentGroup):
        return bass_guivarch(hall_basis(group.rank, group.nil_class).ranks_by_weight())
    raise ValueError("homogeneous dimension needs a torsion-free raw group")


def nilpotency_class(group: Group) -> int:
    if isinstance(group, AbelianQuotient):
        return 1
    if isinstance(group, HeisenbergQuotient):
        return 2
    if isinstance(group, FreeNilpotentGroup):
        return group.nil_class if group.rank > 1 else 1
    raise ValueError("unknown class")


@dataclass
class FineScaleWitness:
    group: Group
    generators: GeneratingSet
    degree_bound: int
    scales: list[int]
    progressions: list[Progression]
    translates: list[list[Element]]
    inclusion_constant: int  # S^m ⊆ X P^ceil(c m / r)
    inj_ratio_constant: Fraction  # inj P_i within this factor of r_(i+1)/r_i
    dim_constant: Fraction  # |S^m| >= c m^dim |S|
    hdim_constant: Fraction  # |S^m| >= c m^hdim
    injz_constant: Fraction | None = None
    homomorphisms: list[list[Element]] | None = None  # images of raw generators of P_(i-1) in the raw group of P_i
    growth_pieces: list[tuple[list[int], list[int]]] | None = None  # per i: degrees d_ij, interior breaks r_ij
    sqrt_scale_constant: int | None = None

    def to_json(self) -> dict:
        def frac(x):
            return None if x is None else fraction_str(as_fraction(x))
        return {
            "group": self.group.to_json(),
            "generators": self.generators.to_json(),
            "degree_bound": self.degree_bound,
            "scales": list(self.scales),
            "progressions": [p.to_json() for p in self.progressions],
            "translates": [[list(x) for x in xs] for xs in self.translates],
            "inclusion_constant": self.inclusion_constant,
            "inj_ratio_constant": frac(self.inj_ratio_constant),
            "dim_constant": frac(self.dim_constant),
            "hdim_constant": frac(self.hdim_constant),
            "injz_constant": frac(self.injz_constant),
            "homomorphisms": None if self.homomorphisms is None else [[list(g) for g in imgs]
                                                                     for imgs in self.homomorphisms],
            "growth_pieces": None if self.growth_pieces is None else [
                {"degrees": list(d), "breaks": list(b)} for d, b in self.growth_pieces],
            "sqrt_scale_constant": self.sqrt_scale_constant,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "FineScaleWitness":
        group = group_from_json(doc["group"])

        def frac(x):
            return None if x is None else Fraction(x)
        homs = doc.get("homomorphisms")
        pieces = doc.get("growth_pieces")
        return cls(
            group, GeneratingSet.from_json(group, doc["generators"]), int(doc["degree_bound"]),
            [int(r) for r in doc["scales"]], [Progression.from_json(p) for p in doc["progressions"]],
            [[group.canonical(x) for x in xs] for xs in doc["translates"]],
            int(doc["inclusion_constant"]), frac(doc["inj_ratio_constant"]), frac(doc["dim_constant"]),
            frac(doc["hdim_constant"]), frac(doc.get("injz_constant")),
            None if homs is None else [[tuple(g) for g in imgs] for imgs in homs],
            None if pieces is None else [([int(x) for x in p["degrees"]], [int(x) for x in p["breaks"]]) for p in pieces],
            doc.get("sqrt_scale_constant"),
        )


@dataclass
class Verdict:
    status: str  # pass | fail | skipped | reported
    detail: str = ""
    data: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"status": self.status, "detail": self.detail}
        if self.data:
            out["data"] = self.data
        return out


@dataclass
class WitnessReport:
    verdicts: dict[str, Verdict]
    samples: dict[int, list[int]]

    @property
    def failed(self) -> list[str]:
        return [k for k, v in self.verdicts.items() if v.status == "fail"]

    @property
    def ok(self) -> bool:
        return not self.failed

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "sampling": "m = r_i * 2^j for j >= 0 while m <= max_radius",
            "samples": {str(i): ms for i, ms in self.samples.items()},
            "conclusions": {k: v.to_json() for k, v in self.verdicts.items()},
        }


CONCLUSIONS = ("scales", "i", "ii", "iii", "iv", "v", "vi", "vii", "viii", "ix", "x", "xi",
               "xii", "xiii", "xiv", "xv", "xvi")


class _Context:
    """Balls S^m at the sampled radii and powers P_i^k shared by several checks."""

    def __init__(self, w: FineScaleWitness, cap: int, radii: set[int], top: int):
        self.w = w
        self.cap = cap
        seq = PowerSequence(w.group, list(w.generators.elements), cap)
        self.balls = {0: self._snapshot(seq)} if 0 in radii else {}
        while seq.n < top:
            seq.step()
            if seq.truncated:
                raise ResourceCapExceeded("ball exceeded the cap")
            if seq.n in radii:
                self.balls[seq.n] = self._snapshot(seq)
        self.sizes = seq.sizes
        self.powers: dict[tuple[int, int], object] = {}
        self._seqs: dict[int, tuple] = {}
        self.sets = [enumerate_progression(p, cap) for p in w.progressions]

    @staticmethod
    def _snapshot(seq: PowerSequence):
        return seq.current_array() if seq.on_numpy else seq.current

    def power(self, i: int, k: int):
        """P_i^k, as a row array on the numpy path and a set otherwise."""
        if (i, k) not in self.powers:
            seq, h = self._seqs.get(i) or power_sequence(self.w.progressions[i], self.cap)
            if seq.n > k:
                seq, h = power_sequence(self.w.progressions[i], self.cap)
            self._seqs[i] = (seq, h)
            self.powers[(i, k)] = saturated_power(seq.run(k), h, self.cap, rows=True)
        return self.powers[(i, k)]


def _translate(group: Group, xs: Sequence[Element], block):
    """X·B for a set or row array B."""
    if not isinstance(block, np.ndarray):
        return product_set(group, xs, block)
    if list(xs) == [group.identity()]:
        return block
    return rows_product(group, as_rows(xs), block)


def _subset(a, b) -> bool:
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        a = a if isinstance(a, np.ndarray) else as_rows(a)
        b = b if isinstance(b, np.ndarray) else as_rows(b)
        return rows_subset(a, b)
    return a <= b


def _members(block) -> set:
    return set(map(tuple, block.tolist())) if isinstance(block, np.ndarray) else block


def _in_generated(group: Group, gens: Sequence[Element], x: Element, cap: int = 200_000) -> bool | None:
    """Membership of x in <gens>; None when undecided within the budget."""
    if isinstance(group, AbelianQuotient):
        rows = [list(g) for g in gens] + [list(r) for r in group.relations]
        return intlinalg.in_lattice(list(x), intlinalg.hnf(rows, group.rank)) if rows else not any(x)
    try:
        closure = subgroup_closure(group, gens, cap)
    except (ResourceCapExceeded, MemoryError, ValueError):
        return None
    return x in closure


def _generators_in_target(p: Progression) -> list[Element]:
    proj = p.projection
    gens = [proj.project(p.group, u) for u in p.generators]
    return gens + list(proj.h_set)


def verify_witness(w: FineScaleWitness, max_radius: int = 256, cap: int = 5_000_000,
                   inj_search: int = 64) -> WitnessReport:
    g = w.group
    k = len(w.progressions) - 1
    r = w.scales
    out: dict[str, Verdict] = {}
    dims = [p.dim for p in w.progressions]
    hdims = [homogeneous_dimension(p.group) for p in w.progressions]
    samples = {}
    for i, ri in enumerate(r):
        ms, m = [], ri
        while m <= max_radius:
            ms.append(m)
            m *= 2
        samples[i] = ms
    ctx = _Context(w, cap, {m for ms in samples.values() for m in ms}, max_radius)

    ok = all(a < b and b % a == 0 for a, b in zip(r, r[1:])) and len(r) == k + 1 and r[0] >= 1
    out["scales"] = Verdict("pass" if ok else "fail", f"scales {r}: increasing and each divides the next")

    # (i) X_i P_i^floor(m/r_i) ⊆ S^m ⊆ X_i P_i^ceil(c m / r_i)
    bad = []
    for i in range(k + 1):
        xs = w.translates[i]
        for m in samples[i]:
            inner = _translate(g, xs, ctx.power(i, m // r[i]))
            ball = ctx.balls[m]
            outer_k = -(-w.inclusion_constant * m // r[i])
            if not _subset(inner, ball):
                bad.append(f"P_{i}: inner inclusion fails at m={m}")
            elif not _subset(ball, _translate(g, xs, ctx.power(i, outer_k))):
                bad.append(f"P_{i}: S^{m} not inside X P^{outer_k}")
    out["i"] = Verdict("fail" if bad else "pass", "; ".join(bad) or "both inclusions hold on all samples")

    sizes = [len(xs) for xs in w.translates]
    bounds = [finite_gl_bound(d) for d in dims]
    ok = all(s <= b for s, b in zip(sizes, bounds))
    out["ii"] = Verdict("pass" if ok else "fail", f"|X_i| = {sizes}, bounds {bounds}")

    # (iii) word length of each translate below g(dim) - 1
    ident = g.identity()
    needed = {x for xs in w.translates for x in xs if x != ident}
    if not needed:
        out["iii"] = Verdict("pass", "all translates are the identity")
    else:
        limit = min(bounds[i] - 1 for i, xs in enumerate(w.translates) if set(xs) - {ident})
        seq = PowerSequence(g, list(w.generators.elements), cap)
        lengths = {}
        while seq.n < min(limit, max_radius) and len(lengths) < len(needed):
            seq.step()
            for x in needed & seq.newest:
                lengths.setdefault(x, seq.n)
        bad = [i for i, xs in enumerate(w.translates)
               if any(x != ident and lengths.get(x, math.inf) > bounds[i] - 1 for x in xs)]
        if bad and seq.n < limit:
            out["iii"] = Verdict("skipped", f"word lengths beyond the search radius {seq.n}")
        else:
            out["iii"] = Verdict("fail" if bad else "pass", f"word lengths {sorted(lengths.values())}")

    ok = all(set(a) >= set(b) for a, b in zip(w.translates, w.translates[1:]))
    out["iv"] = Verdict("pass" if ok else "fail", "translate sets are nested")

    # (v) distinct translates lie in distinct cosets of <P_i>
    verdict = Verdict("pass", "at most one translate per level")
    for i, xs in enumerate(w.translates):
        gens = _generators_in_target(w.progressions[i])
        for a_idx, a in enumerate(xs):
            for b in xs[a_idx + 1:]:
                same = _in_generated(g, gens, g.multiply(g.inverse(a), b))
                if same is None:
                    verdict = Verdict("skipped", "subgroup membership undecided within budget")
                elif same:
                    verdict = Verdict("fail", f"level {i}: {a} and {b} share a coset")
                    break
            if verdict.status == "fail":
                break
        else:
            if len(xs) > 1 and verdict.status == "pass":
                verdict = Verdict("pass", "translates lie in distinct cosets")
            continue
        break
    out["v"] = verdict

    # (vi) <P_i> ≤ <P_(i+1)>
    status, notes = "pass", []
    for i in range(k):
        nxt = ctx.sets[i + 1] | _members(ctx.power(i + 1, 2))
        gens_next = _generators_in_target(w.progressions[i + 1])
        for x in _generators_in_target(w.progressions[i]):
            if x in nxt:
                continue
            member = _in_generated(g, gens_next, x)
            if member is None:
                status, notes = ("skipped" if status == "pass" else status), notes + [f"{x} undecided"]
            elif not member:
                status, notes = "fail", notes + [f"{x} not in <P_{i + 1}>"]
    out["vi"] = Verdict(status, "; ".join(notes) or "each generator of P_i lies in <P_(i+1)>")

    ok = all(w.progressions[i].projection.h_set <= w.progressions[i + 1].projection.h_set for i in range(k))
    out["vii"] = Verdict("pass" if ok else "fail", "symmetry groups are nested")

    out["viii"] = _check_homomorphisms(w) if w.homomorphisms is not None else Verdict(
        "skipped", "no homomorphism data supplied")

    # (ix) inj P_i comparable to r_(i+1)/r_i, inj P_last infinite
    notes, status, radii = [], "pass", []
    c = as_fraction(w.inj_ratio_constant)
    for i in range(k):
        ratio = Fraction(r[i + 1], r[i])
        j_max = math.floor(c * ratio) + 1
        rad = injectivity_radius(w.progressions[i], j_max, cap)
        radii.append(str(rad))
        if rad.capped or not (ratio / c <= rad.value <= c * ratio):
            status = "fail"
            notes.append(f"inj P_{i} = {rad} against r ratio {fraction_str(ratio)} (factor {fraction_str(c)})")
    last = w.progressions[k].projection
    if last.kernel is not None and last.kernel.kind == "trivial":
        radii.append("inf")
    else:
        rad = injectivity_radius(w.progressions[k], inj_search, cap)
        radii.append(str(rad))
        if not rad.capped:
            status = "fail"
            notes.append(f"inj of the last progression is finite ({rad})")
        else:
            notes.append(f"last progression injective on powers up to {inj_search}")
    out["ix"] = Verdict(status, "; ".join(notes) or "radii match the scale ratios", {"inj": radii})

    ok = w.degree_bound >= dims[0] and all(a > b for a, b in zip(dims, dims[1:]))
    out["x"] = Verdict("pass" if ok else "fail", f"dims {dims}, d = {w.degree_bound}")
    cap_h = w.degree_bound * (w.degree_bound - 1) // 2 + 1
    ok = cap_h >= hdims[0] and all(a > b for a, b in zip(hdims, hdims[1:]))
    out["xi"] = Verdict("pass" if ok else "fail", f"hdims {hdims}, cap {cap_h}")

    # (xii), (xiii) lower volume bounds on the range [r_i, r_(i+1))
    s_size = len(w.generators.elements)
    for key, const, degs, scale in (("xii", w.dim_constant, dims, s_size), ("xiii", w.hdim_constant, hdims, 1)):
        const = as_fraction(const)
        worst = None
        for i in range(k + 1):
            hi = r[i + 1] if i < k else max_radius + 1
            for m in range(r[i], min(hi, max_radius + 1)):
                ratio = Fraction(ctx.sizes[m], m ** degs[i] * scale)
                if worst is None or ratio < worst[0]:
                    worst = (ratio, i, m)
        ok = worst is None or worst[0] >= const
        detail = f"smallest |S^m| / (m^deg{' |S|' if scale > 1 else ''}) = {float(worst[0]):.4g} at m={worst[2]}" \
            if worst else "no radii in range"
        out[key] = Verdict("pass" if ok else "fail", detail + f"; constant {fraction_str(const)}")

    out["xiv"] = _growth_constants(w, ctx, dims, hdims, max_radius)

    if g.is_finite():
        if w.sqrt_scale_constant is None:
            out["xv"] = Verdict("skipped", "no constant supplied for the square-root scale")
        else:
            from .balls import diameter
            diam = diameter(g, w.generators)
            bad = [i for i in range(k + 1) if (r[i + 1] if i < k else math.inf) > w.sqrt_scale_constant * diam ** 0.5
                   and nilpotency_class(w.progressions[i].group) > 1]
            out["xv"] = Verdict("fail" if bad else "pass", f"diameter {diam}; non-abelian at large scale: {bad}")
    else:
        out["xv"] = Verdict("pass", "group is infinite, nothing to check")

    # (xvi) inj^Z P_i >= c r_(i+1)^(c_i/(c_i-1)) / r_i
    if w.injz_constant is None:
        out["xvi"] = Verdict("skipped", "no constant supplied")
    else:
        status, notes = "pass", []
        for i in range(k):
            cls_i = nilpotency_class(w.progressions[i].group)
            if cls_i == 1:
                notes.append(f"P_{i} abelian: every kernel element is central")
                continue
            need = float(w.injz_constant) * r[i + 1] ** (cls_i / (cls_i - 1)) / r[i]
            target = max(1, math.ceil(need))
            rad = inj_mod_center(w.progressions[i], target, cap)
            if not rad.at_least(target):
                status = "fail"
            notes.append(f"inj^Z P_{i} = {rad}, needed {target}")
        out["xvi"] = Verdict(status, "; ".join(notes))
    return WitnessReport(out, samples)


def _check_homomorphisms(w: FineScaleWitness) -> Verdict:
    notes = []
    for i in range(1, len(w.progressions)):
        prev, cur = w.progressions[i - 1], w.progressions[i]
        images = [cur.group.canonical(x) for x in w.homomorphisms[i - 1]]
        if len(images) != prev.dim:
            return Verdict("fail", f"beta_{i} needs one image per generator of P_{i - 1}")
        target = cur.projection.target
        h = cur.projection.h_set
        for u, b in zip(prev.generators, images):
            a_img = prev.projection.project(prev.group, u)
            b_img = cur.projection.project(cur.group, b)
            if target.multiply(target.inverse(a_img), b_img) not in h:
                return Verdict("fail", f"beta_{i}: square fails on generator {u}")
        # surjectivity of the induced Lie map, read off the abelianised images
        if isinstance(cur.group, AbelianQuotient):
            rows = images
            need = cur.group.rank
        elif isinstance(cur.group, HeisenbergQuotient):
            rows, need = [x[:2] for x in images], 2
        else:
            notes.append(f"beta_{i}: surjectivity not checked for this raw group")
            continue
        if intlinalg.rank(rows) < need:
            return Verdict("fail", f"beta_{i} is not surjective")
    return Verdict("pass", "; ".join(notes) or "every square commutes on generators; maps are onto")


def _growth_constants(w, ctx, dims, hdims, max_radius) -> Verdict:
    if w.growth_pieces is None:
        return Verdict("skipped", "no growth pieces supplied")
    k = len(w.progressions) - 1
    data, structural = {}, []
    for i, (degs, breaks) in enumerate(w.growth_pieces):
        starts = [w.scales[i]] + list(breaks)
        # the last level is unbounded; sampling stops at max_radius below
        end = w.scales[i + 1] if i < k else math.inf
        if len(degs) != len(starts) or any(a >= b for a, b in zip(starts, starts[1:] + [end])) \
                or any(a >= b for a, b in zip(degs, degs[1:])) or degs[0] < dims[i] or degs[-1] > hdims[i] \
                or len(degs) > hdims[i] - dims[i] + 1:
            structural.append(i)
            continue
        lo, hi = math.inf, 0.0
        for start, d, stop in zip(starts, degs, starts[1:] + [end]):
            for m in range(start, min(stop, max_radius + 1)):
                v = ctx.sizes[m] / ctx.sizes[start] / (m / start) ** d
                lo, hi = min(lo, v), max(hi, v)
        if hi:
            data[str(i)] = [round(lo, 6), round(hi, 6)]
    if structural:
        return Verdict("fail", f"piece data inconsistent at levels {structural}", data)
    return Verdict("reported", "empirical range of |S^m|/|S^r| / (m/r)^d per level", data)


# ---------------------------------------------------------------------------
# hand-built witnesses


def cyclic_strip_witness(modulus: int = 64) -> FineScaleWitness:
    """Z x Z_m with the standard generators: quadratic up to scale m, linear after."""
    g = AbelianQuotient(2, [[0, modulus]])
    s = GeneratingSet.build(g, g.standard_generators())
    raw2 = AbelianQuotient(2, [])
    p0 = Progression(raw2, ((1, 0), (0, 1)), (1, 1),
                     Projection(g, "reduce", kernel=KernelSpec("lattice", rows=((0, modulus),))))
    raw1 = AbelianQuotient(1, [])
    fibre = tuple(g.canonical((0, b)) for b in range(modulus))
    p1 = Progression(raw1, ((1,),), (modulus // 2,),
                     Projection(g, "images", ((1, 0),), fibre, KernelSpec("trivial")))
    return FineScaleWitness(
        g, s, 2, [2, modulus], [p0, p1], [[g.identity()], [g.identity()]],
        inclusion_constant=4, inj_ratio_constant=Fraction(4), dim_constant=Fraction(1, 8),
        hdim_constant=Fraction(1, 8), injz_constant=Fraction(1),
        homomorphisms=[[(1,), (0,)]],
        growth_pieces=[([2], []), ([1], [])],
    )


def heisenberg_central_witness(modulus: int = 64, r0: int = 8, r1: int = 32, length: int = 5) -> FineScaleWitness:
    """Heisenberg group modulo <z^m>: full Heisenberg progression at small scales, the plane above."""
    g = HeisenbergQuotient("central", modulus)
    s = GeneratingSet.build(g, g.standard_generators())
    raw = HeisenbergQuotient("none", 0)
    p0 = Progression(raw, ((1, 0, 0), (0, 1, 0), (0, 0, 1)), (2, 2, 1),
                     Projection(g, "reduce", kernel=KernelSpec("central", modulus)))
    centre = tuple(g.canonical((0, 0, c)) for c in range(modulus))
    p1 = Progression(AbelianQuotient(2, []), ((1, 0), (0, 1)), (length, length),
                     Projection(g, "images", ((1, 0, 0), (0, 1, 0)), centre, KernelSpec("trivial")))
    return FineScaleWitness(
        g, s, 3, [r0, r1], [p0, p1], [[g.identity()], [g.identity()]],
        inclusion_constant=8, inj_ratio_constant=Fraction(8), dim_constant=Fraction(1, 64),
        hdim_constant=Fraction(1, 64), injz_constant=Fraction(1, 8),
        homomorphisms=[[(1, 0), (0, 1), (0, 0)]],
        growth_pieces=[([3], []), ([2], [])],
    )


def corrupt(w: FineScaleWitness, field_name: str) -> FineScaleWitness:
    """A copy of ``w`` with one field broken; used as negative controls."""
    if field_name == "scales":
        return replace(w, scales=w.scales[:-1] + [w.scales[-1] + 1])
    if field_name == "inclusion_constant":
        return replace(w, inclusion_constant=1)
    if field_name == "kernel":
        p0 = w.progressions[0]
        proj = replace(p0.projection, kernel=KernelSpec("trivial"))
        return replace(w, progressions=[replace(p0, projection=proj)] + w.progressions[1:])
    if field_name == "homomorphisms":
        first = [tuple(2 * c for c in x) for x in w.homomorphisms[0]]
        return replace(w, homomorphisms=[first] + w.homomorphisms[1:])
    if field_name == "dim_constant":
        return replace(w, dim_constant=Fraction(10 ** 6))
    if field_name == "hdim_constant":
        return replace(w, hdim_constant=Fraction(10 ** 6))
    raise ValueError(f"unknown field {field_name!r}")


CORRUPTIONS = {
    "scales": "scales",
    "inclusion_constant": "i",
    "kernel": "ix",
    "homomorphisms": "viii",
    "dim_constant": "xii",
    "hdim_constant": "xiii",
}
