"""Registered verification suites driven by ``growth-lab verify``.

Each suite returns a ``SuiteReport`` whose checks are exact (integer or
rational) comparisons; randomized suites take a seed.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import intlinalg
from .balls import ball_profile, diameter
from .catalog import CATALOG, catalog_progressions, check_fact, lookup
from .groups import AbelianQuotient, HeisenbergQuotient, cyclic_table
from .growth import (SymmetricBody, cramer_selection, evaluate_polynomial, monomial_envelope,
                     sumset_and_quotient_bounds, van_der_corput_check)
from .progression import (KernelSpec, Progression, Projection, check_upper_triangular, inj_mod_center,
                          injectivity_radius, progression_identities_check)
from .topology import FiniteGraph, local_hom_counterexample, new_relation_scales_abelian, pk_h1_rank


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "ok": self.ok, "detail": self.detail}


@dataclass
class SuiteReport:
    suite: str
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append(Check(name, bool(ok), detail))

    def to_json(self) -> dict:
        return {"suite": self.suite, "ok": self.ok, "passed": len(self.checks) - len(self.failures),
                "total": len(self.checks), "checks": [c.to_json() for c in self.checks]}


# ---------------------------------------------------------------------------
# ball and sphere bounds

FINITE_SPHERE_GROUPS = ("zmod:6", "zmod:100", "prod:4,64", "prod:8,16", "prod:4,16,64", "heisenberg-full:5")
INFINITE_SPHERE_GROUPS = {"z": 40, "z^2": 20, "heisenberg": 12, "heisenberg-modxz:12": 12,
                          "filiform:4": 8, "semidirect-sign": 12, "semidirect-square": 12, "free:2,3": 4}


def _sphere_checks(report: SuiteReport, name: str, beta: list[int], size_s: int, diam: int | None) -> None:
    top = len(beta) - 1 if diam is None else diam
    sigma_low = [n for n in range(1, top if diam is not None else top + 1) if beta[n] - beta[n - 1] < 2]
    report.add(f"{name}: sphere has >= 2 points below the diameter", not sigma_low,
               f"violations at {sigma_low[:5]}" if sigma_low else f"n = 1..{top - (diam is not None)}")
    lin_low = [n for n in range(top + 1) if 3 * beta[n] < size_s * n]
    report.add(f"{name}: 3 beta(n) >= |S| n", not lin_low,
               f"violations at {lin_low[:5]}" if lin_low else f"n = 0..{top}")
    if diam is not None:
        report.add(f"{name}: |G| >= 2 diam", beta[-1] >= 2 * diam, f"|G| = {beta[-1]}, diam = {diam}")


def sphere_bounds_suite(seed: int = 0) -> SuiteReport:
    report = SuiteReport("sphere-bounds")
    for name in FINITE_SPHERE_GROUPS:
        e = lookup(name)
        diam = diameter(e.group, e.generators)
        beta = ball_profile(e.group, e.generators, diam).beta
        _sphere_checks(report, name, beta, len(e.generators.elements), diam)
    for n in (5, 9):
        g = cyclic_table(n)
        s = [(0,), (1,), (n - 1,)]
        diam = diameter(g, s)
        _sphere_checks(report, f"table:C{n}", ball_profile(g, s, diam).beta, len(s), diam)
    for name, radius in INFINITE_SPHERE_GROUPS.items():
        e = lookup(name)
        beta = ball_profile(e.group, e.generators, radius).beta
        _sphere_checks(report, name, beta, len(e.generators.elements), None)
    return report


# ---------------------------------------------------------------------------
# exact lemma checks


def _random_box(rng: random.Random) -> SymmetricBody:
    d = rng.randint(1, 3)
    return SymmetricBody.box([Fraction(rng.randint(0, 40), rng.randint(1, 10)) for _ in range(d)])


def _random_zonotope(rng: random.Random) -> SymmetricBody:
    d = rng.randint(1, 3)
    while True:
        gens = [[rng.randint(-3, 3) for _ in range(d)] for _ in range(rng.randint(d, d + 2))]
        if intlinalg.rank(gens) == d:
            return SymmetricBody.zonotope(gens)


def _random_polynomial(rng: random.Random) -> dict[int, Fraction]:
    degrees = rng.sample(range(0, 8), rng.randint(1, 5))
    return {k: Fraction(rng.randint(1, 1000), rng.randint(1, 50)) for k in degrees}


def lemmas_suite(seed: int = 0) -> SuiteReport:
    rng = random.Random(seed)
    report = SuiteReport("lemmas")

    bad = []
    for t in range(50):
        dim = rng.randint(1, 2)
        group = AbelianQuotient(dim, [])
        a = {tuple(rng.randint(-6, 6) for _ in range(dim)) for _ in range(rng.randint(1, 12))}
        b = {tuple(rng.randint(-6, 6) for _ in range(dim)) for _ in range(rng.randint(1, 12))}
        r = sumset_and_quotient_bounds(group, a, b)
        if r.sumset_margin < 0:
            bad.append(t)
    report.add("|A+B| >= |A|+|B|-1 on 50 random pairs in Z and Z^2", not bad, f"failures {bad}")

    bad = []
    for t in range(50):
        body = _random_box(rng) if t % 2 == 0 else _random_zonotope(rng)
        r = van_der_corput_check(body)
        if not r.ok:
            bad.append((t, body.kind, r.lattice_points, str(r.bound)))
    report.add("lattice points >= vol/2^d on 25 boxes and 25 zonotopes", not bad, f"failures {bad[:3]}")

    bad = []
    for t in range(50):
        d = rng.randint(1, 3)
        while True:
            vectors = [[rng.randint(-4, 4) for _ in range(d)] for _ in range(rng.randint(d, d + 3))]
            if intlinalg.rank(vectors) == d:
                break
        lengths = [rng.randint(1, 6) for _ in vectors]
        cert = cramer_selection(vectors, lengths)
        if not cert.ok:
            bad.append(t)
    report.add("Cramer certificates have every coefficient in [-1, 1]", not bad, f"failures {bad}")

    bad = []
    for t in range(100):
        poly = _random_polynomial(rng)
        h = monomial_envelope(poly)
        terms = sum(1 for c in poly.values() if c)
        for _ in range(50):
            x = Fraction(rng.randint(1000, 10 ** 6), 1000)
            hx, fx = h.exact_value(x), evaluate_polynomial(poly, x)
            if not (hx <= fx <= terms * hx) or hx != max(c * x ** k for k, c in poly.items()):
                bad.append((t, str(x)))
                break
    report.add("envelope h <= f <= (terms) h at 50 points for 100 polynomials", not bad, f"failures {bad[:3]}")

    for name, p in catalog_progressions().items():
        r = progression_identities_check(p)
        report.add(f"{name}: P^-1 inside P^d", r["inverse_ok"], f"depth {r['inverse_depth']}")
        report.add(f"{name}: P(u; 2L) inside P^(4d)", r["dilate_ok"], f"depth {r['dilate_depth']}")

    cx = local_hom_counterexample(3)
    report.add("representatives of Z/7 in {-3..3} fail to be a local homomorphism", not cx.ok,
               str(cx.failure))
    return report


# ---------------------------------------------------------------------------
# injectivity radii


def cyclic_reduction(modulus: int, length: int) -> Progression:
    """P(1; L) in Z pushed to Z/m."""
    return Progression(AbelianQuotient(1, []), ((1,),), (length,),
                       Projection(AbelianQuotient(1, [[modulus]]), "reduce",
                                  kernel=KernelSpec("lattice", modulus, ((modulus,),))))


CYCLIC_PAIRS = ((2, 1), (3, 1), (5, 2), (7, 3), (8, 4), (9, 2), (10, 3), (12, 5), (13, 4), (16, 3),
                (17, 6), (20, 7), (21, 7), (24, 5), (30, 8), (31, 2), (40, 9), (50, 11), (64, 10), (99, 13))


def injectivity_suite(seed: int = 0) -> SuiteReport:
    report = SuiteReport("injectivity")
    for m, length in CYCLIC_PAIRS:
        expected = -(-m // length) - 1
        got = injectivity_radius(cyclic_reduction(m, length), expected + 2)
        report.add(f"Z -> Z/{m}, L={length}", not got.capped and got.value == expected,
                   f"inj = {got}, closed form {expected}")
    return report


# Below this injectivity radius the implication fails on the instances below
# (L = 2 with inj = 1 leaves inj^Z = 1); from 2 on it held on every instance.
PROPER_CENTER_THRESHOLD = 2
PROPER_CENTER_INSTANCES = {1: (3, 4, 5, 6, 8, 10, 13, 17, 20), 2: (6, 8, 10, 14, 18, 24, 32, 48)}


def heisenberg_box(length: int, quotient: str, modulus: int) -> Progression:
    """P(x, y, z; L, L, L^2) pushed to a Heisenberg quotient."""
    kernel = KernelSpec("normal-xz" if quotient == "normal" else "central", modulus)
    return Progression(HeisenbergQuotient("none", 0), ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
                       (length, length, length * length),
                       Projection(HeisenbergQuotient(quotient, modulus), "reduce", kernel=kernel))


def proper_center_suite(seed: int = 0) -> SuiteReport:
    """inj P >= threshold and all lengths >= m imply inj^Z P >= m, in class 2.

    The quotients by <x^M, z^M> have non-central kernels and carry the
    content; the quotients by <z^M> have central kernels, so inj^Z is
    unbounded there.
    """
    report = SuiteReport("proper-center")
    premise_hits = 0
    below: list[bool] = []
    for quotient, table in (("normal", PROPER_CENTER_INSTANCES), ("central", {1: (4, 9), 2: (8, 16)})):
        for length, moduli in table.items():
            for modulus in moduli:
                p = heisenberg_box(length, quotient, modulus)
                tri = check_upper_triangular(p.group, p.generators, p.lengths, c_max=1)
                inj = injectivity_radius(p, PROPER_CENTER_THRESHOLD)
                if not (tri.ok and inj.at_least(PROPER_CENTER_THRESHOLD)):
                    if quotient == "normal" and inj.value == PROPER_CENTER_THRESHOLD - 1:
                        below.append(inj_mod_center(p, length).at_least(length))
                    report.add(f"{quotient} M={modulus} L={length}: premise not met, skipped", True,
                               f"upper-triangular {tri.ok}, inj {inj}")
                    continue
                premise_hits += 1
                injz = inj_mod_center(p, length)
                report.add(f"{quotient} M={modulus} L={length}: inj^Z >= {length}", injz.at_least(length),
                           f"inj {inj}, inj^Z {injz}")
    report.add("premise met on at least 10 instances", premise_hits >= 10, f"{premise_hits} instances")
    report.add("a smaller threshold would fail", not all(below),
               f"{below.count(False)} of {len(below)} instances one below the threshold break the implication")
    return report


# ---------------------------------------------------------------------------
# relation scales and coarse topology


def _cyclic_product(moduli) -> AbelianQuotient:
    return AbelianQuotient(len(moduli), [[m if i == j else 0 for j in range(len(moduli))]
                                         for i, m in enumerate(moduli)])


# factors of order 2 are excluded: their relation has length 2, below the first counted scale
DISTINCT_POWER_PRODUCTS = ((4, 8), (4, 32), (8, 64), (16, 32), (4, 8, 16), (4, 16, 64), (8, 32, 128))


def relation_scales_suite(seed: int = 0) -> SuiteReport:
    report = SuiteReport("relation-scales")
    for moduli, expected in {(100,): [7], (4, 64): [2, 6], (8, 16): [3, 4], (4, 16, 64): [2, 4, 6]}.items():
        scales = new_relation_scales_abelian(_cyclic_product(moduli), n_max=10)
        report.add(f"{'x'.join(f'Z{m}' for m in moduli)} -> {expected}", scales == expected, str(scales))
    for moduli in DISTINCT_POWER_PRODUCTS:
        scales = new_relation_scales_abelian(_cyclic_product(moduli), n_max=10)
        report.add(f"{'x'.join(f'Z{m}' for m in moduli)}: one new scale per factor",
                   len(scales) == len(moduli), str(scales))
    report.add("Z -> no new scales", new_relation_scales_abelian(AbelianQuotient(1, []), n_max=10) == [])
    return report


def lssc_suite(seed: int = 0) -> SuiteReport:
    report = SuiteReport("lssc")
    for n in (5, 8, 12):
        ranks = {k: pk_h1_rank(FiniteGraph.cycle(n), k).rank for k in range(3, n + 2)}
        bad = {k: r for k, r in ranks.items() if r != int(k < n)}
        report.add(f"C{n}: H1 rank is 1 exactly below k = {n}", not bad, f"mismatches {bad}" if bad else "")
    report.add("3x3 grid: H1 rank 0 at k=4", pk_h1_rank(FiniteGraph.grid(3, 3), 4).rank == 0)
    return report


def catalog_suite(seed: int = 0) -> SuiteReport:
    report = SuiteReport("catalog")
    for name in CATALOG:
        entry = lookup(name)
        for fact in entry.facts:
            ok, observed = check_fact(entry, fact)
            report.add(f"{name}: {fact.kind} = {fact.value} ({fact.source})", ok, f"observed {observed}")
    return report


SUITES: dict[str, Callable[[int], SuiteReport]] = {
    "sphere-bounds": sphere_bounds_suite,
    "lemmas": lemmas_suite,
    "injectivity": injectivity_suite,
    "proper-center": proper_center_suite,
    "relation-scales": relation_scales_suite,
    "lssc": lssc_suite,
    "catalog": catalog_suite,
}


def run_suite(name: str, seed: int = 0) -> SuiteReport:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {', '.join(SUITES)}")
    return SUITES[name](seed)
