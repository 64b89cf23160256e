"""Acceptance criteria, one test and one summary line per criterion.

Tolerances are fixed here and never adjusted to make a run pass.
"""
import math
import random
import time

import pytest

from conftest import ACCEPTANCE_LINES
from growthlab.balls import PowerSequence, ball_profile
from growthlab.catalog import lookup
from growthlab.free_nilpotent import collect
from growthlab.groups import FreeNilpotentGroup, HeisenbergQuotient
from growthlab.growth import evaluate_polynomial, fit_growth, growth_polynomial, heisenberg_bracket, nilbox
from growthlab.progression import Progression, progression_power
from growthlab.suites import run_suite
from growthlab.topology import FiniteGraph, new_relation_scales_abelian, pk_h1_rank
from growthlab.groups import AbelianQuotient
from growthlab.witness import CORRUPTIONS, corrupt, cyclic_strip_witness, heisenberg_central_witness, verify_witness

import oracles

DEGREE_WINDOW = (3.5, 4.5)
DEGREE_SECONDS = 60
THIN_BOX_CONSTANT = 200
FIT_SECONDS = 30
FIT_BOUNDARY_FACTOR = 4
RATIO_WINDOW = (1 / 8, 8)
WITNESS_RADIUS = 64


def record(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {number:>2} {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_01_heisenberg_growth_degree():
    start = time.perf_counter()
    e = lookup("heisenberg")
    beta = ball_profile(e.group, e.generators, 32).beta
    degrees = {n: math.log2(beta[2 * n] / beta[n]) for n in (8, 12, 16)}
    elapsed = time.perf_counter() - start
    ok = all(DEGREE_WINDOW[0] <= d <= DEGREE_WINDOW[1] for d in degrees.values()) and elapsed < DEGREE_SECONDS
    record(1, "Heisenberg dyadic degree", ok,
           ", ".join(f"n={n}: {d:.4f}" for n, d in degrees.items()) + f" in {DEGREE_WINDOW}; {elapsed:.1f}s")


def test_02_thin_box_growth():
    parts, ok = [], True
    for n in (4, 8, 16):
        e = lookup(f"thinbox:{n}")
        size_s = len(e.generators.elements)
        power = ball_profile(e.group, e.generators, n).beta[n]
        bound = THIN_BOX_CONSTANT * n ** 3 * size_s
        ok &= power <= bound
        parts.append(f"n={n}: |S^n|={power} <= {bound} (ratio {power / (n ** 3 * size_s):.3f})")
    record(2, "thin box |S_n^n| <= 200 n^3 |S_n|", ok, "; ".join(parts))


def test_03_powers_of_32():
    e = lookup("zpowers:32,3")
    beta = ball_profile(e.group, e.generators, 15).beta
    ok = all(beta[n] >= n ** 3 for n in (8, 15))
    record(3, "Z with {0, ±1, ±32, ±1024}", ok, f"|S^8|={beta[8]} >= 512, |S^15|={beta[15]} >= 3375")


def test_04_cyclic_product_fit():
    start = time.perf_counter()
    e = lookup("prod:4,16,64")
    fit = fit_growth(ball_profile(e.group, e.generators, 128))
    elapsed = time.perf_counter() - start
    f = fit.function
    breaks = [float(b) for b in f.boundaries[1:-1]]
    near = len(breaks) == 3 and all(1 / FIT_BOUNDARY_FACTOR <= b / t <= FIT_BOUNDARY_FACTOR
                                    for b, t in zip(breaks, (4, 16, 64)))
    ok = f.degrees == [3, 2, 1, 0] and fit.decreases == 3 and near and elapsed < FIT_SECONDS
    record(4, "Z4 x Z16 x Z64 fit", ok,
           f"degrees {f.degrees}, decreases {fit.decreases}, breaks {breaks} vs (4, 16, 64); {elapsed:.1f}s")


def test_05_growth_polynomial_against_powers():
    h = HeisenbergQuotient("none", 0)
    box = nilbox([(1, 0, 0), (0, 1, 0), (0, 0, 1)], (1, 1, 1), 2, heisenberg_bracket)
    poly = growth_polynomial(box.vectors, box.degrees, box.lengths)
    p = Progression(h, ((1, 0, 0), (0, 1, 0), (0, 0, 1)), (1, 1, 1))
    ratios = {n: len(progression_power(p, n)) / float(evaluate_polynomial(poly, n)) for n in range(4, 17)}
    ok = all(RATIO_WINDOW[0] <= r <= RATIO_WINDOW[1] for r in ratios.values())
    record(5, "|P^n| / f(n) for Heisenberg P(x,y,z;1,1,1)", ok,
           f"f = {' + '.join(f'{c}x^{k}' for k, c in poly.items())}; ratios in "
           f"[{min(ratios.values()):.3f}, {max(ratios.values()):.3f}] for n=4..16")


def test_06_lemma_suites():
    reports = [run_suite("sphere-bounds"), run_suite("lemmas")]
    failed = [c.name for r in reports for c in r.failures]
    total = sum(len(r.checks) for r in reports)
    record(6, "exact lemma suites", not failed, f"{total - len(failed)}/{total} checks" +
           (f"; failing {failed}" if failed else ""))


def test_07_injectivity_and_proper_center():
    reports = [run_suite("injectivity"), run_suite("proper-center")]
    failed = [c.name for r in reports for c in r.failures]
    detail = ", ".join(f"{r.suite} {len(r.checks) - len(r.failures)}/{len(r.checks)}" for r in reports)
    record(7, "injectivity radii and proper centre", not failed, detail + (f"; failing {failed}" if failed else ""))


def test_08_simple_connectedness():
    bad = []
    for n in (5, 8, 12):
        for k in range(3, n + 2):
            rank = pk_h1_rank(FiniteGraph.cycle(n), k).rank
            if rank != int(k < n):
                bad.append((n, k, rank))
    grid = pk_h1_rank(FiniteGraph.grid(3, 3), 4).rank
    ok = not bad and grid == 0
    record(8, "H1 of filled cycles and grid", ok, f"cycle mismatches {bad}, 3x3 grid rank {grid} at k=4")


def _cyclic_product(moduli):
    return AbelianQuotient(len(moduli), [[m if i == j else 0 for j in range(len(moduli))]
                                         for i, m in enumerate(moduli)])


def test_09_relation_scales():
    got = {m: new_relation_scales_abelian(_cyclic_product(m), n_max=10) for m in ((100,), (4, 64))}
    counts = {m: len(new_relation_scales_abelian(_cyclic_product(m), n_max=10))
              for m in ((4, 8), (16, 64), (4, 8, 16), (4, 32, 128))}
    ok = got[(100,)] == [7] and got[(4, 64)] == [2, 6] and all(c == len(m) for m, c in counts.items())
    record(9, "new relation scales", ok, f"Z100 {got[(100,)]}, Z4xZ64 {got[(4, 64)]}, "
           + ", ".join(f"{'x'.join(map(str, m))}: {c} scales" for m, c in counts.items()))


@pytest.mark.parametrize("name,build", [("Z x Z64", cyclic_strip_witness),
                                        ("Heisenberg mod z^64", heisenberg_central_witness)])
def test_10_witness_verifier(name, build):
    start = time.perf_counter()
    w = build()
    base = verify_witness(w, max_radius=WITNESS_RADIUS)
    isolated = {}
    for field_name, conclusion in CORRUPTIONS.items():
        isolated[field_name] = verify_witness(corrupt(w, field_name), max_radius=WITNESS_RADIUS).failed
    ok = base.ok and all(isolated[f] == [c] for f, c in CORRUPTIONS.items())
    wrong = {f: v for f, v in isolated.items() if v != [CORRUPTIONS[f]]}
    record(10, f"witness verifier, {name}", ok,
           f"base {'passes' if base.ok else 'fails ' + str(base.failed)}; "
           f"{len(CORRUPTIONS) - len(wrong)}/{len(CORRUPTIONS)} corruptions fail exactly their conclusion"
           + (f"; wrong {wrong}" if wrong else "") + f"; {time.perf_counter() - start:.0f}s")


def test_11_oracle_equivalence():
    rng = random.Random(0)
    mismatches = 0
    for _ in range(1000):
        word = [rng.choice([1, -1, 2, -2]) for _ in range(rng.randint(0, 24))]
        if oracles.free22_matrix(*collect(word, 2, 2).exponents) != oracles.matrix_word(word):
            mismatches += 1
    c = 3
    g = FreeNilpotentGroup(2, c)
    series = oracles.basic_series(g.basis.to_json()["entries"], c)
    seq = PowerSequence(g, [g.identity()] + [x for s in g.standard_generators() for x in (s, g.inverse(s))])
    balls_ok = True
    for radius in range(1, 5):
        seq.step()
        ball = {oracles.freeze(oracles.malcev_series(e, series, c)) for e in seq.current}
        by_words = {oracles.freeze(oracles.word_series(w, c)) for w in oracles.words(2, radius)}
        balls_ok &= ball == by_words
    record(11, "oracle equivalence", mismatches == 0 and balls_ok,
           f"{1000 - mismatches}/1000 words match the matrix model; free(2,3) balls r<=4 "
           f"{'match' if balls_ok else 'differ from'} word enumeration")
