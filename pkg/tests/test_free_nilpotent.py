import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from growthlab.free_nilpotent import (arithmetic, bass_guivarch, bch_structure, collect, hall_basis, multiply,
                                      rational_power, MalcevElement)
from growthlab.groups import FreeNilpotentGroup

import oracles


def test_hall_basis_small_cases():
    b = hall_basis(2, 2)
    assert [b.label(i) for i in range(len(b))] == ["x1", "x2", "[x2,x1]"]
    assert len(hall_basis(2, 3)) == 5
    assert hall_basis(2, 3).ranks_by_weight() == [2, 1, 2]
    assert len(hall_basis(1, 5)) == 1


@pytest.mark.parametrize("r", [1, 2, 3])
@pytest.mark.parametrize("c", [1, 2, 3, 4, 5])
def test_hall_basis_sizes_are_witt_numbers(r, c):
    assert hall_basis(r, c).ranks_by_weight() == [oracles.witt(r, k) for k in range(1, c + 1)]


@pytest.mark.parametrize("r,c", [(2, 3), (3, 3), (2, 5)])
def test_hall_basis_structure(r, c):
    b = hall_basis(r, c)
    assert len(b) <= (4 * r) ** c
    assert [e.index for e in b.entries[:r]] == list(range(r))
    for e in b.entries[r:]:
        assert e.left > e.right
        left = b.entries[e.left]
        if left.right is not None:
            assert e.right >= left.right
        assert e.weight == left.weight + b.entries[e.right].weight
    # equal weight vectors sit together
    seen, last = set(), None
    for e in b.entries:
        if e.chi != last:
            assert e.chi not in seen
            seen.add(e.chi)
            last = e.chi


def test_hall_basis_size_cap():
    with pytest.raises(MemoryError):
        hall_basis(10, 8, size_cap=1000)


def test_collect_examples():
    assert collect([2, 1], 2, 2).exponents == (1, 1, 1)
    assert collect([], 2, 2).exponents == (0, 0, 0)
    assert collect([1, 2, -1, -2], 2, 2).exponents == (0, 0, -1)
    a = MalcevElement(2, 2, (1, 0, 0))
    b = MalcevElement(2, 2, (0, 1, 0))
    assert multiply(a, b).exponents == (1, 1, 0)
    assert multiply(b, a).exponents == (1, 1, 1)


def test_collect_matches_matrix_model_on_1000_words():
    rng = random.Random(0)
    for _ in range(1000):
        word = [rng.choice([1, -1, 2, -2]) for _ in range(rng.randint(0, 24))]
        a, b, c = collect(word, 2, 2).exponents
        assert oracles.free22_matrix(a, b, c) == oracles.matrix_word(word)


word_st = st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), max_size=20)


@settings(max_examples=60, deadline=None)
@given(word_st, word_st, st.sampled_from([(2, 2), (2, 3), (3, 3), (2, 4), (3, 4)]))
def test_collect_is_a_homomorphism(w1, w2, rc):
    r, c = rc
    w1 = [x for x in w1 if abs(x) <= r]
    w2 = [x for x in w2 if abs(x) <= r]
    left = collect(w1 + w2, r, c)
    assert left == multiply(collect(w1, r, c), collect(w2, r, c))


@pytest.mark.parametrize("r,c", [(2, 3), (3, 2), (2, 4)])
def test_collect_matches_magnus_oracle(r, c):
    entries = hall_basis(r, c).to_json()["entries"]
    series = oracles.basic_series(entries, c)
    rng = random.Random(r * 10 + c)
    for _ in range(60):
        word = [rng.choice([k for i in range(1, r + 1) for k in (i, -i)]) for _ in range(rng.randint(0, 12))]
        exps = collect(word, r, c).exponents
        assert oracles.malcev_series(exps, series, c) == oracles.word_series(word, c)


def test_ball_sets_match_word_enumeration_in_free_2_3():
    """Every word of length <= 4 evaluated by the tensor model, against the BFS ball."""
    from growthlab.balls import PowerSequence
    c = 3
    g = FreeNilpotentGroup(2, c)
    series = oracles.basic_series(g.basis.to_json()["entries"], c)
    gens = [g.identity()] + [x for s in g.standard_generators() for x in (s, g.inverse(s))]
    seq = PowerSequence(g, gens)
    for radius in range(1, 5):
        seq.step()
        ball = {oracles.freeze(oracles.malcev_series(e, series, c)) for e in seq.current}
        by_words = {oracles.freeze(oracles.word_series(w, c)) for w in oracles.words(2, radius)}
        assert ball == by_words


def test_bass_guivarch_examples():
    assert bass_guivarch([2, 1]) == 4
    assert bass_guivarch([5]) == 5
    for d in range(2, 7):
        assert bass_guivarch([2] + [1] * (d - 2)) == 1 + d * (d - 1) // 2


def _random_coords(rng, d, integral=False):
    if integral:
        return [Fraction(rng.randint(-3, 3)) for _ in range(d)]
    return [Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in range(d)]


def test_bch_low_class_closed_forms():
    rng = random.Random(1)
    for c in (1, 2, 3):
        lie = bch_structure(2, c)
        for _ in range(20):
            x, y = _random_coords(rng, lie.d), _random_coords(rng, lie.d)
            xy = lie.bracket(x, y)
            expected = [a + b + q / 2 for a, b, q in zip(x, y, xy)]
            if c >= 3:
                xxy, yxy = lie.bracket(x, xy), lie.bracket(y, xy)
                expected = [e + p / 12 - q / 12 for e, p, q in zip(expected, xxy, yxy)]
            assert lie.bch(x, y) == expected


def test_bch_coefficient_of_x_x_y_is_one_twelfth():
    lie = bch_structure(2, 3)
    x, y = [Fraction(1), 0, 0, 0, 0], [0, Fraction(1), 0, 0, 0]
    xy = lie.bracket(x, y)
    xxy, yxy = lie.bracket(x, xy), lie.bracket(y, xy)
    k = next(i for i in range(lie.d) if xxy[i] and not yxy[i])
    assert lie.bch(x, y)[k] == xxy[k] / 12


@pytest.mark.parametrize("r,c", [(2, 2), (2, 3), (3, 3)])
def test_jacobi_identity_on_basis(r, c):
    lie = bch_structure(r, c)
    units = [[Fraction(int(i == j)) for j in range(lie.d)] for i in range(lie.d)]
    for a in units:
        for b in units:
            for e in units:
                total = [sum(t) for t in zip(lie.bracket(a, lie.bracket(b, e)),
                                             lie.bracket(b, lie.bracket(e, a)),
                                             lie.bracket(e, lie.bracket(a, b)))]
                assert not any(total)


@pytest.mark.parametrize("r,c", [(2, 2), (2, 3), (3, 2)])
def test_exp_log_round_trip_and_bch_group_law(r, c):
    ar = arithmetic(r, c)
    lie = bch_structure(r, c)
    rng = random.Random(7)
    for _ in range(200):
        v = _random_coords(rng, lie.d)
        assert ar.log(ar.exp(v)) == v
    for _ in range(40):
        a = tuple(rng.randint(-3, 3) for _ in range(lie.d))
        b = tuple(rng.randint(-3, 3) for _ in range(lie.d))
        via_bch = ar.exp(lie.bch(ar.log(a), ar.log(b)))
        assert tuple(Fraction(x) for x in via_bch) == tuple(Fraction(x) for x in ar.multiply(a, b))


def test_rational_powers():
    a = MalcevElement(2, 2, (1, 0, 0))
    assert rational_power(a, 2).exponents == (2, 0, 0)
    assert multiply(MalcevElement(2, 2, (1, 1, 0)), MalcevElement(2, 2, (1, 1, 0))).exponents == (2, 2, 1)
    assert tuple(rational_power(MalcevElement(2, 2, (2, 2, 1)), Fraction(1, 2)).exponents) == (1, 1, 0)
    rng = random.Random(3)
    for _ in range(100):
        x = MalcevElement(2, 3, tuple(rng.randint(-4, 4) for _ in range(5)))
        half = rational_power(x, Fraction(1, 2))
        assert tuple(Fraction(e) for e in multiply(half, half).exponents) == tuple(Fraction(e) for e in x.exponents)
