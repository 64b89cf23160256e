import json
from fractions import Fraction

import numpy as np
import pytest

from growthlab.balls import (BallProfile, FiniteSubgroup, HeisenbergCenter, LatticeSubgroup, PowerSequence,
                             ResourceCapExceeded, ball_profile, coset_ball_counts, diameter, doubling_profile,
                             power_set, product_set, subgroup_closure)
from growthlab.catalog import lookup
from growthlab.groups import AbelianQuotient, GeneratingSet, HeisenbergQuotient, UnsupportedOperation, cyclic_table

import oracles


def profile(name, radius, cap=20_000_000):
    e = lookup(name)
    return ball_profile(e.group, e.generators, radius, cap)


def test_profile_examples():
    assert profile("z", 5).beta == [1, 3, 5, 7, 9, 11]
    assert profile("z^2", 3).beta == [1, 5, 13, 25]
    assert profile("z", 5).sigma == [1, 2, 2, 2, 2, 2]


def test_heisenberg_profile_matches_matrix_words():
    balls = oracles.matrix_balls(6)
    assert profile("heisenberg", 6).beta == [len(b) for b in balls]
    assert profile("heisenberg", 2).beta == [1, 5, 17]


def test_diameters():
    assert diameter(*_gs("zmod:6")) == 3
    g = AbelianQuotient(2, [[4, 0], [0, 4]])
    assert diameter(g, GeneratingSet.build(g, g.standard_generators())) == 4
    h = HeisenbergQuotient("full", 4)
    expected = next(n for n, b in enumerate(oracles.matrix_balls(20, modulus=4)) if len(b) == 64)
    assert diameter(h, GeneratingSet.build(h, h.standard_generators())) == expected
    with pytest.raises(UnsupportedOperation):
        diameter(*_gs("z"))


def _gs(name):
    e = lookup(name)
    return e.group, e.generators


def test_doubling_examples():
    rows = {n: (two, three) for n, two, three in doubling_profile(profile("z", 6))}
    assert rows[2] == (Fraction(9, 5), Fraction(13, 5))
    assert rows[3][1] is None
    assert doubling_profile(profile("z^2", 3))[0][1] == Fraction(13, 5)
    ratio = doubling_profile(profile("heisenberg", 16))[7][1]
    assert 12 <= ratio <= 20
    balls = oracles.matrix_balls(16)
    assert ratio == Fraction(len(balls[16]), len(balls[8]))


def test_coset_counts():
    z = AbelianQuotient(1, [])
    s = GeneratingSet.build(z, z.standard_generators())
    assert coset_ball_counts(z, s, LatticeSubgroup(z, [[5]]), 4) == [1, 3, 5, 5, 5]
    z2 = AbelianQuotient(2, [])
    s2 = GeneratingSet.build(z2, z2.standard_generators())
    assert coset_ball_counts(z2, s2, LatticeSubgroup(z2, [[1, 0]]), 2) == [1, 3, 5]
    h = HeisenbergQuotient("none", 0)
    sh = GeneratingSet.build(h, h.standard_generators())
    planes = [len({(m[0][1], m[1][2]) for m in b}) for b in oracles.matrix_balls(3)]
    assert coset_ball_counts(h, sh, HeisenbergCenter(h), 3) == planes


@pytest.mark.parametrize("m,step", [(12, 3), (12, 4), (30, 6), (16, 8)])
def test_finite_index_subgroups_are_met_early_and_generated(m, step):
    """A subgroup of index k meets S^(k-1) in k cosets, and S^(2k-1) ∩ H generates H."""
    g = cyclic_table(m)
    s = [(0,), (1,), (m - 1,)]
    sub = FiniteSubgroup(g, [(x,) for x in range(0, m, step)])
    k = step
    counts = coset_ball_counts(g, s, sub, k - 1)
    assert counts == sorted(counts) and counts[k - 1] >= k
    ball = power_set(g, s, 2 * k - 1)
    assert subgroup_closure(g, [x for x in ball if sub.contains(x)]) == sub.elements


def test_finite_index_generation_in_heisenberg_quotient():
    h = HeisenbergQuotient("full", 3)
    s = GeneratingSet.build(h, h.standard_generators())
    centre_x = subgroup_closure(h, [(1, 0, 0), (0, 0, 1)])
    k = h.order() // len(centre_x)
    ball = power_set(h, s.elements, 2 * k - 1)
    assert subgroup_closure(h, [x for x in ball if x in centre_x]) == centre_x


def test_csv_and_json_round_trips():
    p = profile("heisenberg", 5)
    again = BallProfile.parse(p.to_csv())
    assert again.beta == p.beta and again.sigma == p.sigma
    assert BallProfile.parse(json.dumps(p.to_json())).beta == p.beta
    with pytest.raises(ValueError):
        BallProfile.parse("a,b\n1,2\n")
    with pytest.raises(ValueError):
        BallProfile.parse("n,beta,sigma\n0,1,1\n2,5,4\n")


def test_truncation_is_marked():
    p = profile("z^2", 10, cap=50)
    assert p.truncated and len(p.beta) < 11 and all(b <= 50 for b in p.beta)
    assert "truncated" in p.to_csv()
    assert BallProfile.parse(p.to_csv()).truncated


def test_profiles_are_deterministic():
    assert profile("free:2,3", 4).beta == profile("free:2,3", 4).beta
    assert profile("heisenberg", 8).to_csv() == profile("heisenberg", 8).to_csv()


@pytest.mark.parametrize("name,radius", [("heisenberg", 6), ("z^3", 5), ("heisenberg-modxz:12", 6),
                                         ("filiform:4", 4)])
def test_numpy_and_python_paths_agree(name, radius):
    g, s = _gs(name)
    fast = PowerSequence(g, s.elements).run(radius)
    slow = PowerSequence(g, s.elements)
    if slow.on_numpy:
        slow._leave_numpy()
    slow.run(radius)
    assert fast.sizes == slow.sizes and fast.current == slow.current


def test_product_set_paths_agree():
    h = HeisenbergQuotient("none", 0)
    a = power_set(h, [(0, 0, 0), (1, 0, 0), (0, 1, 0), (-1, 0, 0), (0, -1, 0)], 6)
    b = power_set(h, [(0, 0, 0), (1, 0, 0), (0, 0, 1)], 4)
    big = product_set(h, a, b)
    assert big == {h.multiply(x, y) for x in a for y in b}


def test_power_sequence_rejects_missing_identity_and_caps():
    z = AbelianQuotient(1, [])
    with pytest.raises(ValueError):
        PowerSequence(z, [(1,), (-1,)])
    with pytest.raises(ResourceCapExceeded):
        power_set(z, [(1,), (-1,)], 100, memory_cap=10)


def test_profile_rejects_non_symmetric_sets():
    z = AbelianQuotient(1, [])
    with pytest.raises(ValueError):
        ball_profile(z, [(0,), (1,)], 3)


def test_sphere_and_linear_lower_bounds_on_random_finite_groups():
    rng = np.random.default_rng(5)
    for _ in range(20):
        m = int(rng.integers(3, 40))
        steps = sorted({int(x) for x in rng.integers(1, m, size=2)})
        s = {(0,)} | {(x % m,) for t in steps for x in (t, -t)}
        g = AbelianQuotient(1, [[m]])
        if subgroup_closure(g, s) != {(x,) for x in range(m)}:
            continue
        p = ball_profile(g, sorted(s), 60)
        diam = diameter(g, sorted(s))
        assert all(p.sigma[n] >= 2 for n in range(1, diam))
        assert all(3 * p.beta[n] >= len(s) * n for n in range(diam + 1))
        assert m >= 2 * diam
