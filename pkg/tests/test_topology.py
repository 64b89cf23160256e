import random

import pytest
import sympy

from growthlab.balls import ball_profile
from growthlab.catalog import entries, lookup
from growthlab.groups import AbelianQuotient, GeneratingSet, UnsupportedOperation, cyclic_table
from growthlab.topology import (CPath, FiniteGraph, cpath_equivalent, local_hom_check, local_hom_counterexample,
                                new_relation_scales_abelian, pk_h1_rank, pullback_subgroup, relation_lattice,
                                simple_loops, truncated_presentation_ball, words_relation_lattice)

import oracles


def _sympy_h1_rank(g, k):
    """Cycle rank minus the rank of the boundary matrix of all simple loops of length <= k, via sympy."""
    loops = simple_loops(g, k)
    cycle_rank = len(g.edges) - g.size + g.components
    if not loops:
        return cycle_rank
    rows = []
    for loop in loops:
        vec = g.edge_vector(list(loop) + [loop[0]])
        rows.append([vec.get(i, 0) for i in range(len(g.edges))])
    return cycle_rank - sympy.Matrix(rows).rank()


@pytest.mark.parametrize("n", [5, 8, 12])
def test_cycle_h1_rank(n):
    g = FiniteGraph.cycle(n)
    for k in range(3, n + 2):
        rep = pk_h1_rank(g, k)
        assert rep.rank == int(k < n)
        assert rep.trivial == (k >= n)


def test_h1_examples():
    assert pk_h1_rank(FiniteGraph.cycle(8), 7).rank == 1
    assert pk_h1_rank(FiniteGraph.cycle(8), 8).rank == 0
    assert pk_h1_rank(FiniteGraph.complete(4), 3).rank == 0
    grid = FiniteGraph.grid(3, 3)
    assert pk_h1_rank(grid, 4).rank == 0 == _sympy_h1_rank(grid, 4)
    assert pk_h1_rank(grid, 3).rank == 4 == _sympy_h1_rank(grid, 3)


def test_h1_against_sympy_on_random_graphs():
    rng = random.Random(5)
    done = 0
    while done < 25:
        n = rng.randint(4, 9)
        edges = [(i, i + 1) for i in range(n - 1)]
        edges += [tuple(rng.sample(range(n), 2)) for _ in range(rng.randint(0, n))]
        g = FiniteGraph.from_edges(n, edges)
        k = rng.randint(3, 7)
        rep = pk_h1_rank(g, k)
        assert rep.rank == _sympy_h1_rank(g, k)
        assert rep.cells == len(simple_loops(g, k))
        done += 1


def test_cayley_graph_of_a_torus():
    z = AbelianQuotient(2, [[6, 0], [0, 6]])
    g = FiniteGraph.cayley(z, z.standard_generators())
    assert g.size == 36 and len(g.edges) == 72
    # squares fill everything except the two long cycles of length 6
    assert pk_h1_rank(g, 4).rank == 2
    assert pk_h1_rank(g, 6).rank == 0


def test_graph_json_round_trip_and_errors():
    g = FiniteGraph.cayley(cyclic_table(5), [(1,)])
    again = FiniteGraph.from_json(g.to_json())
    assert again.adjacency == g.adjacency and again.provenance == g.provenance
    with pytest.raises(ValueError):
        FiniteGraph(2, [frozenset({1}), frozenset()])
    with pytest.raises(ValueError):
        pk_h1_rank(FiniteGraph.from_edges(4, [(0, 1), (2, 3)]), 3)


def test_cpath_equal_paths():
    g = FiniteGraph.cycle(6)
    p = CPath(g, 1, (0, 1, 2))
    verdict = cpath_equivalent(p, p, 1, 4)
    assert verdict.verdict == "equivalent" and verdict.chain == [p.vertices]


def test_cpath_square_sides_are_equivalent():
    g = FiniteGraph.grid(2, 2)  # vertices 0 1 / 2 3
    p = CPath(g, 1, (0, 1, 3))
    q = CPath(g, 1, (0, 2, 3))
    verdict = cpath_equivalent(p, q, 1, 4)
    assert verdict.verdict == "equivalent"
    assert verdict.chain[0] == p.vertices and verdict.chain[-1] == q.vertices


def test_cpath_arcs_of_a_long_cycle_are_separated():
    g = FiniteGraph.cycle(12)
    p = CPath(g, 1, tuple(range(7)))
    q = CPath(g, 1, (0, 11, 10, 9, 8, 7, 6))
    assert cpath_equivalent(p, q, 1, 4).verdict == "not-equivalent-by-H1"


def test_cpath_rejects_long_steps():
    g = FiniteGraph.cycle(8)
    with pytest.raises(ValueError):
        CPath(g, 1, (0, 2))
    CPath(g, 2, (0, 2))
    with pytest.raises(ValueError):
        cpath_equivalent(CPath(g, 1, (0, 1)), CPath(g, 1, (0, 7)), 1, 4)


def _grid_walk(rng, rows, cols, start, end):
    """A random monotone lattice walk in the grid from start to end (row, col)."""
    (r, c), (r1, c1) = start, end
    steps = ["r"] * (r1 - r) + ["c"] * (c1 - c)
    rng.shuffle(steps)
    out = [r * cols + c]
    for s in steps:
        if s == "r":
            r += 1
        else:
            c += 1
        out.append(r * cols + c)
    return tuple(out)


def test_random_grid_paths_agree_with_homology():
    """On a grid every loop bounds squares, so no pair may ever be separated by homology."""
    rng = random.Random(2)
    g = FiniteGraph.grid(3, 3)
    for _ in range(50):
        p = CPath(g, 1, _grid_walk(rng, 3, 3, (0, 0), (2, 2)))
        q = CPath(g, 1, _grid_walk(rng, 3, 3, (0, 0), (2, 2)))
        verdict = cpath_equivalent(p, q, 1, 4, budget=5000)
        assert verdict.verdict in ("equivalent", "unknown")
        if verdict.verdict == "equivalent":
            assert verdict.chain[0] == p.vertices and verdict.chain[-1] == q.vertices
            assert all(c[0] == p.vertices[0] and c[-1] == p.vertices[-1] for c in verdict.chain)


def test_cpath_on_a_punctured_grid():
    # a 3x3 grid with its centre removed is a cycle of length 8
    g3 = FiniteGraph.grid(3, 3)
    keep = [v for v in range(9) if v != 4]
    index = {v: i for i, v in enumerate(keep)}
    g = FiniteGraph.from_edges(8, [(index[a], index[b]) for a, b in g3.edges if 4 not in (a, b)])
    p = CPath(g, 1, tuple(index[v] for v in (0, 1, 2, 5, 8)))
    q = CPath(g, 1, tuple(index[v] for v in (0, 3, 6, 7, 8)))
    assert cpath_equivalent(p, q, 1, 4).verdict == "not-equivalent-by-H1"
    assert cpath_equivalent(p, q, 1, 8).verdict == "equivalent"


def test_local_hom_restriction_is_genuine():
    z, c7 = AbelianQuotient(1, []), AbelianQuotient(1, [[7]])
    a = [(x,) for x in range(-3, 4)]
    phi = {(x,): (x % 7,) for x in range(-6, 7)}
    assert local_hom_check(z, c7, phi, a).ok


def test_local_hom_counterexample():
    rep = local_hom_counterexample(3)
    assert not rep.ok
    x, y, lhs, rhs = rep.failure
    assert (x[0] + y[0]) % 7 in (4, 5, 6) or lhs != rhs
    assert lhs != rhs
    # psi(4) + psi(1) = -3 + 1 but psi(5) = -2: a concrete failing pair
    z7, z = AbelianQuotient(1, [[7]]), AbelianQuotient(1, [])
    psi = {(x,): ((x + 3) % 7 - 3,) for x in range(7)}
    assert psi[(4,)] == (-3,) and psi[(1,)] == (1,)
    assert z.multiply(psi[(4,)], psi[(1,)]) == (-2,) == psi[(5,)]
    assert z.multiply(psi[(4,)], psi[(4,)]) != psi[z7.multiply((4,), (4,))]


def test_pullback_of_subgroups():
    z, c12 = AbelianQuotient(1, []), AbelianQuotient(1, [[12]])
    a = [(x,) for x in range(-2, 3)]
    phi = {(x,): (x % 12,) for x in range(-4, 5)}
    assert pullback_subgroup(z, c12, phi, a, [(0,)]).elements == [(0,)]
    # a nonzero subgroup of C12 is not inside phi(A): rejected
    with pytest.raises(ValueError):
        pullback_subgroup(z, c12, phi, a, [(0,), (6,)])
    bad = dict(phi)
    bad[(4,)] = (5,)  # still injective, but 2 + 2 now misses
    with pytest.raises(ValueError):
        pullback_subgroup(z, c12, bad, a, [(0,)])


@pytest.mark.parametrize("group,r,big", [
    (AbelianQuotient(1, [[100]]), 8, 4),
    (AbelianQuotient(1, []), 8, 4),
])
def test_truncated_presentation_balls(group, r, big):
    s = GeneratingSet.build(group, group.standard_generators())
    ball = truncated_presentation_ball(group, s, r, big)
    assert ball.profile.beta == ball_profile(group, s, big).beta == [1, 3, 5, 7, 9]


def test_truncated_presentation_heisenberg():
    e = lookup("heisenberg")
    ball = truncated_presentation_ball(e.group, e.generators, 12, 6)
    assert [len(b) for b in oracles.matrix_balls(6)] == ball.profile.beta


def test_truncated_presentation_radius_limit():
    z = AbelianQuotient(1, [[100]])
    with pytest.raises(UnsupportedOperation):
        truncated_presentation_ball(z, GeneratingSet.build(z, [(1,)]), 8, 5)


def test_truncated_presentation_over_finite_catalog_entries():
    for e in entries():
        if not e.group.is_finite() or e.group.order() > 5000:
            continue
        ball = truncated_presentation_ball(e.group, e.generators, 6, 3)
        assert ball.profile.beta == ball_profile(e.group, e.generators, 3).beta


def test_relation_scale_examples():
    c100 = AbelianQuotient(1, [[100]])
    assert new_relation_scales_abelian(c100) == [7]
    prod = AbelianQuotient(2, [[4, 0], [0, 64]])
    assert new_relation_scales_abelian(prod) == [2, 6]
    assert new_relation_scales_abelian(AbelianQuotient(1, [])) == []


@pytest.mark.parametrize("exps", [[2, 5], [3, 4, 7], [2, 3, 5, 8]])
def test_relation_scales_of_two_power_products(exps):
    k = len(exps)
    rels = [[2 ** e if i == j else 0 for j in range(k)] for i, e in enumerate(exps)]
    scales = new_relation_scales_abelian(AbelianQuotient(k, rels), n_max=10)
    # x^(2^e) is a relation of length exactly 2^e, and nothing shorter kills x
    assert len(scales) == k
    assert scales == exps


@pytest.mark.parametrize("group,gens", [
    (AbelianQuotient(1, [[5]]), [(1,)]),
    (AbelianQuotient(2, [[2, 0], [0, 3]]), [(1, 0), (0, 1)]),
    (AbelianQuotient(1, [[6]]), [(2,), (3,)]),
    (AbelianQuotient(1, []), [(1,), (2,)]),
])
def test_relation_lattice_against_word_enumeration(group, gens):
    lat = relation_lattice(group, gens, 3)
    for n in (1, 2, 3):
        if 2 ** n > 8 or (len(gens) == 2 and 2 ** n > 6):
            continue
        assert lat.scales[n] == words_relation_lattice(group, gens, 2 ** n)


def test_relation_lattice_json():
    lat = relation_lattice(AbelianQuotient(1, [[100]]), [(1,)], 8)
    doc = lat.to_json()
    assert doc["new_relation_scales"] == [7] and doc["kernel"] == [[100]]
