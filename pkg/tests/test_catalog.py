import json

import pytest

from growthlab.balls import ball_profile
from growthlab.catalog import CATALOG, catalog_progressions, check_fact, entries, lookup, powers_set, thin_box_set
from growthlab.groups import AbelianQuotient

import oracles


def test_every_name_resolves_and_serialises():
    for e in entries():
        assert e.name in CATALOG
        doc = json.loads(json.dumps(e.to_json()))
        assert doc["name"] == e.name
        assert e.generators.symmetric and e.generators.contains_identity


@pytest.mark.parametrize("name", CATALOG)
def test_recorded_facts_hold(name):
    e = lookup(name)
    for fact in e.facts:
        assert fact.source in ("hand", "oracle", "literature")
        ok, observed = check_fact(e, fact)
        assert ok, (fact, observed)


def test_unknown_names():
    with pytest.raises(KeyError):
        lookup("nonsense")


def test_heisenberg_prefix_matches_matrix_oracle():
    e = lookup("heisenberg")
    assert ball_profile(e.group, e.generators, 5).beta == [len(b) for b in oracles.matrix_balls(5)]


def test_heisenberg_full_ball_matches_reduced_matrices():
    e = lookup("heisenberg-full:5")
    # Z/5 entries: the matrix (1,3) entry is ab + c, a bijection of the third coordinate
    beta = ball_profile(e.group, e.generators, 12).beta
    assert beta == [len(b) for b in oracles.matrix_balls(12, modulus=5)]
    assert beta[-1] == 125


def test_powers_and_thin_box_sets():
    z = AbelianQuotient(1, [])
    s = powers_set(z, 32, 3)
    assert sorted(x[0] for x in s.elements) == [-1024, -32, -1, 0, 1, 32, 1024]
    box = thin_box_set(4)
    # the box x^a y^b z^c with |a|, |b| <= 1 and |c| <= 4, closed under inverses
    assert len(box.elements) >= 3 * 3 * 9
    assert box.symmetric and box.contains_identity


def test_catalog_progressions_are_well_formed():
    progs = catalog_progressions()
    assert set(progs) >= {"z:1,5", "heisenberg:xyz", "free:2,2"}
    for p in progs.values():
        assert len(p.generators) == len(p.lengths)
