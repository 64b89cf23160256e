import json
from fractions import Fraction

import pytest

from growthlab.groups import AbelianQuotient, FreeNilpotentGroup, HeisenbergQuotient
from growthlab.witness import (CONCLUSIONS, CORRUPTIONS, FineScaleWitness, corrupt, cyclic_strip_witness,
                               finite_gl_bound, homogeneous_dimension, nilpotency_class, verify_witness)


@pytest.fixture(scope="module")
def strip_report():
    return verify_witness(cyclic_strip_witness(), max_radius=256)


def test_cyclic_strip_passes(strip_report):
    assert strip_report.ok
    assert set(strip_report.verdicts) == set(CONCLUSIONS)
    assert all(v.status in ("pass", "reported", "skipped") for v in strip_report.verdicts.values())
    assert strip_report.samples == {0: [2, 4, 8, 16, 32, 64, 128, 256], 1: [64, 128, 256]}


@pytest.mark.parametrize("field_name", sorted(CORRUPTIONS))
def test_each_corruption_fails_exactly_one_conclusion(field_name):
    report = verify_witness(corrupt(cyclic_strip_witness(), field_name), max_radius=128)
    assert report.failed == [CORRUPTIONS[field_name]]


def test_unknown_corruption():
    with pytest.raises(ValueError):
        corrupt(cyclic_strip_witness(), "lengths")


def test_witness_json_round_trip(strip_report):
    w = cyclic_strip_witness()
    again = FineScaleWitness.from_json(json.loads(json.dumps(w.to_json())))
    assert again.to_json() == w.to_json()
    report = verify_witness(again, max_radius=256)
    assert {k: v.status for k, v in report.verdicts.items()} == \
        {k: v.status for k, v in strip_report.verdicts.items()}
    doc = report.to_json()
    assert doc["ok"] and "sampling" in doc


def test_non_dividing_scales_are_rejected():
    w = cyclic_strip_witness()
    w.scales = [3, 64]
    assert "scales" in verify_witness(w, max_radius=64).failed


def test_group_invariants():
    assert homogeneous_dimension(AbelianQuotient(3, [])) == 3
    assert homogeneous_dimension(HeisenbergQuotient("none", 0)) == 4
    assert homogeneous_dimension(FreeNilpotentGroup(2, 3)) == 2 + 2 + 6
    assert nilpotency_class(HeisenbergQuotient("none", 0)) == 2
    assert nilpotency_class(AbelianQuotient(2, [])) == 1
    assert finite_gl_bound(1) == 2 and finite_gl_bound(3) == 48 and finite_gl_bound(5) == 3840
    assert finite_gl_bound(2) == 24  # (2d)! for d = 2


def test_constants_are_fractions():
    w = cyclic_strip_witness()
    assert isinstance(w.dim_constant, Fraction) and w.dim_constant == Fraction(1, 8)


def test_last_scale_beyond_the_sampled_radius_is_not_a_piece_failure():
    report = verify_witness(corrupt(cyclic_strip_witness(), "scales"), max_radius=64)
    assert report.failed == ["scales"]
    assert report.verdicts["xiv"].status == "reported"


def test_inconsistent_growth_pieces_fail():
    w = cyclic_strip_witness()
    w.growth_pieces = [([1, 2], [8]), ([1], [])]  # degrees must decrease within a level
    assert verify_witness(w, max_radius=64).failed == ["xiv"]
