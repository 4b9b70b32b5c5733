"""Geometry of polyhedral rare sets: projections, presets, ruin transforms."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bigjump.sets import (
    RareSet,
    RuinSetPreset,
    contains,
    from_ruin_set,
    preset_a1,
    preset_a2,
    preset_a3,
    projection,
    validate,
)


def test_projection_is_max_over_directions():
    S = RareSet(directions=((1.0, 0.0), (0.25, 0.25)))
    assert projection(S, [2.0, 10.0]) == 3.0
    assert projection(S, [4.0, 0.0]) == 4.0
    assert projection(S, [0.0, 0.0]) == 0.0


def test_membership_is_strict():
    S = preset_a2([0.5, 0.5], 1.0)
    # projection equals exactly x on the boundary: not a member
    assert projection(S, [2.0, 2.0]) == 2.0
    assert not contains(S, [2.0, 2.0], 2.0)
    assert contains(S, [2.0, 2.0], 1.9999999)


def test_projection_input_errors():
    S = preset_a1([1.0, 1.0])
    with pytest.raises(ValueError, match="dimension"):
        projection(S, [1.0, 2.0, 3.0])
    with pytest.raises(ValueError, match="negative coordinate at index 1"):
        projection(S, [1.0, -0.5])
    with pytest.raises(ValueError, match="strictly positive"):
        contains(S, [1.0, 1.0], 0.0)


def test_preset_a1_directions():
    S = preset_a1([1.0, 2.0, 4.0])
    assert S.directions == ((1.0, 0.0, 0.0), (0.0, 0.5, 0.0), (0.0, 0.0, 0.25))
    # some component j exceeds x * b_j
    assert contains(S, [0.0, 0.0, 4.1], 1.0)
    assert not contains(S, [0.9, 1.9, 3.9], 1.0)
    with pytest.raises(ValueError):
        preset_a1([1.0, 0.0])


def test_preset_a2_weights_and_threshold():
    S = preset_a2([0.25, 0.75], 2.0)
    assert S.directions == ((0.125, 0.375),)
    with pytest.raises(ValueError, match="sum to 1"):
        preset_a2([0.3, 0.8], 1.0)
    with pytest.raises(ValueError):
        preset_a2([0.5, 0.5], 0.0)
    with pytest.raises(ValueError):
        preset_a2([-0.5, 1.5], 1.0)


def test_preset_a3_divides_by_dimension():
    assert preset_a3([0.5, 0.5]).directions == ((0.25, 0.25),)
    assert preset_a3([1.0]).directions == ((1.0,),)


def test_ruin_transforms():
    per_line = from_ruin_set(RuinSetPreset("per_line", (1.0, 2.0)))
    assert per_line.directions == ((1.0, 0.0), (0.0, 0.5))
    agg = from_ruin_set(RuinSetPreset("aggregate", (1.0, 3.0)))
    assert agg.directions == ((0.25, 0.25),)
    with pytest.raises(ValueError):
        RuinSetPreset("per_line", ())
    with pytest.raises(ValueError):
        RuinSetPreset("pooled", (1.0,))


def test_aggregate_ruin_implies_per_line():
    # pooled deficit beyond x*sum(l) forces some line beyond its own x*l_j
    l = (0.5, 1.5, 2.0)
    per_line = from_ruin_set(RuinSetPreset("per_line", l))
    agg = from_ruin_set(RuinSetPreset("aggregate", l))
    rng = np.random.default_rng(5)
    z = rng.exponential(2.0, size=(400, 3))
    for row in z:
        for x in (0.5, 1.0, 2.0):
            if contains(agg, row, x):
                assert contains(per_line, row, x)


def test_validate_reports_defects_without_raising():
    class Raw:
        directions = ((1.0, 0.0), (1.0, -1.0), (0.0, 0.0), (1.0,))
        dim = 2

    issues = validate(Raw())
    codes = sorted(i.code for i in issues)
    assert codes == ["all_zero", "dim_mismatch", "negative"]
    assert validate(preset_a1([2.0])) == []


def test_rare_set_constructor_rejects_defects():
    with pytest.raises(ValueError, match="invalid rare set"):
        RareSet(directions=((0.0, 0.0),))
    with pytest.raises(ValueError):
        RareSet(directions=())


vec = st.lists(st.floats(0.0, 1e6, allow_nan=False), min_size=1, max_size=5)


@st.composite
def set_and_point(draw):
    d = draw(st.integers(1, 4))
    m = draw(st.integers(1, 4))
    dirs = []
    for _ in range(m):
        p = draw(
            st.lists(st.floats(0.0, 100.0, allow_nan=False), min_size=d, max_size=d).filter(
                lambda v: any(c > 0 for c in v)
            )
        )
        dirs.append(tuple(p))
    z = draw(st.lists(st.floats(0.0, 1e3, allow_nan=False), min_size=d, max_size=d))
    return RareSet(directions=tuple(dirs)), z


@given(set_and_point(), st.floats(1e-6, 1e6))
@settings(max_examples=200, deadline=None)
def test_projection_homogeneity(sp, lam):
    S, z = sp
    left = projection(S, [lam * c for c in z])
    right = lam * projection(S, z)
    assert left == pytest.approx(right, rel=1e-12, abs=1e-300)


@given(set_and_point(), st.floats(0.0, 10.0))
@settings(max_examples=200, deadline=None)
def test_projection_monotone(sp, bump):
    S, z = sp
    bigger = [c + bump for c in z]
    assert projection(S, bigger) >= projection(S, z)


@given(set_and_point())
@settings(max_examples=200, deadline=None)
def test_projection_matches_per_direction_enumeration(sp):
    S, z = sp
    brute = max(sum(p * c for p, c in zip(d, z)) for d in S.directions)
    assert projection(S, z) == pytest.approx(brute, rel=1e-12, abs=1e-300)
