import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conefix.delta_distance import (PointSet, delta, delta_continuity_probe, membership_residual,
                                    read_points_csv, write_points_csv)
from conefix.errors import DimensionMismatchError

import oracles

coords = st.floats(min_value=-50, max_value=50, allow_nan=False, allow_infinity=False)


@st.composite
def point_sets(draw, dim=None, norm=None, max_size=8):
    d = dim or draw(st.integers(1, 4))
    k = draw(st.integers(1, max_size))
    pts = draw(st.lists(st.lists(coords, min_size=d, max_size=d), min_size=k, max_size=k))
    return PointSet(np.array(pts), norm or "sup")


def test_delta_of_set_with_itself_is_zero():
    A = PointSet([[0.0, 1.0], [2.5, -3.0]], "euclidean")
    assert delta(A, A) == 0.0


def test_delta_of_singletons_is_the_norm():
    for norm in ("sup", "euclidean", "l1"):
        x, y = [1.0, -2.0, 0.5], [4.0, 2.0, 0.5]
        expected = oracles.norm([a - b for a, b in zip(x, y)], norm)
        assert delta(PointSet([x], norm), PointSet([y], norm)) == pytest.approx(expected, rel=1e-15)


def test_delta_directed_parts_example():
    # enumeration gives 1 from A to B and max(1, 3) = 3 from B to A
    A, B = [[0.0]], [[1.0], [3.0]]
    expected = oracles.hausdorff(A, B, "euclidean")
    assert expected == 3.0
    assert delta(PointSet(A, "euclidean"), PointSet(B, "euclidean")) == expected


@settings(max_examples=150)
@given(st.data())
def test_delta_matches_literal_enumeration(data):
    norm = data.draw(st.sampled_from(["sup", "euclidean", "l1"]))
    d = data.draw(st.integers(1, 4))
    A = data.draw(point_sets(d, norm))
    B = data.draw(point_sets(d, norm))
    expected = oracles.hausdorff(A.points.tolist(), B.points.tolist(), norm)
    assert delta(A, B) == pytest.approx(expected, rel=1e-12, abs=1e-12)


@given(st.data())
def test_symmetry_is_exact(data):
    d = data.draw(st.integers(1, 4))
    A, B = data.draw(point_sets(d)), data.draw(point_sets(d))
    assert delta(A, B) == delta(B, A)


@given(st.data())
def test_zero_iff_same_point_set(data):
    d = data.draw(st.integers(1, 3))
    A = data.draw(point_sets(d))
    shuffled = PointSet(np.vstack([A.points[::-1], A.points[:1]]))
    assert delta(A, shuffled) == 0.0
    B = data.draw(point_sets(d))
    assert (delta(A, B) == 0.0) == (A.as_tuples() == B.as_tuples())


def test_adding_a_member_changes_nothing():
    A = PointSet([[0.0, 0.0], [1.0, 2.0]])
    B = PointSet([[5.0, 5.0]])
    assert delta(A, A.union([[1.0, 2.0]])) == 0.0
    assert delta(A.union([[1.0, 2.0]]), B) == delta(A, B)


@given(st.data(), st.floats(0, 5))
def test_perturbing_an_added_point_moves_delta_by_at_most_eps(data, eps):
    d = data.draw(st.integers(1, 3))
    A, B = data.draw(point_sets(d)), data.draw(point_sets(d))
    a = np.array(data.draw(st.lists(coords, min_size=d, max_size=d)))
    e = np.zeros(d)
    e[data.draw(st.integers(0, d - 1))] = 1.0
    moved = a + eps * e
    actual_shift = np.max(np.abs(moved - a))  # what rounding actually produced
    change = abs(delta(A.union([moved]), B) - delta(A.union([a]), B))
    assert change <= actual_shift + 1e-12 * max(1.0, np.max(np.abs(np.vstack([A.points, B.points, [a]]))))


@given(st.data())
def test_bounded_by_largest_pairwise_distance(data):
    d = data.draw(st.integers(1, 3))
    A, B = data.draw(point_sets(d)), data.draw(point_sets(d))
    largest = max(oracles.norm(p - q) for p in A.points for q in B.points)
    assert delta(A, B) <= largest


def test_mismatches_are_errors():
    with pytest.raises(DimensionMismatchError):
        delta(PointSet([[0.0]]), PointSet([[0.0, 1.0]]))
    with pytest.raises(ValueError):
        delta(PointSet([[0.0]], "sup"), PointSet([[0.0]], "l1"))
    with pytest.raises(ValueError):
        PointSet(np.empty((0, 2)))
    with pytest.raises(ValueError):
        PointSet([[np.nan]])


def test_membership_residual_examples():
    S = PointSet([[0.0], [5.0]], "euclidean")
    assert membership_residual([5.0], S) == 0.0
    assert membership_residual([2.0], S) == 2.0
    assert membership_residual([0.0, 0.0], PointSet([[1.0, 3.0]])) == 3.0
    with pytest.raises(DimensionMismatchError):
        membership_residual([1.0, 2.0], S)


@given(st.data())
def test_membership_residual_zero_iff_member(data):
    S = data.draw(point_sets(2))
    x = np.array(data.draw(st.lists(coords, min_size=2, max_size=2)))
    assert (membership_residual(x, S) == 0.0) == (x in S)
    assert all(membership_residual(p, S) == 0.0 for p in S.points)


def test_probe_constant_map():
    S = PointSet([[1.0, 1.0], [0.0, 2.0]])
    vals = delta_continuity_probe(lambda x: S, [[1.0 / k, 0.0] for k in range(1, 6)], [0.0, 0.0])
    assert vals == [0.0] * 5


def test_probe_singleton_map_reduces_to_norm():
    seq = [[2.0 ** -k, -(2.0 ** -k)] for k in range(1, 8)]
    vals = delta_continuity_probe(lambda x: [x], seq, [0.0, 0.0], tol=0.01)
    assert vals == [2.0 ** -k for k in range(1, 8)]


def test_probe_two_point_offset_map():
    c = np.array([3.0, -1.0])
    seq = [[0.5 ** k, 0.25 ** k] for k in range(1, 6)]
    limit = [0.0, 0.0]
    vals = delta_continuity_probe(lambda x: [x, x + c], seq, limit)
    expected = [oracles.hausdorff([s, (s[0] + 3.0, s[1] - 1.0)], [limit, (3.0, -1.0)]) for s in seq]
    assert vals == pytest.approx(expected, rel=1e-15)
    assert vals == pytest.approx([oracles.norm(s) for s in seq], rel=1e-15)


def test_probe_checks_its_input():
    with pytest.raises(ValueError):
        delta_continuity_probe(lambda x: [x], [], [0.0])
    with pytest.raises(ValueError):
        delta_continuity_probe(lambda x: [x], [[1.0]], [0.0], tol=0.5)


def test_csv_round_trip(tmp_path):
    S = PointSet([[0.1, -2.0], [1e-300, 3.5]])
    write_points_csv(S, tmp_path / "s.csv")
    back = read_points_csv(tmp_path / "s.csv")
    assert np.array_equal(back.points, S.points)


def test_csv_errors_name_the_cell(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("1,2\n3,oops\n")
    with pytest.raises(ValueError, match="row 2, column 2"):
        read_points_csv(p)
    p.write_text("1,2\n3\n")
    with pytest.raises(ValueError, match="row 2"):
        read_points_csv(p)
