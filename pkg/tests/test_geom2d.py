import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from electroskeleton.errors import DegenerateAngle, DuplicateVertex, InvalidPolygon, NonConvex
from electroskeleton.geom2d import (
    EQUILATERAL,
    UNIT_SQUARE,
    Location,
    classify,
    contains,
    distance_to_boundary,
    random_convex_polygon,
    regular_polygon,
    reflect_point,
    validate_polygon,
)

coord = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
point = st.tuples(coord, coord).map(np.array)


def test_equilateral_and_square_are_valid():
    tri = validate_polygon(EQUILATERAL)
    sq = validate_polygon(UNIT_SQUARE)
    assert tri.n_sides == 3 and len(tri.faces) == 3
    assert sq.n_sides == 4
    assert tri.area == pytest.approx(math.sqrt(3) / 4)
    np.testing.assert_allclose(np.degrees(tri.interior_angles), 60.0)


def test_collinear_is_degenerate():
    with pytest.raises(DegenerateAngle):
        validate_polygon([[0, 0], [1, 0], [2, 0]])


def test_clockwise_input_is_reordered():
    poly = validate_polygon(UNIT_SQUARE[::-1])
    assert poly.area > 0
    for f in poly.faces:
        assert f.signed_distance(poly.centroid) > 0


def test_errors_name_offending_vertex():
    with pytest.raises(NonConvex) as exc:
        validate_polygon([[0, 0], [2, 0], [1, 0.2], [1, 1], [0, 1]])
    assert exc.value.index == 2
    with pytest.raises(DuplicateVertex) as exc:
        validate_polygon([[0, 0], [1, 0], [1, 0], [0, 1]])
    assert exc.value.index == 2
    with pytest.raises(DegenerateAngle) as exc:
        validate_polygon([[0, 0], [1, 0], [0.5, 0.02]])
    assert exc.value.index in (0, 1)


def test_self_intersecting_loop_is_nonconvex():
    with pytest.raises(NonConvex):
        validate_polygon([[0, 0], [1, 1], [1, 0], [0, 1]])
    # pentagram: every turn has the same sign but the loop winds twice
    with pytest.raises(NonConvex):
        validate_polygon(regular_polygon(5)[[0, 2, 4, 1, 3]], min_angle_deg=1)


def test_rejects_short_or_nonfinite_input():
    with pytest.raises(InvalidPolygon):
        validate_polygon([[0, 0], [1, 0]])
    with pytest.raises(InvalidPolygon):
        validate_polygon([[0, 0], [1, np.nan], [0, 1]])


def test_min_angle_threshold_is_configurable():
    sliver = [[0, 0], [1, 0], [0.5, 0.06]]  # about 6.8 deg at the base
    validate_polygon(sliver)
    with pytest.raises(DegenerateAngle):
        validate_polygon(sliver, min_angle_deg=10)


def test_face_frames_are_orthonormal():
    poly = validate_polygon(regular_polygon(7))
    for f in poly.faces:
        assert abs(np.linalg.norm(f.unit_tangent) - 1) < 1e-12
        assert abs(np.linalg.norm(f.unit_inward_normal) - 1) < 1e-12
        assert abs(f.unit_tangent @ f.unit_inward_normal) < 1e-12
        assert f.signed_distance(poly.centroid) > 0


def test_reflect_across_x_axis():
    sq = validate_polygon(UNIT_SQUARE)
    np.testing.assert_allclose(reflect_point(sq.faces[0], [0.3, 0.4]), [0.3, -0.4], atol=1e-15)
    np.testing.assert_allclose(reflect_point(sq.faces[0], [0.7, 0.0]), [0.7, 0.0], atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(point, point)
def test_reflection_is_an_isometric_involution(p, q):
    face = validate_polygon(regular_polygon(5, phase=0.3)).faces[2]
    np.testing.assert_allclose(reflect_point(face, reflect_point(face, p)), p, atol=1e-12)
    d0 = np.linalg.norm(p - q)
    d1 = np.linalg.norm(reflect_point(face, p) - reflect_point(face, q))
    assert abs(d0 - d1) < 1e-12 * max(1.0, d0)


def test_reflection_matrix_matches_point_map():
    face = validate_polygon(EQUILATERAL).faces[1]
    p = np.array([0.2, 0.1])
    lin = face.reflection_matrix @ (p - face.origin) + face.origin
    np.testing.assert_allclose(lin, reflect_point(face, p), atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_interior_points_reflect_outside(a, b):
    tri = validate_polygon(EQUILATERAL)
    # barycentric point strictly inside
    p = (1 - a) * tri.vertices[0] + a * ((1 - b) * tri.vertices[1] + b * tri.vertices[2])
    if contains(tri, p) is not Location.INTERIOR:
        return
    for f in tri.faces:
        assert contains(tri, reflect_point(f, p)) is Location.EXTERIOR


def test_contains_classification():
    tri = validate_polygon(EQUILATERAL)
    assert contains(tri, [0.5, math.sqrt(3) / 6]) is Location.INTERIOR
    assert contains(tri, [0.5, 0.0]) is Location.BOUNDARY
    assert contains(tri, [10.0, 10.0]) is Location.EXTERIOR
    np.testing.assert_array_equal(classify(tri, [[0.5, 0.2], [0.5, 0.0], [2, 2]]), [1, 0, -1])


def test_distance_to_boundary():
    sq = validate_polygon(UNIT_SQUARE)
    np.testing.assert_allclose(distance_to_boundary(sq, [[0.5, 0.5], [2.0, 0.5], [2.0, 2.0]]),
                               [0.5, 1.0, math.sqrt(2)])


def test_random_polygons_respect_filters():
    rng = np.random.default_rng(3)
    for _ in range(20):
        poly = random_convex_polygon(5, rng, 15.0, 170.0)
        ang = np.degrees(poly.interior_angles)
        assert ang.min() >= 15.0 and ang.max() <= 170.0
        assert abs(ang.sum() - 540.0) < 1e-9


def test_random_polygons_are_seed_reproducible():
    a = random_convex_polygon(4, np.random.default_rng(7))
    b = random_convex_polygon(4, np.random.default_rng(7))
    np.testing.assert_array_equal(a.vertices, b.vertices)
