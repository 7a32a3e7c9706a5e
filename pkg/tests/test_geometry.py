import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import boxes_intersect_exact
from snapmesh.geometry import (
    IDENTITY,
    Obb,
    TriMesh,
    Vec3,
    YawTransform,
    apply_transform,
    heading_angle,
    normalize_yaw,
    obb_overlap,
    transform_mesh,
)


def rot_matrix(yaw):
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def oracle_apply(yaw, translation, p):
    return rot_matrix(yaw) @ np.asarray(p, float) + np.asarray(translation, float)


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
vec3 = st.builds(Vec3, finite, finite, finite)
angle = st.floats(-20.0, 20.0, allow_nan=False)


def test_identity_transform():
    assert apply_transform(IDENTITY, Vec3(1, 2, 3)) == Vec3(1, 2, 3)


def test_half_turn():
    p = apply_transform(YawTransform(Vec3(0, 0, 0), math.pi), Vec3(1, 0, 0))
    assert p == pytest.approx((-1, 0, 0), abs=1e-12)


def test_quarter_turn_matches_matrix_oracle():
    t = YawTransform(Vec3(5, 0, 0), math.pi / 2)
    got = apply_transform(t, Vec3(1, 0, 0))
    assert got == pytest.approx(tuple(oracle_apply(math.pi / 2, (5, 0, 0), (1, 0, 0))), abs=1e-12)
    # +x turns to -z under this convention
    assert got == pytest.approx((5, 0, -1), abs=1e-12)


def test_matrix_property_matches_oracle():
    for yaw in np.linspace(-7, 7, 29):
        t = YawTransform(Vec3(0, 0, 0), float(yaw))
        assert np.allclose(t.matrix(), rot_matrix(yaw), atol=1e-12)


def test_heading_angle_and_normalize():
    assert heading_angle(Vec3(0, 0, 1)) == pytest.approx(0.0)
    assert heading_angle(Vec3(1, 0, 0)) == pytest.approx(math.pi / 2)
    assert normalize_yaw(-math.pi / 2) == pytest.approx(1.5 * math.pi)
    assert 0.0 <= normalize_yaw(2 * math.pi) < 2 * math.pi


def test_rotation_turns_heading_by_yaw():
    for yaw in np.linspace(0, 6, 13):
        t = YawTransform(Vec3(0, 0, 0), float(yaw))
        h = t.rotate(Vec3(0, 0, 1))
        assert normalize_yaw(heading_angle(h)) == pytest.approx(normalize_yaw(yaw), abs=1e-9)


@settings(max_examples=200)
@given(vec3, angle, vec3, vec3)
def test_transform_is_rigid(t, yaw, p, q):
    tr = YawTransform(t, yaw)
    d0 = (p - q).length()
    d1 = (tr.apply(p) - tr.apply(q)).length()
    assert d1 == pytest.approx(d0, rel=1e-9, abs=1e-9)


@settings(max_examples=200)
@given(vec3, angle, vec3)
def test_transform_matches_oracle(t, yaw, p):
    got = YawTransform(t, yaw).apply(p)
    assert np.allclose(got, oracle_apply(yaw, t, p), rtol=1e-9, atol=1e-9)


@settings(max_examples=100)
@given(vec3, angle, vec3, angle, vec3)
def test_compose(t1, y1, t2, y2, p):
    outer, inner = YawTransform(t1, y1), YawTransform(t2, y2)
    assert np.allclose(outer.compose(inner).apply(p), outer.apply(inner.apply(p)), atol=1e-7)


def test_transform_mesh_identity_and_translation():
    m = TriMesh(((0, 0, 0), (1, 0, 0), (0, 0, 1)), ((0, 1, 2),))
    assert transform_mesh(m, IDENTITY) == m
    moved = transform_mesh(m, YawTransform(Vec3(2, 3, 4), 0.0))
    assert np.allclose(np.asarray(moved.vertices) - np.asarray(m.vertices), [2, 3, 4])
    assert moved.triangles == m.triangles


def test_transform_mesh_cube_eighth_turn():
    corners = [(x, y, z) for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)]
    m = TriMesh(tuple(corners), ((0, 1, 2), (1, 3, 2)))
    out = transform_mesh(m, YawTransform(Vec3(0, 0, 0), math.pi / 4))
    expected = [rot_matrix(math.pi / 4) @ np.array(c, float) for c in corners]
    assert np.allclose(out.vertices, expected, atol=1e-12)


def test_trimesh_rejects_bad_input():
    with pytest.raises(ValueError):
        TriMesh(((0, 0, 0),), ((0, 1, 2),))
    with pytest.raises(ValueError):
        TriMesh(((0, 0, float("nan")), (1, 0, 0), (0, 0, 1)), ((0, 1, 2),))


# --- box overlap ----------------------------------------------------------

UNIT = Obb(Vec3(0, 0, 0), Vec3(0.5, 0.5, 0.5))


def test_identical_boxes_overlap():
    assert obb_overlap(UNIT, IDENTITY, UNIT, IDENTITY, 0.0)


def test_far_boxes_do_not_overlap():
    assert not obb_overlap(UNIT, IDENTITY, UNIT, YawTransform(Vec3(10, 0, 0), 0.3), 0.0)


def test_touching_boxes_do_not_overlap():
    assert not obb_overlap(UNIT, IDENTITY, UNIT, YawTransform(Vec3(1, 0, 0), 0.0), 0.0)


def test_negative_shrink_rejected():
    with pytest.raises(ValueError):
        obb_overlap(UNIT, IDENTITY, UNIT, IDENTITY, -1.0)


def sample_in(box, n, rng, eps):
    """Uniform points inside a posed box shrunk by eps."""
    h = np.array(box.half_extents) - eps
    local = (rng.random((n, 3)) * 2 - 1) * h
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    x = local[:, 0] * c + local[:, 2] * s
    z = -local[:, 0] * s + local[:, 2] * c
    return np.column_stack([x, local[:, 1], z]) + np.array(box.center)


def test_gap_of_1e4_with_shrink_is_separate_by_sampling():
    rng = np.random.default_rng(7)
    b = YawTransform(Vec3(1.0001, 0, 0), 0.0)
    assert not obb_overlap(UNIT, IDENTITY, UNIT, b, 0.001)
    wa, wb = UNIT.posed(IDENTITY), UNIT.posed(b)
    pts = sample_in(wa, 100_000, rng, 0.001)
    assert not wb.contains(pts, 0.001).any()
    pts = sample_in(wb, 100_000, rng, 0.001)
    assert not wa.contains(pts, 0.001).any()


def random_box(rng):
    return Obb(
        Vec3(*rng.uniform(-1, 1, 3)),
        Vec3(*rng.uniform(0.1, 1.5, 3)),
        rng.uniform(0, 2 * math.pi),
    ), YawTransform(Vec3(*rng.uniform(-2, 2, 3)), rng.uniform(-4, 4))


def test_sat_agrees_with_independent_oracles():
    rng = np.random.default_rng(2024)
    eps = 1e-3
    n_overlap = 0
    for _ in range(1000):
        a, ta = random_box(rng)
        b, tb = random_box(rng)
        got = obb_overlap(a, ta, b, tb, eps)
        wa, wb = a.posed(ta), b.posed(tb)
        assert got == boxes_intersect_exact(wa, wb, eps)
        # sampling can only prove overlap, never disprove it
        pts = sample_in(wa, 4000, rng, eps)
        if wb.contains(pts, eps).any():
            assert got
        n_overlap += got
    # the draw mixes both outcomes
    assert 100 < n_overlap < 900


@settings(max_examples=200)
@given(vec3, angle, vec3, angle, st.floats(0, 0.05))
def test_overlap_symmetric(ta, ya, tb, yb, eps):
    a = Obb(Vec3(0, 0, 0), Vec3(1.0, 0.5, 2.0), 0.2)
    b = Obb(Vec3(0.3, 0, 0), Vec3(0.7, 1.0, 0.4), 1.1)
    sa = YawTransform(Vec3(ta.x % 5, ta.y % 2, ta.z % 5), ya)
    sb = YawTransform(Vec3(tb.x % 5, tb.y % 2, tb.z % 5), yb)
    assert obb_overlap(a, sa, b, sb, eps) == obb_overlap(b, sb, a, sa, eps)


@settings(max_examples=200)
@given(vec3, angle, angle, st.floats(0, 0.05), st.floats(0, 0.05))
def test_shrink_monotone(t, ya, yb, e1, e2):
    lo, hi = sorted((e1, e2))
    a = Obb(Vec3(0, 0, 0), Vec3(1.0, 1.0, 1.0))
    sb = YawTransform(Vec3(t.x % 3, t.y % 2, t.z % 3), yb)
    sa = YawTransform(Vec3(0, 0, 0), ya)
    if obb_overlap(a, sa, a, sb, hi):
        assert obb_overlap(a, sa, a, sb, lo)


@settings(max_examples=200)
@given(vec3, angle, vec3, angle, vec3, angle)
def test_overlap_invariant_under_common_motion(ta, ya, tb, yb, tm, ym):
    a = Obb(Vec3(0, 0, 0), Vec3(1.0, 0.5, 2.0), 0.2)
    b = Obb(Vec3(0.3, 0, 0), Vec3(0.7, 1.0, 0.4), 1.1)
    sa = YawTransform(Vec3(ta.x % 4, ta.y % 2, ta.z % 4), ya)
    sb = YawTransform(Vec3(tb.x % 4, tb.y % 2, tb.z % 4), yb)
    m = YawTransform(Vec3(tm.x % 50, 0, tm.z % 50), ym)
    wa, wb = a.posed(sa), b.posed(sb)
    if boxes_intersect_exact(wa, wb, 1e-3, 1e-6) != boxes_intersect_exact(wa, wb, 1e-3, 0.0):
        return  # grazing contact, numerically ambiguous
    assert obb_overlap(a, sa, b, sb) == obb_overlap(a, m.compose(sa), b, m.compose(sb))
