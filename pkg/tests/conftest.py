import dataclasses
import itertools

import numpy as np
import pytest

from snapmesh import data
from snapmesh.engine import world_colliders
from snapmesh.formats import load_config


@pytest.fixture(scope="session")
def library():
    return data.load_bundled_library()


@pytest.fixture(scope="session")
def bundled(library):
    """Loaded bundled configs by name."""
    return {name: load_config(data.bundled_config_path(name), library) for name in data.bundled_config_names()}


def with_seed(loaded, seed, **method_changes):
    gen = loaded.generation
    if method_changes:
        gen = dataclasses.replace(gen, method=dataclasses.replace(gen.method, **method_changes))
    return dataclasses.replace(gen, seed=seed)


def clip_polygon(subject, clip):
    """Sutherland-Hodgman clip of a polygon by a counter-clockwise convex polygon."""
    out = list(subject)
    for i in range(len(clip)):
        a, b = clip[i], clip[(i + 1) % len(clip)]
        inp, out = out, []
        if not inp:
            break

        def side(p):
            return (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])

        for j in range(len(inp)):
            p, q = inp[j], inp[(j + 1) % len(inp)]
            sp, sq = side(p), side(q)
            if sp >= 0:
                out.append(p)
            if (sp >= 0) != (sq >= 0):
                t = sp / (sp - sq)
                out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def polygon_area(poly):
    if len(poly) < 3:
        return 0.0
    s = 0.0
    for (x0, y0), (x1, y1) in zip(poly, poly[1:] + poly[:1]):
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def footprint(box, eps):
    """Counter-clockwise xz footprint of a world box shrunk by eps."""
    hx, hz = box.half_extents.x - eps, box.half_extents.z - eps
    th = box.yaw
    c, s = np.cos(th), np.sin(th)
    pts = []
    for lx, lz in ((-hx, -hz), (hx, -hz), (hx, hz), (-hx, hz)):
        # same rotation as a yaw transform, written out independently
        pts.append((box.center.x + lx * c + lz * s, box.center.z - lx * s + lz * c))
    if polygon_area(pts) < 0:
        pts.reverse()
    return pts


def boxes_intersect_exact(a, b, eps, area_tol=1e-12):
    """Independent overlap oracle: vertical interval overlap and footprint clipping."""
    ya = (a.center.y - a.half_extents.y + eps, a.center.y + a.half_extents.y - eps)
    yb = (b.center.y - b.half_extents.y + eps, b.center.y + b.half_extents.y - eps)
    if min(ya[1], yb[1]) - max(ya[0], yb[0]) <= 0:
        return False
    inter = clip_polygon(footprint(a, eps), footprint(b, eps))
    return bool(abs(polygon_area(inter)) > area_tol)


def audit_overlaps(placed, eps):
    """All-pairs collider audit between distinct placed pieces; returns offending pairs."""
    boxes = [(p.instance_id, box) for p in placed for box in world_colliders(p)]
    bad = []
    for (i, a), (j, b) in itertools.combinations(boxes, 2):
        if i == j:
            continue
        reach = np.hypot(a.half_extents.x, a.half_extents.z) + np.hypot(b.half_extents.x, b.half_extents.z)
        if np.hypot(a.center.x - b.center.x, a.center.z - b.center.z) > reach:
            continue
        if boxes_intersect_exact(a, b, eps):
            bad.append((i, j))
    return bad
