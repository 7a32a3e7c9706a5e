"""Vectors, yaw-only rigid transforms, triangle meshes and box colliders.

The world-up axis is +y. Yaw rotates about +y following the right-hand rule,
so a horizontal direction at heading angle ``atan2(x, z)`` advances by the yaw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

TAU = 2.0 * math.pi
DEFAULT_SHRINK_EPS = 1e-3


class Vec3(NamedTuple):
    x: float
    y: float
    z: float

    def __add__(self, other: "Vec3") -> "Vec3":  # type: ignore[override]
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self) -> "Vec3":
        return Vec3(-self.x, -self.y, -self.z)

    def scale(self, k: float) -> "Vec3":
        return Vec3(self.x * k, self.y * k, self.z * k)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def length(self) -> float:
        return math.sqrt(self.dot(self))

    def is_finite(self) -> bool:
        return all(math.isfinite(c) for c in self)


ORIGIN = Vec3(0.0, 0.0, 0.0)


def normalize_yaw(yaw: float) -> float:
    """Wrap an angle into [0, 2*pi)."""
    y = math.fmod(yaw, TAU)
    if y < 0.0:
        y += TAU
    # fmod of a value just below 0 can round up to exactly TAU
    if y >= TAU:
        y = 0.0
    return y


def heading_angle(v: Vec3) -> float:
    """Yaw angle of a horizontal direction, measured from +z towards +x."""
    return math.atan2(v.x, v.z)


@dataclass(frozen=True)
class YawTransform:
    translation: Vec3 = ORIGIN
    yaw: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "translation", Vec3(*map(float, self.translation)))
        object.__setattr__(self, "yaw", normalize_yaw(float(self.yaw)))

    def rotate(self, v: Vec3) -> Vec3:
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        return Vec3(v.x * c + v.z * s, v.y, -v.x * s + v.z * c)

    def apply(self, p: Vec3) -> Vec3:
        return self.rotate(p) + self.translation

    def compose(self, inner: "YawTransform") -> "YawTransform":
        """Return the transform equivalent to applying ``inner`` then ``self``."""
        return YawTransform(self.apply(inner.translation), self.yaw + inner.yaw)

    def matrix(self) -> np.ndarray:
        """3x3 rotation matrix acting on column vectors."""
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


IDENTITY = YawTransform()


def apply_transform(t: YawTransform, p: Vec3) -> Vec3:
    return t.apply(p)


@dataclass(frozen=True)
class TriMesh:
    vertices: tuple[Vec3, ...]
    triangles: tuple[tuple[int, int, int], ...]

    def __post_init__(self) -> None:
        verts = tuple(Vec3(*map(float, v)) for v in self.vertices)
        tris = tuple(tuple(int(i) for i in t) for t in self.triangles)
        n = len(verts)
        for t in tris:
            if len(t) != 3 or not all(0 <= i < n for i in t):
                raise ValueError(f"triangle {t} references a vertex outside 0..{n - 1}")
        for v in verts:
            if not v.is_finite():
                raise ValueError(f"non-finite vertex {v}")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "triangles", tris)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        v = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        f = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        return v, f


def transform_mesh(m: TriMesh, t: YawTransform) -> TriMesh:
    return TriMesh(tuple(t.apply(v) for v in m.vertices), m.triangles)


def merge_meshes(meshes: Iterable[TriMesh]) -> TriMesh:
    verts: list[Vec3] = []
    tris: list[tuple[int, int, int]] = []
    for m in meshes:
        base = len(verts)
        verts.extend(m.vertices)
        tris.extend((a + base, b + base, c + base) for a, b, c in m.triangles)
    return TriMesh(tuple(verts), tuple(tris))


def triangle_normals(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Unnormalized normals following counter-clockwise winding."""
    a, b, c = vertices[faces[:, 0]], vertices[faces[:, 1]], vertices[faces[:, 2]]
    return np.cross(b - a, c - a)


@dataclass(frozen=True)
class Obb:
    """Box collider in piece-local coordinates, rotated about world-up only."""

    center: Vec3
    half_extents: Vec3
    yaw: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", Vec3(*map(float, self.center)))
        object.__setattr__(self, "half_extents", Vec3(*map(float, self.half_extents)))
        object.__setattr__(self, "yaw", normalize_yaw(float(self.yaw)))
        if min(self.half_extents) <= 0.0:
            raise ValueError(f"box half extents must be positive, got {self.half_extents}")

    def posed(self, t: YawTransform) -> "WorldBox":
        c = t.apply(self.center)
        yaw = normalize_yaw(t.yaw + self.yaw)
        return WorldBox(c, self.half_extents, yaw)


@dataclass(frozen=True)
class WorldBox:
    """A collider after its piece pose has been applied; cached axes for SAT."""

    center: Vec3
    half_extents: Vec3
    yaw: float
    axis_x: tuple[float, float] = field(init=False)
    axis_z: tuple[float, float] = field(init=False)
    radius_xz: float = field(init=False)

    def __post_init__(self) -> None:
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        # local +x and +z rotated by yaw, as (x, z) pairs
        object.__setattr__(self, "axis_x", (c, -s))
        object.__setattr__(self, "axis_z", (s, c))
        object.__setattr__(
            self, "radius_xz", math.hypot(self.half_extents.x, self.half_extents.z)
        )

    def corners(self) -> np.ndarray:
        hx, hy, hz = self.half_extents
        out = []
        for sx in (-1, 1):
            for sy in (-1, 1):
                for sz in (-1, 1):
                    out.append(
                        (
                            self.center.x + sx * hx * self.axis_x[0] + sz * hz * self.axis_z[0],
                            self.center.y + sy * hy,
                            self.center.z + sx * hx * self.axis_x[1] + sz * hz * self.axis_z[1],
                        )
                    )
        return np.array(out)

    def contains(self, pts: np.ndarray, shrink_eps: float = 0.0) -> np.ndarray:
        """Vectorized strict-interior test for an (N, 3) array of points."""
        d = pts - np.array(self.center)
        lx = d[:, 0] * self.axis_x[0] + d[:, 2] * self.axis_x[1]
        lz = d[:, 0] * self.axis_z[0] + d[:, 2] * self.axis_z[1]
        hx, hy, hz = (h - shrink_eps for h in self.half_extents)
        return (np.abs(lx) < hx) & (np.abs(d[:, 1]) < hy) & (np.abs(lz) < hz)


def _box_radius(b: WorldBox, ax: float, az: float, eps: float) -> float:
    hx, hz = b.half_extents.x - eps, b.half_extents.z - eps
    return hx * abs(b.axis_x[0] * ax + b.axis_x[1] * az) + hz * abs(
        b.axis_z[0] * ax + b.axis_z[1] * az
    )


def world_boxes_overlap(a: WorldBox, b: WorldBox, shrink_eps: float = DEFAULT_SHRINK_EPS) -> bool:
    """Separating-axis test between two yaw-rotated boxes.

    For boxes that only rotate about world-up every cross-product axis of the
    general 15-axis test is either world-up or one of the horizontal face
    normals, so five axes are enough.
    """
    dy = abs(a.center.y - b.center.y)
    if dy >= (a.half_extents.y - shrink_eps) + (b.half_extents.y - shrink_eps):
        return False
    dx = b.center.x - a.center.x
    dz = b.center.z - a.center.z
    # cheap rejection on bounding circles before the horizontal axes
    if math.hypot(dx, dz) >= a.radius_xz + b.radius_xz:
        return False
    for ax, az in (a.axis_x, a.axis_z, b.axis_x, b.axis_z):
        dist = abs(dx * ax + dz * az)
        if dist >= _box_radius(a, ax, az, shrink_eps) + _box_radius(b, ax, az, shrink_eps):
            return False
    return True


def obb_overlap(
    a: Obb, ta: YawTransform, b: Obb, tb: YawTransform, shrink_eps: float = DEFAULT_SHRINK_EPS
) -> bool:
    """True when the two posed boxes, each shrunk by ``shrink_eps``, intersect."""
    if shrink_eps < 0.0:
        raise ValueError("shrink_eps must be non-negative")
    return world_boxes_overlap(a.posed(ta), b.posed(tb), shrink_eps)


def any_overlap(
    boxes_a: Sequence[WorldBox], boxes_b: Sequence[WorldBox], shrink_eps: float
) -> bool:
    return any(world_boxes_overlap(p, q, shrink_eps) for p in boxes_a for q in boxes_b)
