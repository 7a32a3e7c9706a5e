"""Navigability validation: navigation points, traversability graph, region metrics.

Navigation points are scattered over walkable triangles. Points are joined by
local reachability edges (distance, step/slope, clearance, ground support).
A deterministic lattice of surface anchors is added to the graph so that
connectivity reflects the walkable surface rather than the density of the
random points; metrics are computed over the navigation points only.
"""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import NoWalkableSurfaceError
from .geometry import TriMesh, merge_meshes, transform_mesh, triangle_normals
from .pieces import PlacedPiece

SEED_MASK = (1 << 64) - 1
_SUPPORT_SAMPLES = np.array([1, 2, 3, 4, 5]) / 6.0
_BARY_TOL = 1e-3
_ANCHOR_INSET = 0.05
_BATCH = 250_000


@dataclass(frozen=True)
class NavConfig:
    n_points: int = 400
    agent_radius: float = 0.4
    agent_height: float = 1.8
    max_step_height: float = 0.4
    max_slope_deg: float = 40.0
    link_radius: float = 2.5
    seed: int = 0
    # lattice spacing of surface anchors; 0 disables them
    anchor_spacing: float = 1.5

    def __post_init__(self) -> None:
        if self.n_points < 1:
            raise ValueError("n_points must be positive")
        if self.agent_radius <= 0 or self.agent_height <= 0:
            raise ValueError("agent dimensions must be positive")
        if self.max_step_height < 0:
            raise ValueError("max_step_height must be non-negative")
        if not 0 <= self.max_slope_deg < 90:
            raise ValueError("max_slope_deg must lie in [0, 90)")
        if self.link_radius <= self.agent_radius:
            raise ValueError("link_radius must exceed agent_radius")
        if self.anchor_spacing < 0 or self.anchor_spacing >= self.link_radius:
            raise ValueError("anchor_spacing must lie in [0, link_radius)")


@dataclass
class TraversabilityGraph:
    """Undirected graph. Nodes [0, n_points) are navigation points, the rest anchors."""

    n_nodes: int
    edges: np.ndarray
    n_points: int = -1
    positions: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if self.n_points < 0:
            self.n_points = self.n_nodes

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n_nodes)]
        for a, b in self.edges.tolist():
            adj[a].append(b)
            adj[b].append(a)
        return adj


@dataclass
class RegionPartition:
    labels: np.ndarray
    sizes: list[int]


@dataclass
class ValidationReport:
    c_bar: float
    a_r_max: float
    region_count: int
    isolated_region_count: int
    n_points: int
    duration: float
    connected_pairs: int = 0
    nav_seed: int = 0


@dataclass
class ValidationResult:
    report: ValidationReport
    points: np.ndarray
    partition: RegionPartition
    graph: TraversabilityGraph = field(repr=False, default=None)  # type: ignore[assignment]


class DisjointSet:
    """Union by size with path halving."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


# --- surfaces ---------------------------------------------------------------


def map_mesh(placed: Sequence[PlacedPiece]) -> TriMesh:
    return merge_meshes(transform_mesh(p.blueprint.mesh, p.pose) for p in placed)


def walkable_mask(vertices: np.ndarray, faces: np.ndarray, max_slope_deg: float) -> np.ndarray:
    n = triangle_normals(vertices, faces)
    norm = np.linalg.norm(n, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        up = np.where(norm > 1e-12, n[:, 1] / norm, -1.0)
    return up >= math.cos(math.radians(max_slope_deg)) - 1e-12


def triangle_areas(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    return 0.5 * np.linalg.norm(triangle_normals(vertices, faces), axis=1)


def deploy_nav_points(
    vertices: np.ndarray, faces: np.ndarray, cfg: NavConfig, rng: np.random.Generator
) -> np.ndarray:
    """Area-weighted uniform samples over walkable triangles, shape (n_points, 3)."""
    walk = np.flatnonzero(walkable_mask(vertices, faces, cfg.max_slope_deg))
    areas = triangle_areas(vertices, faces[walk]) if len(walk) else np.zeros(0)
    if len(walk) == 0 or areas.sum() <= 0:
        raise NoWalkableSurfaceError("the map has no walkable triangle")
    pick = walk[rng.choice(len(walk), size=cfg.n_points, p=areas / areas.sum())]
    r1 = np.sqrt(rng.random(cfg.n_points))[:, None]
    r2 = rng.random(cfg.n_points)[:, None]
    a, b, c = (vertices[faces[pick, k]] for k in range(3))
    return (1.0 - r1) * a + r1 * (1.0 - r2) * b + r1 * r2 * c


def surface_anchors(
    vertices: np.ndarray, faces: np.ndarray, cfg: NavConfig
) -> np.ndarray:
    """Barycentric lattice on each walkable triangle, nudged slightly inward."""
    if cfg.anchor_spacing <= 0:
        return np.zeros((0, 3))
    out = []
    walk = np.flatnonzero(walkable_mask(vertices, faces, cfg.max_slope_deg))
    for t in walk:
        a, b, c = vertices[faces[t]]
        longest = max(np.linalg.norm(b - a), np.linalg.norm(c - b), np.linalg.norm(a - c))
        k = max(1, math.ceil(longest / cfg.anchor_spacing))
        ij = [(i, j) for i in range(k + 1) for j in range(k + 1 - i)]
        u = np.array([i for i, _ in ij], dtype=float)[:, None] / k
        v = np.array([j for _, j in ij], dtype=float)[:, None] / k
        pts = a + u * (b - a) + v * (c - a)
        centroid = (a + b + c) / 3.0
        out.append(centroid + (1.0 - _ANCHOR_INSET) * (pts - centroid))
    return np.concatenate(out) if out else np.zeros((0, 3))


# --- edge predicates ----------------------------------------------------------


class _TriangleGrid:
    """Buckets triangles by the xz cells their bounding boxes touch."""

    def __init__(self, vertices: np.ndarray, faces: np.ndarray, cell: float):
        self.cell = cell
        tri = vertices[faces]
        lo = np.floor(tri[:, :, [0, 2]].min(axis=1) / cell).astype(np.int64)
        hi = np.floor(tri[:, :, [0, 2]].max(axis=1) / cell).astype(np.int64)
        buckets: dict[tuple[int, int], list[int]] = {}
        for t in range(len(faces)):
            for cx in range(lo[t, 0], hi[t, 0] + 1):
                for cz in range(lo[t, 1], hi[t, 1] + 1):
                    buckets.setdefault((cx, cz), []).append(t)
        self.buckets = buckets
        self._cache: dict[tuple[int, int], np.ndarray] = {}

    def near(self, cx: int, cz: int) -> np.ndarray:
        key = (cx, cz)
        hit = self._cache.get(key)
        if hit is None:
            ids = [
                t
                for dx in (-1, 0, 1)
                for dz in (-1, 0, 1)
                for t in self.buckets.get((cx + dx, cz + dz), ())
            ]
            hit = np.unique(np.array(ids, dtype=np.int64))
            self._cache[key] = hit
        return hit


def segments_hit_triangles(
    p0: np.ndarray, p1: np.ndarray, tri: np.ndarray, eps: float = 1e-12
) -> np.ndarray:
    """For each segment p0[s]->p1[s], whether it touches any triangle in ``tri`` (T, 3, 3)."""
    if len(tri) == 0 or len(p0) == 0:
        return np.zeros(len(p0), dtype=bool)
    d = (p1 - p0)[:, None, :]
    a = tri[None, :, 0, :]
    e1 = tri[None, :, 1, :] - a
    e2 = tri[None, :, 2, :] - a
    h = np.cross(d, e2)
    det = np.einsum("stk,stk->st", np.broadcast_to(e1, h.shape), h)
    ok = np.abs(det) > eps
    inv = np.divide(1.0, det, out=np.zeros_like(det), where=ok)
    s = p0[:, None, :] - a
    u = inv * np.einsum("stk,stk->st", s, h)
    q = np.cross(s, np.broadcast_to(e1, s.shape))
    v = inv * np.einsum("stk,stk->st", np.broadcast_to(d, q.shape), q)
    t = inv * np.einsum("stk,stk->st", np.broadcast_to(e2, q.shape), q)
    hit = ok & (u >= 0) & (v >= 0) & (u + v <= 1) & (t >= 0) & (t <= 1)
    return hit.any(axis=1)


def _supported(
    samples: np.ndarray, walk_tri: np.ndarray, step: float
) -> np.ndarray:
    """Whether a walkable triangle lies under each sample within ``step`` of its height."""
    if len(walk_tri) == 0:
        return np.zeros(len(samples), dtype=bool)
    a = walk_tri[None, :, 0, :]
    b = walk_tri[None, :, 1, :]
    c = walk_tri[None, :, 2, :]
    p = samples[:, None, :]
    v0x, v0z = b[..., 0] - a[..., 0], b[..., 2] - a[..., 2]
    v1x, v1z = c[..., 0] - a[..., 0], c[..., 2] - a[..., 2]
    px, pz = p[..., 0] - a[..., 0], p[..., 2] - a[..., 2]
    den = v0x * v1z - v1x * v0z
    good = np.abs(den) > 1e-12
    den = np.where(good, den, 1.0)
    u = (px * v1z - v1x * pz) / den
    v = (v0x * pz - px * v0z) / den
    inside = good & (u >= -_BARY_TOL) & (v >= -_BARY_TOL) & (u + v <= 1 + _BARY_TOL)
    h = a[..., 1] + u * (b[..., 1] - a[..., 1]) + v * (c[..., 1] - a[..., 1])
    return (inside & (np.abs(h - p[..., 1]) <= step)).any(axis=1)


def _candidate_pairs(pos: np.ndarray, cfg: NavConfig) -> np.ndarray:
    if len(pos) < 2:
        return np.zeros((0, 2), dtype=np.int64)
    tree = cKDTree(pos[:, [0, 2]])
    pairs = tree.query_pairs(r=cfg.link_radius, output_type="ndarray").astype(np.int64)
    if len(pairs) == 0:
        return pairs.reshape(0, 2)
    pairs.sort(axis=1)
    pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    d = pos[pairs[:, 1]] - pos[pairs[:, 0]]
    dh = np.hypot(d[:, 0], d[:, 2])
    dy = np.abs(d[:, 1])
    slope_ok = np.degrees(np.arctan2(dy, dh)) <= cfg.max_slope_deg
    return pairs[(dy <= cfg.max_step_height) | slope_ok]


def build_traversability_graph(
    points: np.ndarray,
    vertices: np.ndarray,
    faces: np.ndarray,
    cfg: NavConfig,
    anchors: np.ndarray | None = None,
) -> TraversabilityGraph:
    """Join nodes an agent could walk between directly.

    An edge needs horizontal distance within ``link_radius``, a rise that is
    either a step or within the slope limit, a straight path clear of all map
    triangles at knee (``agent_radius``) and head (``agent_height``) height,
    and walkable ground under the path within step height of it.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    if anchors is None:
        anchors = np.zeros((0, 3))
    pos = np.concatenate([points, anchors])
    pairs = _candidate_pairs(pos, cfg)
    keep = np.zeros(len(pairs), dtype=bool)
    if len(pairs) and len(faces):
        grid = _TriangleGrid(vertices, faces, cfg.link_radius)
        tri_all = vertices[faces]
        walk = walkable_mask(vertices, faces, cfg.max_slope_deg)
        mid = 0.5 * (pos[pairs[:, 0]] + pos[pairs[:, 1]])
        cells = np.floor(mid[:, [0, 2]] / cfg.link_radius).astype(np.int64)
        order = np.lexsort((cells[:, 1], cells[:, 0]))
        cells_sorted = cells[order]
        breaks = np.flatnonzero(np.any(np.diff(cells_sorted, axis=0) != 0, axis=1)) + 1
        for group in np.split(order, breaks):
            cx, cz = cells[group[0]]
            near = grid.near(int(cx), int(cz))
            near_walk = near[walk[near]]
            keep[group] = _check_group(
                pos, pairs[group], tri_all[near], tri_all[near_walk], cfg
            )
    return TraversabilityGraph(len(pos), pairs[keep], len(points), pos)


def _check_group(
    pos: np.ndarray, pairs: np.ndarray, tri: np.ndarray, walk_tri: np.ndarray, cfg: NavConfig
) -> np.ndarray:
    out = np.zeros(len(pairs), dtype=bool)
    ns = len(_SUPPORT_SAMPLES)
    step = max(1, _BATCH // max(1, len(tri) * ns))
    up = np.array([0.0, 1.0, 0.0])
    for s in range(0, len(pairs), step):
        pr = pairs[s : s + step]
        p, q = pos[pr[:, 0]], pos[pr[:, 1]]
        blocked = segments_hit_triangles(p + up * cfg.agent_radius, q + up * cfg.agent_radius, tri)
        blocked |= segments_hit_triangles(
            p + up * cfg.agent_height, q + up * cfg.agent_height, tri
        )
        samples = p[:, None, :] + _SUPPORT_SAMPLES[None, :, None] * (q - p)[:, None, :]
        ground = _supported(samples.reshape(-1, 3), walk_tri, cfg.max_step_height)
        out[s : s + len(pr)] = ~blocked & ground.reshape(-1, ns).all(axis=1)
    return out


# --- regions and metrics ----------------------------------------------------------


def partition_regions(graph: TraversabilityGraph) -> RegionPartition:
    """Connected components restricted to navigation points.

    Region ids follow the lowest navigation-point index in each region.
    """
    ds = DisjointSet(graph.n_nodes)
    for a, b in graph.edges.tolist():
        ds.union(a, b)
    labels = np.empty(graph.n_points, dtype=np.int64)
    ids: dict[int, int] = {}
    sizes: list[int] = []
    for i in range(graph.n_points):
        root = ds.find(i)
        rid = ids.get(root)
        if rid is None:
            rid = ids[root] = len(sizes)
            sizes.append(0)
        labels[i] = rid
        sizes[rid] += 1
    return RegionPartition(labels, sizes)


@dataclass(frozen=True)
class Metrics:
    connected_pairs: int
    all_pairs: int
    c_bar: float
    a_r_max: float
    region_count: int


def compute_metrics(sizes: Iterable[int], n: int) -> Metrics:
    sizes = [int(s) for s in sizes]
    if n < 2:
        raise ValueError("metrics need at least two navigation points")
    if sum(sizes) != n:
        raise ValueError(f"region sizes sum to {sum(sizes)}, expected {n}")
    c_t = sum(s * (s - 1) // 2 for s in sizes)
    c_all = n * (n - 1) // 2
    return Metrics(c_t, c_all, c_t / c_all, max(sizes) / n, len(sizes))


def pairwise_connectivity_oracle(graph: TraversabilityGraph) -> tuple[int, list[int]]:
    """Count connected navigation-point pairs by searching paths from every point.

    Quadratic in the number of points; kept as an independent check on
    the component-based metrics.
    """
    adj = graph.adjacency()
    n = graph.n_points
    c_t = 0
    assigned = [False] * n
    sizes = []
    for i in range(n):
        seen = bytearray(graph.n_nodes)
        seen[i] = 1
        queue = deque([i])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if not seen[y]:
                    seen[y] = 1
                    queue.append(y)
        reach = [j for j in range(n) if seen[j]]
        c_t += sum(1 for j in reach if j > i)
        if not assigned[i]:
            for j in reach:
                assigned[j] = True
            sizes.append(len(reach))
    return c_t, sorted(sizes, reverse=True)


# --- entry points ----------------------------------------------------------------


def validate_mesh(mesh: TriMesh, cfg: NavConfig) -> ValidationResult:
    t0 = time.perf_counter()
    vertices, faces = mesh.as_arrays()
    rng = np.random.default_rng(cfg.seed & SEED_MASK)
    points = deploy_nav_points(vertices, faces, cfg, rng)
    anchors = surface_anchors(vertices, faces, cfg)
    graph = build_traversability_graph(points, vertices, faces, cfg, anchors)
    partition = partition_regions(graph)
    m = compute_metrics(partition.sizes, cfg.n_points)
    report = ValidationReport(
        c_bar=m.c_bar,
        a_r_max=m.a_r_max,
        region_count=m.region_count,
        # with undirected reachability every region is cut off from all others
        isolated_region_count=m.region_count,
        n_points=cfg.n_points,
        duration=time.perf_counter() - t0,
        connected_pairs=m.connected_pairs,
        nav_seed=cfg.seed,
    )
    return ValidationResult(report, points, partition, graph)


def validate_map(placed: Sequence[PlacedPiece], cfg: NavConfig) -> ValidationResult:
    return validate_mesh(map_mesh(placed), cfg)

