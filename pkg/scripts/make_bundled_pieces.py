"""Regenerate the bundled piece files under src/snapmesh/data/pieces/.

Five pieces: platform, hallway (walled, gabled roof with a narrow flat ridge),
clover (cross), ramp (lower deck, incline, raised deck; five connectors) and
bunny (pad with a steep statue). All floors sit at y=0 except the ramp's
raised deck at y=2. Colliders extend above the floors so that nothing can be
stacked inside another piece's headroom.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "snapmesh" / "data" / "pieces"
SLAB = 0.2
HEADROOM = 2.5


class Builder:
    def __init__(self):
        self.v: list[list[float]] = []
        self.f: list[list[int]] = []

    def add(self, verts, tris, inside=None, up=None):
        base = len(self.v)
        verts = np.asarray(verts, dtype=float)
        for t in tris:
            a, b, c = verts[list(t)]
            n = np.cross(b - a, c - a)
            if inside is not None:
                flip = np.dot(n, (a + b + c) / 3 - inside) < 0
            else:
                flip = np.dot(n, up) < 0
            t = (t[0], t[2], t[1]) if flip else tuple(t)
            self.f.append([base + i for i in t])
        self.v.extend(verts.tolist())

    def block(self, x0, x1, z0, z1, top0, top1=None, bottom=-SLAB):
        """Solid with a top rising linearly along x from top0 to top1."""
        top1 = top0 if top1 is None else top1
        verts = [
            (x0, bottom, z0), (x1, bottom, z0), (x1, bottom, z1), (x0, bottom, z1),
            (x0, top0, z0), (x1, top1, z0), (x1, top1, z1), (x0, top0, z1),
        ]
        quads = [(0, 1, 2, 3), (4, 5, 6, 7), (0, 1, 5, 4), (1, 2, 6, 5), (2, 3, 7, 6), (3, 0, 4, 7)]
        tris = [t for a, b, c, d in quads for t in ((a, b, c), (a, c, d))]
        inside = np.mean(np.asarray(verts), axis=0)
        self.add(verts, tris, inside=inside)

    def quad(self, corners, up=(0, 1, 0)):
        self.add(corners, [(0, 1, 2), (0, 2, 3)], up=np.asarray(up, dtype=float))

    def pyramid(self, cx, cz, half, height):
        verts = [
            (cx - half, 0, cz - half), (cx + half, 0, cz - half),
            (cx + half, 0, cz + half), (cx - half, 0, cz + half), (cx, height, cz),
        ]
        tris = [(0, 1, 4), (1, 2, 4), (2, 3, 4), (3, 0, 4)]
        self.add(verts, tris, inside=np.array([cx, height / 4, cz]))

    def mesh(self):
        return {"vertices": [[round(c, 9) for c in v] for v in self.v], "triangles": self.f}


def conn(pos, heading, color, pins=4):
    return {"position": list(pos), "heading": list(heading), "pins": pins, "color": color}


def collider(x0, x1, y0, y1, z0, z1):
    return {
        "center": [(x0 + x1) / 2, (y0 + y1) / 2, (z0 + z1) / 2],
        "half_extents": [(x1 - x0) / 2, (y1 - y0) / 2, (z1 - z0) / 2],
        "yaw_deg": 0.0,
    }


def platform():
    b = Builder()
    b.block(-4, 4, -4, 4, 0.0)
    return {
        "id": "platform",
        "mesh": b.mesh(),
        "connectors": [
            conn((4, 0, 0), (1, 0, 0), "white"),
            conn((0, 0, 4), (0, 0, 1), "red"),
            conn((-4, 0, 0), (-1, 0, 0), "white"),
            conn((0, 0, -4), (0, 0, -1), "green"),
        ],
        "colliders": [collider(-4, 4, -SLAB, HEADROOM, -4, 4)],
    }


def hallway():
    b = Builder()
    b.block(-2, 2, -4, 4, 0.0)
    wall_h, ridge = 3.0, 0.3
    ridge_y = wall_h + (2 - ridge) * math.tan(math.radians(50))
    for x in (-2, 2):
        b.quad([(x, 0, -4), (x, 0, 4), (x, wall_h, 4), (x, wall_h, -4)], up=(-x, 0, 0))
    b.quad([(-2, wall_h, -4), (-ridge, ridge_y, -4), (-ridge, ridge_y, 4), (-2, wall_h, 4)])
    b.quad([(2, wall_h, -4), (2, wall_h, 4), (ridge, ridge_y, 4), (ridge, ridge_y, -4)])
    b.quad([(-ridge, ridge_y, -4), (ridge, ridge_y, -4), (ridge, ridge_y, 4), (-ridge, ridge_y, 4)])
    return {
        "id": "hallway",
        "mesh": b.mesh(),
        "connectors": [
            conn((0, 0, 4), (0, 0, 1), "red"),
            conn((0, 0, -4), (0, 0, -1), "white"),
        ],
        "colliders": [collider(-2, 2, -SLAB, ridge_y + 0.1, -4, 4)],
    }


def clover():
    b = Builder()
    b.block(-2, 2, -2, 2, 0.0)
    b.block(2, 6, -2, 2, 0.0)
    b.block(-6, -2, -2, 2, 0.0)
    b.block(-2, 2, 2, 6, 0.0)
    b.block(-2, 2, -6, -2, 0.0)
    return {
        "id": "clover",
        "mesh": b.mesh(),
        "connectors": [
            conn((6, 0, 0), (1, 0, 0), "green"),
            conn((0, 0, 6), (0, 0, 1), "white"),
            conn((-6, 0, 0), (-1, 0, 0), "green"),
            conn((0, 0, -6), (0, 0, -1), "white"),
        ],
        "colliders": [
            collider(-6, 6, -SLAB, HEADROOM, -2, 2),
            collider(-2, 2, -SLAB, HEADROOM, -6, 6),
        ],
    }


def ramp():
    b = Builder()
    b.block(-4, 4, -4, 4, 0.0)
    b.block(4, 10, -2, 2, 0.0, 2.0)
    b.block(10, 14, -2, 2, 2.0)
    return {
        "id": "ramp",
        "mesh": b.mesh(),
        "connectors": [
            conn((-4, 0, 0), (-1, 0, 0), "white"),
            conn((0, 0, 4), (0, 0, 1), "white"),
            conn((0, 0, -4), (0, 0, -1), "white"),
            conn((14, 2, 0), (1, 0, 0), "red"),
            conn((12, 2, 2), (0, 0, 1), "green"),
        ],
        "colliders": [
            collider(-4, 4, -SLAB, HEADROOM, -4, 4),
            collider(4, 14, -SLAB, 2 + HEADROOM, -2, 2),
        ],
    }


def bunny():
    b = Builder()
    # pad is a ring so no floor hides under the statue
    b.block(-3, 3, -3, -1, 0.0)
    b.block(-3, 3, 1, 3, 0.0)
    b.block(-3, -1, -1, 1, 0.0)
    b.block(1, 3, -1, 1, 0.0)
    b.pyramid(0.0, 0.0, 1.0, 3.0)
    return {
        "id": "bunny",
        "mesh": b.mesh(),
        "connectors": [
            conn((0, 0, -3), (0, 0, -1), "white"),
            conn((3, 0, 0), (1, 0, 0), "red"),
        ],
        "colliders": [collider(-3, 3, -SLAB, 3.1, -3, 3)],
    }


BUILDERS = (platform, hallway, clover, ramp, bunny)


def main(out: Path = OUT) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for make in BUILDERS:
        doc = make()
        (out / f"{doc['id']}.json").write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else OUT)
