"""Map pieces, connectors, matching rules and the snap pose."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .errors import ConfigError
from .geometry import Obb, TriMesh, Vec3, YawTransform, heading_angle


class MatchMode(str, Enum):
    NONE = "none"
    PINS = "pins"
    COLORS = "colors"
    BOTH = "both"


@dataclass(frozen=True)
class ColorMatrix:
    """Guide-to-tentative color compatibility.

    ``allowed[g][t]`` is indexed by palette position, rows are the guide
    connector color and columns the tentative connector color.
    """

    palette: tuple[str, ...]
    allowed: tuple[tuple[bool, ...], ...]

    def __post_init__(self) -> None:
        palette = tuple(self.palette)
        allowed = tuple(tuple(bool(x) for x in row) for row in self.allowed)
        if len(set(palette)) != len(palette):
            raise ConfigError(f"duplicate colors in palette {palette}")
        if len(allowed) != len(palette) or any(len(r) != len(palette) for r in allowed):
            raise ConfigError(
                f"color matrix must be {len(palette)}x{len(palette)} to match the palette"
            )
        object.__setattr__(self, "palette", palette)
        object.__setattr__(self, "allowed", allowed)
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(palette)})

    def index(self, color: str) -> int:
        try:
            return self._index[color]  # type: ignore[attr-defined]
        except KeyError:
            raise ConfigError(f"color {color!r} is not in the palette {list(self.palette)}") from None

    @classmethod
    def same_color(cls, palette: Sequence[str], wildcards: Sequence[str] = ()) -> "ColorMatrix":
        """Each color matches itself; wildcard colors match everything both ways."""
        wild = set(wildcards)
        rows = tuple(
            tuple(g == t or g in wild or t in wild for t in palette) for g in palette
        )
        return cls(tuple(palette), rows)

    def is_symmetric(self) -> bool:
        n = len(self.palette)
        return all(self.allowed[i][j] == self.allowed[j][i] for i in range(n) for j in range(n))


@dataclass(frozen=True)
class Connector:
    local_position: Vec3
    heading: Vec3
    pins: int = 0
    color: str = "white"

    def __post_init__(self) -> None:
        object.__setattr__(self, "local_position", Vec3(*map(float, self.local_position)))
        object.__setattr__(self, "heading", horizontal_heading(Vec3(*map(float, self.heading))))
        if int(self.pins) != self.pins or self.pins < 0:
            raise ValueError(f"pin count must be a non-negative integer, got {self.pins}")
        object.__setattr__(self, "pins", int(self.pins))


def horizontal_heading(v: Vec3) -> Vec3:
    """Project a heading onto the horizontal plane and normalize it."""
    n = math.hypot(v.x, v.z)
    if not math.isfinite(n) or n < 1e-9:
        raise ValueError(f"heading {tuple(v)} has no horizontal component")
    return Vec3(v.x / n, 0.0, v.z / n)


@dataclass(frozen=True)
class MapPiece:
    id: str
    mesh: TriMesh
    connectors: tuple[Connector, ...]
    colliders: tuple[Obb, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "connectors", tuple(self.connectors))
        object.__setattr__(self, "colliders", tuple(self.colliders))
        if not self.connectors:
            raise ValueError(f"piece {self.id!r} needs at least one connector")

    @property
    def connector_count(self) -> int:
        return len(self.connectors)


@dataclass(frozen=True)
class MatchingRules:
    mode: MatchMode = MatchMode.NONE
    pin_tolerance: int = 0
    color_matrix: ColorMatrix | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", MatchMode(self.mode))
        if self.pin_tolerance < 0:
            raise ConfigError("pin_tolerance must be non-negative")
        if self.uses_colors and self.color_matrix is None:
            raise ConfigError(f"matching mode {self.mode.value!r} requires a color matrix")

    @property
    def uses_pins(self) -> bool:
        return self.mode in (MatchMode.PINS, MatchMode.BOTH)

    @property
    def uses_colors(self) -> bool:
        return self.mode in (MatchMode.COLORS, MatchMode.BOTH)


def pins_compatible(pins_guide: int, pins_tentative: int, tolerance: int) -> bool:
    return abs(pins_guide - pins_tentative) <= tolerance


def colors_compatible(m: ColorMatrix, guide: str, tentative: str) -> bool:
    return m.allowed[m.index(guide)][m.index(tentative)]


def connectors_match(rules: MatchingRules, guide: Connector, tentative: Connector) -> bool:
    if rules.uses_pins and not pins_compatible(guide.pins, tentative.pins, rules.pin_tolerance):
        return False
    if rules.uses_colors:
        assert rules.color_matrix is not None
        return colors_compatible(rules.color_matrix, guide.color, tentative.color)
    return True


def check_palette(pieces: Sequence[MapPiece], matrix: ColorMatrix) -> None:
    """Raise ConfigError naming the first connector whose color is undeclared."""
    for piece in pieces:
        for i, conn in enumerate(piece.connectors):
            if conn.color not in matrix.palette:
                raise ConfigError(
                    f"piece {piece.id!r} connector {i} uses color {conn.color!r} "
                    f"which is not in the palette {list(matrix.palette)}"
                )


def snap_transform(
    guide_conn_world_pos: Vec3,
    guide_conn_world_heading: Vec3,
    tentative: Connector,
    piece_distance: float,
) -> YawTransform:
    """Pose that puts ``tentative`` facing the guide connector.

    The tentative connector ends up ``piece_distance`` ahead of the guide
    connector along the guide heading, with its own heading reversed.
    """
    facing = -guide_conn_world_heading
    yaw = heading_angle(facing) - heading_angle(tentative.heading)
    rot = YawTransform(Vec3(0.0, 0.0, 0.0), yaw)
    target = guide_conn_world_pos + guide_conn_world_heading.scale(piece_distance)
    return YawTransform(target - rot.rotate(tentative.local_position), yaw)


@dataclass
class PlacedPiece:
    """A posed copy of a blueprint. Only ``connector_used`` changes after placement."""

    instance_id: int
    blueprint: MapPiece
    pose: YawTransform
    connector_used: list[bool] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.connector_used:
            self.connector_used = [False] * len(self.blueprint.connectors)

    @property
    def blueprint_id(self) -> str:
        return self.blueprint.id

    @property
    def free_count(self) -> int:
        return self.connector_used.count(False)

    def connector_world(self, index: int) -> tuple[Vec3, Vec3]:
        conn = self.blueprint.connectors[index]
        return self.pose.apply(conn.local_position), self.pose.rotate(conn.heading)


def enumerate_valid_pairings(
    rules: MatchingRules, guide: PlacedPiece, tentative: MapPiece
) -> list[tuple[int, int]]:
    """All (guide connector, tentative connector) pairs that may snap.

    Ordered by guide index, then tentative index. Used guide connectors are
    skipped; the tentative piece is a fresh copy so all its connectors are free.
    """
    out = []
    for gi, gconn in enumerate(guide.blueprint.connectors):
        if guide.connector_used[gi]:
            continue
        for ti, tconn in enumerate(tentative.connectors):
            if connectors_match(rules, gconn, tconn):
                out.append((gi, ti))
    return out
