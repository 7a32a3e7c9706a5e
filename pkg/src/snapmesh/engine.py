"""The generation loop and its narration log.

Random draw order within a run is fixed: the method's starting-piece draw,
then any draw the method makes when handing out the first guide, then for
every tentative attempt one draw for the blueprint followed by one draw per
pairing tried (an index into the shrinking list of remaining pairings), and
method draws whenever a new star arm or branch is opened.
"""

from __future__ import annotations

import hashlib
import json
import random
import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import ConfigError
from .geometry import DEFAULT_SHRINK_EPS, IDENTITY, WorldBox, any_overlap
from .methods import GenerationMethod, GenerationMethodConfig, create_method
from .pieces import (
    MapPiece,
    MatchingRules,
    PlacedPiece,
    check_palette,
    enumerate_valid_pairings,
    snap_transform,
)

SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class GenerationConfig:
    pieces_list: tuple[str, ...]
    method: GenerationMethodConfig
    matching_rules: MatchingRules = field(default_factory=MatchingRules)
    use_starter: bool = False
    starter_list: tuple[str, ...] = ()
    max_fails: int = 10
    piece_distance: float = 0.0001
    check_overlaps: bool = True
    seed: int = 0
    shrink_eps: float = DEFAULT_SHRINK_EPS

    def __post_init__(self) -> None:
        object.__setattr__(self, "pieces_list", tuple(self.pieces_list))
        object.__setattr__(self, "starter_list", tuple(self.starter_list))
        if not self.pieces_list:
            raise ConfigError("pieces_list must not be empty")
        if self.use_starter and not self.starter_list:
            raise ConfigError("use_starter is set but starter_list is empty")
        if self.max_fails < 1:
            raise ConfigError("max_fails must be at least 1")
        if self.piece_distance < 0:
            raise ConfigError("piece_distance must be non-negative")


@dataclass(frozen=True)
class ConnectionRecord:
    guide_instance: int
    guide_connector: int
    tentative_instance: int
    tentative_connector: int


@dataclass
class GeneratedMap:
    config_hash: str
    seed: int
    placed: list[PlacedPiece]
    connections: list[ConnectionRecord]
    log: list[str]
    end_reason: str = ""
    generation_ms: float = 0.0

    @property
    def piece_count(self) -> int:
        return len(self.placed)


def make_rng(seed: int) -> random.Random:
    # masking keeps negative seeds distinct from their absolute value
    return random.Random(seed & SEED_MASK)


def select_random_tentative(rng: random.Random, pieces_list: Sequence[MapPiece]) -> MapPiece:
    return pieces_list[rng.randrange(len(pieces_list))]


def world_colliders(piece: PlacedPiece) -> list[WorldBox]:
    return [c.posed(piece.pose) for c in piece.blueprint.colliders]


def config_hash(config_doc: Mapping, library_doc: Mapping) -> str:
    blob = json.dumps(
        {"config": config_doc, "library": library_doc}, sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _resolve(ids: Sequence[str], library: Mapping[str, MapPiece], what: str) -> list[MapPiece]:
    out = []
    for pid in ids:
        if pid not in library:
            raise ConfigError(f"{what} references unknown piece id {pid!r}")
        out.append(library[pid])
    return out


class _Narrator:
    def __init__(self) -> None:
        self.lines: list[str] = []

    def step(self, guide: PlacedPiece | None, tentative: str, pairings: int, result: str) -> None:
        g = f"{guide.instance_id}/{guide.blueprint_id}" if guide is not None else "none"
        self.lines.append(
            f"STEP {len(self.lines)} | guide={g} | tentative={tentative} | "
            f"pairings={pairings} | result={result}"
        )


def generate(
    config: GenerationConfig,
    library: Mapping[str, MapPiece],
    method: GenerationMethod | None = None,
    config_digest: str = "",
) -> GeneratedMap:
    """Build a map by snapping random blueprint copies onto method-chosen guides."""
    t0 = time.perf_counter()
    pieces = _resolve(config.pieces_list, library, "pieces_list")
    starters = (
        _resolve(config.starter_list, library, "starter_list") if config.use_starter else pieces
    )
    rules = config.matching_rules
    if rules.uses_colors:
        assert rules.color_matrix is not None
        check_palette(pieces + starters, rules.color_matrix)
    if method is None:
        method = create_method(config.method)

    rng = make_rng(config.seed)
    log = _Narrator()
    start = method.select_starting_piece(starters, rng)
    placed = [PlacedPiece(0, start, IDENTITY)]
    boxes: list[WorldBox] = world_colliders(placed[0])
    connections: list[ConnectionRecord] = []

    guide = method.first_guide(placed, rng)
    while guide is not None:
        fail_count = 0
        connection = None
        while connection is None and fail_count < config.max_fails:
            tentative = select_random_tentative(rng, pieces)
            pairings = enumerate_valid_pairings(rules, guide, tentative)
            offered = len(pairings)
            while pairings and connection is None:
                k = rng.randrange(len(pairings))
                gi, ti = pairings[k]
                pos, heading = guide.connector_world(gi)
                pose = snap_transform(pos, heading, tentative.connectors[ti], config.piece_distance)
                new_boxes = [c.posed(pose) for c in tentative.colliders]
                if config.check_overlaps and any_overlap(new_boxes, boxes, config.shrink_eps):
                    log.step(guide, tentative.id, len(pairings), f"OVERLAP_REJECT({gi}->{ti})")
                    pairings.pop(k)
                else:
                    connection = (gi, ti, pose, new_boxes)
                    log.step(guide, tentative.id, len(pairings), f"SNAP({gi}->{ti})")
            if connection is None:
                fail_count += 1
                log.step(guide, tentative.id, offered, f"FAIL({fail_count}/{config.max_fails})")
            else:
                gi, ti, pose, new_boxes = connection
                piece = PlacedPiece(len(placed), tentative, pose)
                piece.connector_used[ti] = True
                guide.connector_used[gi] = True
                placed.append(piece)
                boxes.extend(new_boxes)
                connections.append(ConnectionRecord(guide.instance_id, gi, piece.instance_id, ti))
        guide = method.next_guide(placed, rng)

    reason = method.end_reason or "none"
    log.step(None, "-", 0, f"END({reason})")
    return GeneratedMap(
        config_hash=config_digest,
        seed=config.seed,
        placed=placed,
        connections=connections,
        log=log.lines,
        end_reason=reason,
        generation_ms=(time.perf_counter() - t0) * 1000.0,
    )
