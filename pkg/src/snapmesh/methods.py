"""Pluggable generation methods: starting-piece choice, guide succession, termination.

A method is a small stateful strategy owned by one generation run. The engine
asks it for the starting piece once, for the first guide once, and then for
the next guide after every tentative-placement round until it returns None.

Random draws made here come from the run's shared stream, at these points:
one draw when choosing the starting piece (even with a single eligible
candidate), one draw when a star arm or a branch is opened.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from .errors import ConfigError, RegistrationError
from .pieces import MapPiece, PlacedPiece


@dataclass(frozen=True)
class GenerationMethodConfig:
    kind: str
    starter_con_tol: int = 0
    max_pieces: int | None = None
    arm_length: int | None = None
    arm_length_var: int = 0
    branch_count: int | None = None
    branch_length: int | None = None
    branch_length_var: int = 0
    extra: dict[str, Any] = field(default_factory=dict)

    def require(self, name: str, minimum: int) -> int:
        value = getattr(self, name)
        if value is None:
            raise ConfigError(f"method {self.kind!r} requires parameter {name!r}")
        if int(value) != value or value < minimum:
            raise ConfigError(f"method parameter {name!r} must be an integer >= {minimum}")
        return int(value)


def stall_guard(
    previous_guide: PlacedPiece | None, previous_free_count: int | None, current_guide: PlacedPiece
) -> bool:
    """True when the same placed piece is offered twice with no connector consumed."""
    return (
        previous_guide is not None
        and previous_guide.instance_id == current_guide.instance_id
        and previous_free_count == current_guide.free_count
    )


def select_starting_piece(
    prefer_most: bool, starter_con_tol: int, candidates: Sequence[MapPiece], rng: random.Random
) -> MapPiece:
    if not candidates:
        raise ConfigError("cannot select a starting piece from an empty list")
    counts = [p.connector_count for p in candidates]
    if prefer_most:
        bound = max(counts) - starter_con_tol
        eligible = [p for p in candidates if p.connector_count >= bound]
    else:
        bound = min(counts) + starter_con_tol
        eligible = [p for p in candidates if p.connector_count <= bound]
    return eligible[rng.randrange(len(eligible))]


def branch_jump_base(branch_count: int, branch_length: int) -> int:
    return max(1, branch_count // branch_length)


def neighborhood_order(center: int, radius: int, size: int) -> list[int]:
    """Indices center, center-1, center+1, center-2, ... limited to [0, size)."""
    order = [center] if 0 <= center < size else []
    for d in range(1, radius + 1):
        for k in (center - d, center + d):
            if 0 <= k < size:
                order.append(k)
    return order


class GenerationMethod:
    """Base strategy. Subclasses override the hooks prefixed with an underscore."""

    kind = "abstract"
    prefer_most_connectors = True
    params: tuple[str, ...] = ("starter_con_tol",)

    def __init__(self, config: GenerationMethodConfig):
        if config.starter_con_tol < 0:
            raise ConfigError("starter_con_tol must be non-negative")
        self.config = config
        self.end_reason: str | None = None
        self.current: PlacedPiece | None = None
        self._last_free: int | None = None
        self._seen = 0

    def select_starting_piece(self, candidates: Sequence[MapPiece], rng: random.Random) -> MapPiece:
        return select_starting_piece(
            self.prefer_most_connectors, self.config.starter_con_tol, candidates, rng
        )

    def first_guide(self, placed: Sequence[PlacedPiece], rng: random.Random) -> PlacedPiece | None:
        self._seen = len(placed)
        return self._accept(self._first(placed, rng))

    def next_guide(self, placed: Sequence[PlacedPiece], rng: random.Random) -> PlacedPiece | None:
        grew = len(placed) > self._seen
        self._seen = len(placed)
        guide = self._next(placed, grew, rng)
        if guide is not None and stall_guard(self.current, self._last_free, guide):
            self.end_reason = "stall"
            guide = None
        return self._accept(guide)

    def _accept(self, guide: PlacedPiece | None) -> PlacedPiece | None:
        if guide is not None:
            self.current = guide
            self._last_free = guide.free_count
        return guide

    def _end(self, reason: str) -> None:
        self.end_reason = reason
        return None

    def _first(self, placed: Sequence[PlacedPiece], rng: random.Random) -> PlacedPiece | None:
        return placed[0]

    def _next(
        self, placed: Sequence[PlacedPiece], grew: bool, rng: random.Random
    ) -> PlacedPiece | None:
        raise NotImplementedError


class ArenaMethod(GenerationMethod):
    """Grow outward from the start: exhaust a guide, then move to the next piece placed."""

    kind = "arena"
    params = ("starter_con_tol", "max_pieces")

    def __init__(self, config: GenerationMethodConfig):
        super().__init__(config)
        self.max_pieces = config.require("max_pieces", 0)

    def _first(self, placed, rng):
        if self.max_pieces == 0:
            return self._end("max_pieces")
        return placed[0]

    def _next(self, placed, grew, rng):
        if len(placed) - 1 >= self.max_pieces:
            return self._end("max_pieces")
        guide = self.current
        assert guide is not None
        if guide.free_count > 0:
            return guide
        nxt = guide.instance_id + 1
        if nxt >= len(placed):
            return self._end("order_exhausted")
        return placed[nxt]


class CorridorMethod(GenerationMethod):
    """Always extend from the most recently placed piece."""

    kind = "corridor"
    prefer_most_connectors = False
    params = ("starter_con_tol", "max_pieces")

    def __init__(self, config: GenerationMethodConfig):
        super().__init__(config)
        self.max_pieces = config.require("max_pieces", 0)

    def _first(self, placed, rng):
        if self.max_pieces == 0:
            return self._end("max_pieces")
        return placed[0]

    def _next(self, placed, grew, rng):
        if len(placed) - 1 >= self.max_pieces:
            return self._end("max_pieces")
        return placed[-1]


@dataclass
class Lane:
    """One star arm or branch: where it started and how far it got."""

    root: int
    target: int
    length: int = 0
    center: int = 0
    outcome: str = "open"


def _draw_length(rng: random.Random, mean: int, var: int) -> int:
    return max(1, rng.randint(mean - var, mean + var))


class _LaneMethod(GenerationMethod):
    """Shared bookkeeping for star and branch: grow a lane from its last piece."""

    def __init__(self, config: GenerationMethodConfig):
        super().__init__(config)
        self.lanes: list[Lane] = []

    def _lane_length(self) -> tuple[int, int]:
        raise NotImplementedError

    def _open(self, root: int, rng: random.Random, center: int = 0) -> None:
        mean, var = self._lane_length()
        self.lanes.append(Lane(root=root, target=_draw_length(rng, mean, var), center=center))

    def _first(self, placed, rng):
        self._open(0, rng)
        return placed[0]

    def _next(self, placed, grew, rng):
        lane = self.lanes[-1]
        if grew:
            lane.length += 1
        last = placed[-1]
        if grew and lane.length < lane.target and last.free_count > 0:
            return last
        if not grew and lane.length == 0:
            # the root itself could not take a piece; re-offer it so the stall guard ends the run
            return placed[lane.root]
        if lane.length >= lane.target:
            lane.outcome = "complete"
        elif grew:
            lane.outcome = "terminal"
        else:
            lane.outcome = "failed"
        return self._new_lane(placed, rng)

    def _new_lane(self, placed, rng):
        raise NotImplementedError


class StarMethod(_LaneMethod):
    """Arms radiating from the starting piece, which acts as a hub."""

    kind = "star"
    params = ("starter_con_tol", "arm_length", "arm_length_var")

    def __init__(self, config: GenerationMethodConfig):
        super().__init__(config)
        self.arm_length = config.require("arm_length", 1)
        self.arm_length_var = config.require("arm_length_var", 0)

    def _lane_length(self):
        return self.arm_length, self.arm_length_var

    def _new_lane(self, placed, rng):
        hub = placed[0]
        if hub.free_count == 0:
            return self._end("hub_exhausted")
        self._open(0, rng)
        return hub

    @property
    def arms(self) -> list[Lane]:
        return self.lanes


class BranchMethod(_LaneMethod):
    """Branches rooted at evenly spaced jumps along the placement order."""

    kind = "branch"
    prefer_most_connectors = False
    params = ("starter_con_tol", "branch_count", "branch_length", "branch_length_var")

    def __init__(self, config: GenerationMethodConfig):
        super().__init__(config)
        self.branch_count = config.require("branch_count", 1)
        self.branch_length = config.require("branch_length", 1)
        self.branch_length_var = config.require("branch_length_var", 0)
        self.jump_base = branch_jump_base(self.branch_count, self.branch_length)

    def _lane_length(self):
        return self.branch_length, self.branch_length_var

    def _new_lane(self, placed, rng):
        i = len(self.lanes)
        if i >= self.branch_count:
            return self._end("branches_done")
        center = min(i * self.jump_base, len(placed) - 1)
        for k in neighborhood_order(center, self.jump_base, len(placed)):
            if placed[k].free_count > 0:
                self._open(k, rng, center=center)
                return placed[k]
        return self._end("neighborhood_exhausted")

    @property
    def branches(self) -> list[Lane]:
        return self.lanes


@dataclass(frozen=True)
class MethodEntry:
    name: str
    factory: Callable[[GenerationMethodConfig], GenerationMethod]
    params: tuple[str, ...]


_REGISTRY: dict[str, MethodEntry] = {}


def register_method(
    name: str,
    factory: Callable[[GenerationMethodConfig], GenerationMethod],
    params: Sequence[str] | None = None,
) -> MethodEntry:
    if name in _REGISTRY:
        raise RegistrationError(f"generation method {name!r} is already registered")
    if params is None:
        params = getattr(factory, "params", ())
    entry = MethodEntry(name, factory, tuple(params))
    _REGISTRY[name] = entry
    return entry


def unregister_method(name: str) -> None:
    _REGISTRY.pop(name, None)


def registered_methods() -> list[MethodEntry]:
    return list(_REGISTRY.values())


def create_method(config: GenerationMethodConfig) -> GenerationMethod:
    try:
        entry = _REGISTRY[config.kind]
    except KeyError:
        raise ConfigError(
            f"unknown generation method {config.kind!r}; registered: {sorted(_REGISTRY)}"
        ) from None
    return entry.factory(config)


for _cls in (ArenaMethod, CorridorMethod, StarMethod, BranchMethod):
    register_method(_cls.kind, _cls)
