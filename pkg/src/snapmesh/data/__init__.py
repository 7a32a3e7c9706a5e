"""Bundled piece set and example configurations."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

PIECE_IDS = ("platform", "hallway", "clover", "ramp", "bunny")


def data_dir() -> Path:
    return Path(str(resources.files(__name__)))


def bundled_piece_paths() -> list[Path]:
    return sorted((data_dir() / "pieces").glob("*.json"))


def bundled_config_path(name: str) -> Path:
    path = data_dir() / "configs" / f"{name}.json"
    if not path.exists():
        raise FileNotFoundError(f"no bundled config named {name!r}")
    return path


def bundled_config_names() -> list[str]:
    return sorted(p.stem for p in (data_dir() / "configs").glob("*.json"))


def load_bundled_library():
    from ..formats import load_piece_library

    return load_piece_library(bundled_piece_paths())
