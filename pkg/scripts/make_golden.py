"""Freeze the golden arena map used by the test suite.

Run only after the map has been checked: 13 pieces, no collider overlaps.
"""

import dataclasses
from pathlib import Path

from snapmesh import data, generate
from snapmesh.formats import dump_map, load_config

OUT = Path(__file__).resolve().parents[1] / "tests" / "golden" / "arena_seed2.json"


def main() -> None:
    loaded = load_config(data.bundled_config_path("arena"), data.load_bundled_library())
    loaded.generation = dataclasses.replace(loaded.generation, seed=2)
    gmap = generate(loaded.generation, loaded.library, config_digest=loaded.digest())
    OUT.write_text(dump_map(gmap), encoding="utf-8")
    print(f"{OUT}: {gmap.piece_count} pieces, end={gmap.end_reason}")


if __name__ == "__main__":
    main()
