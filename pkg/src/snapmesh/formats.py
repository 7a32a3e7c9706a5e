"""Piece, config, map and report files; OBJ import and export.

Numbers in structured files keep 9 significant digits and angles are stored
in degrees. The color matrix is row-major: row = guide connector color,
column = tentative connector color, both in palette order.
"""

from __future__ import annotations

import glob
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import jsonschema

from .engine import ConnectionRecord, GeneratedMap, GenerationConfig
from .errors import ConfigError, LoadError
from .geometry import Obb, TriMesh, Vec3, YawTransform, transform_mesh
from .methods import GenerationMethodConfig
from .pieces import ColorMatrix, Connector, MapPiece, MatchingRules, PlacedPiece
from .validation import NavConfig, ValidationReport

_VEC3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}

PIECE_SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["id", "mesh", "connectors"],
    "properties": {
        "id": {"type": "string", "minLength": 1},
        "mesh": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["obj_path"],
                    "properties": {"obj_path": {"type": "string"}},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["vertices", "triangles"],
                    "properties": {
                        "vertices": {"type": "array", "items": _VEC3},
                        "triangles": {
                            "type": "array",
                            "items": {
                                "type": "array",
                                "items": {"type": "integer", "minimum": 0},
                                "minItems": 3,
                                "maxItems": 3,
                            },
                        },
                    },
                },
            ]
        },
        "connectors": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["position", "heading"],
                "properties": {
                    "position": _VEC3,
                    "heading": _VEC3,
                    "pins": {"type": "integer", "minimum": 0},
                    "color": {"type": "string"},
                },
            },
        },
        "colliders": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["center", "half_extents"],
                "properties": {
                    "center": _VEC3,
                    "half_extents": _VEC3,
                    "yaw_deg": {"type": "number"},
                },
            },
        },
    },
}

_METHOD_FIELDS = {
    "kind": {"type": "string"},
    "starter_con_tol": {"type": "integer", "minimum": 0},
    "max_pieces": {"type": "integer", "minimum": 0},
    "arm_length": {"type": "integer", "minimum": 1},
    "arm_length_var": {"type": "integer", "minimum": 0},
    "branch_count": {"type": "integer", "minimum": 1},
    "branch_length": {"type": "integer", "minimum": 1},
    "branch_length_var": {"type": "integer", "minimum": 0},
    "extra": {"type": "object"},
}

_NAV_FIELDS = {
    "n_points": {"type": "integer", "minimum": 2},
    "agent_radius": {"type": "number", "exclusiveMinimum": 0},
    "agent_height": {"type": "number", "exclusiveMinimum": 0},
    "max_step_height": {"type": "number", "minimum": 0},
    "max_slope_deg": {"type": "number", "minimum": 0, "exclusiveMaximum": 90},
    "link_radius": {"type": "number", "exclusiveMinimum": 0},
    "seed": {"type": "integer"},
    "anchor_spacing": {"type": "number", "minimum": 0},
}

CONFIG_SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["pieces_list", "method"],
    "properties": {
        "pieces_list": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "use_starter": {"type": "boolean"},
        "starter_list": {"type": "array", "items": {"type": "string"}},
        "matching_rules": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "mode": {"enum": ["none", "pins", "colors", "both"]},
                "pin_tolerance": {"type": "integer", "minimum": 0},
                "color_palette": {"type": "array", "items": {"type": "string"}},
                "color_matrix": {
                    "type": "array",
                    "items": {"type": "array", "items": {"type": "boolean"}},
                },
            },
        },
        "max_fails": {"type": "integer", "minimum": 1},
        "piece_distance": {"type": "number", "minimum": 0},
        "check_overlaps": {"type": "boolean"},
        "shrink_eps": {"type": "number", "minimum": 0},
        "seed": {"type": ["integer", "null"]},
        "method": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": _METHOD_FIELDS,
        },
        "nav": {"type": "object", "additionalProperties": False, "properties": _NAV_FIELDS},
    },
}


def num(x: float) -> float:
    """Round to 9 significant digits; values below 1e-9 in magnitude become 0."""
    x = float(x)
    if abs(x) < 1e-9:
        return 0.0
    return float(f"{x:.9g}")


def _vec(v: Iterable[float]) -> list[float]:
    return [num(c) for c in v]


def dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def atomic_write(path: str | os.PathLike, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_json(path: str | os.PathLike) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise LoadError(str(exc), str(path)) from exc
    except json.JSONDecodeError as exc:
        raise LoadError(f"invalid JSON: {exc}", str(path)) from exc


def _check_schema(doc: Any, schema: Mapping, path: str | None) -> None:
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        field = "/".join(str(p) for p in exc.absolute_path) or None
        raise LoadError(exc.message, path, field) from None


# --- OBJ ----------------------------------------------------------------


def parse_obj(text: str) -> TriMesh:
    """Read ``v`` and ``f`` records; polygons are fan-triangulated."""
    verts: list[Vec3] = []
    tris: list[tuple[int, int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append(Vec3(*(float(c) for c in parts[1:4])))
        elif parts[0] == "f":
            idx = []
            for tok in parts[1:]:
                i = int(tok.split("/")[0])
                idx.append(i - 1 if i > 0 else len(verts) + i)
            if len(idx) < 3:
                raise ValueError(f"line {lineno}: face with fewer than 3 vertices")
            for k in range(1, len(idx) - 1):
                tris.append((idx[0], idx[k], idx[k + 1]))
    return TriMesh(tuple(verts), tuple(tris))


def _obj_num(x: float) -> str:
    return repr(num(x))


def mesh_obj_lines(mesh: TriMesh, name: str, offset: int = 0) -> list[str]:
    lines = [f"o {name}"]
    lines += [f"v {_obj_num(v.x)} {_obj_num(v.y)} {_obj_num(v.z)}" for v in mesh.vertices]
    lines += [f"f {a + 1 + offset} {b + 1 + offset} {c + 1 + offset}" for a, b, c in mesh.triangles]
    return lines


def export_obj(gmap: GeneratedMap) -> str:
    """One ``o`` group per placed piece, world-space vertices, placement order."""
    lines = ["# snapmesh map export", f"# seed {gmap.seed}"]
    offset = 0
    for p in gmap.placed:
        mesh = transform_mesh(p.blueprint.mesh, p.pose)
        lines += mesh_obj_lines(mesh, f"piece_{p.instance_id}_{p.blueprint_id}", offset)
        offset += len(mesh.vertices)
    return "\n".join(lines) + "\n"


# --- pieces ----------------------------------------------------------------


def piece_from_doc(doc: Any, path: str | None = None, base_dir: str | os.PathLike = ".") -> MapPiece:
    _check_schema(doc, PIECE_SCHEMA, path)
    mdoc = doc["mesh"]
    if "obj_path" in mdoc:
        obj = Path(base_dir) / mdoc["obj_path"]
        try:
            mesh = parse_obj(obj.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise LoadError(f"cannot read mesh: {exc}", path, "mesh/obj_path") from exc
    else:
        try:
            mesh = TriMesh(tuple(mdoc["vertices"]), tuple(mdoc["triangles"]))
        except ValueError as exc:
            raise LoadError(str(exc), path, "mesh") from exc
    connectors = []
    for i, c in enumerate(doc["connectors"]):
        try:
            connectors.append(
                Connector(Vec3(*c["position"]), Vec3(*c["heading"]), c.get("pins", 0), c.get("color", "white"))
            )
        except ValueError as exc:
            raise LoadError(str(exc), path, f"connectors/{i}") from exc
    if not connectors:
        raise LoadError("a piece needs at least one connector", path, "connectors")
    colliders = []
    for i, c in enumerate(doc.get("colliders", [])):
        try:
            colliders.append(
                Obb(Vec3(*c["center"]), Vec3(*c["half_extents"]), math.radians(c.get("yaw_deg", 0.0)))
            )
        except ValueError as exc:
            raise LoadError(str(exc), path, f"colliders/{i}") from exc
    return MapPiece(doc["id"], mesh, tuple(connectors), tuple(colliders))


def piece_to_doc(piece: MapPiece) -> dict[str, Any]:
    return {
        "id": piece.id,
        "mesh": {
            "vertices": [_vec(v) for v in piece.mesh.vertices],
            "triangles": [list(t) for t in piece.mesh.triangles],
        },
        "connectors": [
            {
                "position": _vec(c.local_position),
                "heading": _vec(c.heading),
                "pins": c.pins,
                "color": c.color,
            }
            for c in piece.connectors
        ],
        "colliders": [
            {
                "center": _vec(b.center),
                "half_extents": _vec(b.half_extents),
                "yaw_deg": num(math.degrees(b.yaw)),
            }
            for b in piece.colliders
        ],
    }


def load_piece_file(path: str | os.PathLike) -> MapPiece:
    return piece_from_doc(_read_json(path), str(path), Path(path).parent)


def load_piece_library(paths: Iterable[str | os.PathLike]) -> dict[str, MapPiece]:
    library: dict[str, MapPiece] = {}
    origin: dict[str, str] = {}
    for path in paths:
        piece = load_piece_file(path)
        if piece.id in library:
            raise LoadError(
                f"duplicate piece id {piece.id!r} (also defined in {origin[piece.id]})",
                str(path),
                "id",
            )
        library[piece.id] = piece
        origin[piece.id] = str(path)
    return library


def library_doc(library: Mapping[str, MapPiece]) -> dict[str, Any]:
    return {pid: piece_to_doc(library[pid]) for pid in sorted(library)}


# --- config ----------------------------------------------------------------


@dataclass
class LoadedConfig:
    generation: GenerationConfig
    nav: NavConfig
    library: dict[str, MapPiece]
    seed_from_file: bool

    def digest(self) -> str:
        from .engine import config_hash

        return config_hash(config_to_doc(self.generation, self.nav), library_doc(self.library))


def _is_glob(entry: str) -> bool:
    return any(ch in entry for ch in "*?[/\\") or entry.endswith(".json")


def config_from_doc(
    doc: Any,
    library: Mapping[str, MapPiece] | None = None,
    path: str | None = None,
    base_dir: str | os.PathLike = ".",
) -> LoadedConfig:
    _check_schema(doc, CONFIG_SCHEMA, path)
    library = dict(library or {})

    def resolve(entries: Sequence[str], field: str) -> list[str]:
        ids = []
        for entry in entries:
            if entry in library or not _is_glob(entry):
                ids.append(entry)
                continue
            matches = sorted(glob.glob(str(Path(base_dir) / entry)))
            if not matches:
                raise LoadError(f"no piece files match {entry!r}", path, field)
            for m in matches:
                piece = load_piece_file(m)
                if piece.id in library and library[piece.id] != piece:
                    raise LoadError(f"duplicate piece id {piece.id!r}", m, "id")
                library[piece.id] = piece
                ids.append(piece.id)
        return ids

    pieces_list = resolve(doc["pieces_list"], "pieces_list")
    starter_list = resolve(doc.get("starter_list", []), "starter_list")

    mr = doc.get("matching_rules", {})
    matrix = None
    if "color_palette" in mr or "color_matrix" in mr:
        try:
            matrix = ColorMatrix(tuple(mr.get("color_palette", [])), tuple(map(tuple, mr.get("color_matrix", []))))
        except ConfigError as exc:
            raise LoadError(str(exc), path, "matching_rules/color_matrix") from exc
    m = doc["method"]
    try:
        rules = MatchingRules(mr.get("mode", "none"), mr.get("pin_tolerance", 0), matrix)
        method = GenerationMethodConfig(
            kind=m["kind"],
            starter_con_tol=m.get("starter_con_tol", 0),
            max_pieces=m.get("max_pieces"),
            arm_length=m.get("arm_length"),
            arm_length_var=m.get("arm_length_var", 0),
            branch_count=m.get("branch_count"),
            branch_length=m.get("branch_length"),
            branch_length_var=m.get("branch_length_var", 0),
            extra=dict(m.get("extra", {})),
        )
        seed = doc.get("seed")
        gen = GenerationConfig(
            pieces_list=tuple(pieces_list),
            method=method,
            matching_rules=rules,
            use_starter=doc.get("use_starter", False),
            starter_list=tuple(starter_list),
            max_fails=doc.get("max_fails", 10),
            piece_distance=doc.get("piece_distance", 0.0001),
            check_overlaps=doc.get("check_overlaps", True),
            seed=0 if seed is None else seed,
            **({"shrink_eps": doc["shrink_eps"]} if "shrink_eps" in doc else {}),
        )
        nav = NavConfig(**doc.get("nav", {}))
    except (ConfigError, ValueError) as exc:
        raise LoadError(str(exc), path) from exc
    return LoadedConfig(gen, nav, library, seed is not None)


def load_config(
    path: str | os.PathLike, library: Mapping[str, MapPiece] | None = None
) -> LoadedConfig:
    return config_from_doc(_read_json(path), library, str(path), Path(path).parent)


def config_to_doc(gen: GenerationConfig, nav: NavConfig | None = None) -> dict[str, Any]:
    rules = gen.matching_rules
    mr: dict[str, Any] = {"mode": rules.mode.value, "pin_tolerance": rules.pin_tolerance}
    if rules.color_matrix is not None:
        mr["color_palette"] = list(rules.color_matrix.palette)
        mr["color_matrix"] = [list(r) for r in rules.color_matrix.allowed]
    m = gen.method
    method: dict[str, Any] = {"kind": m.kind, "starter_con_tol": m.starter_con_tol}
    for name in ("max_pieces", "arm_length", "branch_count", "branch_length"):
        if getattr(m, name) is not None:
            method[name] = getattr(m, name)
    if m.arm_length is not None:
        method["arm_length_var"] = m.arm_length_var
    if m.branch_count is not None or m.branch_length is not None:
        method["branch_length_var"] = m.branch_length_var
    if m.extra:
        method["extra"] = dict(m.extra)
    doc: dict[str, Any] = {
        "pieces_list": list(gen.pieces_list),
        "use_starter": gen.use_starter,
        "starter_list": list(gen.starter_list),
        "matching_rules": mr,
        "max_fails": gen.max_fails,
        "piece_distance": num(gen.piece_distance),
        "check_overlaps": gen.check_overlaps,
        "shrink_eps": num(gen.shrink_eps),
        "seed": gen.seed,
        "method": method,
    }
    if nav is not None:
        doc["nav"] = {
            "n_points": nav.n_points,
            "agent_radius": num(nav.agent_radius),
            "agent_height": num(nav.agent_height),
            "max_step_height": num(nav.max_step_height),
            "max_slope_deg": num(nav.max_slope_deg),
            "link_radius": num(nav.link_radius),
            "seed": nav.seed,
            "anchor_spacing": num(nav.anchor_spacing),
        }
    return doc


# --- maps ----------------------------------------------------------------


def map_to_doc(gmap: GeneratedMap, include_timing: bool = False) -> dict[str, Any]:
    return {
        "config_hash": gmap.config_hash,
        "seed": gmap.seed,
        "placed": [
            {
                "instance_id": p.instance_id,
                "blueprint_id": p.blueprint_id,
                "pose": {
                    "translation": _vec(p.pose.translation),
                    "yaw_deg": num(math.degrees(p.pose.yaw)),
                },
            }
            for p in gmap.placed
        ],
        "connections": [
            {
                "guide_instance": c.guide_instance,
                "guide_connector": c.guide_connector,
                "tentative_instance": c.tentative_instance,
                "tentative_connector": c.tentative_connector,
            }
            for c in gmap.connections
        ],
        "summary": {
            "piece_count": gmap.piece_count,
            "connection_count": len(gmap.connections),
            "end_reason": gmap.end_reason,
            "generation_ms": num(gmap.generation_ms) if include_timing else None,
        },
    }


def dump_map(gmap: GeneratedMap, include_timing: bool = False) -> str:
    return dumps(map_to_doc(gmap, include_timing))


def map_from_doc(doc: Any, library: Mapping[str, MapPiece], path: str | None = None) -> GeneratedMap:
    try:
        placed = []
        for i, p in enumerate(doc["placed"]):
            if p["instance_id"] != i:
                raise LoadError("instance ids must be contiguous from 0", path, f"placed/{i}")
            bid = p["blueprint_id"]
            if bid not in library:
                raise LoadError(f"unknown blueprint {bid!r}", path, f"placed/{i}/blueprint_id")
            pose = YawTransform(Vec3(*p["pose"]["translation"]), math.radians(p["pose"]["yaw_deg"]))
            placed.append(PlacedPiece(i, library[bid], pose))
        connections = []
        for c in doc["connections"]:
            rec = ConnectionRecord(
                c["guide_instance"], c["guide_connector"], c["tentative_instance"], c["tentative_connector"]
            )
            placed[rec.guide_instance].connector_used[rec.guide_connector] = True
            placed[rec.tentative_instance].connector_used[rec.tentative_connector] = True
            connections.append(rec)
        summary = doc.get("summary", {})
        return GeneratedMap(
            config_hash=doc["config_hash"],
            seed=doc["seed"],
            placed=placed,
            connections=connections,
            log=[],
            end_reason=summary.get("end_reason", ""),
            generation_ms=summary.get("generation_ms") or 0.0,
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise LoadError(f"malformed map document: {exc!r}", path) from exc


def load_map(path: str | os.PathLike, library: Mapping[str, MapPiece]) -> GeneratedMap:
    return map_from_doc(_read_json(path), library, str(path))


# --- reports ----------------------------------------------------------------


def pct(x: float) -> float:
    return round(100.0 * x + 0.0, 2)


def report_to_doc(report: ValidationReport) -> dict[str, Any]:
    return {
        "c_bar_pct": pct(report.c_bar),
        "a_r_max_pct": pct(report.a_r_max),
        "region_count": report.region_count,
        "isolated_region_count": report.isolated_region_count,
        "n_points": report.n_points,
        "connected_pairs": report.connected_pairs,
        "nav_seed": report.nav_seed,
        "duration_s": round(report.duration, 3),
    }


def write_report(report: ValidationReport) -> str:
    return dumps(report_to_doc(report))


def report_from_doc(doc: Mapping[str, Any]) -> ValidationReport:
    return ValidationReport(
        c_bar=doc["c_bar_pct"] / 100.0,
        a_r_max=doc["a_r_max_pct"] / 100.0,
        region_count=doc["region_count"],
        isolated_region_count=doc["isolated_region_count"],
        n_points=doc["n_points"],
        duration=doc["duration_s"],
        connected_pairs=doc.get("connected_pairs", 0),
        nav_seed=doc.get("nav_seed", 0),
    )


def format_report(report: ValidationReport) -> str:
    return (
        f"c_bar={pct(report.c_bar):.2f}% A_r_max={pct(report.a_r_max):.2f}% "
        f"regions={report.region_count} points={report.n_points} "
        f"duration={report.duration:.2f}s"
    )
