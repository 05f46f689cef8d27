"""JSON scene and configuration documents.

A scene document looks like::

    {
      "surface": {"polygon": {"vertices": [[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]}},
      "objects": [
        {"id": "cup", "kind": "movable", "shape": {"circle": {"radius": 0.1}},
         "initial_pose": {"x": 0.1, "y": 0.2, "theta": 0.0}},
        {"id": "box", "kind": "new", "shape": {"union": [...]},
         "region": {"shape": {...}, "pose": {"x": 0, "y": 0, "theta": 0}}}
      ],
      "meta": {"name": "demo", "author": "", "units": "surface"}
    }

Footprints are written in their centred body frame, so a written scene
re-parses to an equal value.  Configurations are ``{id: pose}`` maps.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping

import jsonschema

from .geometry import Circle, ConvexPolygon, Footprint, Pose
from .scene import Configuration, ObjectRecord, Region, Scene

_NUM = {"type": "number"}
_POINT = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
_POSE = {
    "type": "object",
    "properties": {"x": _NUM, "y": _NUM, "theta": _NUM},
    "required": ["x", "y"],
    "additionalProperties": False,
}
_CIRCLE = {
    "type": "object",
    "properties": {"circle": {
        "type": "object",
        "properties": {"radius": {"type": "number", "exclusiveMinimum": 0}, "offset": _POINT},
        "required": ["radius"],
        "additionalProperties": False,
    }},
    "required": ["circle"],
    "additionalProperties": False,
}
_POLYGON = {
    "type": "object",
    "properties": {"polygon": {
        "type": "object",
        "properties": {"vertices": {"type": "array", "items": _POINT, "minItems": 3}},
        "required": ["vertices"],
        "additionalProperties": False,
    }},
    "required": ["polygon"],
    "additionalProperties": False,
}
_PART = {"oneOf": [_CIRCLE, _POLYGON]}
_SHAPE = {"oneOf": [
    _CIRCLE,
    _POLYGON,
    {
        "type": "object",
        "properties": {"union": {"type": "array", "items": _PART, "minItems": 1}},
        "required": ["union"],
        "additionalProperties": False,
    },
]}
_REGION = {
    "type": "object",
    "properties": {"shape": _SHAPE, "pose": _POSE},
    "required": ["shape"],
    "additionalProperties": False,
}
SCENE_SCHEMA = {
    "type": "object",
    "properties": {
        "surface": _SHAPE,
        "objects": {"type": "array", "items": {
            "type": "object",
            "properties": {
                "id": {"type": "string", "minLength": 1},
                "kind": {"enum": ["obstacle", "movable", "new"]},
                "shape": _SHAPE,
                "initial_pose": _POSE,
                "region": _REGION,
            },
            "required": ["id", "kind", "shape"],
            "additionalProperties": False,
        }},
        "meta": {"type": "object", "additionalProperties": {"type": ["string", "number"]}},
    },
    "required": ["surface", "objects"],
    "additionalProperties": False,
}
CONFIG_SCHEMA = {"type": "object", "additionalProperties": _POSE}


class SchemaError(ValueError):
    """Malformed scene, configuration or parameter document."""


# -- decoding ------------------------------------------------------------------

def _where(path) -> str:
    return "/" + "/".join(str(p) for p in path) if path else "<document>"


def _loads(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{source}: line {e.lineno}, column {e.colno}: {e.msg}") from None


def _validate(doc, schema, source: str) -> None:
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        lines = [f"{source}: field {_where(e.absolute_path)}: {_short(e)}" for e in errors[:10]]
        raise SchemaError("\n".join(lines))


def _short(err: jsonschema.ValidationError) -> str:
    if err.validator == "oneOf":
        return "expected a shape: {circle: ...}, {polygon: ...} or {union: [...]}"
    return err.message


def _part(spec: Mapping[str, Any]):
    if "circle" in spec:
        c = spec["circle"]
        return Circle(c["radius"], tuple(c.get("offset", (0.0, 0.0))))
    return ConvexPolygon(tuple(tuple(v) for v in spec["polygon"]["vertices"]))


def shape_from_dict(spec: Mapping[str, Any]) -> Footprint:
    if "union" in spec:
        return Footprint(tuple(_part(p) for p in spec["union"]))
    return Footprint((_part(spec),))


def pose_from_dict(d: Mapping[str, float]) -> Pose:
    return Pose(d["x"], d["y"], d.get("theta", 0.0))


def scene_from_dict(doc: Mapping[str, Any], source: str = "<scene>") -> Scene:
    _validate(doc, SCENE_SCHEMA, source)
    where = "/surface"
    try:
        surface = shape_from_dict(doc["surface"])
        records, initial = [], {}
        for k, o in enumerate(doc["objects"]):
            where = f"/objects/{k}"
            region = None
            if "region" in o:
                r = o["region"]
                region = Region(shape_from_dict(r["shape"]), pose_from_dict(r.get("pose", {"x": 0, "y": 0})))
            records.append(ObjectRecord(o["id"], o["kind"], shape_from_dict(o["shape"]), region))
            if "initial_pose" in o:
                initial[o["id"]] = pose_from_dict(o["initial_pose"])
        where = "<scene>"
        return Scene(surface, tuple(records), Configuration(initial),
                     {str(k): str(v) for k, v in doc.get("meta", {}).items()})
    except (ValueError, TypeError) as e:
        raise SchemaError(f"{source}: field {where}: {e}") from None


def config_from_dict(doc: Mapping[str, Any], source: str = "<configuration>") -> Configuration:
    _validate(doc, CONFIG_SCHEMA, source)
    return Configuration({k: pose_from_dict(v) for k, v in doc.items()})


# -- encoding ------------------------------------------------------------------

def _part_dict(p) -> dict:
    if isinstance(p, Circle):
        d = {"radius": p.radius}
        if p.center != (0.0, 0.0):
            d["offset"] = list(p.center)
        return {"circle": d}
    return {"polygon": {"vertices": [list(v) for v in p.vertices]}}


def shape_to_dict(fp: Footprint) -> dict:
    if len(fp.parts) == 1:
        return _part_dict(fp.parts[0])
    return {"union": [_part_dict(p) for p in fp.parts]}


def pose_to_dict(p: Pose) -> dict:
    return {"x": p.x, "y": p.y, "theta": p.theta}


def scene_to_dict(scene: Scene) -> dict:
    objects = []
    for o in scene.objects:
        d = {"id": o.id, "kind": o.kind, "shape": shape_to_dict(o.footprint)}
        if o.id in scene.initial:
            d["initial_pose"] = pose_to_dict(scene.initial[o.id])
        if o.region is not None:
            d["region"] = {"shape": shape_to_dict(o.region.shape), "pose": pose_to_dict(o.region.pose)}
        objects.append(d)
    return {"surface": shape_to_dict(scene.surface), "objects": objects, "meta": dict(scene.meta)}


def config_to_dict(config: Mapping[str, Pose]) -> dict:
    return {k: pose_to_dict(config[k]) for k in sorted(config)}


def dumps(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


# -- files ---------------------------------------------------------------------

def load_scene(path: str | Path) -> Scene:
    path = Path(path)
    return scene_from_dict(_loads(path.read_text(), str(path)), str(path))


def save_scene(scene: Scene, path: str | Path) -> None:
    Path(path).write_text(dumps(scene_to_dict(scene)))


def load_config(path: str | Path) -> Configuration:
    path = Path(path)
    return config_from_dict(_loads(path.read_text(), str(path)), str(path))


def save_config(config: Mapping[str, Pose], path: str | Path) -> None:
    Path(path).write_text(dumps(config_to_dict(config)))


def load_json(path: str | Path):
    """Plain JSON document (used for parameter files) with line-numbered errors."""
    path = Path(path)
    return _loads(path.read_text(), str(path))
