"""File formats for atlas trees and cover samples.

Binary tree layout (little endian)::

    magic    4 bytes  b"SO3A"
    version  u16
    model    u8       0 = s2, 1 = s3, 2 = so3
    scale    f64      K
    count    u32      number of node records
    records  count x (chart u8, depth u8, leaf u8, index u32 x 3)

Records are sorted by (chart, depth, index); unused index slots are 0.
"""
from __future__ import annotations

import csv
import io
import json
import struct

import numpy as np

from .atlas import AtlasTree, EpsilonCover, SubdivisionBox, encode_key
from .cubic import Model, ModelKind
from .errors import InvalidArgument

MAGIC = b"SO3A"
VERSION = 1
MODEL_TAGS = {Model.S2: 0, Model.S3: 1, Model.SO3: 2}
_HEADER = struct.Struct("<4sHBdI")
_RECORD = struct.Struct("<BBB3I")


def tree_to_bytes(tree: AtlasTree) -> bytes:
    nodes = tree.nodes()
    out = [_HEADER.pack(MAGIC, VERSION, MODEL_TAGS[tree.model], tree.kind.scale, len(nodes))]
    for box, leaf in nodes:
        idx = list(box.index) + [0] * (3 - len(box.index))
        out.append(_RECORD.pack(box.chart.index, box.depth, int(leaf), *idx))
    return b"".join(out)


def tree_from_bytes(data: bytes) -> AtlasTree:
    if len(data) < _HEADER.size:
        raise InvalidArgument("truncated atlas file")
    magic, version, tag, scale, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise InvalidArgument(f"bad magic {magic!r}")
    if version != VERSION:
        raise InvalidArgument(f"unsupported atlas version {version}")
    models = {v: k for k, v in MODEL_TAGS.items()}
    if tag not in models:
        raise InvalidArgument(f"unknown model tag {tag}")
    if len(data) != _HEADER.size + count * _RECORD.size:
        raise InvalidArgument("atlas file length does not match its node count")
    tree = AtlasTree(ModelKind(models[tag], scale))
    tree._leaves.clear()
    n = tree.n
    for off in range(_HEADER.size, len(data), _RECORD.size):
        chart, depth, leaf, *idx = _RECORD.unpack_from(data, off)
        key = encode_key(chart, depth, idx[:n])
        (tree._leaves if leaf else tree._internal).add(key)
    return tree


def tree_to_dict(tree: AtlasTree) -> dict:
    return {
        "format": MAGIC.decode(),
        "version": VERSION,
        "model": tree.model.value,
        "scale": tree.kind.scale,
        "nodes": [{"id": b.id, "chart": b.chart.name, "depth": b.depth, "index": list(b.index),
                   "leaf": leaf} for b, leaf in tree.nodes()],
    }


def tree_from_dict(d: dict) -> AtlasTree:
    if d.get("format") != MAGIC.decode() or d.get("version") != VERSION:
        raise InvalidArgument("not an SO3A version 1 tree")
    tree = AtlasTree(ModelKind(Model(d["model"]), d["scale"]))
    tree._leaves.clear()
    for node in d["nodes"]:
        b = SubdivisionBox.from_id(tree.model, node["id"])
        (tree._leaves if node["leaf"] else tree._internal).add(b.key)
    return tree


def sample_header(model) -> list[str]:
    cols = ["x", "y", "z"] if Model(model) is Model.S2 else ["qw", "qx", "qy", "qz"]
    return cols + ["chart", "depth"]


def samples_to_csv(cover: EpsilonCover) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(sample_header(cover.tree.model))
    for row, name in zip(cover.samples, cover.chart_names()):
        w.writerow([repr(float(x)) for x in row] + [name, cover.depth])
    return buf.getvalue()


def samples_to_json(cover: EpsilonCover) -> str:
    return json.dumps([[float(x) for x in row] for row in cover.samples])


def samples_from_csv(text: str) -> np.ndarray:
    rows = list(csv.reader(io.StringIO(text)))
    width = len(rows[0]) - 2
    return np.array([[float(x) for x in r[:width]] for r in rows[1:]])
