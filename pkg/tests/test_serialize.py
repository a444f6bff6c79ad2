import json
import struct

import numpy as np
import pytest

from so3atlas.atlas import AtlasTree, build_epsilon_cover, init_atlas
from so3atlas.cubic import Model, ModelKind
from so3atlas.errors import InvalidArgument
from so3atlas.serialize import (MAGIC, samples_from_csv, samples_to_csv, samples_to_json,
                                tree_from_bytes, tree_from_dict, tree_to_bytes, tree_to_dict)

SO3 = ModelKind(Model.SO3)


def uneven_tree(kind=SO3):
    tree = init_atlas(kind)
    first = tree.roots[0].id
    kids = tree.split(first)
    tree.split(kids[-1])
    return tree


def test_binary_header():
    data = tree_to_bytes(uneven_tree())
    magic, version, tag, scale, count = struct.unpack_from("<4sHBdI", data)
    assert (magic, version, tag, scale, count) == (MAGIC, 1, 2, 1.0, 4 + 8 + 8)
    assert len(data) == struct.calcsize("<4sHBdI") + count * struct.calcsize("<BBB3I")


@pytest.mark.parametrize("model", list(Model))
def test_binary_round_trip(model):
    tree = uneven_tree(ModelKind(model, 0.5))
    back = tree_from_bytes(tree_to_bytes(tree))
    assert back.kind == tree.kind
    assert back.nodes() == tree.nodes()
    assert tree_to_bytes(back) == tree_to_bytes(tree)


def test_binary_is_deterministic():
    a = uneven_tree()
    b = init_atlas(SO3)
    kids = b.split("Cw")
    b.split(kids[-1])
    assert tree_to_bytes(a) == tree_to_bytes(b)


@pytest.mark.parametrize("mutate", [
    lambda d: b"XXXX" + d[4:],
    lambda d: d[:4] + struct.pack("<H", 9) + d[6:],
    lambda d: d[:-1],
    lambda d: d[:5],
])
def test_binary_rejects_corruption(mutate):
    with pytest.raises(InvalidArgument):
        tree_from_bytes(mutate(tree_to_bytes(uneven_tree())))


def test_json_mirror_round_trip():
    tree = uneven_tree()
    d = json.loads(json.dumps(tree_to_dict(tree)))
    assert d["format"] == "SO3A" and d["model"] == "so3"
    assert tree_from_dict(d).nodes() == tree.nodes()
    assert [n["id"] for n in d["nodes"]][:2] == ["Cw", "Cw/0"]


def test_json_rejects_other_formats():
    with pytest.raises(InvalidArgument):
        tree_from_dict({"format": "XYZ", "version": 1})


def test_located_tree_survives_round_trip():
    tree = AtlasTree.uniform(SO3, 2)
    back = tree_from_bytes(tree_to_bytes(tree))
    q = np.random.default_rng(0).standard_normal((100, 4))
    assert back.locate_many(q) == tree.locate_many(q)


def test_samples_csv():
    cover = build_epsilon_cover(SO3, 4.0)
    text = samples_to_csv(cover)
    lines = text.splitlines()
    assert lines[0] == "qw,qx,qy,qz,chart,depth"
    assert len(lines) == 1 + len(cover.samples)
    assert lines[1].endswith(",Cw,1")
    np.testing.assert_array_equal(samples_from_csv(text), cover.samples)


def test_samples_csv_sphere_header():
    cover = build_epsilon_cover(ModelKind(Model.S2), 2.0)
    assert samples_to_csv(cover).splitlines()[0] == "x,y,z,chart,depth"


def test_samples_json():
    cover = build_epsilon_cover(SO3, 4.0)
    arr = np.array(json.loads(samples_to_json(cover)))
    np.testing.assert_array_equal(arr, cover.samples)
    assert samples_to_json(cover) == samples_to_json(build_epsilon_cover(SO3, 4.0))
