import json
import math
import subprocess
import sys

import numpy as np
import pytest

from so3atlas.cli import convert, main
from so3atlas.serialize import tree_from_bytes


def run(*args, stdin=None):
    """Invoke the installed entry point the way a user would."""
    return subprocess.run([sys.executable, "-m", "so3atlas", *args], capture_output=True, text=True,
                          input=stdin)


def test_verify_small_passes(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "--model", "s3", "--samples", "20000", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["config"] == {"command": "verify", "model": "s3", "samples": 20000, "seed": 42,
                                "scale_k": 1.0}
    assert report["version"]
    for check in report["checks"]:
        assert set(check) == {"name", "relation", "expected", "observed", "tolerance", "pass"}
    names = [c["name"] for c in report["checks"]]
    assert "metric_random_only_min" not in names  # below the sample size where it is asserted
    assert report["sweeps"]["metric"]["observed_min"] == 0.25


def test_verify_s2_minimum(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "--model", "s2", "--samples", "20000", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["sweeps"]["metric"]["observed_min"] == pytest.approx(1 / 3, abs=1e-14)


def test_verify_so3_small_includes_cover_checks(tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", "--samples", "5000", "--out", str(out)]) == 0
    names = [c["name"] for c in json.loads(out.read_text())["checks"]]
    assert {"cover_eps_1.0", "cover_eps_0.5", "cover_eps_0.25", "cover_leaf_growth",
            "phi6_equals_twice_phi3"} <= set(names)


def test_verify_zero_samples_exits_2():
    assert run("verify", "--samples", "0").returncode == 2


def test_verify_rejects_csv():
    assert main(["verify", "--samples", "10", "--format", "csv"]) == 2


def test_unknown_model_exits_2():
    assert run("sweep", "--model", "s4").returncode == 2


def test_sweep_metric_json(tmp_path):
    out = tmp_path / "s.json"
    assert main(["sweep", "--model", "s3", "--samples", "1000", "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    assert d["observed_min"] == 0.25 and d["observed_max"] == 1.0
    assert {"coords", "tangent", "ratio"} <= set(d["witness_min"])


def test_sweep_distance_csv(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--kind", "distance", "--samples", "1000", "--format", "csv",
                 "--out", str(out)]) == 0
    header, row = out.read_text().splitlines()
    assert header.startswith("model,kind")
    assert 0.5 - 1e-9 <= float(row.split(",")[-2]) and float(row.split(",")[-1]) <= 2 + 1e-9


def test_sweep_cross_face_csv(tmp_path):
    out = tmp_path / "x.csv"
    assert main(["sweep", "--kind", "distance", "--mode", "cross-face", "--model", "s2", "--depth", "2",
                 "--samples", "5", "--format", "csv", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("p_chart") and len(lines) == 6


def test_sweep_io_error_exits_3(tmp_path):
    assert main(["sweep", "--samples", "10", "--out", str(tmp_path / "missing" / "s.json")]) == 3


def test_cover_writes_files(tmp_path):
    base = tmp_path / "c"
    res = run("cover", "--epsilon", "0.5", "--format", "csv", "--out", str(base))
    assert res.returncode == 0
    assert "leaves 16384" in res.stdout and "phi6 <= 0.5" in res.stdout
    tree = tree_from_bytes((tmp_path / "c.so3a").read_bytes())
    assert tree.leaf_count == 16384
    assert json.loads((tmp_path / "c.tree.json").read_text())["model"] == "so3"
    lines = (tmp_path / "c.samples.csv").read_text().splitlines()
    assert lines[0] == "qw,qx,qy,qz,chart,depth" and len(lines) == 16385


def test_cover_stdout_csv():
    res = run("cover", "--epsilon", "0.5", "--format", "csv")
    assert res.returncode == 0
    assert res.stdout.startswith("qw,qx,qy,qz,chart,depth\n")
    assert "phi6 <= 0.5" in res.stderr


def test_cover_root_bound_four_samples():
    res = run("cover", "--epsilon", repr(4 * math.sqrt(3)))
    assert res.returncode == 0
    assert len(json.loads(res.stdout)) == 4


def test_cover_is_byte_deterministic(tmp_path):
    for name in ("a", "b"):
        assert main(["cover", "--epsilon", "1.0", "--out", str(tmp_path / name)]) == 0
    for ext in (".so3a", ".tree.json", ".samples.json"):
        assert (tmp_path / ("a" + ext)).read_bytes() == (tmp_path / ("b" + ext)).read_bytes()


@pytest.mark.parametrize("eps", ["0", "-1", "nan"])
def test_cover_bad_epsilon_exits_2(eps):
    assert run("cover", "--epsilon", eps).returncode == 2


def test_cover_budget_exits_4():
    import os
    env = dict(os.environ, SO3_ATLAS_NODE_BUDGET="1000")
    res = subprocess.run([sys.executable, "-m", "so3atlas", "cover", "--epsilon", "0.25"],
                         capture_output=True, text=True, env=env)
    assert res.returncode == 4
    assert "advisory epsilon: 1.7320508075688772" in res.stderr


def test_convert_identity():
    d = convert("[1, 0, 0, 0]")
    assert d["chart_point"] == {"model": "so3", "chart": "Cw", "coords": [0.0, 0.0, 0.0]}
    assert d["matrix"] == np.eye(3).tolist()
    assert d["canonical_quaternion"] == [1.0, 0.0, 0.0, 0.0]


def test_convert_chart_point():
    d = convert('{"chart": "+w", "coords": [1, 1, 1]}')
    np.testing.assert_allclose(d["quaternion"], [0.5] * 4, atol=1e-16)


def test_convert_matrix_round_trip():
    rng = np.random.default_rng(2)
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    from so3atlas.geometry import quat_to_rotation
    R = quat_to_rotation(q)
    d = convert(json.dumps({"matrix": R.tolist()}))
    canon = np.array(d["canonical_quaternion"])
    assert min(np.abs(canon - q).max(), np.abs(canon + q).max()) <= 1e-12
    np.testing.assert_allclose(d["matrix"], R, atol=1e-12)


def test_convert_negative_quaternion_canonicalized():
    d = convert('{"quaternion": [-1, 0, 0, 0]}')
    assert d["canonical_quaternion"] == [1.0, 0.0, 0.0, 0.0]


def test_convert_stdin():
    res = run("convert", "-", stdin='[0, 0, 1, 0]')
    assert res.returncode == 0
    assert json.loads(res.stdout)["chart_point"]["chart"] == "Cy"


@pytest.mark.parametrize("text", ["{bad", "[1, 2]", '{"foo": 1}', '{"chart": "Q", "coords": [0, 0, 0]}',
                                  "[0, 0, 0, 0]", '[["a"]]'])
def test_convert_malformed_exits_2(text):
    assert run("convert", text).returncode == 2
