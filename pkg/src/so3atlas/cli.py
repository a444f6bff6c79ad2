"""Command line: ``so3atlas {verify,sweep,cover,convert}``.

Exit codes: 0 success, 1 a verification check failed, 2 invalid
arguments or input, 3 I/O failure, 4 node budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .atlas import build_epsilon_cover
from .checks import report_json, run_verify
from .cubic import ChartPoint, Model, ModelKind, lift, project, so3_canonicalize
from .errors import InvalidArgument, ResourceError
from .geometry import as_unit_array, quat_to_rotation, rotation_to_quat
from .oracle import sweep_distance_distortion, sweep_metric_distortion
from .serialize import samples_to_csv, samples_to_json, tree_to_bytes, tree_to_dict

log = logging.getLogger("so3atlas")

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_IO, EXIT_BUDGET = 0, 1, 2, 3, 4
DEFAULT_SEED = 42


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _positive_float(s: str) -> float:
    v = float(s)
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be a positive finite number, got {s}")
    return v


def _nonneg_int(s: str) -> int:
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", choices=[m.value for m in Model], default="so3")
    common.add_argument("--seed", type=_nonneg_int, default=DEFAULT_SEED,
                        help=f"random seed (default {DEFAULT_SEED})")
    common.add_argument("--scale-k", type=_positive_float, default=1.0, dest="scale_k",
                        help="half side K of the cube d[-K,K]^(n+1)")
    common.add_argument("--out", type=Path, help="output path (cover: base name); default stdout")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="so3atlas", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run every distortion and cover check")
    v.add_argument("--samples", type=_positive_int, default=10**6)

    s = sub.add_parser("sweep", parents=[common], help="sample distortion ratios")
    s.add_argument("--samples", type=_positive_int, default=10**5)
    s.add_argument("--kind", choices=["metric", "distance"], default="metric")
    s.add_argument("--mode", choices=["same-face", "cross-face"], default="same-face")
    s.add_argument("--depth", type=_positive_int, default=3, help="surface graph depth for cross-face")
    s.add_argument("--no-extremals", action="store_true", help="random samples only")

    c = sub.add_parser("cover", parents=[common], help="build an epsilon-cover and export it")
    c.add_argument("--epsilon", type=_positive_float, required=True, help="radius in radians")

    k = sub.add_parser("convert", help="print a rotation in every representation")
    k.add_argument("input", help="JSON text, or '-' to read it from stdin")
    return p


def _kind(args) -> ModelKind:
    return ModelKind(Model(args.model), args.scale_k)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def cmd_verify(args) -> int:
    if args.format != "json":
        raise InvalidArgument("verify writes JSON only")
    report = run_verify(_kind(args), args.samples, args.seed)
    _emit(report_json(report), args.out)
    for ch in report["checks"]:
        log.info("%-32s %s", ch["name"], "pass" if ch["pass"] else "FAIL")
    return EXIT_OK if report["pass"] else EXIT_FAILED


def cmd_sweep(args) -> int:
    kind = _kind(args)
    if args.kind == "metric":
        rep = sweep_metric_distortion(kind, args.samples, args.seed,
                                      include_extremals=not args.no_extremals)
    else:
        rep = sweep_distance_distortion(kind, args.samples, args.seed, mode=args.mode.replace("-", "_"),
                                        depth=args.depth, include_extremals=not args.no_extremals)
    d = rep.to_dict()
    d["version"] = __version__
    if args.format == "json":
        _emit(json.dumps(d, indent=2) + "\n", args.out)
        return EXIT_OK
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    intervals = d.get("extra", {}).get("intervals")
    if intervals:
        w.writerow(["p_chart", "p_coords", "q_chart", "q_coords", "lower", "upper", "ratio_lo", "ratio_hi"])
        for it in intervals:
            w.writerow([it["p"]["chart"], " ".join(map(repr, it["p"]["coords"])), it["q"]["chart"],
                        " ".join(map(repr, it["q"]["coords"])), repr(it["lower"]), repr(it["upper"]),
                        repr(it["ratio_lo"]), repr(it["ratio_hi"])])
    else:
        w.writerow(["model", "kind", "samples", "seed", "scale", "observed_min", "observed_max"])
        w.writerow([d["model"], d["kind"], d["samples"], d["seed"], repr(d["scale"]),
                    repr(d["observed_min"]), repr(d["observed_max"])])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_cover(args) -> int:
    cover = build_epsilon_cover(_kind(args), args.epsilon)
    samples = samples_to_csv(cover) if args.format == "csv" else samples_to_json(cover) + "\n"
    summary = (f"leaves {cover.tree.leaf_count} depth {cover.depth}\n"
               f"phi6 <= {args.epsilon!r} (certified bound {cover.bound!r})\n")
    if cover.tree.model is not Model.SO3:
        summary = summary.replace("phi6", "arc")
    if args.out is None:
        sys.stdout.write(samples)
        sys.stderr.write(summary)
        return EXIT_OK
    base = args.out
    base.with_name(base.name + ".so3a").write_bytes(tree_to_bytes(cover.tree))
    base.with_name(base.name + ".tree.json").write_text(json.dumps(tree_to_dict(cover.tree)) + "\n")
    base.with_name(base.name + f".samples.{args.format}").write_text(samples)
    sys.stdout.write(summary)
    return EXIT_OK


def parse_rotation_input(text: str):
    """Decode convert input into ``("quaternion" | "chart" | "matrix", value)``.

    Accepted: ``[w, x, y, z]`` or ``{"quaternion": [...]}``; ``{"chart": "+w",
    "coords": [...], "model": ...}`` (model inferred when omitted); a 3x3
    nested list or ``{"matrix": [[...], ...]}``.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidArgument(f"malformed JSON: {e}") from None
    if isinstance(obj, dict) and "chart" in obj:
        if "model" not in obj:
            coords = obj.get("coords", [])
            name = str(obj["chart"])
            model = Model.SO3 if name.startswith("C") else (Model.S2 if len(coords) == 2 else Model.S3)
            obj = {**obj, "model": model.value}
        try:
            return "chart", ChartPoint.from_dict(obj)
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidArgument(f"bad chart point: {e}") from None
    if isinstance(obj, dict):
        if "quaternion" in obj:
            obj = obj["quaternion"]
        elif "matrix" in obj:
            obj = obj["matrix"]
        else:
            raise InvalidArgument("expected a quaternion, chart point or matrix")
    try:
        arr = np.array(obj, dtype=float)
    except (TypeError, ValueError):
        raise InvalidArgument("expected numbers") from None
    if arr.shape == (4,):
        return "quaternion", as_unit_array(arr)
    if arr.shape == (3, 3):
        return "matrix", arr
    raise InvalidArgument(f"cannot interpret an array of shape {arr.shape}")


def convert(text: str) -> dict:
    what, value = parse_rotation_input(text)
    if what == "chart" and value.model is Model.S2:
        return {"input": what, "chart_point": value.to_dict(), "point": lift(value).tolist()}
    if what == "chart":
        q = lift(value)
    elif what == "matrix":
        q = rotation_to_quat(value)
    else:
        q = value
    canon = so3_canonicalize(q)
    return {
        "input": what,
        "quaternion": [float(x) for x in q],
        "canonical_quaternion": [float(x) for x in canon],
        "chart_point": project(canon, Model.SO3).to_dict(),
        "s3_chart_point": project(q, Model.S3).to_dict(),
        "matrix": quat_to_rotation(q).tolist(),
    }


def cmd_convert(args) -> int:
    text = sys.stdin.read() if args.input == "-" else args.input
    sys.stdout.write(json.dumps(convert(text), indent=2) + "\n")
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "sweep": cmd_sweep, "cover": cmd_cover, "convert": cmd_convert}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except InvalidArgument as e:
        print(f"so3atlas: error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except ResourceError as e:
        print(f"so3atlas: {e}", file=sys.stderr)
        if e.advice is not None:
            print(f"advisory epsilon: {e.advice!r}", file=sys.stderr)
        return EXIT_BUDGET
    except OSError as e:
        print(f"so3atlas: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
