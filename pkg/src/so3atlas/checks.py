"""The verification suite behind ``so3atlas verify``.

Each check compares a closed-form value against an independent numeric
measurement and records ``(name, expected, observed, tolerance, pass)``.
Everything is seeded, and nothing time-dependent enters the report, so a
rerun with the same configuration produces identical bytes.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np
from scipy.spatial import cKDTree

from . import __version__
from .atlas import build_epsilon_cover, model_range
from .cubic import ChartPoint, Model, ModelKind
from .distortion import (DistortionRange, compose, distortion_range_mu, energy_forms, jacobian_mu,
                         optimal_scale, pullback_form)
from .errors import InvalidArgument
from .geometry import phi3, phi6, quat_to_rotation, random_quaternions
from .oracle import (directed_pairs, finite_difference_jacobian, same_face_ratios,
                     sample_chart_points, sample_tangents, sweep_distance_distortion,
                     sweep_metric_distortion)

#: random-only sweep thresholds for the 3-dimensional lift; only asserted at this sample size or above
RANDOM_ONLY_SAMPLES = 10**6
RANDOM_ONLY_MIN = 0.26
RANDOM_ONLY_MAX = 0.999
JACOBIAN_POINTS = 10**4
FORM_SAMPLES = 10**5
PAIR_SAMPLES = 10**5
COVER_QUERIES = 10**5
COVER_EPSILONS = (1.0, 0.5, 0.25)


@dataclass
class Check:
    name: str
    relation: str  # "eq", "le", "ge", "in"
    expected: object
    observed: object
    tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def _eq(name, expected, observed, tol) -> Check:
    return Check(name, "eq", expected, observed, tol, bool(abs(observed - expected) <= tol))


def _le(name, bound, observed, tol=0.0) -> Check:
    return Check(name, "le", bound, observed, tol, bool(observed <= bound + tol))


def _ge(name, bound, observed, tol=0.0) -> Check:
    return Check(name, "ge", bound, observed, tol, bool(observed >= bound - tol))


def _within(name, lo, hi, observed_lo, observed_hi, tol) -> Check:
    ok = lo - tol <= observed_lo and observed_hi <= hi + tol
    return Check(name, "in", [lo, hi], [observed_lo, observed_hi], tol, bool(ok))


# -- individual checks --------------------------------------------------------

def check_metric_sweep(kind: ModelKind, samples: int, seed: int) -> tuple[list[Check], dict]:
    """Stretch-factor range with extremal witnesses, and the random-only thresholds."""
    n = kind.model.dim
    lo, hi = (float(x) / kind.scale for x in distortion_range_mu(n).as_floats())
    full = sweep_metric_distortion(kind, samples, seed, include_extremals=True)
    checks = [_eq("metric_min", lo, full.observed_min, 1e-14),
              _eq("metric_max", hi, full.observed_max, 1e-14)]
    sweeps = {"metric": full.to_dict()}
    if n == 3 and samples >= RANDOM_ONLY_SAMPLES:
        rand = sweep_metric_distortion(kind, samples, seed, include_extremals=False)
        checks += [_le("metric_random_only_min", RANDOM_ONLY_MIN / kind.scale, rand.observed_min),
                   _ge("metric_random_only_max", RANDOM_ONLY_MAX / kind.scale, rand.observed_max)]
        sweeps["metric_random_only"] = rand.to_dict()
    return checks, sweeps


def check_constants() -> list[Check]:
    c3 = distortion_range_mu(3).constant()
    c2 = distortion_range_mu(2).constant()
    comp = compose(distortion_range_mu(3), DistortionRange(Fraction(2), Fraction(2)))
    checks = [Check("constant_mu3", "eq", 4, str(c3), 0.0, c3 == 4),
              Check("constant_mu2", "eq", 3, str(c2), 0.0, c2 == 3),
              Check("compose_so3", "eq", ["1/2", "2"], [str(comp.lo), str(comp.hi)], 0.0,
                    comp.lo == Fraction(1, 2) and comp.hi == 2)]
    for label, n, dyadic, want in (("optimal_scale_n3", 3, False, (0.5, 2.0)),
                                   ("optimal_scale_n2", 2, False, (1 / math.sqrt(3), math.sqrt(3))),
                                   ("optimal_scale_n2_dyadic", 2, True, (0.5, 2.0))):
        got = optimal_scale(n, dyadic_only=dyadic)
        err = max(abs(got[0] - want[0]), abs(got[1] - want[1]))
        checks.append(Check(label, "eq", list(want), list(got), 1e-15, bool(err <= 1e-15)))
    return checks


def check_jacobian(model: Model, count: int, seed: int) -> list[Check]:
    """Analytic Jacobian vs finite differences, pullback vs J^T J, pullback spectrum."""
    rng = np.random.default_rng([seed, 2])
    idx, coords = sample_chart_points(model, count, rng)
    coords = coords * (1.0 - 1e-4)  # keep the central stencil inside the cube
    charts = model.charts
    fd_err = form_err = 0.0
    eig_lo, eig_hi = math.inf, -math.inf
    for i, c in zip(idx, coords):
        p = ChartPoint(charts[int(i)], tuple(c))
        J = jacobian_mu(p)
        fd_err = max(fd_err, float(np.max(np.abs(J - finite_difference_jacobian(p, 1e-5)))))
        G = pullback_form(p)
        form_err = max(form_err, float(np.max(np.abs(G - J.T @ J))))
        w = np.linalg.eigvalsh(G)
        eig_lo, eig_hi = min(eig_lo, float(w[0])), max(eig_hi, float(w[-1]))
    n = model.dim
    return [_le("jacobian_vs_finite_difference", 1e-6, fd_err),
            _le("pullback_vs_jtj", 1e-12, form_err),
            _within("pullback_eigenvalues", 1.0 / (n + 1) ** 2, 1.0, eig_lo, eig_hi, 1e-12)]


def check_energy_forms(model: Model, count: int, seed: int) -> list[Check]:
    rng = np.random.default_rng([seed, 3])
    _, coords = sample_chart_points(model, count, rng)
    v = sample_tangents(model.dim, count, rng)
    err = max(abs(a - b) for a, b in (energy_forms(c, t) for c, t in zip(coords, v)))
    return [_le("energy_forms_agree", 1e-12, err)]


def check_distance_sweep(kind: ModelKind, samples: int, seed: int) -> tuple[list[Check], dict]:
    """Same-face ratios stay inside the range and approach both endpoints."""
    lo, hi = model_range(kind).as_floats()
    rep = sweep_distance_distortion(kind, samples, seed, mode="same_face", include_extremals=True)
    rng = np.random.default_rng([seed, 4])
    zero = np.zeros(256, dtype=int)
    corner = same_face_ratios(kind.model, zero, *directed_pairs(kind.model, "corner", 256, 1e-3, rng),
                              kind.scale)
    center = same_face_ratios(kind.model, zero, *directed_pairs(kind.model, "center", 256, 1e-3, rng),
                              kind.scale)
    checks = [_within("distance_same_face_range", lo, hi, rep.observed_min, rep.observed_max, 1e-9),
              _le("distance_near_corner", lo * 1.002, float(corner.min())),
              _ge("distance_near_center", hi * 0.9995, float(center.max()))]
    return checks, {"distance_same_face": rep.to_dict()}


def check_double_cover(count: int, seed: int) -> list[Check]:
    rng = np.random.default_rng([seed, 5])
    a = random_quaternions(count, rng)
    b = random_quaternions(count, rng)
    err = np.abs(phi6(quat_to_rotation(a), quat_to_rotation(b)) - 2.0 * phi3(a, b))
    return [_le("phi6_equals_twice_phi3", 1e-9, float(err.max()))]


def nearest_sample_angles(samples: np.ndarray, queries: np.ndarray) -> np.ndarray:
    """Rotation angle from each query to its nearest sample, found by brute-force k-d search.

    Nearness in R^4 chord over both signs of the sample is the same as
    nearness in rotation angle; the angle itself is then measured on
    rotation matrices.
    """
    tree = cKDTree(np.vstack([samples, -samples]))
    _, j = tree.query(queries)
    nearest = np.vstack([samples, -samples])[j]
    return np.asarray(phi6(quat_to_rotation(queries), quat_to_rotation(nearest)))


def check_covers(kind: ModelKind, count: int, seed: int) -> tuple[list[Check], dict]:
    rng = np.random.default_rng([seed, 6])
    queries = random_quaternions(count, rng)
    checks, info, leaves = [], {}, []
    for eps in COVER_EPSILONS:
        cover = build_epsilon_cover(kind, eps)
        ang = nearest_sample_angles(cover.samples, queries)
        violations = int(np.sum(ang > eps))
        checks.append(Check(f"cover_eps_{eps}", "eq", 0, violations, 0.0, violations == 0))
        leaves.append(cover.tree.leaf_count)
        info[str(eps)] = {"depth": cover.depth, "leaves": cover.tree.leaf_count, "bound": cover.bound,
                          "max_nearest_angle": float(ang.max())}
    ratios = [b / a for a, b in zip(leaves, leaves[1:])]
    checks.append(Check("cover_leaf_growth", "eq", [8] * len(ratios), ratios, 0.0,
                        all(r == 8 for r in ratios)))
    return checks, {"covers": info}


# -- suite ----------------------------------------------------------------------

def run_verify(kind: ModelKind, samples: int, seed: int = 42) -> dict:
    """Run every check for ``kind``; returns the report as a plain dict."""
    if samples < 1:
        raise InvalidArgument("samples must be >= 1")
    model = kind.model
    checks: list[Check] = []
    sweeps: dict = {}
    c, s = check_metric_sweep(kind, samples, seed)
    checks += c
    sweeps.update(s)
    checks += check_constants()
    checks += check_jacobian(model, min(samples, JACOBIAN_POINTS), seed)
    checks += check_energy_forms(model, min(samples, FORM_SAMPLES), seed)
    c, s = check_distance_sweep(kind, samples, seed)
    checks += c
    sweeps.update(s)
    if model is not Model.S2:
        checks += check_double_cover(min(samples, PAIR_SAMPLES), seed)
    if model is Model.SO3:
        c, s = check_covers(kind, min(samples, COVER_QUERIES), seed)
        checks += c
        sweeps.update(s)
    return {
        "tool": "so3atlas",
        "version": __version__,
        "config": {"command": "verify", "model": model.value, "samples": samples, "seed": seed,
                   "scale_k": kind.scale},
        "checks": [ch.to_dict() for ch in checks],
        "sweeps": sweeps,
        "pass": all(ch.passed for ch in checks),
    }


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"
