"""Independent numeric checks of the distortion bounds.

Everything here is deliberately computed by a different route than
:mod:`so3atlas.distortion`: Jacobians by finite differences of ``lift``,
distance ratios from actual point pairs, and intrinsic distances on the
cube surface from a shortest-path graph.
"""
from __future__ import annotations

import heapq
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from .cubic import ChartPoint, Model, ModelKind, drop_axis, embed_batch, lift, lift_batch
from .distortion import metric_distortion_batch
from .errors import InvalidArgument, ResourceError
from .geometry import phi6, quat_to_rotation

#: samples per independently seeded shard; fixed so results do not depend on worker count
SHARD_SIZE = 1 << 16
#: upper limit on (graph vertices x largest chart) for the surface graph
GRAPH_WORK_BUDGET = 5e9


def _as_kind(model) -> ModelKind:
    return model if isinstance(model, ModelKind) else ModelKind(Model(model))


# -- finite differences ------------------------------------------------------

def finite_difference_jacobian(p: ChartPoint, h: float = 1e-5) -> np.ndarray:
    """Difference quotient of ``lift`` in face coordinates, shape ``(n+1, n)``.

    Central differences (error O(h^2)) where the stencil fits in [-1, 1];
    one-sided (error O(h)) against the cube boundary.
    """
    if not 0 < h <= 1e-3:
        raise InvalidArgument(f"step h must lie in (0, 1e-3], got {h}")
    c = np.asarray(p.coords)
    cols = []
    for k in range(c.size):
        e = np.zeros(c.size)
        e[k] = h
        up, down = c + e, c - e
        if up[k] <= 1.0 and down[k] >= -1.0:
            cols.append((_lift_at(p, up) - _lift_at(p, down)) / (2 * h))
        elif up[k] > 1.0:
            cols.append((_lift_at(p, c) - _lift_at(p, down)) / h)
        else:
            cols.append((_lift_at(p, up) - _lift_at(p, c)) / h)
    return np.array(cols).T


def _lift_at(p: ChartPoint, coords) -> np.ndarray:
    return lift(ChartPoint(p.chart, tuple(coords)))


# -- intrinsic distances on the cube surface ----------------------------------

def pl_distance_same_face(p: ChartPoint, q: ChartPoint, scale: float = 1.0) -> float:
    """Exact intrinsic distance between two points of one chart: the straight segment."""
    if p.chart != q.chart:
        raise InvalidArgument("points lie in different charts; use pl_distance_approx")
    return scale * math.dist(p.coords, q.coords)


@dataclass(frozen=True)
class PLDistanceEstimate:
    """Bracket ``lower <= d_PL <= upper`` from a depth-``resolution`` graph."""

    lower: float
    upper: float
    resolution: int


def _memberships(model: Model, e: np.ndarray):
    """Charts containing the embedded point ``e`` and its local coordinates in each."""
    out = []
    for ch in model.charts:
        a = ch.axis
        if model.quotient:
            if abs(e[a]) == 1.0:
                out.append((ch, drop_axis((e * np.sign(e[a]))[None, :], [a])[0]))
        elif e[a] == ch.sign:
            out.append((ch, drop_axis(e[None, :], [a])[0]))
    return out


def _chord(model: Model, a, b) -> float:
    d = np.linalg.norm(np.asarray(a) - np.asarray(b))
    if model.quotient:
        d = min(d, np.linalg.norm(np.asarray(a) + np.asarray(b)))
    return float(d)


class SurfaceGraph:
    """Shortest paths on the cube surface through dyadic points of the chart boundaries.

    Vertices are the depth-``depth`` grid points lying on the boundary of
    each chart cube (the only places a surface geodesic can change chart),
    merged across gluings by their embedding (and by sign for SO(3)).
    Within a chart every pair of vertices is joined by its straight
    segment, which is exact because charts are flat and convex. Path
    lengths are therefore upper bounds on the intrinsic distance, and the
    graph at depth ``d + 1`` contains the one at depth ``d``, so bounds
    never get worse with depth.

    The graph is read-only after construction; concurrent queries are safe.
    """

    def __init__(self, model, depth: int):
        model = Model(model)
        if depth < 1:
            raise InvalidArgument("depth must be >= 1")
        n = model.dim
        m = 1 << depth
        per_chart = (m + 1) ** n - (m - 1) ** n
        est_vertices = len(model.charts) * per_chart / 2
        if est_vertices * per_chart > GRAPH_WORK_BUDGET:
            ok = depth
            while ok > 1:
                ok -= 1
                pc = ((1 << ok) + 1) ** n - ((1 << ok) - 1) ** n
                if len(model.charts) * pc * pc / 2 <= GRAPH_WORK_BUDGET:
                    break
            raise ResourceError(f"surface graph at depth {depth} exceeds the work budget; "
                                f"use depth <= {ok}", advice=ok)
        self.model, self.depth = model, depth
        ticks = np.arange(-m, m + 1, 2)
        grid = np.stack(np.meshgrid(*([ticks] * n), indexing="ij"), axis=-1).reshape(-1, n)
        boundary = grid[np.any(np.abs(grid) == m, axis=1)]
        ambient, owners = [], []
        for ch in model.charts:
            P = len(boundary)
            e = embed_batch(np.full(P, ch.axis), np.full(P, ch.embed_sign * m), boundary)
            ambient.append(e.astype(np.int64))
            owners.append(ch)
        allpts = np.concatenate(ambient)
        if model.quotient:
            first = np.argmax(allpts != 0, axis=1)
            allpts = allpts * np.sign(allpts[np.arange(len(allpts)), first])[:, None]
        uniq, inverse = np.unique(allpts, axis=0, return_inverse=True)
        inverse = inverse.ravel()
        self._points = uniq / m
        self.n_vertices = int(inverse.max()) + 1
        P = len(boundary)
        local = boundary / m
        self.charts = {}
        self._member = [[] for _ in range(self.n_vertices)]
        for i, ch in enumerate(owners):
            ids = inverse[i * P:(i + 1) * P]
            self.charts[ch] = (ids, local)
            for pos, v in enumerate(ids):
                self._member[v].append((ch, pos))

    def distance(self, p: ChartPoint, q: ChartPoint, scale: float = 1.0) -> PLDistanceEstimate:
        model = self.model
        if p.model is not model or q.model is not model:
            raise InvalidArgument("points belong to a different model than the graph")
        ep, eq = p.embed(), q.embed()
        lower = _chord(model, ep, eq)
        if lower == 0.0:
            return PLDistanceEstimate(0.0, 0.0, self.depth)
        mp, mq = _memberships(model, ep), _memberships(model, eq)
        best = math.inf
        for ch, lp in mp:
            for ch2, lq in mq:
                if ch == ch2:
                    best = min(best, float(np.linalg.norm(lp - lq)))
        V = self.n_vertices
        dist = np.full(V, np.inf)
        tail = np.full(V, np.inf)
        for ch, lp in mp:
            ids, L = self.charts[ch]
            np.minimum.at(dist, ids, np.linalg.norm(L - lp, axis=1))
        for ch, lq in mq:
            ids, L = self.charts[ch]
            np.minimum.at(tail, ids, np.linalg.norm(L - lq, axis=1))
        # A*: the ambient chord to q never exceeds the remaining path length
        # and satisfies the triangle inequality, so it is a consistent heuristic
        h = self._chord_to(eq)
        heap = [(d + h[v], d, v) for v, d in enumerate(dist) if d < math.inf]
        heapq.heapify(heap)
        done = np.zeros(V, dtype=bool)
        while heap:
            f, d, u = heapq.heappop(heap)
            if f >= best:
                break
            if done[u] or d > dist[u]:
                continue
            done[u] = True
            best = min(best, d + tail[u])
            for ch, pos in self._member[u]:
                ids, L = self.charts[ch]
                cand = d + np.linalg.norm(L - L[pos], axis=1)
                better = cand < dist[ids]
                if not better.any():
                    continue
                bi = ids[better]
                bc = cand[better]
                dist[bi] = bc
                for v, dv, fv in zip(bi.tolist(), bc.tolist(), (bc + h[bi]).tolist()):
                    heapq.heappush(heap, (fv, dv, v))
        return PLDistanceEstimate(scale * lower, scale * float(best), self.depth)

    def _chord_to(self, e: np.ndarray) -> np.ndarray:
        d = np.linalg.norm(self._points - e, axis=1)
        if self.model.quotient:
            d = np.minimum(d, np.linalg.norm(self._points + e, axis=1))
        return d



@lru_cache(maxsize=8)
def surface_graph(model, depth: int) -> SurfaceGraph:
    return SurfaceGraph(Model(model), depth)


def pl_distance_approx(p: ChartPoint, q: ChartPoint, depth: int, scale: float = 1.0) -> PLDistanceEstimate:
    """Bracket the intrinsic cube-surface distance between ``p`` and ``q``.

    ``lower`` is the ambient chord, ``upper`` a graph path length at the
    given depth.
    """
    return surface_graph(p.model, depth).distance(p, q, scale)


# -- sampling ----------------------------------------------------------------

def sample_chart_points(model, n: int, rng):
    """Uniform chart index, then uniform face coordinates: ``(chart_idx, coords)``."""
    model = Model(model)
    idx = rng.integers(len(model.charts), size=n)
    coords = rng.uniform(-1.0, 1.0, size=(n, model.dim))
    return idx, coords


def sample_tangents(dim: int, n: int, rng) -> np.ndarray:
    """Unit vectors uniform on the sphere in face coordinates."""
    v = rng.standard_normal((n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _chart_arrays(model: Model, idx):
    charts = model.charts
    axis = np.array([c.axis for c in charts])[idx]
    sign = np.array([c.embed_sign for c in charts])[idx]
    return axis, sign


def model_distance(model, a, b) -> np.ndarray:
    """Natural distance between rows of unit vectors: arc length on the sphere,
    or the rotation angle of the corresponding rotations for SO(3)."""
    model = Model(model)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if model.quotient:
        return np.asarray(phi6(quat_to_rotation(a), quat_to_rotation(b)))
    return 2.0 * np.arctan2(np.linalg.norm(a - b, axis=-1), np.linalg.norm(a + b, axis=-1))


# -- sweeps --------------------------------------------------------------------

@dataclass
class SweepReport:
    """Observed extremes of a distortion ratio over a seeded sample."""

    model: str
    kind: str
    samples: int
    seed: int
    observed_min: float
    observed_max: float
    witness_min: dict
    witness_max: dict
    scale: float = 1.0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        if not d["extra"]:
            del d["extra"]
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _shard_seeds(seed: int, samples: int):
    n_shards = max(1, -(-samples // SHARD_SIZE))
    children = np.random.SeedSequence(seed).spawn(n_shards)
    sizes = [SHARD_SIZE] * (n_shards - 1) + [samples - SHARD_SIZE * (n_shards - 1)]
    return list(zip(children, sizes))


def _metric_shard(model: Model, child, size: int):
    rng = np.random.default_rng(child)
    idx, coords = sample_chart_points(model, size, rng)
    v = sample_tangents(model.dim, size, rng)
    return idx, coords, v, metric_distortion_batch(coords, v)


def extremal_metric_batch(model) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact extremal witnesses plus directed points within 1e-3 of them.

    Returns ``(chart_idx, coords, tangents)``: first the corner of the +first
    chart with the diagonal tangent (minimum), then the face center
    (maximum), then perturbations around every corner and the center.
    """
    model = Model(model)
    n = model.dim
    rng = np.random.default_rng(0)
    diag = np.ones(n) / math.sqrt(n)
    coords = [np.ones(n), np.zeros(n)]
    tang = [diag, np.eye(n)[0]]
    corners = np.array(np.meshgrid(*([[-1.0, 1.0]] * n), indexing="ij")).reshape(n, -1).T
    for corner in corners:
        for _ in range(16):
            c = corner - np.sign(corner) * rng.uniform(0, 1e-3, n)
            t = corner / math.sqrt(n) + rng.normal(0, 1e-3, n)
            coords.append(c)
            tang.append(t / np.linalg.norm(t))
    for _ in range(16):
        coords.append(rng.uniform(-1e-3, 1e-3, n))
        tang.append(sample_tangents(n, 1, rng)[0])
    coords = np.array(coords)
    return np.zeros(len(coords), dtype=int), coords, np.array(tang)


def _metric_witness(model: Model, idx, coords, v, ratio) -> dict:
    ch = model.charts[int(idx)]
    return {"chart": ch.name, "coords": [float(x) for x in coords],
            "tangent": [float(x) for x in v], "ratio": float(ratio)}


def sweep_metric_distortion(model, samples: int, seed: int = 42, include_extremals: bool = True,
                            workers: int = 1) -> SweepReport:
    """Range of the pointwise stretch factor over random (point, unit tangent) pairs.

    Shards are seeded independently from ``seed`` and reduced in shard
    order, so the report is identical for any ``workers``.
    """
    kind = _as_kind(model)
    model = kind.model
    if samples < 1:
        raise InvalidArgument("samples must be >= 1")
    jobs = _shard_seeds(seed, samples)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            shards = list(pool.map(lambda j: _metric_shard(model, *j), jobs))
    else:
        shards = [_metric_shard(model, *j) for j in jobs]
    if include_extremals:
        idx, coords, v = extremal_metric_batch(model)
        shards.append((idx, coords, v, metric_distortion_batch(coords, v)))
    lo = hi = None
    for idx, coords, v, r in shards:
        i, j = int(np.argmin(r)), int(np.argmax(r))
        if lo is None or r[i] < lo[-1]:
            lo = (idx[i], coords[i], v[i], r[i])
        if hi is None or r[j] > hi[-1]:
            hi = (idx[j], coords[j], v[j], r[j])
    s = 1.0 / kind.scale
    wmin = _metric_witness(model, *lo[:3], lo[3] * s)
    wmax = _metric_witness(model, *hi[:3], hi[3] * s)
    return SweepReport(model.value, "metric", samples, seed, wmin["ratio"], wmax["ratio"],
                       wmin, wmax, kind.scale)


def directed_pairs(model, where: str, count: int, separation: float = 1e-3, rng=None):
    """Point pairs close to an extremal configuration, in the +first chart.

    ``where="corner"``: both points within ``separation`` of the corner
    (1, ..., 1), displaced along the diagonal. ``where="center"``: both
    within ``separation`` of the face center, random direction. Returns
    ``(coords_p, coords_q)``.
    """
    model = Model(model)
    n = model.dim
    rng = np.random.default_rng(rng)
    if where == "corner":
        diag = np.ones(n) / math.sqrt(n)
        t0 = rng.uniform(0, separation / 2, count)
        t1 = t0 + rng.uniform(separation / 10, separation / 2, count)
        p = 1.0 - t0[:, None] * diag
        q = 1.0 - t1[:, None] * diag
    elif where == "center":
        p = sample_tangents(n, count, rng) * rng.uniform(0, separation / 2, (count, 1))
        q = p + sample_tangents(n, count, rng) * rng.uniform(separation / 10, separation / 2, (count, 1))
    else:
        raise InvalidArgument(f"unknown location {where!r}")
    return p, q


def same_face_ratios(model, idx, cp, cq, scale: float = 1.0) -> np.ndarray:
    """``d(lift p, lift q) / d_face(p, q)`` for pairs sharing chart ``idx``."""
    model = Model(model)
    axis, sign = _chart_arrays(model, idx)
    a = lift_batch(axis, sign, cp)
    b = lift_batch(axis, sign, cq)
    return model_distance(model, a, b) / (scale * np.linalg.norm(cp - cq, axis=1))


def _pair_witness(model: Model, idx, cp, cq, ratio) -> dict:
    ch = model.charts[int(idx)]
    return {"p": ChartPoint(ch, tuple(cp)).to_dict(), "q": ChartPoint(ch, tuple(cq)).to_dict(),
            "ratio": float(ratio)}


def sweep_distance_distortion(model, samples: int, seed: int = 42, mode: str = "same_face",
                              depth: int = 3, include_extremals: bool = True) -> SweepReport:
    """Ratios of natural distance between lifted points to intrinsic model distance.

    ``same_face`` draws both points from one chart, where the intrinsic
    distance is exact. ``cross_face`` draws them from different charts and
    brackets the intrinsic distance with :func:`pl_distance_approx`; the
    report then holds ratio intervals ``[d / upper, d / lower]`` in
    ``extra["intervals"]`` and the extremes of their endpoints.
    """
    kind = _as_kind(model)
    model = kind.model
    if samples < 1:
        raise InvalidArgument("samples must be >= 1")
    if mode == "same_face":
        return _same_face_sweep(kind, samples, seed, include_extremals)
    if mode == "cross_face":
        return _cross_face_sweep(kind, samples, seed, depth)
    raise InvalidArgument(f"unknown mode {mode!r}")


def _same_face_sweep(kind: ModelKind, samples: int, seed: int, include_extremals: bool) -> SweepReport:
    model = kind.model
    batches = []
    for child, size in _shard_seeds(seed, samples):
        rng = np.random.default_rng(child)
        idx, cp = sample_chart_points(model, size, rng)
        cq = rng.uniform(-1.0, 1.0, size=cp.shape)
        keep = np.any(cp != cq, axis=1)
        batches.append((idx[keep], cp[keep], cq[keep]))
    if include_extremals:
        rng = np.random.default_rng([seed, 1])
        for where in ("corner", "center"):
            p, q = directed_pairs(model, where, 256, 1e-3, rng)
            batches.append((np.zeros(len(p), dtype=int), p, q))
    lo = hi = None
    for idx, cp, cq in batches:
        r = same_face_ratios(model, idx, cp, cq, kind.scale)
        i, j = int(np.argmin(r)), int(np.argmax(r))
        if lo is None or r[i] < lo[-1]:
            lo = (idx[i], cp[i], cq[i], r[i])
        if hi is None or r[j] > hi[-1]:
            hi = (idx[j], cp[j], cq[j], r[j])
    wmin, wmax = _pair_witness(model, *lo), _pair_witness(model, *hi)
    return SweepReport(model.value, "distance_same_face", samples, seed, wmin["ratio"], wmax["ratio"],
                       wmin, wmax, kind.scale)


def _cross_face_sweep(kind: ModelKind, samples: int, seed: int, depth: int) -> SweepReport:
    model = kind.model
    rng = np.random.default_rng(seed)
    graph = surface_graph(model, depth)
    charts = model.charts
    intervals = []
    best_lo = best_hi = None
    for _ in range(samples):
        i, j = rng.choice(len(charts), size=2, replace=False)
        p = ChartPoint(charts[i], tuple(rng.uniform(-1, 1, model.dim)))
        q = ChartPoint(charts[j], tuple(rng.uniform(-1, 1, model.dim)))
        est = graph.distance(p, q, kind.scale)
        if est.upper == 0.0:
            continue
        d = float(model_distance(model, lift(p)[None], lift(q)[None])[0])
        lo_r, hi_r = d / est.upper, d / est.lower
        intervals.append({"p": p.to_dict(), "q": q.to_dict(), "lower": est.lower, "upper": est.upper,
                          "ratio_lo": lo_r, "ratio_hi": hi_r})
        if best_lo is None or lo_r < best_lo["ratio"]:
            best_lo = {"p": p.to_dict(), "q": q.to_dict(), "ratio": lo_r}
        if best_hi is None or hi_r > best_hi["ratio"]:
            best_hi = {"p": p.to_dict(), "q": q.to_dict(), "ratio": hi_r}
    return SweepReport(model.value, "distance_cross_face", samples, seed, best_lo["ratio"],
                       best_hi["ratio"], best_lo, best_hi, kind.scale,
                       extra={"depth": depth, "intervals": intervals})
