"""Dyadic subdivision atlas over the cubic models.

Every chart carries an octree (quadtree for S2) rooted at [-1, 1]^n. A box
is stored by integers only: chart, depth ``d`` and cell index ``i`` per axis,
covering ``[-1 + i 2^(1-d), -1 + (i+1) 2^(1-d)]``. Centers and split planes
are dyadic and exactly representable, so splitting and point location never
round.

Containment is half-open: a box owns its low faces, and the top box along
an axis also owns the chart face at +1. Chart facets themselves belong to
whichever chart :func:`so3atlas.cubic.project` picks.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .cubic import ChartId, ChartPoint, Model, ModelKind, facet_of, gluing_table, lift_batch, \
    project_batch, so3_locate_batch
from .distortion import distortion_range_mu, scaled_model_range
from .errors import InvalidArgument, ResourceError

MAX_DEPTH = 17
_IDX_BITS = 17
DEFAULT_NODE_BUDGET = 1 << 24
NODE_BUDGET_ENV = "SO3_ATLAS_NODE_BUDGET"


def _kind(model) -> ModelKind:
    return model if isinstance(model, ModelKind) else ModelKind(Model(model))


def encode_key(chart_idx, depth, index) -> np.ndarray | int:
    """Pack (chart, depth, cell index) into one integer; works on arrays too."""
    index = np.asarray(index, dtype=np.int64)
    n = index.shape[-1]
    key = (np.asarray(chart_idx, dtype=np.int64) << 56) | (np.asarray(depth, dtype=np.int64) << 51)
    for a in range(n):
        key = key | (index[..., a] << (_IDX_BITS * (n - 1 - a)))
    return int(key) if np.ndim(key) == 0 else key


def decode_key(key: int, n: int) -> tuple[int, int, tuple[int, ...]]:
    mask = (1 << _IDX_BITS) - 1
    idx = tuple((key >> (_IDX_BITS * (n - 1 - a))) & mask for a in range(n))
    return key >> 56, (key >> 51) & 31, idx


@dataclass(frozen=True, order=True)
class SubdivisionBox:
    """Dyadic cube ``chart x prod_k [lo_k, hi_k]`` at ``depth`` with integer cell ``index``."""

    chart: ChartId
    depth: int
    index: tuple[int, ...]

    @property
    def half_width(self) -> float:
        return math.ldexp(1.0, -self.depth)

    @property
    def center(self) -> tuple[float, ...]:
        return tuple(-1.0 + math.ldexp(2 * i + 1, -self.depth) for i in self.index)

    @property
    def lo(self) -> tuple[float, ...]:
        return tuple(-1.0 + math.ldexp(2 * i, -self.depth) for i in self.index)

    @property
    def hi(self) -> tuple[float, ...]:
        return tuple(-1.0 + math.ldexp(2 * i + 2, -self.depth) for i in self.index)

    @property
    def key(self) -> int:
        return encode_key(self.chart.index, self.depth, self.index)

    @property
    def id(self) -> str:
        """Path code: chart name, then one child digit per level (bit k set = upper half on axis k)."""
        digits = []
        for lvl in range(1, self.depth + 1):
            shift = self.depth - lvl
            digits.append(str(sum(((i >> shift) & 1) << k for k, i in enumerate(self.index))))
        return self.chart.name + ("/" + "".join(digits) if digits else "")

    @classmethod
    def from_id(cls, model, box_id: str) -> "SubdivisionBox":
        model = Model(model)
        name, _, path = box_id.partition("/")
        chart = ChartId.parse(model, name)
        n = model.dim
        idx = [0] * n
        for ch in path:
            d = int(ch)
            if d >= 1 << n:
                raise InvalidArgument(f"bad child digit {ch!r} in {box_id!r}")
            for k in range(n):
                idx[k] = 2 * idx[k] + ((d >> k) & 1)
        return cls(chart, len(path), tuple(idx))

    def contains(self, coords) -> bool:
        """Half-open containment (closed on the +1 chart face)."""
        for c, lo, hi in zip(coords, self.lo, self.hi):
            if not (lo <= c < hi or (c == hi == 1.0)):
                return False
        return True

    def chart_point(self) -> ChartPoint:
        return ChartPoint(self.chart, self.center)

    def children(self) -> list["SubdivisionBox"]:
        n = len(self.index)
        out = []
        for d in range(1 << n):
            out.append(SubdivisionBox(self.chart, self.depth + 1,
                                      tuple(2 * i + ((d >> k) & 1) for k, i in enumerate(self.index))))
        return out

    def parent_at(self, depth: int) -> "SubdivisionBox":
        s = self.depth - depth
        return SubdivisionBox(self.chart, depth, tuple(i >> s for i in self.index))


def width(box: SubdivisionBox, scale: float = 1.0) -> float:
    """Side length of the box in model units, ``2 * half_width * K``."""
    return 2.0 * box.half_width * scale


def model_range(kind):
    """Distance distortion range of the model's representation map at its scale."""
    kind = _kind(kind)
    n = kind.model.dim
    r = scaled_model_range(n, kind.scale) if kind.scale != 1.0 else distortion_range_mu(n)
    return r.scaled(2) if kind.model.quotient else r


def metric_diameter_bounds(box: SubdivisionBox | None, kind, box_width: float | None = None):
    """Bounds on the natural-distance diameter of the box's image.

    ``upper = hi * sqrt(n) * width`` holds for every pair of points in the box
    (face-diagonal times the largest expansion). ``lower = lo * width`` is a
    conservative companion and carries no covering guarantee.
    """
    kind = _kind(kind)
    w = width(box, kind.scale) if box_width is None else box_width
    lo, hi = model_range(kind).as_floats()
    return lo * w, hi * math.sqrt(kind.model.dim) * w


class AtlasTree:
    """One dyadic tree per chart, stored as flat sets of packed node keys."""

    def __init__(self, kind):
        self.kind = _kind(kind)
        self.model = self.kind.model
        self.n = self.model.dim
        self._leaves: set[int] = set()
        self._internal: set[int] = set()
        self._cache = None
        for ch in self.model.charts:
            self._leaves.add(encode_key(ch.index, 0, (0,) * self.n))

    # -- structure ---------------------------------------------------------

    @property
    def roots(self) -> list[SubdivisionBox]:
        return [SubdivisionBox(ch, 0, (0,) * self.n) for ch in self.model.charts]

    def _box(self, key: int) -> SubdivisionBox:
        c, d, idx = decode_key(key, self.n)
        return SubdivisionBox(self.model.charts[c], d, idx)

    def box(self, box_id: str) -> SubdivisionBox:
        b = SubdivisionBox.from_id(self.model, box_id)
        if b.key not in self._leaves and b.key not in self._internal:
            raise InvalidArgument(f"no node {box_id!r} in the tree")
        return b

    def is_leaf(self, box_id: str) -> bool:
        return SubdivisionBox.from_id(self.model, box_id).key in self._leaves

    def leaves(self) -> list[SubdivisionBox]:
        return sorted(self._box(k) for k in self._leaves)

    def nodes(self) -> list[tuple[SubdivisionBox, bool]]:
        """All nodes in deterministic order with their leaf flag."""
        out = [(self._box(k), True) for k in self._leaves] + [(self._box(k), False) for k in self._internal]
        return sorted(out, key=lambda t: (t[0].chart.index, t[0].depth, t[0].index))

    @property
    def leaf_count(self) -> int:
        return len(self._leaves)

    @property
    def node_count(self) -> int:
        return len(self._leaves) + len(self._internal)

    def split(self, box_id: str) -> list[str]:
        """Replace a leaf by its 2^n congruent children; returns their ids."""
        b = SubdivisionBox.from_id(self.model, box_id)
        if b.key not in self._leaves:
            if b.key in self._internal:
                raise InvalidArgument(f"box {box_id!r} is already split")
            raise InvalidArgument(f"no leaf {box_id!r} in the tree")
        if b.depth >= MAX_DEPTH:
            raise ResourceError(f"maximum depth {MAX_DEPTH} reached")
        self._leaves.remove(b.key)
        self._internal.add(b.key)
        kids = b.children()
        self._leaves.update(k.key for k in kids)
        self._cache = None
        return [k.id for k in kids]

    @classmethod
    def uniform(cls, kind, depth: int) -> "AtlasTree":
        """Tree with every chart refined to exactly ``depth``."""
        if not 0 <= depth <= MAX_DEPTH:
            raise InvalidArgument(f"depth must lie in [0, {MAX_DEPTH}]")
        tree = cls(kind)
        n = tree.n
        tree._leaves.clear()
        for d in range(depth + 1):
            m = 1 << d
            grid = np.stack(np.meshgrid(*([np.arange(m)] * n), indexing="ij"), axis=-1).reshape(-1, n)
            target = tree._leaves if d == depth else tree._internal
            for ch in tree.model.charts:
                target.update(encode_key(ch.index, d, grid).tolist())
        return tree

    # -- point location ----------------------------------------------------

    def _arrays(self):
        if self._cache is None:
            self._cache = np.array(sorted(self._internal), dtype=np.int64)
        return self._cache

    def locate_chart_coords(self, chart_idx, coords) -> list[str]:
        keys = self._locate_keys(np.asarray(chart_idx), np.asarray(coords, dtype=float))
        return [self._box(int(k)).id for k in keys]

    def _locate_keys(self, chart_idx, coords) -> np.ndarray:
        N = len(coords)
        internal = self._arrays()
        idx = np.zeros((N, self.n), dtype=np.int64)
        depth = np.zeros(N, dtype=np.int64)
        active = np.ones(N, dtype=bool)
        for d in range(MAX_DEPTH + 1):
            keys = encode_key(chart_idx, depth, idx)
            pos = np.searchsorted(internal, keys)
            hit = (pos < len(internal)) & (internal[np.minimum(pos, len(internal) - 1)] == keys) \
                if len(internal) else np.zeros(N, dtype=bool)
            active &= hit
            if not active.any():
                return keys
            center = -1.0 + (2 * idx[active] + 1) * math.ldexp(1.0, -d)
            bit = (coords[active] >= center).astype(np.int64)
            idx[active] = 2 * idx[active] + bit
            depth[active] += 1
        raise AssertionError("tree deeper than MAX_DEPTH")

    def _chart_coords_of(self, v):
        v = np.atleast_2d(np.asarray(v, dtype=float))
        if self.model.quotient:
            axis, coords = so3_locate_batch(v)
            return axis, coords
        if v.shape[1] != self.model.ambient_dim:
            raise InvalidArgument(f"{self.model.value} points have {self.model.ambient_dim} coordinates")
        axis, sign, coords = project_batch(v)
        lookup = {(c.axis, c.sign): c.index for c in self.model.charts}
        chart_idx = np.array([lookup[(int(a), int(s))] for a, s in zip(axis, sign)])
        return chart_idx, coords

    def locate(self, q) -> str:
        """Id of the unique leaf containing the model point of ``q`` (q and -q agree for SO(3))."""
        return self.locate_many(np.asarray(q, dtype=float)[None, :])[0]

    def locate_many(self, Q) -> list[str]:
        chart_idx, coords = self._chart_coords_of(Q)
        return self.locate_chart_coords(chart_idx, coords)

    def locate_keys(self, Q):
        """Vectorized location: ``(leaf keys, chart indices, chart coordinates)``."""
        chart_idx, coords = self._chart_coords_of(Q)
        return self._locate_keys(chart_idx, coords), chart_idx, coords

    def box_of_key(self, key: int) -> SubdivisionBox:
        return self._box(int(key))

    # -- adjacency ---------------------------------------------------------

    def neighbors(self, box_id: str) -> list[str]:
        """Leaves sharing an (n-1)-dimensional facet with the leaf ``box_id``, across gluings too."""
        b = SubdivisionBox.from_id(self.model, box_id)
        if b.key not in self._leaves:
            raise InvalidArgument(f"{box_id!r} is not a leaf")
        table = gluing_table(self.model)
        top = (1 << b.depth) - 1
        found = set()
        for k in range(self.n):
            for side in (-1, 1):
                at_edge = b.index[k] == (top if side > 0 else 0)
                if not at_edge:
                    idx = list(b.index)
                    idx[k] += side
                    found.update(self._touching(SubdivisionBox(b.chart, b.depth, tuple(idx)), k, -side))
                    continue
                g = table[(b.chart, facet_of(k, side))]
                tk, tside = divmod(g.target_facet, 2)
                tside = 1 if tside else -1
                idx = [0] * self.n
                for i in range(self.n):
                    if i == tk:
                        idx[i] = top if tside > 0 else 0
                    else:
                        j = g.perm[i]
                        idx[i] = b.index[j] if g.signs[i] > 0 else top - b.index[j]
                found.update(self._touching(SubdivisionBox(g.target, b.depth, tuple(idx)), tk, tside))
        found.discard(b.key)
        return sorted(self._box(k).id for k in found)

    def _touching(self, cell: SubdivisionBox, axis: int, side: int) -> list[int]:
        """Leaves meeting the ``side`` face (along ``axis``) of the same-size ``cell``."""
        for d in range(cell.depth + 1):
            anc = cell.parent_at(d)
            if anc.key in self._leaves:
                return [anc.key]
            if anc.key not in self._internal:
                return []
        out, stack = [], [cell]
        want = 1 if side > 0 else 0
        while stack:
            c = stack.pop()
            if c.key in self._leaves:
                out.append(c.key)
            elif c.key in self._internal:
                stack.extend(ch for ch in c.children() if ch.index[axis] & 1 == want)
        return out


def init_atlas(kind) -> AtlasTree:
    """One root box [-1, 1]^n per chart: 6 for S2, 8 for S3, 4 for SO(3)."""
    return AtlasTree(kind)


# -- epsilon covers -----------------------------------------------------------

def node_budget() -> int:
    env = os.environ.get(NODE_BUDGET_ENV)
    if env is None:
        return DEFAULT_NODE_BUDGET
    try:
        val = int(env)
    except ValueError as exc:
        raise InvalidArgument(f"{NODE_BUDGET_ENV} must be an integer, got {env!r}") from exc
    if val < 1:
        raise InvalidArgument(f"{NODE_BUDGET_ENV} must be positive")
    return val


def cover_depth(kind, epsilon: float) -> int:
    """Smallest uniform depth whose certified diameter bound is at most ``epsilon``."""
    kind = _kind(kind)
    if not epsilon > 0:
        raise InvalidArgument(f"epsilon must be positive, got {epsilon}")
    root = metric_diameter_bounds(None, kind, box_width=2.0 * kind.scale)[1]
    d = 0
    while math.ldexp(root, -d) > epsilon:
        d += 1
    return d


@dataclass
class EpsilonCover:
    """Leaf-center samples of a uniform tree; every model point is within ``bound`` of one."""

    tree: AtlasTree
    depth: int
    epsilon: float
    bound: float
    samples: np.ndarray
    chart_idx: np.ndarray

    @property
    def kind(self) -> ModelKind:
        return self.tree.kind

    def chart_names(self) -> list[str]:
        charts = self.tree.model.charts
        return [charts[i].name for i in self.chart_idx]


def build_epsilon_cover(kind, epsilon: float, budget: int | None = None) -> EpsilonCover:
    """Uniformly subdivide until each leaf's diameter bound is <= ``epsilon``; emit lifted centers.

    For SO(3) the distance is the rotation angle, for the spheres the arc
    length. Raises :class:`ResourceError` (``advice`` = smallest feasible
    epsilon) when the leaf count would exceed the node budget.
    """
    kind = _kind(kind)
    d = cover_depth(kind, epsilon)
    budget = node_budget() if budget is None else budget
    n_charts = len(kind.model.charts)
    leaves = n_charts << (kind.model.dim * d)
    if leaves > budget or d > MAX_DEPTH:
        dmax = 0
        while n_charts << (kind.model.dim * (dmax + 1)) <= budget and dmax + 1 <= MAX_DEPTH:
            dmax += 1
        root = metric_diameter_bounds(None, kind, box_width=2.0 * kind.scale)[1]
        min_eps = math.ldexp(root, -dmax)
        raise ResourceError(f"epsilon={epsilon} needs {leaves} leaves at depth {d}, over the budget "
                            f"of {budget}; smallest feasible epsilon is {min_eps!r}", advice=min_eps)
    tree = AtlasTree.uniform(kind, d)
    n = kind.model.dim
    m = 1 << d
    grid = np.stack(np.meshgrid(*([np.arange(m)] * n), indexing="ij"), axis=-1).reshape(-1, n)
    centers = -1.0 + (2 * grid + 1) * math.ldexp(1.0, -d)
    chart_idx = np.repeat(np.arange(n_charts), len(grid))
    centers = np.tile(centers, (n_charts, 1))
    charts = kind.model.charts
    axis = np.array([c.axis for c in charts])[chart_idx]
    sign = np.array([c.embed_sign for c in charts])[chart_idx]
    samples = lift_batch(axis, sign, centers)
    bound = math.ldexp(metric_diameter_bounds(None, kind, box_width=2.0 * kind.scale)[1], -d)
    return EpsilonCover(tree, d, float(epsilon), bound, samples, chart_idx)
