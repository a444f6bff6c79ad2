"""Cubic models of S2, S3 and SO(3).

The cubic model of S^n is the cube boundary d[-1,1]^(n+1). Each facet of
that cube is a chart, parametrized by the n coordinates left after removing
the fixed one (in increasing axis order). Radial normalization ``lift``
maps the model onto the sphere; ``project`` (division by the infinity
norm) inverts it.

SO(3) is modelled by identifying opposite facets of d[-1,1]^4, leaving four
cubes ``Cw, Cx, Cy, Cz``; a point of ``Ca`` embeds with coordinate ``a``
equal to +1.

Ties in the largest absolute coordinate (facet boundaries) are broken
deterministically: for ``project``, positive coordinates win over negative
ones and then the lower axis wins (w > x > y > z). The SO(3) canonical sign
makes the lowest-index maximal coordinate positive, so ``q`` and ``-q``
always land on the same chart point.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidArgument
from .geometry import as_unit_array


class Model(str, enum.Enum):
    S2 = "s2"
    S3 = "s3"
    SO3 = "so3"

    @property
    def ambient_dim(self) -> int:
        return 3 if self is Model.S2 else 4

    @property
    def dim(self) -> int:
        return self.ambient_dim - 1

    @property
    def axis_names(self) -> str:
        return "xyz" if self is Model.S2 else "wxyz"

    @property
    def quotient(self) -> bool:
        return self is Model.SO3

    @property
    def charts(self) -> tuple["ChartId", ...]:
        if self.quotient:
            return tuple(ChartId(self, a, 0) for a in range(4))
        return tuple(ChartId(self, a, s) for a in range(self.ambient_dim) for s in (1, -1))


@dataclass(frozen=True)
class ModelKind:
    """A cubic model together with its scale ``K`` (the cube is d[-K,K]^(n+1)).

    ``K`` never enters stored coordinates; it only rescales widths and
    distortion ranges.
    """

    model: Model
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        if not self.scale > 0:
            raise InvalidArgument(f"scale K must be positive, got {self.scale}")

    @property
    def dyadic(self) -> bool:
        """True when K is an exact power of two, so bisection of d[-K,K] stays exact."""
        return math.frexp(self.scale)[0] == 0.5


@dataclass(frozen=True, order=True)
class ChartId:
    """One facet of the model cube: fixed ``axis`` with value ``sign``.

    ``sign`` is 0 for the SO(3) model, whose charts are identified with
    their antipodes.
    """

    model: Model
    axis: int
    sign: int

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        m = self.model
        if not 0 <= self.axis < m.ambient_dim:
            raise InvalidArgument(f"axis {self.axis} out of range for {m.value}")
        if m.quotient and self.sign != 0:
            raise InvalidArgument("SO(3) charts carry no sign")
        if not m.quotient and self.sign not in (1, -1):
            raise InvalidArgument("sphere charts need sign +1 or -1")

    @property
    def name(self) -> str:
        a = self.model.axis_names[self.axis]
        if self.model.quotient:
            return "C" + a
        return ("+" if self.sign > 0 else "-") + a

    @property
    def index(self) -> int:
        """Position of this chart in ``model.charts``."""
        return self.model.charts.index(self)

    @property
    def embed_sign(self) -> int:
        return 1 if self.model.quotient else self.sign

    @classmethod
    def parse(cls, model, name: str) -> "ChartId":
        model = Model(model)
        axes = model.axis_names
        if model.quotient:
            if len(name) != 2 or name[0] != "C" or name[1] not in axes:
                raise InvalidArgument(f"bad SO(3) chart name {name!r}")
            return cls(model, axes.index(name[1]), 0)
        if len(name) != 2 or name[0] not in "+-" or name[1] not in axes:
            raise InvalidArgument(f"bad chart name {name!r} for {model.value}")
        return cls(model, axes.index(name[1]), 1 if name[0] == "+" else -1)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class ChartPoint:
    """A point of a cubic model: a chart plus face-local coordinates in [-1, 1]."""

    chart: ChartId
    coords: tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(v) for v in self.coords)
        if len(c) != self.chart.model.dim:
            raise InvalidArgument(
                f"{self.chart.model.value} chart points need {self.chart.model.dim} coordinates")
        if any(not -1.0 <= v <= 1.0 for v in c):
            raise InvalidArgument(f"coordinates {c} leave [-1, 1]")
        object.__setattr__(self, "coords", c)

    @property
    def model(self) -> Model:
        return self.chart.model

    def embed(self) -> np.ndarray:
        """Position on d[-1,1]^(n+1)."""
        return embed_batch(np.array([self.chart.axis]), np.array([self.chart.embed_sign]),
                           np.array([self.coords]))[0]

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_dict(self) -> dict:
        return {"model": self.model.value, "chart": self.chart.name, "coords": list(self.coords)}

    @classmethod
    def from_dict(cls, d: dict) -> "ChartPoint":
        try:
            model = Model(d["model"])
            return cls(ChartId.parse(model, d["chart"]), tuple(d["coords"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidArgument(f"malformed chart point {d!r}") from exc

    @classmethod
    def from_json(cls, s: str) -> "ChartPoint":
        return cls.from_dict(json.loads(s))


# -- vectorized core ---------------------------------------------------------

def embed_batch(axis, sign, coords) -> np.ndarray:
    """Insert the fixed coordinate ``sign`` at position ``axis``; ``coords`` is (N, n)."""
    coords = np.asarray(coords, dtype=float)
    N, n = coords.shape
    out = np.empty((N, n + 1))
    cols = np.arange(n + 1)
    axis = np.asarray(axis).reshape(N, 1)
    # local coordinate k fills ambient column k for k < axis, k+1 otherwise
    src = cols - (cols > axis)
    out[:] = np.take_along_axis(coords, np.clip(src, 0, n - 1), axis=1)
    np.put_along_axis(out, axis, np.asarray(sign, dtype=float).reshape(N, 1), axis=1)
    return out


def drop_axis(e, axis) -> np.ndarray:
    """Inverse of :func:`embed_batch` on the coordinates: remove column ``axis``."""
    e = np.asarray(e)
    N, m = e.shape
    keep = np.arange(m - 1)[None, :]
    idx = keep + (keep >= np.asarray(axis).reshape(N, 1))
    return np.take_along_axis(e, idx, axis=1)


def lift_batch(axis, sign, coords) -> np.ndarray:
    e = embed_batch(axis, sign, coords)
    return e / np.linalg.norm(e, axis=1, keepdims=True)


def project_batch(v):
    """Vectorized ``project``: returns ``(axis, sign, coords)`` arrays."""
    v = np.asarray(v, dtype=float)
    a = np.abs(v)
    if np.any(a.max(axis=1) == 0.0):
        raise InvalidArgument("cannot project the zero vector")
    m = v.shape[1]
    tied = a == a.max(axis=1, keepdims=True)
    score = np.where(tied, 2 * m + m * (v > 0) - np.arange(m), 0)
    axis = np.argmax(score, axis=1)
    val = np.take_along_axis(v, axis[:, None], axis=1)[:, 0]
    sign = np.where(val > 0, 1, -1)
    coords = drop_axis(v, axis) / np.abs(val)[:, None]
    return axis, sign, np.clip(coords, -1.0, 1.0)


def canonical_axis(q) -> np.ndarray:
    """Lowest-index coordinate of maximal absolute value (sign-independent)."""
    a = np.abs(np.asarray(q, dtype=float))
    return np.argmax(a == a.max(axis=1, keepdims=True), axis=1)


def canonicalize_batch(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    ax = canonical_axis(q)
    s = np.sign(np.take_along_axis(q, ax[:, None], axis=1))
    return q * s


def so3_locate_batch(q):
    """Vectorized ``so3_locate_chart``: ``(axis, coords)`` after canonicalization."""
    c = canonicalize_batch(as_unit_array(q).reshape(-1, 4))
    axis, sign, coords = project_batch(c)
    assert np.all(sign == 1)
    return axis, coords


# -- point API ---------------------------------------------------------------

def lift(p: ChartPoint, scale: float = 1.0) -> np.ndarray:
    """Radial normalization of the embedded chart point onto the unit sphere.

    ``scale`` is accepted for symmetry with the parametric models; scaling
    the cube cancels in the normalization.
    """
    if not scale > 0:
        raise InvalidArgument("scale must be positive")
    e = p.embed()
    return e / np.linalg.norm(e)


def project(v, model=None) -> ChartPoint:
    """Divide by the infinity norm and read off the chart."""
    v = np.asarray(v, dtype=float).ravel()
    if model is None:
        model = Model.S2 if v.size == 3 else Model.S3
    model = Model(model)
    if model.quotient:
        return so3_locate_chart(v)
    if v.size != model.ambient_dim:
        raise InvalidArgument(f"{model.value} expects {model.ambient_dim}-vectors")
    axis, sign, coords = project_batch(v[None, :])
    return ChartPoint(ChartId(model, int(axis[0]), int(sign[0])), tuple(coords[0]))


def so3_canonicalize(q) -> np.ndarray:
    """``q`` or ``-q``, whichever has a positive lowest-index maximal coordinate."""
    return canonicalize_batch(as_unit_array(q).reshape(1, 4))[0]


def so3_locate_chart(q) -> ChartPoint:
    """Chart point of the SO(3) model representing the rotation ``q`` (or ``-q``)."""
    axis, coords = so3_locate_batch(q)
    return ChartPoint(ChartId(Model.SO3, int(axis[0]), 0), tuple(coords[0]))


# -- gluing ------------------------------------------------------------------

def facet_of(local_axis: int, side: int) -> int:
    """Facet index of the chart cube: ``2 * local_axis + (side > 0)``."""
    return 2 * local_axis + (1 if side > 0 else 0)


def _ambient_axis(chart: ChartId, local_axis: int) -> int:
    return local_axis + (local_axis >= chart.axis)


def _local_axis(chart: ChartId, ambient_axis: int) -> int:
    return ambient_axis - (ambient_axis > chart.axis)


def _glue_direct(chart: ChartId, facet: int, coords):
    """Glue by embedding: the reference the table is built from."""
    model = chart.model
    k, side = divmod(facet, 2)
    b = _ambient_axis(chart, k)
    e = embed_batch([chart.axis], [chart.embed_sign], np.asarray(coords, dtype=float)[None, :])[0]
    s = 1 if e[b] > 0 else -1
    if model.quotient:
        target = ChartId(model, b, 0)
        e = e * s
    else:
        target = ChartId(model, b, s)
    return target, drop_axis(e[None, :], [b])[0]


@dataclass(frozen=True)
class GlueMap:
    """Facet map between two charts: ``out[i] = signs[i] * local[perm[i]]``."""

    source: ChartId
    facet: int
    target: ChartId
    target_facet: int
    perm: tuple[int, ...]
    signs: tuple[int, ...]

    def apply(self, coords) -> np.ndarray:
        c = np.asarray(coords, dtype=float)
        return np.asarray(self.signs) * c[..., list(self.perm)]


@lru_cache(maxsize=None)
def gluing_table(model) -> dict[tuple[ChartId, int], GlueMap]:
    """All facet gluings of ``model``, derived by embedding facet points.

    Each facet midpoint, and the midpoint shifted along every in-facet
    direction, is glued by embedding and re-reading the coordinates in the
    chart across; the displacements identify the signed permutation.
    """
    model = Model(model)
    n = model.dim
    table = {}
    for chart in model.charts:
        for facet in range(2 * n):
            k, side = divmod(facet, 2)
            base = np.zeros(n)
            base[k] = 1.0 if side else -1.0
            target, tb = _glue_direct(chart, facet, base)
            perm = [k] * n
            signs = [0] * n
            for j in range(n):
                if j == k:
                    continue
                x = base.copy()
                x[j] = 0.5
                _, tx = _glue_direct(chart, facet, x)
                d = (tx - tb) / 0.5
                i = int(np.argmax(np.abs(d)))
                perm[i], signs[i] = j, int(np.sign(d[i]))
            i0 = signs.index(0)
            signs[i0] = int(np.sign(tb[i0] * base[k]))
            table[(chart, facet)] = GlueMap(chart, facet, target, facet_of(i0, tb[i0]),
                                            tuple(perm), tuple(signs))
    return table


def glue(p: ChartPoint, facet: int) -> ChartPoint:
    """The same model point expressed in the chart across ``facet``.

    ``p`` must lie on that facet (local coordinate ``facet // 2`` equal to
    -1 for even, +1 for odd facet indices).
    """
    n = p.model.dim
    if not 0 <= facet < 2 * n:
        raise InvalidArgument(f"facet index {facet} out of range 0..{2 * n - 1}")
    k, side = divmod(facet, 2)
    if p.coords[k] != (1.0 if side else -1.0):
        raise InvalidArgument(f"point {p.coords} is not on facet {facet}")
    g = gluing_table(p.model)[(p.chart, facet)]
    return ChartPoint(g.target, tuple(g.apply(p.coords)))


def describe_gluing(model) -> list[dict]:
    """Human-readable gluing table, one row per directed facet map."""
    rows = []
    names = "uvt"
    for (chart, facet), g in sorted(gluing_table(model).items(), key=lambda kv: (kv[0][0], kv[0][1])):
        n = len(g.perm)
        expr = [("-" if s < 0 else "") + names[j] for j, s in zip(g.perm, g.signs)]
        rows.append({"source": chart.name, "facet": facet, "target": g.target.name,
                     "target_facet": g.target_facet, "map": f"({', '.join(names[:n])}) -> ({', '.join(expr)})"})
    return rows
