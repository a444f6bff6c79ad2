"""Quaternions, rotation matrices and the natural distances on S3 and SO(3).

Quaternions are Hamilton, scalar first: ``(w, x, y, z)``. Every function
accepts either a :class:`UnitQuaternion` or an array of shape ``(..., 4)``
and broadcasts over leading axes.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument

log = logging.getLogger(__name__)

#: arccos/trace arguments this close outside their domain are clamped silently
CLAMP_TOL = 1e-12
#: accepted deviation of R^T R from I for rotation inputs
ORTHO_TOL = 1e-9


@dataclass(frozen=True)
class UnitQuaternion:
    """A point of S3, normalized on construction.

    ``renormalized`` records whether normalization moved the input by more
    than 1e-9; it is informational and excluded from equality.
    """

    w: float
    x: float
    y: float
    z: float
    renormalized: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self):
        v = np.array([self.w, self.x, self.y, self.z], dtype=float)
        n = np.linalg.norm(v)
        if not np.isfinite(n) or n == 0.0:
            raise InvalidArgument("cannot normalize a zero or non-finite quaternion")
        u = v / n
        moved = bool(np.max(np.abs(u - v)) > 1e-9)
        if moved:
            log.debug("quaternion %s renormalized (norm %.17g)", v, n)
        for name, val in zip("wxyz", u):
            object.__setattr__(self, name, float(val))
        object.__setattr__(self, "renormalized", moved)

    @classmethod
    def from_array(cls, a) -> "UnitQuaternion":
        w, x, y, z = np.asarray(a, dtype=float).reshape(4)
        return cls(w, x, y, z)

    @property
    def array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def __neg__(self) -> "UnitQuaternion":
        return UnitQuaternion(-self.w, -self.x, -self.y, -self.z)

    def __iter__(self):
        return iter((self.w, self.x, self.y, self.z))


def as_unit_array(q) -> np.ndarray:
    """Return ``q`` as a float array of unit quaternions, shape ``(..., 4)``."""
    if isinstance(q, UnitQuaternion):
        return q.array
    a = np.asarray(q, dtype=float)
    if a.shape[-1:] != (4,):
        raise InvalidArgument(f"expected trailing dimension 4, got shape {a.shape}")
    n = np.linalg.norm(a, axis=-1, keepdims=True)
    if np.any(n == 0.0) or not np.all(np.isfinite(n)):
        raise InvalidArgument("zero or non-finite quaternion")
    return a / n


def random_quaternions(n: int, rng=None) -> np.ndarray:
    """Haar-uniform unit quaternions, shape ``(n, 4)``."""
    rng = np.random.default_rng(rng)
    q = rng.standard_normal((n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def quat_multiply(a, b) -> np.ndarray:
    """Hamilton product ``a * b``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ], axis=-1)


def quat_to_rotation(q) -> np.ndarray:
    """The double cover S3 -> SO(3); ``quat_to_rotation(q) == quat_to_rotation(-q)``."""
    w, x, y, z = np.moveaxis(as_unit_array(q), -1, 0)
    R = np.empty(w.shape + (3, 3))
    R[..., 0, 0] = 1 - 2 * (y * y + z * z)
    R[..., 0, 1] = 2 * (x * y - z * w)
    R[..., 0, 2] = 2 * (x * z + y * w)
    R[..., 1, 0] = 2 * (x * y + z * w)
    R[..., 1, 1] = 1 - 2 * (x * x + z * z)
    R[..., 1, 2] = 2 * (y * z - x * w)
    R[..., 2, 0] = 2 * (x * z - y * w)
    R[..., 2, 1] = 2 * (y * z + x * w)
    R[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return R


def rotation_to_quat(R) -> np.ndarray:
    """Unit quaternion of a rotation matrix (Shepperd's method), sign arbitrary."""
    R = check_rotation(R)
    if R.ndim > 2:
        return np.stack([rotation_to_quat(m) for m in R.reshape(-1, 3, 3)]).reshape(
            R.shape[:-2] + (4,))
    t = np.trace(R)
    d = np.diag(R)
    k = int(np.argmax([t, d[0], d[1], d[2]]))
    if k == 0:
        s = 2.0 * np.sqrt(1.0 + t)
        q = [s / 4, (R[2, 1] - R[1, 2]) / s, (R[0, 2] - R[2, 0]) / s, (R[1, 0] - R[0, 1]) / s]
    elif k == 1:
        s = 2.0 * np.sqrt(1.0 + d[0] - d[1] - d[2])
        q = [(R[2, 1] - R[1, 2]) / s, s / 4, (R[0, 1] + R[1, 0]) / s, (R[0, 2] + R[2, 0]) / s]
    elif k == 2:
        s = 2.0 * np.sqrt(1.0 - d[0] + d[1] - d[2])
        q = [(R[0, 2] - R[2, 0]) / s, (R[0, 1] + R[1, 0]) / s, s / 4, (R[1, 2] + R[2, 1]) / s]
    else:
        s = 2.0 * np.sqrt(1.0 - d[0] - d[1] + d[2])
        q = [(R[1, 0] - R[0, 1]) / s, (R[0, 2] + R[2, 0]) / s, (R[1, 2] + R[2, 1]) / s, s / 4]
    q = np.array(q)
    return q / np.linalg.norm(q)


def axis_angle_rotation(axis, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    return quat_to_rotation(np.r_[np.cos(angle / 2), np.sin(angle / 2) * axis])


def check_rotation(R, tol: float = ORTHO_TOL) -> np.ndarray:
    """Validate ``R`` (shape ``(..., 3, 3)``) as rotation matrices and return it as floats."""
    R = np.asarray(R, dtype=float)
    if R.shape[-2:] != (3, 3):
        raise InvalidArgument(f"expected 3x3 matrices, got shape {R.shape}")
    RtR = np.swapaxes(R, -1, -2) @ R
    if np.max(np.abs(RtR - np.eye(3)), initial=0.0) > tol:
        raise InvalidArgument("matrix is not orthogonal")
    if np.max(np.abs(np.linalg.det(R) - 1.0), initial=0.0) > tol:
        raise InvalidArgument("matrix has determinant != 1")
    return R


def _checked_dot(q1, q2) -> np.ndarray:
    d = np.sum(as_unit_array(q1) * as_unit_array(q2), axis=-1)
    if np.any(np.abs(d) > 1.0 + CLAMP_TOL):
        raise InvalidArgument("dot product of unit quaternions exceeds 1")
    return np.clip(d, -1.0, 1.0)


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def dist_s3(q1, q2):
    """Great-circle distance on S3, in [0, pi].

    Evaluated as ``2 atan2(|q1 - q2|, |q1 + q2|)``, which equals
    ``arccos(q1 . q2)`` but keeps full relative accuracy for nearby and
    nearly antipodal points.
    """
    a = as_unit_array(q1)
    b = as_unit_array(q2)
    _checked_dot(a, b)
    return _scalar(2.0 * np.arctan2(np.linalg.norm(a - b, axis=-1),
                                    np.linalg.norm(a + b, axis=-1)))


def phi3(q1, q2):
    """``arccos |q1 . q2|``, the S3 distance modulo the antipodal map; in [0, pi/2]."""
    d = np.asarray(dist_s3(q1, q2))
    return _scalar(np.minimum(d, np.pi - d))


def rotation_angle(R) -> np.ndarray:
    """Angle in [0, pi] of a rotation about its axis.

    Uses ``atan2(sin, cos)`` with ``cos = (tr R - 1) / 2`` (trace clamped to
    [-1, 3]) and ``sin`` from the skew part, so accuracy does not degrade
    near 0 or pi.
    """
    tr = np.trace(R, axis1=-2, axis2=-1)
    if np.any(tr > 3.0 + CLAMP_TOL) or np.any(tr < -1.0 - CLAMP_TOL):
        raise InvalidArgument("rotation trace outside [-1, 3]")
    c = (np.clip(tr, -1.0, 3.0) - 1.0) / 2.0
    skew = np.stack([R[..., 2, 1] - R[..., 1, 2],
                     R[..., 0, 2] - R[..., 2, 0],
                     R[..., 1, 0] - R[..., 0, 1]], axis=-1)
    s = np.linalg.norm(skew, axis=-1) / 2.0
    return np.arctan2(s, c)


def phi6(R1, R2):
    """Angle of the relative rotation ``R1^-1 R2``; bi-invariant, in [0, pi]."""
    R1 = check_rotation(R1)
    R2 = check_rotation(R2)
    return _scalar(rotation_angle(np.swapaxes(R1, -1, -2) @ R2))
