"""Primitive geometric types: lines, circles, homogeneous points, hit orders.

Affine points are plain numpy arrays of shape (3,).  Projective points are
numpy arrays of shape (4,) holding homogeneous coordinates (x, y, z, w); the
affine chart is w = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    CoincidentHits,
    CollinearPoints,
    AtCenter,
    DegeneratePoints,
    InputError,
)

EPS_POINT = 1e-9          # coincidence tolerance for constructor inputs
DELTA_ORDER = 1e-6        # minimal hit separation along a transversal
MIN_TRIANGLE_AREA = 1e-12 # collinearity cutoff for circle_through


def unit(v: np.ndarray) -> np.ndarray:
    """Normalize a vector, raising on (near-)zero input."""
    n = float(np.linalg.norm(v))
    if n < EPS_POINT:
        raise DegeneratePoints("cannot normalize a near-zero vector")
    return np.asarray(v, dtype=float) / n


def hnormalize(q: np.ndarray) -> np.ndarray:
    """Scale a homogeneous 4-vector to unit norm with a canonical sign.

    The sign is fixed so that the first component exceeding 1e-8 in
    magnitude is positive, which makes equal projective points compare
    equal as arrays.
    """
    q = np.asarray(q, dtype=float)
    n = float(np.linalg.norm(q))
    if n < EPS_POINT:
        raise DegeneratePoints("zero homogeneous vector")
    q = q / n
    for x in q:
        if abs(x) > 1e-8:
            if x < 0.0:
                q = -q
            break
    return q


def project_chart(q: np.ndarray) -> np.ndarray:
    """Map a homogeneous point to the affine chart w = 1."""
    q = np.asarray(q, dtype=float)
    if abs(q[3]) < EPS_POINT * np.linalg.norm(q):
        raise InputError("point lies on the plane at infinity of the chart")
    return q[:3] / q[3]


def embed_chart(p: np.ndarray) -> np.ndarray:
    """Inverse of project_chart on affine points."""
    p = np.asarray(p, dtype=float)
    return np.array([p[0], p[1], p[2], 1.0])


@dataclass(frozen=True)
class Line3:
    """Oriented affine line in Pluecker form (unit direction, moment).

    The moment is m = p x d for any point p on the line, so d . m = 0.
    ``canonical()`` produces the direction-sign-normalized representative
    used for deduplication; the oriented object keeps its direction.
    """

    direction: np.ndarray
    moment: np.ndarray

    @classmethod
    def from_point_direction(cls, p, d) -> "Line3":
        d = unit(np.asarray(d, dtype=float))
        p = np.asarray(p, dtype=float)
        return cls(direction=d, moment=np.cross(p, d))

    @classmethod
    def from_points(cls, p, q) -> "Line3":
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        if np.linalg.norm(q - p) < EPS_POINT:
            raise DegeneratePoints("line through coincident points")
        return cls.from_point_direction(p, q - p)

    def base_point(self) -> np.ndarray:
        """The point of the line closest to the origin."""
        return np.cross(self.direction, self.moment)

    def distance_to(self, x):
        """Distance from a point (or an array of points) to the line."""
        x = np.asarray(x, dtype=float)
        res = np.cross(x, np.broadcast_to(self.direction, x.shape)) - self.moment
        d = np.linalg.norm(res, axis=-1)
        return float(d) if d.ndim == 0 else d

    def coordinate_of(self, x):
        """Signed position of (the projection of) x along the line."""
        x = np.asarray(x, dtype=float)
        s = (x - self.base_point()) @ self.direction
        return float(s) if np.ndim(s) == 0 else s

    def point_at(self, s: float) -> np.ndarray:
        return self.base_point() + s * self.direction

    def plucker6(self) -> np.ndarray:
        return np.concatenate([self.direction, self.moment])

    def canonical(self) -> np.ndarray:
        """Sign-normalized Pluecker 6-vector (line as an unoriented set)."""
        v = self.plucker6()
        for x in v[:3]:
            if abs(x) > 1e-10:
                if x < 0.0:
                    v = -v
                break
        return v

    def reversed(self) -> "Line3":
        return Line3(direction=-self.direction, moment=-self.moment)


@dataclass(frozen=True)
class ProjectiveLine:
    """Line in RP^3 as an ordered orthonormal basis of a 2-plane in R^4.

    The basis order (a, b) orients the line; the great circle upstairs is
    cos(phi) a + sin(phi) b.
    """

    a: np.ndarray
    b: np.ndarray

    @classmethod
    def from_hpoints(cls, q1, q2) -> "ProjectiveLine":
        q1 = np.asarray(q1, dtype=float)
        q2 = np.asarray(q2, dtype=float)
        a = unit(q1)
        b = q2 - np.dot(q2, a) * a
        nb = float(np.linalg.norm(b))
        if nb < 1e-10:
            raise DegeneratePoints("projective line through one point")
        return cls(a=a, b=b / nb)

    def plucker6(self) -> np.ndarray:
        """Exterior product of the spanning vectors, components ordered
        (01, 02, 03, 12, 13, 23)."""
        a, b = self.a, self.b
        return np.array([
            a[0] * b[1] - a[1] * b[0],
            a[0] * b[2] - a[2] * b[0],
            a[0] * b[3] - a[3] * b[0],
            a[1] * b[2] - a[2] * b[1],
            a[1] * b[3] - a[3] * b[1],
            a[2] * b[3] - a[3] * b[2],
        ])

    def canonical(self) -> np.ndarray:
        v = self.plucker6()
        n = float(np.linalg.norm(v))
        if n < 1e-12:
            raise DegeneratePoints("degenerate projective line")
        v = v / n
        for x in v:
            if abs(x) > 1e-8:
                if x < 0.0:
                    v = -v
                break
        return v

    def angle_of(self, q) -> float:
        """Great-circle angle of a homogeneous point on (or near) the line."""
        q = np.asarray(q, dtype=float)
        return float(np.arctan2(np.dot(q, self.b), np.dot(q, self.a)))

    def point_at(self, phi: float) -> np.ndarray:
        return np.cos(phi) * self.a + np.sin(phi) * self.b

    def chart_line(self) -> Line3:
        """Restriction to the chart w = 1 (fails for the line at infinity)."""
        # Solve for the two chart points with extreme |w| on the circle.
        a, b = self.a, self.b
        # point with w-component zero gives the direction; any other the base
        phi0 = np.arctan2(-a[3], b[3]) if abs(b[3]) + abs(a[3]) > 1e-12 else 0.0
        d4 = self.point_at(phi0)          # w = 0: direction at infinity
        p4 = self.point_at(phi0 + 0.5 * np.pi)
        if abs(p4[3]) < 1e-12:
            raise InputError("line lies in the plane at infinity")
        return Line3.from_point_direction(p4[:3] / p4[3], d4[:3])


@dataclass(frozen=True)
class Circle3:
    """Circle in R^3: center, radius and a unit normal fixing a traversal
    direction (counterclockwise when seen from the normal tip)."""

    center: np.ndarray
    radius: float
    normal: np.ndarray

    def frame(self) -> tuple[np.ndarray, np.ndarray]:
        """Deterministic orthonormal in-plane frame (u, v) with u x v = n."""
        n = self.normal
        k = int(np.argmin(np.abs(n)))
        e = np.zeros(3)
        e[k] = 1.0
        u = unit(np.cross(n, e))
        v = np.cross(n, u)
        return u, v

    def point_at(self, theta: float) -> np.ndarray:
        u, v = self.frame()
        return self.center + self.radius * (np.cos(theta) * u + np.sin(theta) * v)

    def angle_of(self, x) -> float:
        u, v = self.frame()
        r = np.asarray(x, dtype=float) - self.center
        return float(np.arctan2(np.dot(r, v), np.dot(r, u)))

    def distance_to(self, x):
        """Distance from a point (or an array of points) to the circle."""
        r = np.asarray(x, dtype=float) - self.center
        h = r @ self.normal
        rho = np.linalg.norm(r - np.multiply.outer(h, self.normal), axis=-1)
        d = np.hypot(h, rho - self.radius)
        return float(d) if np.ndim(d) == 0 else d

    def key(self) -> np.ndarray:
        """Orientation-insensitive dedupe key."""
        n = self.normal
        for x in n:
            if abs(x) > 1e-8:
                if x < 0.0:
                    n = -n
                break
        return np.concatenate([self.center, [self.radius], n])


def circle_through(p, q, r) -> Circle3:
    """Circumscribed circle of a nondegenerate point triple.

    The normal is oriented so that p -> q -> r runs counterclockwise
    around it.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    e1 = q - p
    e2 = r - p
    n = np.cross(e1, e2)
    scale = max(np.linalg.norm(e1), np.linalg.norm(e2), EPS_POINT)
    if np.linalg.norm(n) < MIN_TRIANGLE_AREA + 1e-9 * scale * scale:
        raise CollinearPoints("circle through (near-)collinear points")
    mat = np.stack([e1, e2, n])
    rhs = np.array([0.5 * np.dot(e1, e1), 0.5 * np.dot(e2, e2), 0.0])
    center = p + np.linalg.solve(mat, rhs)
    radius = float(np.linalg.norm(p - center))
    return Circle3(center=center, radius=radius, normal=unit(n))


def invert_point(x, center, radius: float = 1.0) -> np.ndarray:
    """Sphere inversion of a point about ``center``."""
    x = np.asarray(x, dtype=float)
    center = np.asarray(center, dtype=float)
    d = x - center
    n2 = float(np.dot(d, d))
    if n2 < EPS_POINT * EPS_POINT:
        raise AtCenter("cannot invert the inversion center")
    return center + (radius * radius / n2) * d


class OrderMode(Enum):
    LINEAR = "linear"
    CYCLIC = "cyclic"


@dataclass(frozen=True)
class OrderSpec:
    """Prescribed meeting order: a mode and a tuple of curve slots."""

    mode: OrderMode
    slots: tuple[int, ...]

    def __post_init__(self):
        if len(self.slots) < 3:
            raise InputError("order spec needs at least three slots")

    def canonical_slots(self) -> tuple[int, ...]:
        """Cyclic specs are rotated to their lexicographically least
        rotation; linear specs are returned as given."""
        if self.mode is OrderMode.LINEAR:
            return self.slots
        rots = [self.slots[i:] + self.slots[:i] for i in range(len(self.slots))]
        return min(rots)


def _sequence_matches(seq: tuple[int, ...], pattern: tuple[int, ...],
                      mode: OrderMode) -> bool:
    if sorted(seq) != sorted(pattern):
        return False
    if mode is OrderMode.LINEAR:
        return seq == pattern or seq == pattern[::-1]
    n = len(pattern)
    for base in (pattern, pattern[::-1]):
        for i in range(n):
            if seq == base[i:] + base[:i]:
                return True
    return False


def order_of_hits(positions, slot_curves, spec: OrderSpec,
                  period: float | None = None,
                  delta: float = DELTA_ORDER) -> bool:
    """Check whether hits realize the prescribed meeting order.

    positions: per-slot coordinates along the transversal (line parameter,
    or angle when ``period`` is given).  slot_curves: curve index per slot.
    Both linear and cyclic prescriptions are matched up to full reversal,
    matching the two orders a transversal induces.
    """
    pos = np.asarray(positions, dtype=float)
    if period is not None:
        pos = np.mod(pos, period)
    gaps = []
    for i in range(len(pos)):
        for j in range(i + 1, len(pos)):
            g = abs(pos[i] - pos[j])
            if period is not None:
                g = min(g, period - g)
            gaps.append(g)
    if min(gaps) < delta:
        raise CoincidentHits(f"hit separation {min(gaps):.2e} below {delta:.0e}")
    order = np.argsort(pos)
    seq = tuple(slot_curves[k] for k in order)
    # the prescribed sequence is the slot curves in slot order
    pattern = tuple(slot_curves[k] for k in range(len(slot_curves)))
    return _sequence_matches(seq, pattern, spec.mode)
