"""Linking numbers: Gauss integral, diagram crossing count, and the RP^3
variant computed through the double cover S^3 -> RP^3.

Conventions.  lk(A, B) is the Gauss integral
(1/4 pi) oint oint det[A'(s), B'(t), A(s) - B(t)] / |A - B|^3 ds dt,
which for the diagram count makes the sign of a crossing equal to the sign
of det[A', B', A - B] at the crossing.  The RP^3 value is half the linking
number of the full preimages on S^3, evaluated after a stereographic
projection from a pole away from both lifts.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .curves import ClosedCurve, ProjectiveCurve, lift_to_sphere
from .errors import (
    CurvesTooClose,
    InputError,
    NoGenericDirectionFound,
    PoleOnCurve,
    QuadratureNotConverged,
)
from .geometry import Line3, ProjectiveLine, unit

D_MIN = 1e-3              # minimal allowed distance between curve samples
QUAD_TOL = 1e-6           # target agreement between refinement levels
QUAD_BUDGET = 2 ** 24     # integrand evaluation budget
ROUND_TOL = 1e-6          # |raw - rounded| bound enforced on results

# Global sign pins, fixed once against the Gauss integral (see tests):
# POLY_SIGN orients the solid-angle formula for polygon linking,
# STEREO_FRAME_SIGN orients the stereographic frame so that chart-embedded
# scenes reproduce their affine linking numbers, and LINE_PAIR_SIGN makes
# the closed-form skew-line formula agree with lk_rp3 on great circles.
POLY_SIGN = -1.0
STEREO_FRAME_SIGN = 1.0
LINE_PAIR_SIGN = -1.0


def _min_pair_distance(a: np.ndarray, b: np.ndarray) -> float:
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)
    return float(d.min())


def lk_gauss(A: ClosedCurve, B: ClosedCurve, tol: float = QUAD_TOL,
             budget: int = QUAD_BUDGET, d_min: float = D_MIN) -> float:
    """Gauss linking integral by trapezoid refinement on the parameter torus.

    Both curves are smooth and periodic, so the rule converges spectrally;
    levels double until two successive values agree to tol/4.
    """
    _, sa = A.samples(512)
    _, sb = B.samples(512)
    if _min_pair_distance(sa, sb) < d_min:
        raise CurvesTooClose(
            f"curve separation below d_min={d_min:g}")
    n = 64
    prev = None
    spent = 0
    while True:
        if spent + n * n > budget:
            raise QuadratureNotConverged(
                f"budget {budget} exhausted at level n={n}")
        t = np.arange(n) / n
        pa, va = A.eval(t), A.tangent(t)
        pb, vb = B.eval(t), B.tangent(t)
        total = 0.0
        block = max(1, min(n, 2 ** 22 // n))
        for i0 in range(0, n, block):
            pa_b = pa[i0:i0 + block]
            va_b = va[i0:i0 + block]
            diff = pa_b[:, None, :] - pb[None, :, :]
            r = np.linalg.norm(diff, axis=-1)
            cr = np.cross(va_b[:, None, :], vb[None, :, :])
            total += float(((cr * diff).sum(axis=-1) / r ** 3).sum())
        spent += n * n
        val = total / (4.0 * np.pi * n * n)
        if prev is not None and abs(val - prev) < 0.25 * tol:
            return val
        prev = val
        n *= 2


def polyline_linking(P: np.ndarray, Q: np.ndarray) -> float:
    """Exact Gauss linking number of two disjoint closed polygons.

    Sums the signed solid angles swept by the Gauss map over all segment
    pairs (the van Oosterom-Strackee triangle formula applied to each
    spherical quadrilateral).  Exact up to roundoff for closed polygons.
    """
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    total = 0.0
    nq = Q.shape[0]
    q0 = Q
    q1 = np.roll(Q, -1, axis=0)
    block = max(1, 2 ** 21 // nq)
    n = P.shape[0]
    for i0 in range(0, n, block):
        p0 = P[i0:i0 + block]
        p1 = np.roll(P, -1, axis=0)[i0:i0 + block]
        u00 = p0[:, None, :] - q0[None, :, :]
        u10 = p1[:, None, :] - q0[None, :, :]
        u11 = p1[:, None, :] - q1[None, :, :]
        u01 = p0[:, None, :] - q1[None, :, :]
        for u in (u00, u10, u11, u01):
            u /= np.linalg.norm(u, axis=-1, keepdims=True)
        total += _quad_solid_angle(u00, u10, u11, u01)
    return POLY_SIGN * total / (4.0 * np.pi)


def _tri_solid_angle(v1, v2, v3) -> np.ndarray:
    num = np.einsum("...i,...i->...", v1, np.cross(v2, v3))
    den = (1.0 + np.einsum("...i,...i->...", v1, v2)
           + np.einsum("...i,...i->...", v2, v3)
           + np.einsum("...i,...i->...", v3, v1))
    return 2.0 * np.arctan2(num, den)


def _quad_solid_angle(u00, u10, u11, u01) -> float:
    s = _tri_solid_angle(u00, u10, u11) + _tri_solid_angle(u00, u11, u01)
    return float(s.sum())


def lk_crossing(A: ClosedCurve, B: ClosedCurve, n: int = 1024,
                direction=None, seed: int = 0, retries: int = 20) -> float:
    """Linking number as half the signed count of inter-curve crossings of
    a generic planar projection.  Retries with fresh seeded directions when
    a crossing fails the genericity guards."""
    rng = np.random.default_rng(seed)
    _, pa = A.samples(n)
    _, pb = B.samples(n)
    ta = A.tangent(np.arange(n) / n)
    tb = B.tangent(np.arange(n) / n)
    tried = 0
    while tried <= retries:
        if direction is not None and tried == 0:
            v = unit(np.asarray(direction, dtype=float))
        else:
            v = unit(rng.standard_normal(3))
        tried += 1
        try:
            return _crossing_sum(pa, pb, ta, tb, v)
        except NoGenericDirectionFound:
            if direction is not None and tried == 1:
                continue
            continue
    raise NoGenericDirectionFound(
        f"no generic projection direction after {retries} retries")


def _plane_basis(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    k = int(np.argmin(np.abs(v)))
    e = np.zeros(3)
    e[k] = 1.0
    u1 = unit(np.cross(e, v))
    u2 = np.cross(v, u1)
    return u1, u2


def _crossing_sum(pa, pb, ta, tb, v) -> float:
    u1, u2 = _plane_basis(v)
    a2 = np.stack([pa @ u1, pa @ u2], axis=1)
    b2 = np.stack([pb @ u1, pb @ u2], axis=1)
    n, m = a2.shape[0], b2.shape[0]
    a2n = np.roll(a2, -1, axis=0)
    b2n = np.roll(b2, -1, axis=0)
    da2 = a2n - a2
    db2 = b2n - b2
    total = 0.0
    eps_end = 1e-9
    block = max(1, 2 ** 20 // m)
    pa_n = np.roll(pa, -1, axis=0)
    pb_n = np.roll(pb, -1, axis=0)
    for i0 in range(0, n, block):
        sl = slice(i0, min(i0 + block, n))
        lo_a = np.minimum(a2[sl], a2n[sl])[:, None, :]
        hi_a = np.maximum(a2[sl], a2n[sl])[:, None, :]
        lo_b = np.minimum(b2, b2n)[None, :, :]
        hi_b = np.maximum(b2, b2n)[None, :, :]
        overlap = np.all((lo_a <= hi_b) & (lo_b <= hi_a), axis=-1)
        ii, jj = np.nonzero(overlap)
        if ii.size == 0:
            continue
        ii = ii + i0
        d1 = da2[ii]
        d2 = db2[jj]
        rel = b2[jj] - a2[ii]
        denom = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        scale = (np.linalg.norm(d1, axis=1) * np.linalg.norm(d2, axis=1))
        good = np.abs(denom) > 1e-12
        s = np.empty_like(denom)
        u = np.empty_like(denom)
        s[good] = (rel[good, 0] * d2[good, 1] - rel[good, 1] * d2[good, 0]) / denom[good]
        u[good] = (rel[good, 0] * d1[good, 1] - rel[good, 1] * d1[good, 0]) / denom[good]
        hit = good & (s > 0.0) & (s < 1.0) & (u > 0.0) & (u < 1.0)
        if np.any(hit & (np.abs(denom) < 1e-9 * scale)):
            raise NoGenericDirectionFound("near-tangential crossing")
        if np.any(hit & ((np.minimum(np.minimum(s, 1 - s), np.minimum(u, 1 - u)))
                         < eps_end)):
            raise NoGenericDirectionFound("crossing at a segment endpoint")
        if not hit.any():
            continue
        ih, jh = ii[hit], jj[hit]
        sh, uh = s[hit], u[hit]
        ap = pa[ih] + sh[:, None] * (pa_n[ih] - pa[ih])
        bp = pb[jh] + uh[:, None] * (pb_n[jh] - pb[jh])
        da3 = ta[ih]
        db3 = tb[jh]
        sign = np.sign(np.einsum("ij,ij->i", np.cross(da3, db3), ap - bp))
        total += float(sign.sum())
    val = 0.5 * total
    if abs(val - round(val)) > 1e-9:
        raise NoGenericDirectionFound("crossing signs did not sum to an integer")
    return val


def _stereo_project(loops, pole: np.ndarray):
    """Stereographic projection of S^3 loops from ``pole`` into R^3 using a
    deterministic frame of fixed handedness."""
    basis = [pole]
    for k in np.argsort(np.abs(pole)):
        e = np.zeros(4)
        e[k] = 1.0
        w = e - sum(np.dot(e, b) * b for b in basis)
        nw = np.linalg.norm(w)
        if nw > 1e-6:
            basis.append(w / nw)
        if len(basis) == 4:
            break
    frame = np.stack(basis[1:])
    if np.linalg.det(np.vstack([pole[None, :], frame])) * STEREO_FRAME_SIGN < 0.0:
        frame = frame[[1, 0, 2]]
    out = []
    for q in loops:
        denom = 1.0 - q @ pole
        if denom.min() < 1e-9:
            raise PoleOnCurve("pole touches a lifted loop")
        out.append((q @ frame.T) / denom[:, None])
    return out


def lk_rp3(A, B, n: int = 2048, seed: int = 0, retries: int = 50) -> float:
    """Linking number in RP^3 via the double cover.

    Both curves are lifted to their full S^3 preimages; a stereographic
    projection from a pole clear of the lifts maps them to R^3 where the
    exact polygon formula applies, and the result is halved.
    """
    la = lift_to_sphere(A, n=n)
    lb = lift_to_sphere(B, n=n)
    all_pts = np.vstack([*la.loops, *lb.loops])
    rng = np.random.default_rng(seed)
    pole = None
    for _ in range(retries):
        cand = unit(rng.standard_normal(4))
        if np.abs(all_pts @ cand).max() < 1.0 - 1e-4:
            pole = cand
            break
    if pole is None:
        raise PoleOnCurve("no stereographic pole clear of the lifted curves")
    proj = _stereo_project([*la.loops, *lb.loops], pole)
    pa = proj[: len(la.loops)]
    pb = proj[len(la.loops):]
    total = 0.0
    for x in pa:
        for y in pb:
            total += polyline_linking(x, y)
    return 0.5 * total


def tangent_pline(q: np.ndarray, dq: np.ndarray) -> ProjectiveLine:
    """Oriented projective line through a homogeneous point in the
    direction of a homogeneous velocity."""
    return ProjectiveLine.from_hpoints(q, np.asarray(q, dtype=float)
                                       + np.asarray(dq, dtype=float))


def affine_pline(p: np.ndarray, v: np.ndarray) -> ProjectiveLine:
    """Projective closure of the oriented affine line through p along v."""
    q = np.array([p[0], p[1], p[2], 1.0])
    dq = np.array([v[0], v[1], v[2], 0.0])
    return tangent_pline(q, dq)


def lk_line_pair(l1: ProjectiveLine, l2: ProjectiveLine) -> float:
    """Closed-form linking number (+-1/2) of two disjoint oriented lines in
    RP^3: the sign of the 4x4 determinant of their spanning bases."""
    det = float(np.linalg.det(np.stack([l1.a, l1.b, l2.a, l2.b])))
    if abs(det) < 1e-12:
        raise InputError("lines intersect; linking number undefined")
    return 0.5 * LINE_PAIR_SIGN * float(np.sign(det))


def round_linking(value: float, projective: bool, tol: float = ROUND_TOL) -> Fraction:
    """Round a raw linking value to the nearest (half-)integer, enforcing
    the residual bound."""
    doubled = 2.0 * value if projective else value
    nearest = round(doubled)
    if abs(doubled - nearest) > (2.0 * tol if projective else tol):
        raise QuadratureNotConverged(
            f"linking value {value!r} too far from a lattice value")
    return Fraction(nearest, 2) if projective else Fraction(nearest)


@dataclass(frozen=True)
class LinkingMatrix:
    """Pairwise linking numbers of a scene, stored exactly."""

    values: tuple[tuple[Fraction, ...], ...]
    raw: np.ndarray
    projective: bool

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return self.values[i][j]

    def as_floats(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.values])


def linking_matrix(curves, projective: bool | None = None,
                   crosscheck: bool = False) -> LinkingMatrix:
    """Pairwise linking numbers; Gauss integral for affine scenes, double
    cover for projective ones.  ``crosscheck`` also runs the crossing count
    on affine pairs and enforces agreement."""
    if projective is None:
        projective = any(isinstance(c, ProjectiveCurve) for c in curves)
    m = len(curves)
    raw = np.zeros((m, m))
    vals = [[Fraction(0)] * m for _ in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            if projective:
                r = lk_rp3(curves[i], curves[j])
            else:
                r = lk_gauss(curves[i], curves[j])
                if crosscheck:
                    c = lk_crossing(curves[i], curves[j])
                    if abs(r - c) > 1e-6:
                        raise QuadratureNotConverged(
                            f"gauss/crossing disagree: {r} vs {c}")
            raw[i, j] = raw[j, i] = r
            f = round_linking(r, projective)
            vals[i][j] = vals[j][i] = f
    return LinkingMatrix(values=tuple(tuple(row) for row in vals),
                         raw=raw, projective=projective)
