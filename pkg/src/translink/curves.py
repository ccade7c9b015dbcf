"""Closed-curve representations: trigonometric polynomials, periodic splines
and homogeneous (projective) trigonometric paths, plus sphere lifts.

Parameters live on the unit circle R/Z.  An orientation flag +-1 fixes the
traversal direction used by every orientation-sensitive quantity; ``deriv``
is always the raw parametric derivative while ``tangent`` folds the flag in.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    CurveDegenerate,
    CurveHitsCenter,
    InputError,
    LiftFailure,
)
from .geometry import invert_point

EPS_REGULAR = 1e-6     # lower bound for |p'(t)| on the validation grid
DELTA_EMBED = 1e-6     # minimal distance between far-apart parameter pairs
DELTA_PARAM = 1e-2     # "far apart" threshold on the parameter circle
MIN_CENTER_DIST = 1e-3 # curve-to-center clearance required for inversion


def _as_param_array(t):
    return np.atleast_1d(np.asarray(t, dtype=float))


class ClosedCurve:
    """Base class for closed curves in R^3."""

    orientation: int = 1

    def eval(self, t) -> np.ndarray:
        raise NotImplementedError

    def deriv(self, t) -> np.ndarray:
        raise NotImplementedError

    def tangent(self, t) -> np.ndarray:
        """Derivative in the traversal direction fixed by the orientation."""
        return self.orientation * self.deriv(t)

    def reversed(self):
        raise NotImplementedError

    def samples(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        t = np.arange(n) / n
        return t, self.eval(t)

    def bbox(self, n: int = 512) -> tuple[np.ndarray, np.ndarray]:
        _, pts = self.samples(n)
        return pts.min(axis=0), pts.max(axis=0)

    def validate(self, n: int = 512) -> None:
        t, pts = self.samples(n)
        spd = np.linalg.norm(self.deriv(t), axis=-1)
        if spd.min() < EPS_REGULAR:
            raise CurveDegenerate(
                f"curve speed drops to {spd.min():.2e} (< {EPS_REGULAR:.0e})")
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.linalg.norm(diff, axis=-1)
        gap = np.abs(t[:, None] - t[None, :])
        gap = np.minimum(gap, 1.0 - gap)
        far = gap >= DELTA_PARAM
        if far.any() and dist[far].min() < DELTA_EMBED:
            raise CurveDegenerate("curve self-distance below embedding tolerance")

    def min_distance_to(self, other: "ClosedCurve", n: int = 512) -> float:
        _, a = self.samples(n)
        _, b = other.samples(n)
        d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=-1)
        return float(d.min())


@dataclass(frozen=True)
class FourierCurve(ClosedCurve):
    """Trigonometric polynomial p(t) = a0 + sum a_k cos(2 pi k t) + b_k sin(2 pi k t).

    ``coeffs`` has shape (3, 2D+1) with column order a0, a1, b1, a2, b2, ...
    """

    coeffs: np.ndarray
    orientation: int = 1

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 2 or c.shape[0] != 3 or c.shape[1] % 2 != 1:
            raise InputError("Fourier coefficients must have shape (3, 2D+1)")
        if self.orientation not in (-1, 1):
            raise InputError("orientation must be +1 or -1")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return (self.coeffs.shape[1] - 1) // 2

    def _basis(self, t, d: int) -> np.ndarray:
        t = _as_param_array(t)
        D = self.degree
        ks = np.arange(1, D + 1)
        ang = 2.0 * np.pi * t[..., None] * ks
        if d == 0:
            cols = [np.ones_like(t)[..., None], np.cos(ang), np.sin(ang)]
        else:
            w = 2.0 * np.pi * ks
            cols = [np.zeros_like(t)[..., None], -w * np.sin(ang), w * np.cos(ang)]
        out = np.empty(t.shape + (2 * D + 1,))
        out[..., 0] = cols[0][..., 0]
        out[..., 1::2] = cols[1]
        out[..., 2::2] = cols[2]
        return out

    def eval(self, t) -> np.ndarray:
        t_arr = _as_param_array(t)
        vals = self._basis(t_arr, 0) @ self.coeffs.T
        return vals[0] if np.isscalar(t) or np.ndim(t) == 0 else vals

    def deriv(self, t) -> np.ndarray:
        t_arr = _as_param_array(t)
        vals = self._basis(t_arr, 1) @ self.coeffs.T
        return vals[0] if np.isscalar(t) or np.ndim(t) == 0 else vals

    def reversed(self) -> "FourierCurve":
        return replace(self, orientation=-self.orientation)

    def transformed(self, scale: float = 1.0, offset=(0.0, 0.0, 0.0)) -> "FourierCurve":
        c = self.coeffs * scale
        c = c.copy()
        c[:, 0] += np.asarray(offset, dtype=float)
        return replace(self, coeffs=c)


@dataclass(frozen=True)
class PolylineCurve(ClosedCurve):
    """Periodic cubic-spline interpolant of an ordered closed point list."""

    points: np.ndarray
    orientation: int = 1
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 4:
            raise InputError("polyline needs at least 4 points of shape (N, 3)")
        if self.orientation not in (-1, 1):
            raise InputError("orientation must be +1 or -1")
        t = np.linspace(0.0, 1.0, pts.shape[0] + 1)
        closed = np.vstack([pts, pts[:1]])
        spl = CubicSpline(t, closed, bc_type="periodic", axis=0)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "_spline", spl)

    def eval(self, t) -> np.ndarray:
        t_arr = np.mod(_as_param_array(t), 1.0)
        vals = self._spline(t_arr)
        return vals[0] if np.isscalar(t) or np.ndim(t) == 0 else vals

    def deriv(self, t) -> np.ndarray:
        t_arr = np.mod(_as_param_array(t), 1.0)
        vals = self._spline(t_arr, 1)
        return vals[0] if np.isscalar(t) or np.ndim(t) == 0 else vals

    def reversed(self) -> "PolylineCurve":
        return PolylineCurve(points=self.points, orientation=-self.orientation)

    def transformed(self, scale: float = 1.0, offset=(0.0, 0.0, 0.0)) -> "PolylineCurve":
        return PolylineCurve(points=self.points * scale + np.asarray(offset, dtype=float),
                             orientation=self.orientation)


@dataclass(frozen=True)
class ProjectiveCurve:
    """Closed curve in RP^3 as a homogeneous trigonometric path.

    q(t) = a0 + sum a_k cos(pi k t) + b_k sin(pi k t), with coefficients of
    shape (4, 2K+1).  Frequencies are half-integral so that curves may close
    up to sign: using only even k gives q(t+1) = +q(t) (null-homologous),
    only odd k gives q(t+1) = -q(t) (the nontrivial class).  Mixing parities
    is rejected because the path would not close in RP^3.
    """

    coeffs: np.ndarray
    orientation: int = 1

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 2 or c.shape[0] != 4 or c.shape[1] % 2 != 1:
            raise InputError("homogeneous coefficients must have shape (4, 2K+1)")
        if self.orientation not in (-1, 1):
            raise InputError("orientation must be +1 or -1")
        K = (c.shape[1] - 1) // 2
        ks = np.arange(1, K + 1)
        mag = np.abs(c[:, 1::2]) + np.abs(c[:, 2::2])
        has_even = bool(np.abs(c[:, 0]).max() > 1e-14) or bool(
            (mag[:, ks % 2 == 0] > 1e-14).any()) if K else bool(np.abs(c[:, 0]).max() > 1e-14)
        has_odd = bool((mag[:, ks % 2 == 1] > 1e-14).any()) if K else False
        if has_even and has_odd:
            raise InputError("homogeneous path mixes closure parities")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "_parity", -1 if has_odd else 1)

    @property
    def parity(self) -> int:
        """+1 when q(t+1) = q(t), -1 when q(t+1) = -q(t)."""
        return self._parity

    @property
    def degree(self) -> int:
        return (self.coeffs.shape[1] - 1) // 2

    def _basis(self, t, d: int) -> np.ndarray:
        t = _as_param_array(t)
        K = self.degree
        ks = np.arange(1, K + 1)
        ang = np.pi * t[..., None] * ks
        if d == 0:
            cols = (np.ones_like(t)[..., None], np.cos(ang), np.sin(ang))
        else:
            w = np.pi * ks
            cols = (np.zeros_like(t)[..., None], -w * np.sin(ang), w * np.cos(ang))
        out = np.empty(t.shape + (2 * K + 1,))
        out[..., 0] = cols[0][..., 0]
        out[..., 1::2] = cols[1]
        out[..., 2::2] = cols[2]
        return out

    def heval(self, t) -> np.ndarray:
        t_arr = _as_param_array(t)
        vals = self._basis(t_arr, 0) @ self.coeffs.T
        return vals[0] if np.isscalar(t) or np.ndim(t) == 0 else vals

    def hderiv(self, t) -> np.ndarray:
        t_arr = _as_param_array(t)
        vals = self._basis(t_arr, 1) @ self.coeffs.T
        return vals[0] if np.isscalar(t) or np.ndim(t) == 0 else vals

    def unit_eval(self, t) -> np.ndarray:
        q = self.heval(t)
        return q / np.linalg.norm(q, axis=-1, keepdims=True)

    def unit_deriv(self, t) -> np.ndarray:
        q = self.heval(t)
        dq = self.hderiv(t)
        n = np.linalg.norm(q, axis=-1, keepdims=True)
        u = q / n
        return (dq - (dq * u).sum(axis=-1, keepdims=True) * u) / n

    def unit_tangent(self, t) -> np.ndarray:
        return self.orientation * self.unit_deriv(t)

    def reversed(self) -> "ProjectiveCurve":
        return replace(self, orientation=-self.orientation)

    def validate(self, n: int = 512) -> None:
        t = np.arange(n) / n
        q = self.heval(t)
        nq = np.linalg.norm(q, axis=-1)
        if nq.min() < 1e-8:
            raise CurveDegenerate("homogeneous path passes through the origin of R^4")
        spd = np.linalg.norm(self.unit_deriv(t), axis=-1)
        if spd.min() < EPS_REGULAR:
            raise CurveDegenerate(
                f"projective curve speed drops to {spd.min():.2e}")

    @classmethod
    def from_affine(cls, curve: ClosedCurve, n: int = 512,
                    orientation: int | None = None) -> "ProjectiveCurve":
        """Chart embedding (x, y, z) -> (x : y : z : 1) refit in the
        half-frequency basis (all frequencies even)."""
        t, pts = curve.samples(n)
        coeffs3 = fourier_fit(pts)
        D = (coeffs3.shape[1] - 1) // 2
        c = np.zeros((4, 2 * (2 * D) + 1))
        c[3, 0] = 1.0
        c[:3, 0] = coeffs3[:, 0]
        for k in range(1, D + 1):
            c[:3, 2 * (2 * k) - 1] = coeffs3[:, 2 * k - 1]
            c[:3, 2 * (2 * k)] = coeffs3[:, 2 * k]
        return cls(coeffs=c,
                   orientation=curve.orientation if orientation is None else orientation)


def great_circle_curve(u, v, orientation: int = 1) -> ProjectiveCurve:
    """Projective line through the plane span(u, v), parametrized as the
    half-period path cos(pi t) u + sin(pi t) v."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    c = np.zeros((4, 3))
    c[:, 1] = u
    c[:, 2] = v
    return ProjectiveCurve(coeffs=c, orientation=orientation)


@dataclass(frozen=True)
class SphereLift:
    """Full preimage of a curve in RP^3 under the double cover S^3 -> RP^3.

    ``loops`` holds closed vertex loops on S^3 (rows are unit 4-vectors,
    last vertex connects back to the first).  ``homology_class`` is 0 for
    null-homologous curves (two antipodal loops) and 1 otherwise (a single
    loop double-covering the curve).
    """

    loops: tuple[np.ndarray, ...]
    homology_class: int


def lift_to_sphere(curve, n: int = 2048) -> SphereLift:
    """Lift an affine or projective closed curve to S^3."""
    if isinstance(curve, ProjectiveCurve):
        t = np.arange(n) / n
        q = curve.heval(t)
        u = q / np.linalg.norm(q, axis=-1, keepdims=True)
        # enforce sign continuity sample to sample
        dots = (u[:-1] * u[1:]).sum(axis=-1)
        flips = np.cumprod(np.where(dots < 0.0, -1.0, 1.0))
        u[1:] *= flips[:, None]
        step = (u[:-1] * u[1:]).sum(axis=-1)
        if n > 1 and step.min() < np.cos(0.5):
            raise LiftFailure("lift sampling too coarse for sign continuity")
        if float(np.dot(u[-1], curve.parity * u[0])) <= 0.0:
            raise LiftFailure("lift does not close on its stated parity")
        if curve.parity == 1:
            return SphereLift(loops=(u, -u), homology_class=0)
        return SphereLift(loops=(np.vstack([u, -u]),), homology_class=1)
    t = np.arange(n) / n
    p = curve.eval(t)
    q = np.concatenate([p, np.ones((n, 1))], axis=1)
    u = q / np.linalg.norm(q, axis=-1, keepdims=True)
    return SphereLift(loops=(u, -u), homology_class=0)


def fourier_fit(samples: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Fit a (d, M) sample matrix taken at t = j/M with a trigonometric
    polynomial, truncating trailing negligible modes.  Returns coefficients
    shaped (d, 2D+1) in the FourierCurve column order."""
    y = np.asarray(samples, dtype=float)
    if y.ndim != 2:
        raise InputError("samples must be (M, d)")
    M, d = y.shape
    spec = np.fft.rfft(y, axis=0)
    kmax = spec.shape[0] - 1
    a0 = spec[0].real / M
    acos = 2.0 * spec[1:].real / M
    bsin = -2.0 * spec[1:].imag / M
    if M % 2 == 0:
        acos[-1] *= 0.5  # Nyquist mode appears once
    mags = np.abs(acos) + np.abs(bsin)
    scale = max(float(np.abs(y).max()), 1.0)
    keep = kmax
    while keep > 1 and mags[keep - 1].max() < tol * scale:
        keep -= 1
    coeffs = np.zeros((d, 2 * keep + 1))
    coeffs[:, 0] = a0
    coeffs[:, 1::2] = acos[:keep].T
    coeffs[:, 2::2] = bsin[:keep].T
    return coeffs


def invert_curve(curve: ClosedCurve, center, radius: float = 1.0,
                 n: int = 1024) -> FourierCurve:
    """Sphere inversion of a closed curve, refit as a trigonometric
    polynomial.  Raises when the curve approaches the inversion center."""
    center = np.asarray(center, dtype=float)
    t, pts = curve.samples(n)
    clearance = np.linalg.norm(pts - center, axis=1).min()
    if clearance < MIN_CENTER_DIST:
        raise CurveHitsCenter(
            f"curve passes {clearance:.2e} from the inversion center")
    inv = np.stack([invert_point(p, center, radius) for p in pts])
    return FourierCurve(coeffs=fourier_fit(inv), orientation=curve.orientation)


def perturb_curve(curve, magnitude: float, rng: np.random.Generator):
    """Displace a curve by a random degree-2 trigonometric field of the
    given maximum amplitude.  Fourier and projective curves stay in their
    representation; polylines are displaced pointwise."""
    if isinstance(curve, ProjectiveCurve):
        K = curve.degree
        c = curve.coeffs.copy()
        scale = np.abs(curve.coeffs).max()
        noise = rng.standard_normal(c.shape)
        # zero out modes of the wrong parity so the closure class survives
        ks = np.arange(1, K + 1)
        bad = (ks % 2 == 1) if curve.parity == 1 else (ks % 2 == 0)
        noise[:, 1::2][:, bad] = 0.0
        noise[:, 2::2][:, bad] = 0.0
        if curve.parity == -1:
            noise[:, 0] = 0.0
        c = c + magnitude * scale * noise / max(np.abs(noise).max(), 1e-12)
        return replace(curve, coeffs=c)
    a = rng.uniform(-1.0, 1.0, size=(3, 5))
    bump = FourierCurve(coeffs=a)
    grid = np.arange(256) / 256
    amp = np.linalg.norm(bump.eval(grid), axis=1).max()
    a = a * (magnitude / max(amp, 1e-12))
    if isinstance(curve, FourierCurve):
        D = curve.degree
        width = max(2 * D + 1, 5)
        c = np.zeros((3, width))
        c[:, : 2 * D + 1] = curve.coeffs
        c[:, :5] += a
        return FourierCurve(coeffs=c, orientation=curve.orientation)
    bump = FourierCurve(coeffs=a)
    t = np.linspace(0.0, 1.0, curve.points.shape[0], endpoint=False)
    return PolylineCurve(points=curve.points + bump.eval(t),
                         orientation=curve.orientation)
