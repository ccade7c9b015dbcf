"""Deterministic scene generators with known linking data and outcomes.

Every constructor is pure: the same arguments always yield the same
coefficient arrays, so regenerating a fixture is bit-identical.  Each
fixture records its expected rounded linking matrix and a dictionary of
expected solver outcomes.  Expectation keys follow the CLI spec syntax
with 1-based slots, e.g. ``"count:linear:1,2,3,4"`` or
``"signature:cyclic:1,2,3,4"``.  Each expectation carries the basis it
rests on:

- ``"analytic"``: forced by the construction itself,
- ``"classical"``: a known value for a classical configuration,
- ``"oracle"``: confirmed by an independent dense-scan computation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .curves import (
    ClosedCurve,
    FourierCurve,
    ProjectiveCurve,
    great_circle_curve,
    perturb_curve,
)
from .errors import InputError, SeparationTooSmall
from .linking import LinkingMatrix, linking_matrix

GAP_SAMPLES = 512          # sampling density for pairwise-distance checks
OFF_QUADRIC_ANGLES = (-0.35, 0.35)  # two-plane rotation pulling C4 off
HOPF_TILT_1 = ((0.2, 1.0, 0.1), 1.45)
HOPF_TILT_2 = ((0.1, 1.0, -0.15), -1.38)
PAIR_OFFSET_DIR = (0.995234, 0.082936, 0.049762)   # unit (6, 0.5, 0.3)
CHAIN_CLUSTERS = ((0.45, 0.12, np.deg2rad(45.0)),
                  (0.42, 0.13, np.deg2rad(50.0)),
                  (0.48, 0.11, np.deg2rad(40.0)))
PINCH_TILT = ((1.0, 2.0, 3.0), 0.7)

# Orientation pins, fixed once so the expected linking entries hold with
# their stated signs; probed by direct computation when first frozen.
HOPF_SECOND_ORIENT = -1
CHAIN_EVEN_ORIENT = -1
TORUS_CABLE_ORIENT = -1
CHAIN3_ORIENT_2 = -1
CHAIN3_ORIENT_3 = 1


@dataclass(frozen=True)
class Expectation:
    """A single expected outcome and the basis it rests on."""

    value: object
    basis: str

    def __post_init__(self):
        if self.basis not in ("analytic", "classical", "oracle"):
            raise InputError(f"unknown expectation basis {self.basis!r}")


@dataclass(frozen=True)
class Fixture:
    """A named scene with its expected linking matrix and outcomes."""

    name: str
    curves: tuple
    projective: bool
    linking: tuple[tuple[Fraction, ...], ...]
    expect: dict
    notes: str = ""

    def linking_floats(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.linking])

    def measured_linking(self) -> LinkingMatrix:
        return linking_matrix(self.curves, projective=self.projective)


def _frac_matrix(n: int, entries: dict, default=Fraction(0)):
    """Symmetric Fraction matrix from an {(i, j): value} dictionary."""
    m = [[Fraction(default)] * n for _ in range(n)]
    for (i, j), v in entries.items():
        m[i][j] = m[j][i] = Fraction(v)
    for i in range(n):
        m[i][i] = Fraction(0)
    return tuple(tuple(row) for row in m)


def _circle(center, u, v, orientation: int = 1) -> FourierCurve:
    """Round closed curve center + cos(2 pi t) u + sin(2 pi t) v."""
    c = np.zeros((3, 3))
    c[:, 0] = np.asarray(center, dtype=float)
    c[:, 1] = np.asarray(u, dtype=float)
    c[:, 2] = np.asarray(v, dtype=float)
    return FourierCurve(coeffs=c, orientation=orientation)


def _wavy_circle(center, u, v, w, amp: float, freq: int = 2) -> FourierCurve:
    """Round circle in span(u, v) with a transverse wave along w."""
    c = np.zeros((3, 2 * freq + 1))
    c[:, 0] = np.asarray(center, dtype=float)
    c[:, 1] = np.asarray(u, dtype=float)
    c[:, 2] = np.asarray(v, dtype=float)
    c[:, 2 * freq] += amp * np.asarray(w, dtype=float)
    return FourierCurve(coeffs=c)


def _rot(axis, ang: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    K = np.array([[0.0, -axis[2], axis[1]],
                  [axis[2], 0.0, -axis[0]],
                  [-axis[1], axis[0], 0.0]])
    return np.eye(3) + np.sin(ang) * K + (1.0 - np.cos(ang)) * (K @ K)


def _rot4(i: int, j: int, ang: float) -> np.ndarray:
    R = np.eye(4)
    R[i, i] = R[j, j] = np.cos(ang)
    R[i, j] = -np.sin(ang)
    R[j, i] = np.sin(ang)
    return R


# -- four-line configurations -------------------------------------------------

def _ruling(alpha: float, orientation: int = 1) -> ProjectiveCurve:
    """Line of the first ruling family of x^2 + y^2 - z^2 = 1, through
    (cos a, sin a, 0) with direction (-sin a, cos a, 1)."""
    p = np.array([np.cos(alpha), np.sin(alpha), 0.0])
    d = np.array([-np.sin(alpha), np.cos(alpha), 1.0])
    u = np.append(p, 1.0)
    v = np.append(d, 0.0)
    u = u / np.linalg.norm(u)
    v = v - (v @ u) * u
    v = v / np.linalg.norm(v)
    return great_circle_curve(u, v, orientation=orientation)


def _line_through_points(pa, pb, orientation: int = 1) -> ProjectiveCurve:
    u = np.append(np.asarray(pa, dtype=float), 1.0)
    v = np.append(np.asarray(pb, dtype=float), 1.0)
    u = u / np.linalg.norm(u)
    v = v - (v @ u) * u
    v = v / np.linalg.norm(v)
    return great_circle_curve(u, v, orientation=orientation)


def _second_ruling_point(beta: float, t: float) -> np.ndarray:
    """Point on the second ruling family at line parameter t."""
    return np.array([np.cos(beta) + t * np.sin(beta),
                     np.sin(beta) - t * np.cos(beta), t])


def _crossing_param(beta: float, alpha: float) -> float:
    """Parameter on the second-family line M(beta) where it meets the
    first-family line at angle alpha (the two rulings always meet)."""
    p1 = np.array([np.cos(alpha), np.sin(alpha), 0.0])
    d1 = np.array([-np.sin(alpha), np.cos(alpha), 1.0])
    p2 = np.array([np.cos(beta), np.sin(beta), 0.0])
    d2 = np.array([np.sin(beta), -np.cos(beta), 1.0])
    A = np.stack([d2, -d1], axis=1)
    rhs = p1 - p2
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    if np.linalg.norm(A @ sol - rhs) > 1e-9:
        raise InputError("ruling lines fail to meet; bad angle pair")
    return float(sol[0])


def _arc_midpoints(beta: float) -> dict:
    """Midpoints of the three arcs cut on M(beta) by the three rulings,
    keyed by the unordered pair of rulings bounding the arc."""
    alphas = (0.0, 2.0 * np.pi / 3.0, 4.0 * np.pi / 3.0)
    ts = [_crossing_param(beta, a) for a in alphas]
    order = np.argsort(ts)
    srt = np.sort(ts)
    far = 2.0 * max(abs(srt[0]), abs(srt[2])) + 3.0
    return {
        frozenset((order[0], order[1])): 0.5 * (srt[0] + srt[1]),
        frozenset((order[1], order[2])): 0.5 * (srt[1] + srt[2]),
        frozenset((order[2], order[0])): far,
    }


def quadric_crossings(curve: ProjectiveCurve) -> int:
    """Number of real intersections of a projective line with the quadric
    x^2 + y^2 = z^2 + w^2 (0 or 2; tangency counts as 0 by the margin)."""
    Q = np.diag([1.0, 1.0, -1.0, -1.0])
    u = curve.coeffs[:, 1]
    v = curve.coeffs[:, 2]
    qu = float(u @ Q @ u)
    qv = float(v @ Q @ v)
    buv = float(u @ Q @ v)
    # Q(cos t u + sin t v) = (qu+qv)/2 + cos 2t (qu-qv)/2 + sin 2t buv
    amp = np.hypot(0.5 * (qu - qv), buv)
    off = 0.5 * (qu + qv)
    return 2 if amp > abs(off) else 0


def make_four_lines(variant: str) -> Fixture:
    """Four disjoint projective lines with prescribed pairwise linking.

    ``"positive"``: three rulings plus a fourth ruling pulled off the
    quadric by two rotations so it misses the surface; all pairs link
    +1/2 and no line meets all four.  ``"negative"``: the mirror image
    (all pairs -1/2).  ``"amphicheiral"``: the fourth line crosses the
    quadric in the two annulus components adjacent to the third ruling,
    so lk(C3, C4) = -1/2 while the other pairs stay +1/2; exactly two
    lines meet all four, one per achievable cyclic order.
    """
    alphas = (0.0, 2.0 * np.pi / 3.0, 4.0 * np.pi / 3.0)
    rulings = [_ruling(a) for a in alphas]
    if variant in ("positive", "negative"):
        th1, th2 = OFF_QUADRIC_ANGLES
        move = _rot4(0, 2, th1) @ _rot4(1, 3, th2)
        c4 = _ruling(np.pi / 3.0)
        coeffs = c4.coeffs.copy()
        coeffs[:, 1] = move @ coeffs[:, 1]
        coeffs[:, 2] = move @ coeffs[:, 2]
        c4 = replace(c4, coeffs=coeffs)
        if quadric_crossings(c4) != 0:
            raise InputError("moved line still crosses the quadric")
        curves = rulings + [c4]
        sign = Fraction(1, 2)
        if variant == "negative":
            mirror = np.diag([1.0, 1.0, -1.0, 1.0])
            flipped = []
            for c in curves:
                cf = c.coeffs.copy()
                cf[:, 1] = mirror @ cf[:, 1]
                cf[:, 2] = mirror @ cf[:, 2]
                flipped.append(replace(c, coeffs=cf))
            curves = flipped
            sign = -sign
        linking = _frac_matrix(4, {(i, j): sign
                                   for i in range(4) for j in range(i + 1, 4)})
        expect = {
            "count": Expectation(0, "classical"),
            "signature:cyclic:1,2,3,4": Expectation(0, "analytic"),
            "signature:cyclic:1,2,4,3": Expectation(0, "analytic"),
            "signature:cyclic:1,3,2,4": Expectation(0, "analytic"),
        }
        return Fixture(name=f"fourlines-{variant[:3]}", curves=tuple(curves),
                       projective=True, linking=linking, expect=expect,
                       notes="four same-ruling lines, one pulled off the "
                             "quadric so it misses the surface")

    if variant != "amphicheiral":
        raise InputError(f"unknown four-line variant {variant!r}")
    beta_a, beta_b = 0.9, 2.1
    xa = _second_ruling_point(beta_a, _arc_midpoints(beta_a)[frozenset((1, 2))])
    xb = _second_ruling_point(beta_b, _arc_midpoints(beta_b)[frozenset((0, 2))])
    c4 = _line_through_points(xa, xb)
    curves = tuple(rulings + [c4])
    linking = _frac_matrix(4, {(0, 1): Fraction(1, 2), (0, 2): Fraction(1, 2),
                               (0, 3): Fraction(1, 2), (1, 2): Fraction(1, 2),
                               (1, 3): Fraction(1, 2), (2, 3): Fraction(-1, 2)})
    expect = {
        "count": Expectation(2, "classical"),
        "count:cyclic:1,2,3,4": Expectation(1, "classical"),
        "count:cyclic:1,2,4,3": Expectation(1, "classical"),
        "signature:cyclic:1,2,3,4": Expectation(-1, "classical"),
        "signature:cyclic:1,2,4,3": Expectation(-1, "classical"),
    }
    return Fixture(name="amphicheiral", curves=curves, projective=True,
                   linking=linking, expect=expect,
                   notes="fourth line crosses the quadric in the two "
                         "annulus components adjacent to the third ruling")


# -- Hopf pairs ---------------------------------------------------------------

def _hopf_pair(tilt) -> tuple[FourierCurve, FourierCurve]:
    """One positively linked round-circle pair, rotated by ``tilt``."""
    axis, ang = tilt
    R = _rot(axis, ang)
    ex, ey, ez = np.eye(3)
    a = _circle([0.0, 0.0, 0.0], R @ ex, R @ ey)
    b = _circle(R @ ex, R @ ex, R @ ez, orientation=HOPF_SECOND_ORIENT)
    return a, b


def make_hopf_pairs(n_pairs: int, separation: float | None = None) -> Fixture:
    """``n_pairs`` split Hopf pairs (each pair links +1, cross-pair
    linking 0).

    One pair sits near the origin; two pairs adds a second far station
    ``separation`` away (default 6); three pairs places the stations
    around a large horizontal circle of radius ``separation`` (default
    5) so that one round circle threads all three pairs in cyclic order
    (the circle-transversal test scene).
    """
    if n_pairs not in (1, 2, 3):
        raise InputError("n_pairs must be 1, 2 or 3")
    if n_pairs == 3:
        separation = 5.0 if separation is None else separation
        if separation < 3.0:
            raise SeparationTooSmall("stations overlap below radius 3")
        curves = _chained_pairs(separation)
        linking = _frac_matrix(6, {(0, 1): 1, (2, 3): 1, (4, 5): 1})
        expect = {
            "count:cyclic:1,2,3,4,5,6": Expectation(3, "oracle"),
            "signature:cyclic:1,2,3,4,5,6": Expectation(1, "analytic"),
        }
        return Fixture(name="hopf3", curves=tuple(curves), projective=False,
                       linking=linking, expect=expect,
                       notes="three pairs threaded by one round circle")
    pair1 = _hopf_pair(HOPF_TILT_1)
    if n_pairs == 1:
        linking = _frac_matrix(2, {(0, 1): 1})
        expect = {"lk:1,2": Expectation(1, "classical")}
        return Fixture(name="hopf1", curves=pair1, projective=False,
                       linking=linking, expect=expect)
    separation = 6.0 if separation is None else separation
    if separation < 4.0:
        raise SeparationTooSmall("stations overlap below separation 4")
    off = separation * np.asarray(PAIR_OFFSET_DIR)
    pair2 = tuple(c.transformed(offset=off) for c in _hopf_pair(HOPF_TILT_2))
    curves = pair1 + pair2
    linking = _frac_matrix(4, {(0, 1): 1, (2, 3): 1})
    expect = {
        "count:linear:1,2,3,4": Expectation(1, "oracle"),
        "signature:linear:1,2,3,4": Expectation(1, "analytic"),
    }
    return Fixture(name="hopf2", curves=curves, projective=False,
                   linking=linking, expect=expect,
                   notes="two split pairs; one line meets them in order")


def _chained_pairs(radius: float) -> list[FourierCurve]:
    """Three Hopf pairs whose stations sit on a horizontal circle of the
    given radius; that circle meets every curve once, in slot order."""
    curves = []
    for k, (r, beta, phi) in enumerate(CHAIN_CLUSTERS):
        A = 2.0 * np.pi * k / 3.0
        a1 = radius * np.array([np.cos(A - beta), np.sin(A - beta), 0.0])
        a2 = radius * np.array([np.cos(A + beta), np.sin(A + beta), 0.0])
        rhat = np.array([np.cos(A - beta), np.sin(A - beta), 0.0])
        that = np.array([-np.sin(A - beta), np.cos(A - beta), 0.0])
        zhat = np.array([0.0, 0.0, 1.0])
        c1 = a1 + r * (np.cos(phi) * rhat + np.sin(phi) * zhat)
        odd = _circle(c1, r * rhat, r * zhat)
        u = (c1 - a2) / np.linalg.norm(c1 - a2)
        v = that - (that @ u) * u
        v = v / np.linalg.norm(v)
        m = 0.5 * (a2 + c1)
        r2 = 0.5 * np.linalg.norm(a2 - c1)
        even = _circle(m, r2 * u, r2 * v, orientation=CHAIN_EVEN_ORIENT)
        curves.extend([odd, even])
    return curves


def chained_marks() -> np.ndarray:
    """Curve parameters where the station circle of the three-pair scene
    meets the six curves (an exact transversal root, any radius)."""
    marks = []
    for (r, beta, phi) in CHAIN_CLUSTERS:
        marks.append(((np.pi + phi) / (2.0 * np.pi)) % 1.0)
        marks.append(0.5)
    return np.array(marks)


# -- torus links and knots ----------------------------------------------------

def make_torus_link(n: int) -> Fixture:
    """Two-component link of a wavy core circle and a cable winding
    ``n`` times around it; lk = n.  Both components are non-planar so
    repeated-slot secants can be regular."""
    if not 1 <= n <= 3:
        raise InputError("winding must be between 1 and 3")
    R, r = 2.0, 0.5
    ex, ey, ez = np.eye(3)
    core = _wavy_circle([0.0, 0.0, 0.0], R * ex, R * ey, ez, 0.18)
    # cable around the planar core circle: exact trigonometric polynomial
    # (R + r cos 2 pi n t)(cos, sin)(2 pi t), z = r sin 2 pi n t + wobble
    c = np.zeros((3, 2 * (n + 1) + 1))
    c[0, 2 * 1 - 1] = R                     # a_1 x
    c[1, 2 * 1] = R                         # b_1 y
    # cos(2 pi n t) cos(2 pi t) = (cos 2 pi (n-1) t + cos 2 pi (n+1) t)/2
    km, kp = n - 1, n + 1
    if km == 0:
        c[0, 0] += 0.5 * r
    else:
        c[0, 2 * km - 1] += 0.5 * r
    c[0, 2 * kp - 1] += 0.5 * r
    # cos(2 pi n t) sin(2 pi t) = (sin 2 pi (n+1) t - sin 2 pi (n-1) t)/2
    c[1, 2 * kp] += 0.5 * r
    if km != 0:
        c[1, 2 * km] -= 0.5 * r
    c[2, 2 * n] = r                         # b_n z
    c[2, 2 * (n + 1) - 1] = 0.07            # transverse wobble a_{n+1} z
    cable = FourierCurve(coeffs=c, orientation=TORUS_CABLE_ORIENT)
    linking = _frac_matrix(2, {(0, 1): n})
    expect = {
        "lk:1,2": Expectation(n, "oracle"),
        "signature:linear:1,2,1,2": Expectation(n * n, "analytic"),
    }
    return Fixture(name=f"torus{n}", curves=(core, cable), projective=False,
                   linking=linking, expect=expect,
                   notes=f"cable winds {n} times around a wavy core")


def make_trefoil() -> Fixture:
    """Trefoil knot on the torus of radii (2, 1), as an exact
    trigonometric polynomial; every nontrivial knot has a quadrisecant."""
    c = np.zeros((3, 11))
    c[0, 2 * 2 - 1] = 2.0      # x: 2 cos 4 pi t
    c[0, 2 * 5 - 1] = 0.5      # x: cos 6 pi t cos 4 pi t, upper band
    c[0, 2 * 1 - 1] = 0.5      # x: lower band
    c[1, 2 * 2] = 2.0          # y: 2 sin 4 pi t
    c[1, 2 * 5] = 0.5
    c[1, 2 * 1] = -0.5
    c[2, 2 * 3] = 1.0          # z: sin 6 pi t
    knot = FourierCurve(coeffs=c)
    expect = {"quadrisecants_min": Expectation(1, "classical")}
    return Fixture(name="trefoil", curves=(knot,), projective=False,
                   linking=_frac_matrix(1, {}), expect=expect)


def make_bidegree31() -> Fixture:
    """Knot in projective space lying on the quadric x^2 + y^2 = z^2 + w^2,
    winding 3 times along one ruling and once along the other.  Any line
    meets the quadric at most twice and the rulings meet the curve at
    most 3 times, so the knot has no quadrisecant."""
    c = np.zeros((4, 7))
    c[0, 2 * 3 - 1] = 1.0      # x = cos 3 pi t
    c[1, 2 * 3] = 1.0          # y = sin 3 pi t
    c[2, 2 * 1 - 1] = 1.0      # z = cos pi t
    c[3, 2 * 1] = 1.0          # w = sin pi t
    knot = ProjectiveCurve(coeffs=c)
    knot.validate()
    expect = {"quadrisecants": Expectation(0, "classical")}
    return Fixture(name="bidegree31", curves=(knot,), projective=True,
                   linking=_frac_matrix(1, {}), expect=expect)


# -- auxiliary scenes ---------------------------------------------------------

def make_chain3() -> Fixture:
    """Three curves with lk12 = lk13 = 1 and lk23 = 0: a wavy circle
    threaded by two separated round circles (repeated-slot test scene)."""
    ex, ey, ez = np.eye(3)
    R1 = _rot([1, 2, 3], 0.4)
    R2 = _rot([0, 1, 0], 0.5)
    a1 = _wavy_circle([0.0, 0.0, 0.0], ex, ey, ez, 0.12)
    a2 = _circle(ex, R1 @ ex, R1 @ ez, orientation=CHAIN3_ORIENT_2)
    a3 = _circle(-0.8 * ex + 0.15 * ey, R2 @ ex, R2 @ ez,
                 orientation=CHAIN3_ORIENT_3)
    linking = _frac_matrix(3, {(0, 1): 1, (0, 2): 1})
    expect = {
        "signature:linear:1,2,1,3": Expectation(1, "analytic"),
        "signature:linear:1,2,3,1": Expectation(1, "analytic"),
    }
    return Fixture(name="chain3", curves=(a1, a2, a3), projective=False,
                   linking=linking, expect=expect)


def make_split(n: int) -> Fixture:
    """``n`` far-separated unit circles in generic planes; all linking
    numbers vanish and no line or circle meets four or more of them."""
    if not 2 <= n <= 8:
        raise InputError("n must be between 2 and 8")
    rng = np.random.default_rng(20240 + n)
    curves = []
    for k in range(n):
        ang = 2.0 * np.pi * k / n
        center = 12.0 * np.array([np.cos(ang), np.sin(ang), 0.25 * ((-1) ** k)])
        R = _rot(rng.standard_normal(3), rng.uniform(0.2, 1.3))
        curves.append(_circle(center, R @ np.eye(3)[0], R @ np.eye(3)[1]))
    expect = {"count": Expectation(0, "analytic")}
    if n >= 4:
        expect["signature:linear:1,2,3,4"] = Expectation(0, "analytic")
    return Fixture(name=f"split{n}", curves=tuple(curves), projective=False,
                   linking=_frac_matrix(n, {}), expect=expect)


def make_stacked_circles(n: int, coaxial: bool = False) -> Fixture:
    """``n`` unit circles in parallel horizontal planes.

    With ``coaxial`` the centers share one vertical axis, so the common
    vertical cylinder carries a one-parameter family of transversal
    lines (the degenerate-scene fixture).  Otherwise the centers are
    staggered and every common secant is isolated and regular.
    """
    curves = []
    for k in range(n):
        if coaxial:
            center = np.array([0.0, 0.0, float(k)])
        else:
            center = np.array([0.35 * np.sin(2.1 * k + 0.4),
                               0.3 * np.cos(1.7 * k), 2.0 * k])
        curves.append(_circle(center, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]))
    name = f"stacked{n}" + ("-coaxial" if coaxial else "")
    expect = {}
    if coaxial:
        expect["degenerate"] = Expectation("line family", "analytic")
    return Fixture(name=name, curves=tuple(curves), projective=False,
                   linking=_frac_matrix(n, {}), expect=expect)


def make_latitudes(n: int = 6) -> Fixture:
    """``n`` latitude circles of the unit sphere: every meridian circle
    meets all of them, a one-parameter family of circle transversals."""
    curves = []
    for k in range(n):
        z = -0.75 + 1.5 * k / (n - 1)
        r = float(np.sqrt(1.0 - z * z))
        curves.append(_circle([0.0, 0.0, z], [r, 0.0, 0.0], [0.0, r, 0.0]))
    expect = {"degenerate": Expectation("circle family", "analytic")}
    return Fixture(name=f"latitudes{n}", curves=tuple(curves),
                   projective=False, linking=_frac_matrix(n, {}),
                   expect=expect)


def make_concyclic6() -> Fixture:
    """Six loops threaded on one round horizontal circle of radius 3.

    The base circle meets every loop by construction and the solver must
    recover it exactly.  It is not the only transversal: strands rising
    from concyclic footpoints always admit a few nearby tilted circles
    that thread all six loops at offset heights, so the count expectation
    is a measured value rather than one.
    """
    base_angles = np.array([0.05, 0.95, 2.2, 3.05, 4.1, 5.3])
    strand_tilt = np.array([0.3, -0.25, 0.15, -0.35, 0.2, -0.1])
    loop_radii = np.array([0.4, 0.9, 0.55, 1.05, 0.5, 0.75])
    loop_sides = np.array([1.0, -1.0, 1.0, -1.0, -1.0, 1.0])
    curves = []
    for th, psi, rho, side in zip(base_angles, strand_tilt, loop_radii,
                                  loop_sides):
        p = 3.0 * np.array([np.cos(th), np.sin(th), 0.0])
        rhat = np.array([np.cos(th), np.sin(th), 0.0])
        zhat = np.array([0.0, 0.0, 1.0])
        d = np.cos(psi) * zhat + np.sin(psi) * rhat    # strand direction
        m = side * rhat - (side * rhat @ d) * d        # loop bends in/out
        m = m / np.linalg.norm(m)
        curves.append(_circle(p + rho * m, -rho * m, rho * d))
    expect = {
        "count:cyclic:1,2,3,4,5,6": Expectation(4, "oracle"),
        "recover:center_radius": Expectation((0.0, 0.0, 0.0, 3.0),
                                             "analytic"),
    }
    return Fixture(name="concyclic6", curves=tuple(curves), projective=False,
                   linking=_frac_matrix(6, {}), expect=expect,
                   notes="radius-3 horizontal circle threads all six loops; "
                         "three further tilted transversals are genuine")


def make_pinch_triple() -> Fixture:
    """Three circles whose secant family contains sign-flip vertices of
    the tangent-pair linking (pinch points of the swept surface)."""
    axis1, ang1 = PINCH_TILT
    R1 = _rot(axis1, ang1)
    ex, ey, ez = np.eye(3)
    a1 = _circle([0.0, 0.0, 0.0], R1 @ ex, R1 @ ey)
    a2 = _circle(R1 @ ex, R1 @ ex, R1 @ ez, orientation=-1)
    R3 = _rot([0, 1, 1], 0.3)
    a3 = _circle([6.0, 1.0, 0.5], R3 @ ex, R3 @ ey)
    linking = _frac_matrix(3, {(0, 1): 1})
    expect = {"pinches_min": Expectation(1, "oracle")}
    return Fixture(name="pinch3", curves=(a1, a2, a3), projective=False,
                   linking=linking, expect=expect)


def make_skew_lines3() -> Fixture:
    """Three lines of one ruling family; the lines meeting all three
    sweep the quadric's other ruling (the projective surface fixture)."""
    curves = tuple(_ruling(a) for a in (0.0, 2.0 * np.pi / 3.0,
                                        4.0 * np.pi / 3.0))
    linking = _frac_matrix(3, {(i, j): Fraction(1, 2)
                               for i in range(3) for j in range(i + 1, 3)})
    expect = {}
    return Fixture(name="lines3", curves=curves, projective=True,
                   linking=linking, expect=expect)


# -- perturbation -------------------------------------------------------------

def _pairwise_gaps(curves, projective: bool) -> np.ndarray:
    n = len(curves)
    if projective:
        pts = [c.unit_eval(np.arange(2 * GAP_SAMPLES) / GAP_SAMPLES)
               for c in curves]
    else:
        pts = [c.eval(np.arange(GAP_SAMPLES) / GAP_SAMPLES) for c in curves]
    gaps = np.full((n, n), np.inf)
    for i in range(n):
        for j in range(i + 1, n):
            d = np.linalg.norm(pts[i][:, None, :] - pts[j][None, :, :],
                               axis=-1).min()
            if projective:
                d2 = np.linalg.norm(pts[i][:, None, :] + pts[j][None, :, :],
                                    axis=-1).min()
                d = min(d, d2)
            gaps[i, j] = gaps[j, i] = d
    return gaps


def perturb(fixture: Fixture, magnitude: float, seed: int) -> Fixture:
    """Isotopy-safe random displacement of every curve in the fixture.

    The same seed always produces the same perturbed scene.  Raises
    SeparationTooSmall when any pairwise curve distance drops below half
    of its unperturbed value, so accepted perturbations cannot change
    any linking number.
    """
    rng = np.random.default_rng(seed)
    before = _pairwise_gaps(fixture.curves, fixture.projective)
    moved = tuple(perturb_curve(c, magnitude, rng) for c in fixture.curves)
    after = _pairwise_gaps(moved, fixture.projective)
    if len(fixture.curves) > 1 and np.any(after < 0.5 * before):
        worst = float(np.min(after / np.where(before > 0, before, 1.0)))
        raise SeparationTooSmall(
            f"perturbation shrinks a pairwise gap to {worst:.2f} of its "
            f"original value")
    return replace(fixture, name=f"{fixture.name}~p{seed}", curves=moved)


FIXTURES = {
    "fourlines-pos": lambda: make_four_lines("positive"),
    "fourlines-neg": lambda: make_four_lines("negative"),
    "amphicheiral": lambda: make_four_lines("amphicheiral"),
    "hopf1": lambda: make_hopf_pairs(1),
    "hopf2": lambda: make_hopf_pairs(2),
    "hopf3": lambda: make_hopf_pairs(3),
    "torus1": lambda: make_torus_link(1),
    "torus2": lambda: make_torus_link(2),
    "torus3": lambda: make_torus_link(3),
    "trefoil": make_trefoil,
    "bidegree31": make_bidegree31,
    "chain3": make_chain3,
    "split4": lambda: make_split(4),
    "split6": lambda: make_split(6),
    "stacked3": lambda: make_stacked_circles(3),
    "stacked4-coaxial": lambda: make_stacked_circles(4, coaxial=True),
    "latitudes6": make_latitudes,
    "concyclic6": make_concyclic6,
    "pinch3": make_pinch_triple,
    "lines3": make_skew_lines3,
}


def get_fixture(name: str) -> Fixture:
    try:
        builder = FIXTURES[name]
    except KeyError:
        raise InputError(f"unknown fixture {name!r}; known: "
                         f"{', '.join(sorted(FIXTURES))}") from None
    return builder()
