"""Orientation weights of transversal lines and signature verification.

Each transversal of a 4-slot scene is an intersection of the fourth
curve with the surface swept by the secants of the first three, and its
weight is the local intersection sign: the branch orientation sign
(secant_orientation) times the sign of the volume spanned by a section
velocity, the fiber direction and the fourth curve's tangent.  Summed
over the transversals matching a proved slot pattern, the weights equal
a product formula in pairwise linking numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DegenerateSecant, TangentFrameDegenerate, UnsupportedPattern
from .geometry import OrderMode, OrderSpec, ProjectiveLine, unit
from .linking import lk_gauss, lk_rp3, round_linking
from .lines import LineRoot, _is_projective, _slot_ids, solve_transversals
from .numerics import null_tangent
from .surface import (
    classify_secant,
    fiber_coordinate,
    make_secant_system,
    secant_orientation,
    _fiber_point,
)

# Both calibration constants are pinned once against configurations with
# exactly known signatures (three hyperboloid rulings plus a line through
# the two surface components flanking the third ruling: two transversals
# of weight -1 each; and separated doubled Hopf circles: signature
# lk12*lk34) and encode only the ambient orientation convention
# (right-handed R^3; S^3 oriented with outward normal first).
CAL_AFFINE = 1.0
CAL_PROJECTIVE = -1.0

H_SECTION = 1e-5          # parameter step for section velocities
DET_RELATIVE_MIN = 1e-9   # relative volume below which a weight is refused


def _branch_tangent(triple, t3, projective):
    _, jac = make_secant_system(triple, projective)
    return null_tangent(jac(np.asarray(t3, dtype=float)[None, :])[0])


def _require_regular(triple, t3, projective):
    ps = classify_secant(triple, t3, projective)
    if ps.kind != "regular":
        raise DegenerateSecant(
            f"transversal rests on a {ps.kind} secant at t={np.round(t3, 6)}")


def weight_affine(curves, root: LineRoot, cal: float = CAL_AFFINE) -> int:
    """Weight of one transversal of an affine 4-slot scene.

    curves are the slot curves in pattern order; the first three span the
    secant family, the fourth is the intersecting curve.
    """
    t = np.asarray(root.params, dtype=float)
    triple = tuple(curves[:3])
    _require_regular(triple, t[:3], False)
    tau = _branch_tangent(triple, t[:3], False)
    sigma = secant_orientation(triple, t[:3], tau, False)

    ps = [curves[i].eval(float(t[i])) for i in range(4)]
    chord = ps[2] - ps[0]
    u2 = float((ps[1] - ps[0]) @ chord) / float(chord @ chord)
    u4 = float((ps[3] - ps[0]) @ chord) / float(chord @ chord)
    if not (0.0 < u2 < 1.0 and u4 > 1.0):
        raise UnsupportedPattern(
            "hits are not in slot order along the line; no weight defined")
    # hit velocities are chain-rule quantities of the branch motion and
    # must not see the traversal orientations
    v1 = curves[0].deriv(float(t[0])) * tau[0]
    v3 = curves[2].deriv(float(t[2])) * tau[2]
    E = v1 + u4 * (v3 - v1)
    w4 = curves[3].tangent(float(t[3]))
    vol = float(np.linalg.det(np.stack([E, chord, w4])))
    scale = (np.linalg.norm(E) * np.linalg.norm(chord) * np.linalg.norm(w4))
    if scale == 0.0 or abs(vol) < DET_RELATIVE_MIN * scale:
        raise TangentFrameDegenerate(
            f"fourth curve tangent to the secant surface at t={np.round(t, 6)}")
    return int(cal * sigma * np.sign(vol))


def _aligned_fiber_point(line, hits, lam_pair, ref):
    x = _fiber_point(line, hits, lam_pair)
    return x if float(x @ ref) >= 0.0 else -x


def weight_projective(curves, root: LineRoot,
                      cal: float = CAL_PROJECTIVE) -> int:
    """Weight of one transversal of a homogeneous 4-slot scene."""
    t = np.asarray(root.params, dtype=float)
    triple = tuple(curves[:3])
    _require_regular(triple, t[:3], True)
    tau = _branch_tangent(triple, t[:3], True)
    sigma = secant_orientation(triple, t[:3], tau, True)

    qs = [curves[i].unit_eval(float(t[i])) for i in range(4)]
    line = ProjectiveLine.from_hpoints(qs[0], qs[1])
    lam4 = fiber_coordinate(line, qs[:3], qs[3])
    if not np.isfinite(lam4):
        raise DegenerateSecant("fourth hit coincides with the first")
    q4 = qs[3]
    x_c = _aligned_fiber_point(line, qs[:3], (lam4, 1.0), q4)
    if float(x_c @ q4) < 0.99:
        raise TangentFrameDegenerate("fiber coordinate did not reproduce hit")

    # section velocity at fixed fiber coordinate, by central differences
    # along the branch
    h = H_SECTION
    sides = []
    for s in (1.0, -1.0):
        tt = t[:3] + s * h * tau
        qh = [triple[i].unit_eval(float(tt[i])) for i in range(3)]
        lh = ProjectiveLine.from_hpoints(qh[0], qh[1])
        sides.append(_aligned_fiber_point(lh, qh, (lam4, 1.0), q4))
    E = (sides[0] - sides[1]) / (2.0 * h)

    # fiber direction: the cyclic order of the three hits, which runs
    # along decreasing cross-ratio
    phi4 = line.angle_of(q4)
    t_circ = -np.sin(phi4) * line.a + np.cos(phi4) * line.b
    eps = 1e-5
    lam_p = fiber_coordinate(line, qs[:3], unit(q4 + eps * t_circ))
    lam_m = fiber_coordinate(line, qs[:3], unit(q4 - eps * t_circ))
    f = t_circ if lam_p < lam_m else -t_circ

    w4 = curves[3].unit_deriv(float(t[3])) * curves[3].orientation
    vol = float(np.linalg.det(np.stack([q4, E, f, w4])))
    scale = np.linalg.norm(E) * np.linalg.norm(w4)
    if scale == 0.0 or abs(vol) < DET_RELATIVE_MIN * scale:
        raise TangentFrameDegenerate(
            f"fourth curve tangent to the secant sweep at t={np.round(t, 6)}")
    return int(cal * sigma * np.sign(vol))


def _monotone_root(slot_ids, root: LineRoot) -> LineRoot:
    """Relabel the hits of a repeated-curve root so the slot tuple runs
    monotonically along the line.

    A solver root fixes the line and its four hits but assigns same-curve
    hits to slots arbitrarily; the pointed quadruple the formulas count is
    the assignment whose positions increase (or decrease) in slot order.
    Only same-curve slots are interchanged.
    """
    pos = np.asarray(root.positions, dtype=float)
    order = np.argsort(pos)
    seq = tuple(slot_ids[k] for k in order)
    if seq == tuple(slot_ids):
        perm = order
    elif seq == tuple(slot_ids)[::-1]:
        perm = order[::-1]
    else:
        raise UnsupportedPattern(
            "hit order does not realize the slot pattern; no weight defined")
    if all(int(perm[i]) == i for i in range(len(perm))):
        return root
    return LineRoot(params=root.params[perm], points=root.points[perm],
                    line=root.line, positions=pos[perm], det=root.det,
                    projective=root.projective, order_ok=root.order_ok)


def weight(curves, root: LineRoot) -> int:
    slot_ids = _slot_ids(curves)
    if len(set(slot_ids)) < 4:
        if root.projective:
            raise UnsupportedPattern(
                "homogeneous weights need four distinct curves")
        root = _monotone_root(slot_ids, root)
    if root.projective:
        return weight_projective(curves, root)
    return weight_affine(curves, root)


# ---------------------------------------------------------------------------
# theorem values


def _pattern_curves(curves, pattern):
    n = len(curves)
    if len(pattern) != 4:
        raise UnsupportedPattern("pattern must list four slots")
    if any(not (0 <= p < n) for p in pattern):
        raise UnsupportedPattern(f"pattern {pattern} out of range for "
                                 f"{n} curves")
    return [curves[p] for p in pattern]


def _lk(a, b, projective: bool) -> Fraction:
    raw = lk_rp3(a, b) if projective else lk_gauss(a, b)
    return round_linking(raw, projective=projective)


def theorem_value(curves, pattern, projective: bool | None = None) -> Fraction:
    """Exact signature predicted for the transversals matching the slot
    pattern: a product formula in pairwise linking numbers.

    Affine patterns may repeat curves as long as consecutive slots
    differ; homogeneous patterns must use four distinct curves.
    """
    slot_curves = _pattern_curves(curves, pattern)
    if projective is None:
        projective = _is_projective(slot_curves)
    if projective:
        if len(set(pattern)) != 4:
            raise UnsupportedPattern(
                "homogeneous slot patterns must use four distinct curves")
        lk12 = _lk(slot_curves[0], slot_curves[1], True)
        lk34 = _lk(slot_curves[2], slot_curves[3], True)
        lk23 = _lk(slot_curves[1], slot_curves[2], True)
        lk41 = _lk(slot_curves[3], slot_curves[0], True)
        return 2 * (lk12 * lk34 - lk23 * lk41)
    for a, b in zip(pattern, pattern[1:]):
        if a == b:
            raise UnsupportedPattern(
                f"consecutive slots repeat curve {a}; no formula applies")
    return (_lk(slot_curves[0], slot_curves[1], False)
            * _lk(slot_curves[2], slot_curves[3], False))


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class SignatureReport:
    """Outcome of checking one slot pattern against its formula."""

    pattern: tuple
    projective: bool
    roots: tuple              # matching LineRoot objects
    weights: tuple            # one sign per matching root
    signature: int
    expected: Fraction
    matches: bool
    count_bound_ok: bool      # len(roots) >= |expected|

    def __str__(self):
        mark = "ok" if self.matches else "MISMATCH"
        return (f"pattern {self.pattern}: {len(self.roots)} lines, "
                f"signature {self.signature}, expected {self.expected} "
                f"[{mark}]")


def verify_lines(curves, pattern, projective: bool | None = None,
                 grid: int | None = None, **solver_kwargs) -> SignatureReport:
    """Solve the slot scene for a pattern and compare the weight sum with
    the linking-number formula."""
    slot_curves = _pattern_curves(curves, pattern)
    if projective is None:
        projective = _is_projective(slot_curves)
    mode = OrderMode.CYCLIC if projective else OrderMode.LINEAR
    spec = OrderSpec(mode=mode, slots=(0, 1, 2, 3))
    if grid is not None:
        solver_kwargs["grid"] = grid
    roots = solve_transversals(slot_curves, order=spec, **solver_kwargs)
    matching = tuple(r for r in roots if r.order_ok)
    ws = tuple(weight(slot_curves, r) for r in matching)
    signature = int(sum(ws))
    expected = theorem_value(curves, pattern, projective)
    return SignatureReport(pattern=tuple(pattern), projective=projective,
                           roots=matching, weights=ws, signature=signature,
                           expected=expected,
                           matches=Fraction(signature) == expected,
                           count_bound_ok=len(matching) >= abs(expected))
