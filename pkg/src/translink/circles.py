"""Circles meeting four to six closed curves in R^3.

A root is a parameter 6-tuple, one per slot, whose points are concyclic.
The residual anchors the circle on three alternating slots and constrains
the remaining hits to its plane and radius; anchoring on near-collinear
triples is detected and the complementary anchor set used instead.  The
one-dimensional family of circles through five curves is traced by the
same continuation engine as the secant surface, and weights of six-slot
roots are local intersection signs of the sixth curve with the arc strip
swept between the fifth and first sections.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .curves import invert_curve
from .errors import (
    CollinearAnchors,
    CurveHitsCenter,
    DegenerateFamily,
    DegenerateSecant,
    InputError,
    NonIsolatedFamily,
    NoRegularValue,
    OrientationInconsistent,
    SeedBudgetExceeded,
    TangentFrameDegenerate,
    UnsupportedPattern,
)
from .geometry import (
    Circle3,
    Line3,
    OrderMode,
    OrderSpec,
    circle_through,
    order_of_hits,
)
from .linking import affine_pline, lk_gauss, lk_line_pair, round_linking
from .lines import (
    DEDUPE_RADIUS,
    DELTA_REP,
    EPS_REGULAR_ROOT,
    RES_TOL,
    SEED_CAP,
    LineRoot,
    _check_pair_separation,
    _is_projective,
    _scene_diameter,
    _slot_ids,
    _torus_dist,
    solve_transversals,
)
from .numerics import (
    continue_branch,
    dedupe_rows,
    family_probe,
    fd_jacobian,
    newton_batch,
    null_tangent,
)
from .surface import (
    SEED_TUBE,
    _crossings,
    _drop_near_diagonal,
    _point_on_branch,
    _refine_seeds,
    _same_slot_pairs,
)

norm = np.linalg.norm

G3 = 32                   # anchor-grid resolution of the 6-slot solver
TRACE_GRID_C = 16         # anchor-grid resolution of the 5-slot tracer
NEWTON_ITERS_C = 60
ORIENT_SAMPLES_C = 32     # vertices sampled when orienting a branch
R_MAX = 1e3               # roots of larger radius degenerate towards lines
SEED_NEAR = 0.15          # nearest-hit seeding threshold, x scene diameter
COLLINEAR_MARGIN = 1e-9   # relative triangle-area floor of an anchor triple

# Pinned once on the chained three-Hopf-pairs configuration, whose
# signature lk12*lk34*lk56 = 1 is forced; encodes the same right-handed
# ambient convention as the line weights.
CAL_CIRCLE = 1.0

H_SECTION = 1e-5
DET_RELATIVE_MIN = 1e-9


# ---------------------------------------------------------------------------
# residual


def _circle_rows(p1, p3, p5):
    """Batched circumcircle of row triples.

    Returns (center, unit normal, radius, good); rows failing the
    collinearity margin come back flagged with unit placeholders.
    """
    e1 = p3 - p1
    e2 = p5 - p1
    n = np.cross(e1, e2)
    nn = norm(n, axis=1)
    scale = np.maximum(norm(e1, axis=1), norm(e2, axis=1))
    good = nn > COLLINEAR_MARGIN * scale * scale + 1e-300
    mat = np.stack([e1, e2, n], axis=1)
    rhs = np.stack([
        0.5 * np.einsum("ij,ij->i", e1, e1),
        0.5 * np.einsum("ij,ij->i", e2, e2),
        np.zeros(len(p1)),
    ], axis=1)
    if (~good).any():
        mat = mat.copy()
        mat[~good] = np.eye(3)
    center = p1 + np.linalg.solve(mat, rhs[..., None])[..., 0]
    radius = norm(p1 - center, axis=1)
    normal = n / np.maximum(nn, 1e-300)[:, None]
    return center, normal, radius, good


def _make_circle_system(curves, anchors):
    """Residual closure: circle through the anchor slots, two components
    (plane offset, radial offset) per remaining slot."""
    others = [i for i in range(len(curves)) if i not in anchors]

    def fun(x):
        ps = [curves[i].eval(x[:, i]) for i in range(len(curves))]
        center, normal, radius, good = _circle_rows(
            ps[anchors[0]], ps[anchors[1]], ps[anchors[2]])
        comps = []
        for j in others:
            r = ps[j] - center
            h = np.einsum("ij,ij->i", r, normal)
            rho = norm(r - h[:, None] * normal, axis=1) - radius
            comps.append(h)
            comps.append(rho)
        out = np.stack(comps, axis=1)
        out[~good] = 1e6
        return out

    def jac(x):
        return fd_jacobian(fun, x)

    return fun, jac


def residual6(curves, t, anchors=(0, 2, 4)) -> np.ndarray:
    """Concyclicity residual of one parameter 6-tuple.

    The circle passes through the three anchor slots; each remaining slot
    contributes (signed plane distance, radial offset).  Zero exactly when
    all six points lie on one circle.
    """
    if len(curves) != 6:
        raise InputError("expected exactly six slot curves")
    t = np.asarray(t, dtype=float)
    ps = [curves[i].eval(float(t[i])) for i in range(6)]
    try:
        K = circle_through(ps[anchors[0]], ps[anchors[1]], ps[anchors[2]])
    except Exception as exc:
        raise CollinearAnchors(
            f"anchor slots {anchors} are collinear at t={np.round(t, 6)}"
        ) from exc
    out = []
    for j in range(6):
        if j in anchors:
            continue
        r = ps[j] - K.center
        h = float(r @ K.normal)
        rho = float(norm(r - h * K.normal)) - K.radius
        out.extend([h, rho])
    return np.array(out)


# ---------------------------------------------------------------------------
# six-slot solver


@dataclass(frozen=True, eq=False)
class CircleTransversal:
    """One circle with its slot hits."""

    circle: Circle3
    params: np.ndarray        # (n,) slot parameters, mod 1
    points: np.ndarray        # (n,3) hit points
    angles: np.ndarray        # (n,) hit angles in the circle frame
    det: float                # Jacobian determinant at the root
    order_ok: bool | None = None
    weight: int | None = None

    @property
    def regular(self) -> bool:
        return abs(self.det) > EPS_REGULAR_ROOT


def _nearest_on_circle(center, normal, radius, pts):
    """Per-row distance of each sample point to each row's circle: rows
    are circles, columns sample points."""
    r = pts[None, :, :] - center[:, None, :]
    h = np.einsum("bmj,bj->bm", r, normal)
    rho = norm(r - h[..., None] * normal[:, None, :], axis=-1)
    return np.hypot(h, rho - radius[:, None])


def solve_circles(curves, order: OrderSpec | None = None, grid: int = G3,
                  newton_tol: float = RES_TOL,
                  dedupe_radius: float = DEDUPE_RADIUS,
                  anchors=(0, 2, 4), check_separation: bool = True,
                  max_seeds: int = SEED_CAP) -> list[CircleTransversal]:
    """All isolated circles meeting the six slot curves, sorted by their
    parameter tuples.  Roots of radius above R_MAX are excluded as line
    degenerations; with an order spec each root's order_ok records whether
    the hit angles realize the requested cyclic pattern."""
    if len(curves) != 6:
        raise InputError("expected exactly six slot curves")
    if _is_projective(curves):
        raise InputError("circle scenes take affine curves only")
    if check_separation:
        _check_pair_separation(curves)
    rep_pairs = _same_slot_pairs(curves)
    others = [i for i in range(6) if i not in anchors]
    diam = _scene_diameter(curves, False)
    near = SEED_NEAR * diam

    g = (np.arange(grid) + 0.5) / grid
    t_a = np.stack(np.meshgrid(g, g, g, indexing="ij"), axis=-1).reshape(-1, 3)
    m = 4 * grid
    s_grid = np.arange(m) / m
    other_pts = [curves[j].eval(s_grid) for j in others]

    seed_rows = []
    for lo in range(0, t_a.shape[0], 8192):
        chunk = t_a[lo:lo + 8192]
        pa = [curves[anchors[k]].eval(chunk[:, k]) for k in range(3)]
        center, normal, radius, good = _circle_rows(*pa)
        init = np.empty((chunk.shape[0], 3))
        ok = good
        for col, pts in enumerate(other_pts):
            d = _nearest_on_circle(center, normal, radius, pts)
            k_min = np.argmin(d, axis=1)
            init[:, col] = s_grid[k_min]
            ok = ok & (d[np.arange(len(d)), k_min] < near)
        if not ok.any():
            continue
        rows = np.empty((int(ok.sum()), 6))
        for k in range(3):
            rows[:, anchors[k]] = chunk[ok, k]
        for col, j in enumerate(others):
            rows[:, j] = init[ok, col]
        seed_rows.append(rows)

    if not seed_rows:
        return []
    seeds = np.vstack(seed_rows)
    seeds = _drop_near_diagonal(seeds, rep_pairs, 2.0 / grid)
    if seeds.shape[0] > max_seeds:
        raise SeedBudgetExceeded(
            f"{seeds.shape[0]} circle seeds exceed the cap {max_seeds}")
    if seeds.shape[0] == 0:
        return []

    fun, jac = _make_circle_system(curves, anchors)
    x, ok, _ = newton_batch(fun, jac, seeds, tol=newton_tol,
                            max_iters=NEWTON_ITERS_C)
    if not ok.any():
        return []
    x = x[ok] % 1.0
    keep = np.ones(x.shape[0], dtype=bool)
    for i, j in rep_pairs:
        keep &= _torus_dist(x[:, i], x[:, j]) > DELTA_REP
    x = x[keep]
    if x.shape[0] == 0:
        return []
    dets = np.linalg.det(jac(x))

    roots = []
    for row, det in zip(x, dets):
        pts = np.stack([curves[i].eval(float(row[i])) for i in range(6)])
        try:
            K = circle_through(pts[anchors[0]], pts[anchors[1]],
                               pts[anchors[2]])
        except Exception:
            continue
        if K.radius > R_MAX:
            continue
        ang = np.array([K.angle_of(p) for p in pts])
        roots.append(CircleTransversal(circle=K, params=row, points=pts,
                                       angles=ang, det=float(det)))

    if not roots:
        return []
    key = np.stack([
        np.concatenate([r.circle.key(), _hit_distance_key(r.points)])
        for r in roots
    ])
    reps, _ = dedupe_rows(key, dedupe_radius * 10.0)
    roots = [roots[i] for i in reps]

    for r in roots:
        if abs(r.det) < EPS_REGULAR_ROOT and family_probe(
                fun, jac, r.params, tol=newton_tol):
            raise NonIsolatedFamily(
                f"circle root at t={np.round(r.params, 6)} lies on a family")

    if order is not None:
        ids = _slot_ids(curves)
        out = []
        for r in roots:
            flag = order_of_hits(r.angles, ids, order, period=2.0 * np.pi)
            out.append(replace(r, order_ok=flag))
        roots = out

    roots.sort(key=lambda r: tuple(np.round(r.params, 9)))
    return roots


def _hit_distance_key(points):
    """Relabeling-invariant summary of the hit multiset."""
    d = []
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            d.append(float(norm(points[i] - points[j])))
    return np.sort(np.array(d))


# ---------------------------------------------------------------------------
# five-slot family tracing


@dataclass(eq=False)
class CircleBranch:
    """A closed branch of circles through five curves in cyclic order."""

    curves: tuple
    params: np.ndarray     # (N,5) vertices in the parameter 5-torus
    tangents: np.ndarray   # (N,5) unit branch tangents
    sigma: int | None = None
    pinches: tuple = ()

    def __len__(self):
        return self.params.shape[0]


def _vertex_circle(curves, t):
    ps = [curves[i].eval(float(t[i])) for i in range(len(curves))]
    return circle_through(ps[0], ps[2], ps[4]), np.stack(ps)


def _in_cyclic_order(curves, t) -> bool:
    K, ps = _vertex_circle(curves, t)
    ang = np.array([K.angle_of(p) for p in ps])
    spec = OrderSpec(mode=OrderMode.CYCLIC, slots=tuple(range(len(curves))))
    return order_of_hits(ang, _slot_ids(curves), spec, period=2.0 * np.pi)


def trace_circle_branches(c1, c2, c3, c4, c5, grid: int = TRACE_GRID_C,
                          max_branches: int = 64) -> list[CircleBranch]:
    """All closed branches of circles meeting the five curves in the
    cyclic slot order.  Branches realizing some other hit order are
    discarded; the order cannot change along a branch because hits of
    disjoint curves never collide on the circle."""
    curves = (c1, c2, c3, c4, c5)
    if _is_projective(curves):
        raise InputError("circle scenes take affine curves only")
    fun, jac = _make_circle_system(curves, anchors=(0, 2, 4))
    diam = _scene_diameter(curves, False)
    near = SEED_NEAR * diam

    g = (np.arange(grid) + 0.5) / grid
    t_a = np.stack(np.meshgrid(g, g, g, indexing="ij"), axis=-1).reshape(-1, 3)
    m = 4 * grid
    s_grid = np.arange(m) / m
    other_pts = [curves[j].eval(s_grid) for j in (1, 3)]
    seed_rows = []
    for lo in range(0, t_a.shape[0], 8192):
        chunk = t_a[lo:lo + 8192]
        pa = [curves[k].eval(chunk[:, i]) for i, k in enumerate((0, 2, 4))]
        center, normal, radius, good = _circle_rows(*pa)
        init = np.empty((chunk.shape[0], 2))
        ok = good
        for col, pts in enumerate(other_pts):
            d = _nearest_on_circle(center, normal, radius, pts)
            k_min = np.argmin(d, axis=1)
            init[:, col] = s_grid[k_min]
            ok = ok & (d[np.arange(len(d)), k_min] < near)
        if not ok.any():
            continue
        rows = np.empty((int(ok.sum()), 5))
        rows[:, (0, 2, 4)] = chunk[ok]
        rows[:, (1, 3)] = init[ok]
        seed_rows.append(rows)
    if not seed_rows:
        return []
    seeds = np.vstack(seed_rows)
    rep_pairs = _same_slot_pairs(curves)
    seeds = _drop_near_diagonal(seeds, rep_pairs, 2.0 / grid)
    if seeds.shape[0] == 0:
        return []
    refined = _refine_seeds(fun, seeds)
    refined = _drop_near_diagonal(refined, rep_pairs, DELTA_REP)

    branches: list[CircleBranch] = []
    covered: list[np.ndarray] = []
    failures = 0
    for x0 in refined:
        if any(_point_on_branch(x0, p, SEED_TUBE) for p in covered):
            continue
        try:
            pts, taus = continue_branch(fun, jac, x0,
                                        periodic=np.ones(5, dtype=bool))
        except Exception:
            failures += 1
            if failures > 5:
                raise DegenerateFamily(
                    "circle-family continuation failed repeatedly")
            continue
        covered.append(pts % 1.0)
        if len(covered) > max_branches:
            raise DegenerateFamily("circle branch budget exceeded")
        if rep_pairs:
            wrapped = pts % 1.0
            touches = False
            for i, j in rep_pairs:
                d = np.abs(wrapped[:, i] - wrapped[:, j]) % 1.0
                d = np.minimum(d, 1.0 - d)
                touches |= bool((d < DELTA_REP).any())
            if touches:
                continue
        if not _in_cyclic_order(curves, pts[0]):
            continue
        branches.append(CircleBranch(curves=curves, params=pts % 1.0,
                                     tangents=taus))
    return branches


# ---------------------------------------------------------------------------
# branch orientation
#
# The branch is oriented by reading it through one hit: inverting space
# at the hit on slot i turns the circles through that point into the
# transversal lines of the other four curves, taken in the cyclic order
# that starts after slot i.  The line weight of the inverted root is the
# local mapping degree of the section P_i, so the branch sign relative to
# the traversal is that weight times the slot's own crossing sign.
# Agreement over the five slots, and constancy along the branch, are
# checked rather than assumed.


def _inverted_quad(curves, t, slot):
    center = curves[slot].eval(float(t[slot]))
    quad = []
    params = np.empty(4)
    for k in range(4):
        j = (slot + 1 + k) % 5
        quad.append(invert_curve(curves[j], center))
        params[k] = t[j]
    return quad, params


def _sigma_via_slot(curves, t, tau, slot) -> int:
    from .weights import weight_affine

    quad, params = _inverted_quad(curves, t, slot)
    pts = np.stack([quad[k].eval(float(params[k])) for k in range(4)])
    d = pts[3] - pts[0]
    line = Line3.from_point_direction(pts[0], d)
    positions = (pts - pts[0]) @ (d / float(norm(d)))
    root = LineRoot(params=params, points=pts, line=line,
                    positions=positions, det=1.0, projective=False)
    w = weight_affine(quad, root)
    o = curves[slot].orientation * float(np.sign(tau[slot]))
    if o == 0.0:
        raise TangentFrameDegenerate(
            f"branch tangent vanishes on slot {slot}")
    return int(w * o)


def circle_orientation(curves, t, tau, check_all: bool = False) -> int:
    """Branch orientation sign at a regular five-slot vertex, relative
    to the traversal direction tau.  With check_all the five per-slot
    readings must agree; otherwise the first readable slot is used."""
    t = np.asarray(t, dtype=float)
    vals = {}
    last = None
    for slot in range(5):
        try:
            vals[slot] = _sigma_via_slot(curves, t, tau, slot)
        except (DegenerateSecant, TangentFrameDegenerate,
                UnsupportedPattern, CurveHitsCenter) as exc:
            last = exc
        if vals and not check_all:
            break
    if not vals:
        raise DegenerateFamily(
            f"no slot reads an orientation at t={np.round(t, 6)}: {last}")
    if check_all and len(set(vals.values())) != 1:
        raise OrientationInconsistent(
            f"per-slot orientations {vals} disagree at t={np.round(t, 6)}")
    return next(iter(vals.values()))


def _adjacent_lk_signs(curves, t):
    """Signs of lk of oriented hit tangent lines for the five adjacent
    pairs (i, i+1 mod 5), or None when some pair is near-coplanar."""
    L = []
    for i in range(5):
        p = curves[i].eval(float(t[i]))
        v = curves[i].tangent(float(t[i]))
        L.append(affine_pline(p, v))
    w = np.empty(5)
    for i in range(5):
        val = lk_line_pair(L[i], L[(i + 1) % 5])
        if abs(val) < 1e-12:
            return None
        w[i] = np.sign(val)
    return w


def orient_circle_branch(branch: CircleBranch,
                         samples: int = ORIENT_SAMPLES_C,
                         consistency_checks: int = 3) -> CircleBranch:
    """Assign the branch orientation sign and locate pinch vertices.

    The sign is read at sampled vertices and must be constant along the
    branch; at a few of them all five slot readings are compared.  Pinch
    vertices are where an adjacent pair of hit tangent lines becomes
    coplanar, flipping the sign of its linking number.
    """
    n = len(branch)
    idx = np.unique(np.linspace(0, n - 1, min(samples, n)).astype(int))
    stride = max(1, len(idx) // max(consistency_checks, 1))
    sig = None
    w_prev = None
    pinches = []
    for pos, i in enumerate(idx):
        t = branch.params[i]
        try:
            g = circle_orientation(branch.curves, t, branch.tangents[i],
                                   check_all=(pos % stride == 0))
        except DegenerateFamily:
            continue
        if sig is None:
            sig = g
        elif g != sig:
            raise OrientationInconsistent(
                f"branch orientation flips at vertex {i}")
        w = _adjacent_lk_signs(branch.curves, t)
        if w is not None:
            if w_prev is not None and np.any(w * w_prev < 0):
                pinches.append(i)
            w_prev = w
    if sig is None:
        raise DegenerateFamily("no regular vertex found on circle branch")
    branch.sigma = int(sig)
    branch.pinches = tuple(pinches)
    return branch


def circle_section_degree(curves, slot: int, branches=None,
                          n_values: int = 5, retries: int = 100,
                          seed: int = 0, **trace_kwargs) -> int:
    """Mapping degree of the five-curve family section P_slot onto its
    curve, by signed branch crossings over regular parameter values."""
    if branches is None:
        branches = trace_circle_branches(*curves, **trace_kwargs)
    rng = np.random.default_rng(seed)
    degs = []
    attempts = 0
    while len(degs) < n_values:
        if attempts >= retries:
            raise NoRegularValue(f"no regular value after {retries} attempts")
        attempts += 1
        level = float(rng.uniform(0.0, 1.0))
        total = 0
        ok = True
        for b in branches:
            if b.sigma is None:
                orient_circle_branch(b)
            vals = b.params[:, slot]
            for i, _frac, _direction in _crossings(vals, level):
                dt = b.tangents[i][slot]
                if abs(dt) < 1e-6:
                    ok = False
                    break
                total += int(b.sigma * b.curves[slot].orientation
                             * np.sign(dt))
            if not ok:
                break
        if ok:
            degs.append(total)
    if len(set(degs)) != 1:
        raise NoRegularValue(f"degree not value-independent: {degs}")
    return degs[0]


# ---------------------------------------------------------------------------
# weights


def _plane_complex(circle: Circle3, pts):
    u, v = circle.frame()
    r = np.asarray(pts, dtype=float) - circle.center
    return (r @ u) + 1j * (r @ v)


def _cross_ratio_circle(circle: Circle3, hits3, x) -> float:
    """Fiber coordinate on a circle: the real cross-ratio sending the
    first three hits to (inf, 1, 0)."""
    z1, z2, z3 = (_plane_complex(circle, h) for h in hits3)
    z = _plane_complex(circle, x)
    num = (z - z3) * (z2 - z1)
    den = (z - z1) * (z2 - z3)
    if abs(den) < 1e-15:
        return float("inf")
    lam = num / den
    return float(lam.real)


def _point_at_cross_ratio(circle: Circle3, hits3, lam: float):
    """Inverse of the fiber coordinate, back in ambient coordinates."""
    z1, z2, z3 = (_plane_complex(circle, h) for h in hits3)
    num = z3 * (z2 - z1) - lam * z1 * (z2 - z3)
    den = (z2 - z1) - lam * (z2 - z3)
    if abs(den) < 1e-15:
        raise TangentFrameDegenerate("fiber point escapes to infinity")
    z = num / den
    u, v = circle.frame()
    return circle.center + z.real * u + z.imag * v


def _cyclic_direction(angles) -> int:
    """+1 when the slot sequence runs counterclockwise in the circle
    frame, -1 clockwise; 0 when the hits sit in some other cyclic order."""
    a = np.asarray(angles, dtype=float)
    gaps = (np.roll(a, -1) - a) % (2.0 * np.pi)
    total = float(gaps.sum())
    n = len(a)
    if abs(total - 2.0 * np.pi) < 1e-9:
        return 1
    if abs(total - 2.0 * np.pi * (n - 1)) < 1e-9:
        return -1
    return 0


def weight_circle(curves, root: CircleTransversal,
                  cal: float = CAL_CIRCLE) -> int:
    """Weight of one six-slot circle root: the intersection sign of the
    sixth curve with the arc strip swept by the five-curve family."""
    slot_ids = _slot_ids(curves)
    if len(set(slot_ids)) < 6:
        root = _cyclic_monotone_root(slot_ids, root)
    t = np.asarray(root.params, dtype=float)
    quint = tuple(curves[:5])
    _, jac5 = _make_circle_system(quint, anchors=(0, 2, 4))
    tau = null_tangent(jac5(t[None, :5])[0])
    sigma = circle_orientation(quint, t[:5], tau, check_all=True)

    ps = [curves[i].eval(float(t[i])) for i in range(6)]
    K = circle_through(ps[0], ps[2], ps[4])
    lam6 = _cross_ratio_circle(K, ps[:3], ps[5])
    if not np.isfinite(lam6):
        raise TangentFrameDegenerate("sixth hit coincides with the first")

    h = H_SECTION
    sides = []
    for s in (1.0, -1.0):
        ts = t[:5] + s * h * tau
        pss = [quint[i].eval(float(ts[i])) for i in range(5)]
        Ks = circle_through(pss[0], pss[2], pss[4])
        sides.append(_point_at_cross_ratio(Ks, pss[:3], lam6))
    e = (sides[0] - sides[1]) / (2.0 * h)

    ang6 = np.array([K.angle_of(p) for p in ps])
    direction = _cyclic_direction(ang6)
    if direction == 0:
        raise UnsupportedPattern(
            "hits do not realize the cyclic slot order; no weight defined")
    u, v = K.frame()
    th6 = float(ang6[5])
    f = direction * (-np.sin(th6) * u + np.cos(th6) * v)
    w6 = curves[5].tangent(float(t[5]))

    vol = float(np.linalg.det(np.stack([e, f, w6])))
    scale = norm(e) * norm(w6)
    if scale == 0.0 or abs(vol) < DET_RELATIVE_MIN * scale:
        raise TangentFrameDegenerate(
            f"sixth curve tangent to the swept strip at t={np.round(t, 6)}")
    return int(cal * sigma * np.sign(vol))


def _cyclic_monotone_root(slot_ids, root: CircleTransversal):
    """Relabel same-curve hits so the slot tuple runs around the circle
    in cyclic order, the assignment the signature formulas count."""
    ang = np.asarray(root.angles, dtype=float) % (2.0 * np.pi)
    order = np.argsort(ang)
    n = len(slot_ids)
    for direction in (1, -1):
        for r in range(n):
            perm = [int(order[(r + direction * k) % n]) for k in range(n)]
            if all(slot_ids[perm[k]] == slot_ids[k] for k in range(n)):
                if all(perm[k] == k for k in range(n)):
                    return root
                perm = np.array(perm)
                return replace(root, params=root.params[perm],
                               points=root.points[perm],
                               angles=root.angles[perm])
    raise UnsupportedPattern(
        "hit order does not realize the slot pattern; no weight defined")


# ---------------------------------------------------------------------------
# theorem values and verification

# cyclic slot structures with proved signature formulas, written in
# first-occurrence relabeling
_SUPPORTED_STRUCTURES = {
    (0, 1, 2, 3, 4, 5),
    (0, 1, 0, 2, 3, 4),
    (0, 1, 2, 0, 3, 4),
    (0, 1, 0, 1, 2, 3),
    (0, 1, 0, 2, 1, 3),
    (0, 1, 2, 0, 1, 3),
}


def _structure(pattern):
    seen = {}
    out = []
    for p in pattern:
        if p not in seen:
            seen[p] = len(seen)
        out.append(seen[p])
    return tuple(out)


def theorem_value_circles(curves, pattern) -> Fraction:
    """Exact signature predicted for the circles matching a cyclic slot
    pattern: the alternating product formula in pairwise linking numbers."""
    if len(pattern) != 6:
        raise UnsupportedPattern("circle patterns list six slots")
    n = len(curves)
    if any(not (0 <= p < n) for p in pattern):
        raise UnsupportedPattern(f"pattern {pattern} out of range")
    if _structure(pattern) not in _SUPPORTED_STRUCTURES:
        raise UnsupportedPattern(
            f"pattern {pattern} has no proved signature formula")
    slot_curves = [curves[p] for p in pattern]

    def lk(i, j):
        return round_linking(lk_gauss(slot_curves[i], slot_curves[j]),
                             projective=False)

    plus = lk(0, 1) * lk(2, 3) * lk(4, 5)
    minus = lk(1, 2) * lk(3, 4) * lk(5, 0)
    return plus - minus


def verify_circles(curves, pattern, grid: int | None = None,
                   **solver_kwargs):
    """Solve the slot scene for a cyclic pattern and compare the weight
    sum with the linking-number formula."""
    from .weights import SignatureReport

    expected = theorem_value_circles(curves, pattern)
    slot_curves = [curves[p] for p in pattern]
    spec = OrderSpec(mode=OrderMode.CYCLIC, slots=(0, 1, 2, 3, 4, 5))
    if grid is not None:
        solver_kwargs["grid"] = grid
    roots = solve_circles(slot_curves, order=spec, **solver_kwargs)
    matching = tuple(r for r in roots if r.order_ok)
    ws = tuple(weight_circle(slot_curves, r) for r in matching)
    signature = int(sum(ws))
    return SignatureReport(pattern=tuple(pattern), projective=False,
                           roots=matching, weights=ws, signature=signature,
                           expected=expected,
                           matches=Fraction(signature) == expected,
                           count_bound_ok=len(matching) >= abs(expected))


# ---------------------------------------------------------------------------
# circles through a marked point


def circles_through_point(curves, p, order: OrderSpec | None = None,
                          r_min: float = 1e-3,
                          **solver_kwargs) -> list[CircleTransversal]:
    """Circles through the marked point meeting four curves in the cyclic
    order (slots..., point).

    Inversion about the point turns these circles into transversal lines
    of the inverted curves, meeting them in the same order read linearly;
    roots are mapped back through the inversion.  A fifth curve, when
    given, is an overdetermined extra condition and generically empties
    the answer.
    """
    if len(curves) not in (4, 5):
        raise InputError("expected four or five curves plus the point")
    p = np.asarray(p, dtype=float)
    for c in curves:
        t_s, pts_s = c.samples(512)
        if norm(pts_s - p, axis=1).min() < r_min:
            raise InputError("marked point sits on a curve")
    inv = [invert_curve(c, p) for c in curves]

    spec = order
    if spec is None:
        spec = OrderSpec(mode=OrderMode.LINEAR, slots=tuple(range(4)))
    roots = solve_transversals(inv[:4], order=spec, **solver_kwargs)

    out = []
    for r in roots:
        pts = np.stack([curves[i].eval(float(r.params[i])) for i in range(4)])
        K = circle_through(pts[0], pts[1], pts[2])
        if len(curves) == 5:
            s5 = curves[4].samples(2048)[1]
            if K.distance_to(s5).min() > 1e-6 * max(K.radius, 1.0):
                continue
        ang = np.array([K.angle_of(q) for q in pts])
        out.append(CircleTransversal(circle=K, params=r.params, points=pts,
                                     angles=ang, det=r.det,
                                     order_ok=r.order_ok))
    return out
