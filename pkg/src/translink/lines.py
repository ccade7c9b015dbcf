"""Lines meeting four closed curves, in R^3 and in RP^3.

A root is a parameter tuple (t1..t4), one per slot, such that the four
points are collinear.  The residual pins points 3 and 4 to the chord of
points 1 and 2 through a frame of its orthogonal complement; the frame
reference is frozen per seed so each residual is smooth where it matters.
Slots may repeat a curve; roots then carry the hit multiset and duplicates
under slot swaps are merged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import ClosedCurve, ProjectiveCurve
from .errors import (
    CurvesTooClose,
    FivePointSecant,
    InputError,
    NonIsolatedFamily,
    SeedBudgetExceeded,
)
from .geometry import Line3, OrderSpec, ProjectiveLine, order_of_hits
from .numerics import dedupe_rows, family_probe, fd_jacobian, newton_batch

GRID = 64
DEDUPE_RADIUS = 1e-6
DELTA_REP = 1e-3          # same-curve hits closer than this are degenerate
EPS_REGULAR_ROOT = 1e-6   # |det J| below this marks a non-isolated root
RES_TOL = 1e-10
SEED_CAP = 300000
CAND_DIST = 0.1           # seeding: max distance of a slot-3/4 candidate
D_MIN_PAIR = 1e-3


@dataclass(frozen=True, eq=False)
class LineRoot:
    """One transversal line with its four hits."""

    params: np.ndarray        # (4,) slot parameters, mod 1
    points: np.ndarray        # (4,3) affine or (4,4) unit homogeneous
    line: object              # Line3 or ProjectiveLine
    positions: np.ndarray     # (4,) coordinates along the line / angles
    det: float                # Jacobian determinant at the root
    projective: bool
    order_ok: bool | None = None

    @property
    def regular(self) -> bool:
        return abs(self.det) > EPS_REGULAR_ROOT


def _is_projective(curves) -> bool:
    flags = [isinstance(c, ProjectiveCurve) for c in curves]
    if all(flags):
        return True
    if not any(flags):
        return False
    raise InputError("cannot mix affine and homogeneous curves in one scene")


def _check_pair_separation(curves, d_min=D_MIN_PAIR):
    seen = []
    for c in curves:
        if any(c is s for s in seen):
            continue
        seen.append(c)
    for i in range(len(seen)):
        for j in range(i + 1, len(seen)):
            if seen[i].min_distance_to(seen[j]) < d_min:
                raise CurvesTooClose(
                    f"curves {i} and {j} are closer than {d_min:g}")


# ---------------------------------------------------------------------------
# affine residual and its analytic Jacobian


def _affine_frames(p1, p2, e_ref):
    u = p2 - p1
    ell = np.linalg.norm(u, axis=-1, keepdims=True)
    d = u / ell
    c = np.cross(d, e_ref)
    gamma = np.linalg.norm(c, axis=-1, keepdims=True)
    n1 = c / gamma
    n2 = np.cross(d, n1)
    return d, ell[..., 0], n1, n2, gamma[..., 0]


def _affine_eval(curves, x):
    pts = [curves[i].eval(x[:, i]) for i in range(4)]
    vel = [curves[i].deriv(x[:, i]) for i in range(4)]
    return pts, vel


def make_affine_system(curves, e_ref):
    """Residual and Jacobian closures over a frozen per-seed frame
    reference.  e_ref has one unit row per batch row."""

    def fun(x):
        p1, p2, p3, p4 = (curves[i].eval(x[:, i]) for i in range(4))
        _, _, n1, n2, _ = _affine_frames(p1, p2, e_ref[: x.shape[0]])
        y3 = p3 - p1
        y4 = p4 - p1
        return np.stack([
            np.einsum("ij,ij->i", n1, y3),
            np.einsum("ij,ij->i", n2, y3),
            np.einsum("ij,ij->i", n1, y4),
            np.einsum("ij,ij->i", n2, y4),
        ], axis=1)

    def jac(x):
        pts, vel = _affine_eval(curves, x)
        p1, p2, p3, p4 = pts
        v1, v2, v3, v4 = vel
        er = e_ref[: x.shape[0]]
        d, ell, n1, n2, gamma = _affine_frames(p1, p2, er)
        y3 = p3 - p1
        y4 = p4 - p1

        def ddot(a, b):
            return np.einsum("ij,ij->i", a, b)

        dd1 = -(v1 - d * ddot(d, v1)[:, None]) / ell[:, None]
        dd2 = (v2 - d * ddot(d, v2)[:, None]) / ell[:, None]
        J = np.zeros((x.shape[0], 4, 4))
        for col, dd in ((0, dd1), (1, dd2)):
            dc = np.cross(dd, er)
            dn1 = (dc - n1 * ddot(n1, dc)[:, None]) / gamma[:, None]
            dn2 = np.cross(dd, n1) + np.cross(d, dn1)
            J[:, 0, col] = ddot(dn1, y3)
            J[:, 1, col] = ddot(dn2, y3)
            J[:, 2, col] = ddot(dn1, y4)
            J[:, 3, col] = ddot(dn2, y4)
        J[:, 0, 0] -= ddot(n1, v1)
        J[:, 1, 0] -= ddot(n2, v1)
        J[:, 2, 0] -= ddot(n1, v1)
        J[:, 3, 0] -= ddot(n2, v1)
        J[:, 0, 2] = ddot(n1, v3)
        J[:, 1, 2] = ddot(n2, v3)
        J[:, 2, 3] = ddot(n1, v4)
        J[:, 3, 3] = ddot(n2, v4)
        return J

    return fun, jac


def _axis_least_aligned(d):
    """Unit axis rows least aligned with the rows of d."""
    k = np.argmin(np.abs(d), axis=1)
    e = np.zeros_like(d)
    e[np.arange(d.shape[0]), k] = 1.0
    return e


# ---------------------------------------------------------------------------
# homogeneous residual (finite-difference Jacobian)


def _gram_pair(q1, q2):
    b1 = q1 / np.linalg.norm(q1, axis=-1, keepdims=True)
    u = q2 - b1 * np.einsum("ij,ij->i", q2, b1)[:, None]
    b2 = u / np.linalg.norm(u, axis=-1, keepdims=True)
    return b1, b2


def _complement_frame(b1, b2, e1, e2):
    def strip(v, *basis):
        for b in basis:
            v = v - b * np.einsum("ij,ij->i", v, b)[:, None]
        return v

    w1 = strip(e1, b1, b2)
    n1 = w1 / np.linalg.norm(w1, axis=-1, keepdims=True)
    w2 = strip(e2, b1, b2, n1)
    n2 = w2 / np.linalg.norm(w2, axis=-1, keepdims=True)
    return n1, n2


def make_projective_system(curves, e1, e2):
    def fun(x):
        q1 = curves[0].unit_eval(x[:, 0])
        q2 = curves[1].unit_eval(x[:, 1])
        q3 = curves[2].unit_eval(x[:, 2])
        q4 = curves[3].unit_eval(x[:, 3])
        b1, b2 = _gram_pair(q1, q2)
        n1, n2 = _complement_frame(b1, b2, e1[: x.shape[0]], e2[: x.shape[0]])
        return np.stack([
            np.einsum("ij,ij->i", n1, q3),
            np.einsum("ij,ij->i", n2, q3),
            np.einsum("ij,ij->i", n1, q4),
            np.einsum("ij,ij->i", n2, q4),
        ], axis=1)

    def jac(x):
        return fd_jacobian(fun, x)

    return fun, jac


def _axis_pair_least_aligned(b1, b2):
    score = 1.0 - b1 ** 2 - b2 ** 2
    order = np.argsort(-score, axis=1)
    B = b1.shape[0]
    e1 = np.zeros((B, 4))
    e2 = np.zeros((B, 4))
    e1[np.arange(B), order[:, 0]] = 1.0
    e2[np.arange(B), order[:, 1]] = 1.0
    return e1, e2


# ---------------------------------------------------------------------------
# seeding


def _torus_dist(a, b):
    d = np.abs(a - b) % 1.0
    return np.minimum(d, 1.0 - d)


def _scene_diameter(curves, projective):
    if projective:
        return np.pi  # chordal scale of S^3 is fixed
    pts = np.vstack([c.samples(128)[1] for c in curves])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    return max(float(np.linalg.norm(hi - lo)), 1e-9)


def _seed_pairs(curves, projective):
    """Slot pairs to pivot the seeding grid on: the most separated pair of
    distinct curves (widest candidate windows for in-between curves), plus
    (0, 1) as the default."""
    if projective:
        centers = [c.unit_eval(np.arange(64) / 64).mean(axis=0) for c in curves]
    else:
        centers = [c.eval(np.arange(64) / 64).mean(axis=0) for c in curves]
    best, best_d = (0, 1), -1.0
    for i in range(4):
        for j in range(i + 1, 4):
            d = float(np.linalg.norm(centers[i] - centers[j]))
            if d > best_d:
                best, best_d = (i, j), d
    pairs = [best]
    if best != (0, 1):
        pairs.append((0, 1))
    return pairs


def _candidate_params(dist, t_grid, threshold, exclude, forbid_radius):
    """Local minima of a periodic distance profile below threshold, away
    from excluded parameters.  dist: (B, M); returns list of arrays."""
    is_min = (dist < np.roll(dist, 1, axis=1)) & (dist <= np.roll(dist, -1, axis=1))
    is_min &= dist < threshold
    out = []
    for row, mask in enumerate(is_min):
        cand = t_grid[mask]
        vals = dist[row, mask]
        for ex in exclude[row]:
            keep = _torus_dist(cand, ex) > forbid_radius
            cand, vals = cand[keep], vals[keep]
        if cand.size > 4:
            sel = np.argsort(vals)[:4]
            cand = cand[sel]
        out.append(cand)
    return out


def _build_seeds(curves, projective, grid, same, pair, threshold):
    """Seed tuples (t1..t4): grid on the pivot slot pair, near-hit
    candidates on the two remaining slots."""
    i, j = pair
    k, l = [s for s in range(4) if s not in pair]
    g = np.arange(grid) / grid
    ti, tj = np.meshgrid(g, g, indexing="ij")
    ti = ti.ravel()
    tj = tj.ravel()
    if same[i][j]:
        keep = _torus_dist(ti, tj) > DELTA_REP
        ti, tj = ti[keep], tj[keep]
    m = 4 * grid
    s_grid = np.arange(m) / m

    if projective:
        q1 = curves[i].unit_eval(ti)
        q2 = curves[j].unit_eval(tj)
        b1, b2 = _gram_pair(q1, q2)
        prof = []
        for slot in (k, l):
            qs = curves[slot].unit_eval(s_grid)
            # chordal distance of each sample to the chord's 2-plane
            d1 = b1 @ qs.T
            d2 = b2 @ qs.T
            prof.append(np.sqrt(np.maximum(1.0 - d1 ** 2 - d2 ** 2, 0.0)))
    else:
        p1 = curves[i].eval(ti)
        p2 = curves[j].eval(tj)
        u = p2 - p1
        ell = np.linalg.norm(u, axis=1)
        keep = ell > 1e-9
        p1, p2, ti, tj, u, ell = p1[keep], p2[keep], ti[keep], tj[keep], u[keep], ell[keep]
        d = u / ell[:, None]
        prof = []
        for slot in (k, l):
            ps = curves[slot].eval(s_grid)
            rel = ps[None, :, :] - p1[:, None, :]
            along = np.einsum("bmj,bj->bm", rel, d)
            perp = rel - along[..., None] * d[:, None, :]
            prof.append(np.linalg.norm(perp, axis=-1))

    excl_k = [[] for _ in range(ti.size)]
    excl_l = [[] for _ in range(ti.size)]
    for row in range(ti.size):
        if same[i][k]:
            excl_k[row].append(ti[row])
        if same[j][k]:
            excl_k[row].append(tj[row])
        if same[i][l]:
            excl_l[row].append(ti[row])
        if same[j][l]:
            excl_l[row].append(tj[row])
    ck = _candidate_params(prof[0], s_grid, threshold, excl_k, DELTA_REP)
    cl = _candidate_params(prof[1], s_grid, threshold, excl_l, DELTA_REP)

    seeds = []
    for row in range(ti.size):
        if ck[row].size == 0 or cl[row].size == 0:
            continue
        for a in ck[row]:
            for b in cl[row]:
                if same[k][l] and _torus_dist(a, b) <= DELTA_REP:
                    continue
                s = [0.0] * 4
                s[i], s[j], s[k], s[l] = ti[row], tj[row], a, b
                seeds.append(s)
    if len(seeds) > SEED_CAP:
        raise SeedBudgetExceeded(f"{len(seeds)} seeds exceed cap {SEED_CAP}")
    return np.array(seeds, dtype=float).reshape(-1, 4)


def _same_matrix(curves):
    return [[curves[i] is curves[j] for j in range(4)] for i in range(4)]


# ---------------------------------------------------------------------------
# root assembly


def _pairdist_key(points, projective):
    keys = []
    n = points.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            if projective:
                d = min(np.linalg.norm(points[i] - points[j]),
                        np.linalg.norm(points[i] + points[j]))
            else:
                d = np.linalg.norm(points[i] - points[j])
            keys.append(d)
    return np.sort(np.array(keys))


def _assemble_affine(curves, sol, dets):
    roots = []
    for x, det in zip(sol, dets):
        pts = np.stack([curves[i].eval(float(x[i])) for i in range(4)])
        line = Line3.from_points(pts[0], pts[1])
        pos = (pts - pts[0]) @ line.direction
        roots.append(LineRoot(params=x % 1.0, points=pts, line=line,
                              positions=pos, det=float(det), projective=False))
    return roots


def _assemble_projective(curves, sol, dets):
    roots = []
    for x, det in zip(sol, dets):
        qs = np.stack([curves[i].unit_eval(float(x[i])) for i in range(4)])
        line = ProjectiveLine.from_hpoints(qs[0], qs[1])
        pos = np.array([line.angle_of(q) % np.pi for q in qs])
        roots.append(LineRoot(params=x % 1.0, points=qs, line=line,
                              positions=pos, det=float(det), projective=True))
    return roots


def solve_transversals(curves, order: OrderSpec | None = None,
                       grid: int = GRID, newton_tol: float = RES_TOL,
                       dedupe_radius: float = DEDUPE_RADIUS,
                       check_separation: bool = True) -> list[LineRoot]:
    """All isolated lines meeting the four slot curves, sorted by their
    parameter tuples.  With an order spec, each root's order_ok records
    whether its hits realize the requested pattern."""
    if len(curves) != 4:
        raise InputError("expected exactly four slot curves")
    projective = _is_projective(curves)
    if check_separation and not projective:
        _check_pair_separation(curves)
    same = _same_matrix(curves)

    threshold = CAND_DIST * _scene_diameter(curves, projective)
    chunks = [_build_seeds(curves, projective, grid, same, pair, threshold)
              for pair in _seed_pairs(curves, projective)]
    chunks = [c for c in chunks if c.size]
    seeds = np.vstack(chunks) if chunks else np.empty((0, 4))
    if seeds.shape[0] == 0:
        return []

    if projective:
        q1 = curves[0].unit_eval(seeds[:, 0])
        q2 = curves[1].unit_eval(seeds[:, 1])
        b1, b2 = _gram_pair(q1, q2)
        e1, e2 = _axis_pair_least_aligned(b1, b2)
        fun, jac = make_projective_system(curves, e1, e2)
    else:
        p1 = curves[0].eval(seeds[:, 0])
        p2 = curves[1].eval(seeds[:, 1])
        d = p2 - p1
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        e_ref = _axis_least_aligned(d)
        fun, jac = make_affine_system(curves, e_ref)

    x, ok, _ = newton_batch(fun, jac, seeds, tol=newton_tol)
    if not ok.any():
        return []
    x = x[ok] % 1.0
    J = jac(x)
    dets = np.linalg.det(J)

    # same-curve slots must produce genuinely distinct hits
    keep = np.ones(x.shape[0], dtype=bool)
    for i in range(4):
        for j in range(i + 1, 4):
            if same[i][j]:
                keep &= _torus_dist(x[:, i], x[:, j]) > DELTA_REP
    x, dets = x[keep], dets[keep]
    if x.shape[0] == 0:
        return []

    if projective:
        roots = _assemble_projective(curves, x, dets)
    else:
        roots = _assemble_affine(curves, x, dets)

    key = np.stack([
        np.concatenate([r.line.canonical(), _pairdist_key(r.points, projective)])
        for r in roots
    ])
    reps, _ = dedupe_rows(key, dedupe_radius * 10.0)
    roots = [roots[i] for i in reps]

    for r in roots:
        if abs(r.det) < EPS_REGULAR_ROOT and _root_on_family(
                curves, r, projective, newton_tol):
            raise NonIsolatedFamily(
                f"transversal at t={np.round(r.params, 6)} lies on a family")

    if order is not None:
        slot_ids = _slot_ids(curves)
        out = []
        for r in roots:
            period = np.pi if projective else None
            ok_flag = order_of_hits(r.positions, slot_ids, order, period=period)
            out.append(LineRoot(params=r.params, points=r.points, line=r.line,
                                positions=r.positions, det=r.det,
                                projective=r.projective, order_ok=ok_flag))
        roots = out

    roots.sort(key=lambda r: tuple(np.round(r.params, 9)))
    return roots


def _root_on_family(curves, root: LineRoot, projective: bool,
                    tol: float) -> bool:
    """Probe a near-singular root with a system framed on that root."""
    t = np.asarray(root.params, dtype=float)
    if projective:
        q1 = curves[0].unit_eval(t[:1])
        q2 = curves[1].unit_eval(t[1:2])
        b1, b2 = _gram_pair(q1, q2)
        e1, e2 = _axis_pair_least_aligned(b1, b2)
        fun, jac = make_projective_system(curves, e1, e2)
    else:
        d = (root.points[1] - root.points[0])[None, :]
        d = d / np.linalg.norm(d)
        fun, jac = make_affine_system(curves, _axis_least_aligned(d))
    return family_probe(fun, jac, t, tol=tol)


def _slot_ids(curves):
    ids = []
    seen = []
    for c in curves:
        for k, s in enumerate(seen):
            if c is s:
                ids.append(k)
                break
        else:
            seen.append(c)
            ids.append(len(seen) - 1)
    return tuple(ids)


def quadrisecants(curve: ClosedCurve, grid: int = GRID) -> list[LineRoot]:
    """Lines meeting one closed curve in four distinct points."""
    roots = solve_transversals([curve] * 4, grid=grid, check_separation=False)
    # a quadrisecant appears once per ordered slot assignment; merge by line
    return roots


@dataclass(frozen=True)
class GeneralPositionReport:
    """Margins collected from a solved scene; ok() is a conservative gate."""

    min_pair_separation: float
    min_root_det: float
    min_hit_gap: float
    five_point_hits: tuple

    def ok(self, det_floor: float = EPS_REGULAR_ROOT,
           gap_floor: float = 1e-9) -> bool:
        return (not self.five_point_hits
                and self.min_root_det > det_floor
                and self.min_hit_gap > gap_floor)


def general_position_report(curves, roots, n: int = 2048,
                            hit_eps: float = 1e-6) -> GeneralPositionReport:
    """Scan each root line against every distinct curve for unregistered
    hits (five-point secants) and collect regularity margins."""
    distinct = []
    for c in curves:
        if not any(c is s for s in distinct):
            distinct.append(c)
    projective = _is_projective(curves)
    min_sep = np.inf
    for i in range(len(distinct)):
        for j in range(i + 1, len(distinct)):
            min_sep = min(min_sep, distinct[i].min_distance_to(distinct[j]))
    five = []
    min_gap = np.inf
    s_grid = np.arange(n) / n
    for ridx, r in enumerate(roots):
        pos = np.sort(r.positions)
        if pos.size > 1:
            gaps = np.diff(pos)
            if r.projective:
                gaps = np.append(gaps, np.pi - (pos[-1] - pos[0]))
            min_gap = min(min_gap, float(np.min(np.abs(gaps))))
        for cidx, c in enumerate(distinct):
            if projective:
                qs = c.unit_eval(s_grid)
                d1 = qs @ r.line.a
                d2 = qs @ r.line.b
                dist = np.sqrt(np.maximum(1.0 - d1 ** 2 - d2 ** 2, 0.0))
            else:
                dist = r.line.distance_to(c.eval(s_grid))
            near = (dist < hit_eps)
            near &= (dist <= np.roll(dist, 1)) & (dist < np.roll(dist, -1))
            known = [r.params[k] for k in range(4) if curves[k] is c]
            for t_new in s_grid[near]:
                if all(_torus_dist(np.array([t_new]), tk)[0] > 2.0 / n
                       for tk in known):
                    five.append((ridx, cidx, float(t_new)))
    all_dets = [abs(r.det) for r in roots]
    return GeneralPositionReport(
        min_pair_separation=float(min_sep),
        min_root_det=float(min(all_dets)) if all_dets else np.inf,
        min_hit_gap=float(min_gap),
        five_point_hits=tuple(five),
    )


def require_general_position(curves, roots, **kw) -> GeneralPositionReport:
    rep = general_position_report(curves, roots, **kw)
    if rep.five_point_hits:
        raise FivePointSecant(
            f"{len(rep.five_point_hits)} unregistered hits on root lines")
    return rep
