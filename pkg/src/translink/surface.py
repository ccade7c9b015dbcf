"""Pointed secants of three closed curves: branch tracing, regularity
classification, branch orientation, section degrees, and the swept
surface with its mesh export.

The solution set T of the collinearity system in (t1, t2, t3) is a closed
1-manifold for curves in general position.  Branches are traced by
pseudo-arclength continuation of a frame-free residual (cross products in
R^3, complement projections in R^4), which is smooth along entire
branches.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .curves import ProjectiveCurve
from .errors import (
    BranchNotClosed,
    DegenerateSecant,
    NoRegularValue,
    OrientationInconsistent,
)
from .geometry import Line3, ProjectiveLine, unit
from .linking import affine_pline, lk_line_pair, tangent_pline
from .lines import DELTA_REP, _gram_pair, _is_projective
from .numerics import continue_branch, fd_jacobian, null_tangent

norm = np.linalg.norm

TRACE_GRID = 48
TAU_COPLANAR = 1e-8       # |reciprocal product| below this marks coplanar
TAU_QUADRATIC = 1e-6      # second-derivative threshold for pinch tangency
SEED_TUBE = 5e-3          # parameter-space radius marking a seed as covered
FIBER_RES = 64
ORIENT_SAMPLES = 200


# ---------------------------------------------------------------------------
# residuals (frame-free; rank 2 at solutions)


def make_secant_system(curves, projective):
    if projective:
        def fun(x):
            q1 = curves[0].unit_eval(x[:, 0])
            q2 = curves[1].unit_eval(x[:, 1])
            q3 = curves[2].unit_eval(x[:, 2])
            b1, b2 = _gram_pair(q1, q2)
            proj = (q3 - b1 * np.einsum("ij,ij->i", q3, b1)[:, None]
                    - b2 * np.einsum("ij,ij->i", q3, b2)[:, None])
            return proj
    else:
        def fun(x):
            p1 = curves[0].eval(x[:, 0])
            p2 = curves[1].eval(x[:, 1])
            p3 = curves[2].eval(x[:, 2])
            u = p2 - p1
            d = u / np.linalg.norm(u, axis=-1, keepdims=True)
            return np.cross(p3 - p1, d)

    def jac(x):
        return fd_jacobian(fun, x)

    return fun, jac


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True, eq=False)
class PointedSecant:
    """A collinear triple with its tangent-line data."""

    params: np.ndarray        # (3,)
    points: np.ndarray        # (3,3) affine or (3,4) unit homogeneous
    line: object              # Line3 or ProjectiveLine
    tangent_lines: tuple      # three ProjectiveLine
    kind: str                 # "regular" | "almost" | "degenerate"
    special: int | None       # slot index opposite the coplanar pair
    lk_signs: np.ndarray      # (3,) sign lk(L_j, L_k) for each slot i
    coplanarity: np.ndarray   # (3,) |reciprocal product| per opposite pair


def _tangent_lines_at(curves, t, projective):
    out = []
    for i in range(3):
        if projective:
            q = curves[i].heval(float(t[i]))
            dq = curves[i].hderiv(float(t[i])) * curves[i].orientation
            out.append(tangent_pline(q, dq))
        else:
            p = curves[i].eval(float(t[i]))
            v = curves[i].tangent(float(t[i]))
            out.append(affine_pline(p, v))
    return tuple(out)


def _recip_product(l1: ProjectiveLine, l2: ProjectiveLine) -> float:
    return float(np.linalg.det(np.stack([l1.a, l1.b, l2.a, l2.b])))


def classify_secant(curves, t, projective=None,
                    tau_cop: float = TAU_COPLANAR,
                    tau_quad: float = TAU_QUADRATIC) -> PointedSecant:
    """Regularity class of the pointed secant at parameters t.

    Regular: the three tangent lines are pairwise non-coplanar.  Almost
    regular: exactly one coplanar pair, with quadratic tangency of the two
    curves projected from the remaining point.  Anything else degenerates.
    """
    if projective is None:
        projective = _is_projective(curves)
    t = np.asarray(t, dtype=float)
    L = _tangent_lines_at(curves, t, projective)
    rp = np.array([
        abs(_recip_product(L[1], L[2])),
        abs(_recip_product(L[2], L[0])),
        abs(_recip_product(L[0], L[1])),
    ])
    if projective:
        pts = np.stack([curves[i].unit_eval(float(t[i])) for i in range(3)])
        line = ProjectiveLine.from_hpoints(pts[0], pts[1])
    else:
        pts = np.stack([curves[i].eval(float(t[i])) for i in range(3)])
        line = Line3.from_points(pts[0], pts[1])
    lk_signs = np.array([
        np.sign(lk_line_pair(L[1], L[2])) if rp[0] > tau_cop else 0.0,
        np.sign(lk_line_pair(L[2], L[0])) if rp[1] > tau_cop else 0.0,
        np.sign(lk_line_pair(L[0], L[1])) if rp[2] > tau_cop else 0.0,
    ])
    coplanar = rp < tau_cop
    n_cop = int(coplanar.sum())
    if n_cop == 0:
        kind, special = "regular", None
    elif n_cop == 1:
        special = int(np.nonzero(coplanar)[0][0])
        quad = _quadratic_tangency(curves, t, special, projective)
        kind = "almost" if quad > tau_quad else "degenerate"
    else:
        kind, special = "degenerate", None
    return PointedSecant(params=t, points=pts, line=line, tangent_lines=L,
                         kind=kind, special=special if n_cop == 1 else None,
                         lk_signs=lk_signs, coplanarity=rp)


def _quadratic_tangency(curves, t, special, projective) -> float:
    """Transverse curvature gap of the two non-special curves projected
    centrally from the special point; positive means ordinary tangency."""
    i = special
    j, k = [s for s in range(3) if s != i]
    h = 1e-3
    if projective:
        qs = curves[i].unit_eval(float(t[i]))
        basis = np.linalg.svd(qs[None, :])[2][1:]  # orthonormal, spans qs-perp

        def chart(curve, s):
            q = curve.unit_eval(s)
            x = q / (q @ qs)[..., None] - qs
            return x @ basis.T
    else:
        ps = curves[i].eval(float(t[i]))

        def chart(curve, s):
            return curve.eval(s) - ps

    gj3 = chart(curves[j], np.array([t[j] - h, t[j], t[j] + h]))
    gk3 = chart(curves[k], np.array([t[k] - h, t[k], t[k] + h]))
    d = unit(gj3[1])
    u1 = unit(np.cross(d, gj3[2] - gj3[0]))
    u2 = np.cross(d, u1)

    def plane_curve(g3):
        # central projection onto the plane transverse to the secant
        w = g3 @ d
        y = g3 / w[:, None]
        return np.stack([y @ u2, y @ u1], axis=1)

    gj = plane_curve(gj3)
    gk = plane_curve(gk3)
    tj = unit(gj[2] - gj[0])
    n = np.array([-tj[1], tj[0]])

    def second_coeff(g):
        uu = (g - gj[1]) @ tj
        ww = (g - gj[1]) @ n
        V = np.vander(uu, 3)
        try:
            coef = np.linalg.solve(V, ww)
        except np.linalg.LinAlgError:
            return 0.0
        return coef[0]

    return abs(second_coeff(gj) - second_coeff(gk))


# ---------------------------------------------------------------------------
# branch tracing


@dataclass(eq=False)
class SecantBranch:
    """A closed branch of the pointed-secant manifold."""

    curves: tuple
    projective: bool
    params: np.ndarray     # (N,3) vertices in the parameter 3-torus
    tangents: np.ndarray   # (N,3) unit branch tangents
    sigma: int | None = None      # branch orientation sign, set by orient_branch
    pinches: tuple = ()           # vertex indices flanking lk-sign flips

    def __len__(self):
        return self.params.shape[0]


def _second_hit_between(curves, t) -> bool:
    """Whether the middle-slot hit lies inside the segment of the outer two.

    Constant along a branch when the curves are pairwise disjoint, since a
    change would force two hit points to cross."""
    ps = [curves[s].eval(float(t[s])) for s in range(3)]
    d = unit(ps[1] - ps[0])
    u = np.array([0.0, (ps[1] - ps[0]) @ d, (ps[2] - ps[0]) @ d])
    return bool((u[1] - u[0]) * (u[1] - u[2]) < 0.0)


def _same_slot_pairs(curves):
    out = []
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            if curves[i] is curves[j]:
                out.append((i, j))
    return out


def _drop_near_diagonal(seeds, pairs, radius):
    """Remove rows where same-curve slots nearly coincide; the residual
    vanishes identically there without describing a secant."""
    if not pairs or seeds.shape[0] == 0:
        return seeds
    keep = np.ones(seeds.shape[0], dtype=bool)
    for i, j in pairs:
        d = np.abs(seeds[:, i] - seeds[:, j]) % 1.0
        d = np.minimum(d, 1.0 - d)
        keep &= d > radius
    return seeds[keep]


def _seed_triples(curves, projective, grid):
    g = np.arange(grid) / grid
    t1, t2 = np.meshgrid(g, g, indexing="ij")
    t1, t2 = t1.ravel(), t2.ravel()
    m = 4 * grid
    s_grid = np.arange(m) / m
    if projective:
        q1 = curves[0].unit_eval(t1)
        q2 = curves[1].unit_eval(t2)
        b1, b2 = _gram_pair(q1, q2)
        qs = curves[2].unit_eval(s_grid)
        d1 = b1 @ qs.T
        d2 = b2 @ qs.T
        dist = np.sqrt(np.maximum(1.0 - d1 ** 2 - d2 ** 2, 0.0))
        thr = 0.5 / grid * np.pi * 4
    else:
        p1 = curves[0].eval(t1)
        p2 = curves[1].eval(t2)
        u = p2 - p1
        ell = np.linalg.norm(u, axis=1)
        ok = ell > 1e-9
        t1, t2, p1, u, ell = t1[ok], t2[ok], p1[ok], u[ok], ell[ok]
        d = u / ell[:, None]
        ps = curves[2].eval(s_grid)
        rel = ps[None, :, :] - p1[:, None, :]
        along = np.einsum("bmj,bj->bm", rel, d)
        dist = np.linalg.norm(rel - along[..., None] * d[:, None, :], axis=-1)
        pts = np.vstack([c.samples(64)[1] for c in curves])
        diam = float(np.linalg.norm(pts.max(0) - pts.min(0)))
        thr = diam * 2.0 / grid
    is_min = (dist < np.roll(dist, 1, axis=1)) & (dist <= np.roll(dist, -1, axis=1))
    rows, cols = np.nonzero(is_min & (dist < thr))
    return np.stack([t1[rows], t2[rows], s_grid[cols]], axis=1)


def _refine_seeds(fun, seeds, iters=30, tol=1e-12):
    """Batched Gauss-Newton onto the solution set (rectangular residual)."""
    x = seeds.copy()
    for _ in range(iters):
        r = fun(x)
        if np.sqrt((r * r).sum(axis=1)).max() < tol:
            break
        J = fd_jacobian(fun, x)
        delta = -np.linalg.pinv(J, rcond=1e-10) @ r[..., None]
        step = delta[..., 0]
        n = np.linalg.norm(step, axis=1, keepdims=True)
        step = np.where(n > 0.05, step * (0.05 / np.maximum(n, 0.05)), step)
        x = x + step
    r = fun(x)
    good = np.sqrt((r * r).sum(axis=1)) < tol
    return x[good] % 1.0


def _point_on_branch(x, branch_params, tol):
    d = np.abs(branch_params - x) % 1.0
    d = np.minimum(d, 1.0 - d)
    return bool((np.linalg.norm(d, axis=1) < tol).any())


def trace_branches(c1, c2, c3, grid: int = TRACE_GRID,
                   max_branches: int = 64) -> list[SecantBranch]:
    """All closed branches of the pointed-secant manifold T(c1, c2, c3).

    In the affine case the pointed-secant condition includes the hit order
    on the line: the second curve's point lies between the other two, and
    branches violating it are discarded.  Projective lines have no
    betweenness, so every collinearity branch qualifies.
    """
    curves = (c1, c2, c3)
    projective = _is_projective([c1, c2, c3])
    fun, jac = make_secant_system(curves, projective)
    seeds = _seed_triples(curves, projective, grid)
    rep_pairs = _same_slot_pairs(curves)
    seeds = _drop_near_diagonal(seeds, rep_pairs, 2.0 / grid)
    if seeds.shape[0] == 0:
        return []
    refined = _refine_seeds(fun, seeds)
    refined = _drop_near_diagonal(refined, rep_pairs, DELTA_REP)
    branches: list[SecantBranch] = []
    covered: list[np.ndarray] = []
    failures = 0
    for x0 in refined:
        if any(_point_on_branch(x0, p, SEED_TUBE) for p in covered):
            continue
        try:
            pts, taus = continue_branch(fun, jac, x0,
                                        periodic=np.ones(3, dtype=bool))
        except BranchNotClosed:
            failures += 1
            if failures > 5:
                raise DegenerateSecant(
                    "continuation failed repeatedly; triple not regular")
            continue
        covered.append(pts % 1.0)
        if len(covered) > max_branches:
            raise DegenerateSecant("branch budget exceeded; family suspected")
        if rep_pairs:
            wrapped = pts % 1.0
            touches = False
            for i, j in rep_pairs:
                d = np.abs(wrapped[:, i] - wrapped[:, j]) % 1.0
                d = np.minimum(d, 1.0 - d)
                touches |= bool((d < DELTA_REP).any())
            if touches:
                continue
        if not projective and not _second_hit_between(curves, pts[0]):
            continue
        branches.append(SecantBranch(curves=curves, projective=projective,
                                     params=pts % 1.0, tangents=taus))
    return branches


# ---------------------------------------------------------------------------
# orientation


def secant_frame_signs(curves, t, tau, projective):
    """The three per-slot sign products at a regular pointed secant.

    For slot i with cyclic partners (j, k): sign(lk(L_j, L_k)) times the
    orientation class of the branch velocity along C_i, which is
    orientation_i * sign(tau_i).  All three agree on a regular secant.
    """
    L = _tangent_lines_at(curves, t, projective)
    out = []
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        s_lk = np.sign(lk_line_pair(L[j], L[k]))
        o_i = curves[i].orientation * np.sign(tau[i])
        out.append(float(s_lk * o_i))
    return np.array(out)


def secant_orientation(curves, t, tau, projective) -> int:
    """Branch orientation sign at a regular secant, relative to tau."""
    g = secant_frame_signs(curves, t, tau, projective)
    if not (g[0] == g[1] == g[2]) or g[0] == 0.0:
        raise OrientationInconsistent(
            f"sign products disagree at t={np.round(t, 6)}: {g}")
    return int(g[0])


def orient_branch(branch: SecantBranch,
                  samples: int = ORIENT_SAMPLES) -> SecantBranch:
    """Assign the branch orientation sign and locate pinch vertices.

    Verifies that the three sign products agree at sampled regular
    vertices, that the common value is constant along the branch, and
    records vertices where any pairwise linking sign flips (pinches).
    """
    n = len(branch)
    idx = np.unique(np.linspace(0, n - 1, min(samples, n)).astype(int))
    sig = None
    lk_first = None
    lk_prev = None
    first_i = None
    pinches = []
    for i in idx:
        t = branch.params[i]
        tau = branch.tangents[i]
        ps = classify_secant(branch.curves, t, branch.projective)
        if ps.kind == "degenerate":
            raise DegenerateSecant(f"degenerate vertex at t={np.round(t, 6)}")
        if ps.kind == "almost":
            continue
        g = secant_frame_signs(branch.curves, t, tau, branch.projective)
        if not (g[0] == g[1] == g[2]):
            raise OrientationInconsistent(
                f"products {g} disagree at vertex {i}")
        if sig is None:
            sig = g[0]
            lk_first = ps.lk_signs
            first_i = i
        elif g[0] != sig:
            raise OrientationInconsistent(
                f"branch orientation flips at vertex {i}")
        if lk_prev is not None and np.any(ps.lk_signs * lk_prev < 0):
            pinches.append(i)
        lk_prev = ps.lk_signs
    if sig is None:
        raise DegenerateSecant("no regular vertex found on branch")
    if lk_prev is not None and np.any(lk_first * lk_prev < 0):
        pinches.append(first_i)
    branch.sigma = int(sig)
    branch.pinches = tuple(pinches)
    return branch


# ---------------------------------------------------------------------------
# section degrees


def _crossings(vals: np.ndarray, level: float):
    """Indices i where the periodic sequence crosses the level between
    vertex i and i+1, with the fractional position and direction."""
    d = (vals - level + 0.5) % 1.0 - 0.5
    out = []
    n = vals.size
    for i in range(n):
        a, b = d[i], d[(i + 1) % n]
        if a == 0.0:
            out.append((i, 0.0, np.sign(b - a)))
        elif a * b < 0 and abs(a - b) < 0.5:
            out.append((i, a / (a - b), np.sign(b - a)))
    return out


def section_degree(branches: list[SecantBranch], slot: int,
                   n_values: int = 5, retries: int = 100,
                   seed: int = 0) -> int:
    """Mapping degree of the section P_slot onto its curve: the signed
    count of branch crossings over a regular parameter value, each with
    local sign sigma * orientation * sign(dt_slot/ds)."""
    rng = np.random.default_rng(seed)
    degs = []
    attempts = 0
    while len(degs) < n_values:
        if attempts >= retries:
            raise NoRegularValue(
                f"no regular value after {retries} attempts")
        attempts += 1
        level = float(rng.uniform(0.0, 1.0))
        total = 0
        ok = True
        for b in branches:
            if b.sigma is None:
                orient_branch(b)
            vals = b.params[:, slot]
            for i, frac, _direction in _crossings(vals, level):
                tau = b.tangents[i]
                dt = tau[slot]
                if abs(dt) < 1e-6:
                    ok = False
                    break
                t_here = b.params[i]
                ps = classify_secant(b.curves, t_here, b.projective)
                if ps.kind != "regular":
                    ok = False
                    break
                total += int(b.sigma * b.curves[slot].orientation * np.sign(dt))
            if not ok:
                break
        if ok:
            degs.append(total)
    if len(set(degs)) != 1:
        raise NoRegularValue(f"degree not value-independent: {degs}")
    return degs[0]


# ---------------------------------------------------------------------------
# swept surface and mesh export


@dataclass(eq=False)
class SweptSurface:
    """Mesh of the union of secant lines over the traced branches.

    Projective branches are meshed on the S^3 double cover (fiber = full
    great circle, 2F rows) and embedded by stereographic projection;
    affine branches are meshed over the ray beyond the third hit, so row 0
    is the P3 section polyline.  Fiber rows follow the cross-ratio
    coordinate that sends the three hits to (inf, 1, 0), so the sections
    sit between fixed row indices and the strips are row ranges.
    """

    branches: list
    projective: bool
    fiber_res: int
    vertices: list            # per branch: (N, rows, 3) array
    sections: dict            # slot -> list of (N, 3) polylines per branch
    strip_rows: dict          # strip label -> (row_lo, row_hi) half-open
    seam_shifts: list         # per branch: row offset at the i-wraparound

    def faces(self, component: int):
        N, rows, _ = self.vertices[component].shape
        shift = self.seam_shifts[component]
        out = []
        row_max = rows if self.projective else rows - 1
        for i in range(N):
            gs = shift if i == N - 1 else 0
            for g in range(row_max):
                out.append((i * rows + g,
                            ((i + 1) % N) * rows + (g + gs) % rows,
                            ((i + 1) % N) * rows + (g + 1 + gs) % rows,
                            i * rows + (g + 1) % rows))
        return out

    def euler_characteristic(self, component: int) -> int:
        faces = self.faces(component)
        return mesh_euler_characteristic(faces)


def mesh_euler_characteristic(faces) -> int:
    verts = set()
    edges = set()
    for f in faces:
        verts.update(f)
        for a, b in zip(f, f[1:] + type(f)(f[:1])):
            edges.add((min(a, b), max(a, b)))
    return len(verts) - len(edges) + len(faces)


def _hdet2(x, y):
    return x[..., 0] * y[..., 1] - x[..., 1] * y[..., 0]


def fiber_coordinate(line: ProjectiveLine, hits3, q) -> float:
    """Cross-ratio coordinate on the line sending the three hit points to
    (inf, 1, 0); computed projectively from homogeneous RP^1 pairs."""
    xs = [np.array([np.cos(a), np.sin(a)])
          for a in (line.angle_of(hits3[0]), line.angle_of(hits3[1]),
                    line.angle_of(hits3[2]))]
    xq = np.array([np.cos(line.angle_of(q)), np.sin(line.angle_of(q))])
    num = _hdet2(xq, xs[2]) * _hdet2(xs[1], xs[0])
    den = _hdet2(xq, xs[0]) * _hdet2(xs[1], xs[2])
    if abs(den) < 1e-15:
        return np.inf
    return float(num / den)


def _fiber_point(line: ProjectiveLine, hits3, lam_pair) -> np.ndarray:
    """Solve the cross-ratio equation m(x) = lam for the 4D fiber point,
    all in homogeneous pairs (no poles)."""
    a1, a2, a3 = (line.angle_of(hits3[s]) for s in range(3))
    x1 = np.array([np.cos(a1), np.sin(a1)])
    x2 = np.array([np.cos(a2), np.sin(a2)])
    x3 = np.array([np.cos(a3), np.sin(a3)])
    k1 = _hdet2(x2, x1)
    k2 = _hdet2(x2, x3)
    la, lb = lam_pair
    # functional c(x) = lb*k1*det(x, x3) - la*k2*det(x, x1)
    cf = lb * k1 * np.array([x3[1], -x3[0]]) - la * k2 * np.array([x1[1], -x1[0]])
    sol = np.array([-cf[1], cf[0]])
    n = np.linalg.norm(sol)
    if n < 1e-15:
        sol = x1
        n = 1.0
    sol = sol / n
    phi = np.arctan2(sol[1], sol[0])
    return line.point_at(phi)


def _choose_pole(samples: np.ndarray, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    best, margin = None, -1.0
    for _ in range(64):
        cand = unit(rng.standard_normal(4))
        m = 1.0 - np.abs(samples @ cand).max()
        if m > margin:
            best, margin = cand, m
    return best


def build_swept_surface(branches: list[SecantBranch],
                        fiber_res: int = FIBER_RES) -> SweptSurface:
    """Mesh each branch over its fiber; see SweptSurface for conventions."""
    if not branches:
        raise DegenerateSecant("no branches to mesh")
    projective = branches[0].projective
    F = fiber_res
    chi = -np.pi / 2 + np.pi * (np.arange(F) + 0.5) / F
    lam_pairs = np.stack([np.sin(chi), np.cos(chi)], axis=1)

    if projective:
        raw = []      # per branch: (N, 2F, 4)
        hitq = []
        shifts = []
        for b in branches:
            cols = []
            hq = []
            for i in range(len(b)):
                t = b.params[i]
                qs = [b.curves[s].unit_eval(float(t[s])) for s in range(3)]
                line = ProjectiveLine.from_hpoints(qs[0], qs[1])
                half = np.stack([_fiber_point(line, qs, lp) for lp in lam_pairs])
                col = np.vstack([half, -half])
                # the column is defined up to a global sign, which is the same
                # as rolling the rows by F; keep adjacent columns close
                if cols:
                    prev = cols[-1][0]
                    if norm(col[0] - prev) > norm(col[F] - prev):
                        col = np.roll(col, F, axis=0)
                cols.append(col)
                hq.append(np.stack(qs))
            seam = 0
            if norm(cols[0][0] - cols[-1][0]) > norm(cols[0][F] - cols[-1][0]):
                seam = F
            shifts.append(seam)
            raw.append(np.stack(cols))
            hitq.append(np.stack(hq))
        sample = np.concatenate([r.reshape(-1, 4)[::17] for r in raw])
        pole = _choose_pole(sample)
        frame = np.linalg.svd(pole[None, :])[2][1:]
        verts = []
        sections: dict = {0: [], 1: [], 2: []}
        for r, hq in zip(raw, hitq):
            denom = 1.0 - r @ pole
            denom = np.where(np.abs(denom) < 1e-9, 1e-9, denom)
            verts.append((r @ frame.T) / denom[..., None])
            for s in range(3):
                qd = 1.0 - hq[:, s, :] @ pole
                sections[s].append((hq[:, s, :] @ frame.T) / qd[:, None])
        # lam < 0 rows (mod F) fill the strip bounded by the P3 (lam = 0)
        # and P1 (lam = inf) sections; lam in (0, 1) by P3 and P2; lam > 1
        # by P2 and P1
        strip_rows = {"3,1": (0, F // 2), "3,2": (F // 2, F // 2 + F // 4),
                      "2,1": (F // 2 + F // 4, F)}
        return SweptSurface(branches=branches, projective=True, fiber_res=F,
                            vertices=verts, sections=sections,
                            strip_rows=strip_rows, seam_shifts=shifts)

    verts = []
    sections = {0: [], 1: [], 2: []}
    u = np.arange(F) / F
    stretch = u / (1.0 - u + 1e-12)
    for b in branches:
        pts = []
        sec = {0: [], 1: [], 2: []}
        for i in range(len(b)):
            t = b.params[i]
            ps = [b.curves[s].eval(float(t[s])) for s in range(3)]
            d = unit(ps[1] - ps[0])
            if (ps[2] - ps[0]) @ d < 0:
                d = -d
            pts.append(ps[2][None, :] + stretch[:, None] * d[None, :])
            for s in range(3):
                sec[s].append(ps[s])
        verts.append(np.stack(pts))
        for s in range(3):
            sections[s].append(np.stack(sec[s]))
    return SweptSurface(branches=branches, projective=False, fiber_res=F,
                        vertices=verts, sections=sections,
                        strip_rows={"ray": (0, F)},
                        seam_shifts=[0] * len(branches))


def export_obj(surface: SweptSurface, path: str) -> None:
    """Write the mesh as OBJ quads, one group per branch component."""
    lines = ["# swept secant surface"]
    offset = 1
    for bi, V in enumerate(surface.vertices):
        lines.append(f"g branch{bi}")
        N, rows, _ = V.shape
        for i in range(N):
            for g in range(rows):
                x, y, z = V[i, g]
                lines.append(f"v {x:.12g} {y:.12g} {z:.12g}")
        for f in surface.faces(bi):
            a, b, c, d = (offset + k for k in f)
            lines.append(f"f {a} {b} {c} {d}")
        offset += N * rows
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_obj(path: str):
    """Read back vertices and faces from an OBJ file."""
    verts = []
    faces = []
    with open(path, encoding="ascii") as fh:
        for raw in fh:
            parts = raw.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                faces.append(tuple(int(x) - 1 for x in parts[1:]))
    return np.array(verts), faces
