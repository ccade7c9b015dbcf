"""Dense-grid scan oracles for the transversal solvers.

The seeded solvers walk toward roots from data-driven seeds; a seeding
gap loses a root silently.  The oracles here search the whole parameter
torus on a regular grid and refine every candidate cell with a plain
least-squares descent, sharing nothing with the solver search paths, so
agreement between the two root sets is meaningful evidence that neither
side missed anything.

scan_lines covers four-slot scenes (lines in space or through the
origin-quotient), scan_circles covers six-slot circle scenes with a
three-anchor grid, and match_param_sets compares root sets in parameter
space with the wrap-around metric.
"""

from __future__ import annotations

import numpy as np
from numpy.linalg import norm

from .curves import ProjectiveCurve
from .errors import InputError, SeedBudgetExceeded
from .numerics import dedupe_rows, fd_jacobian, newton_batch

ORACLE_GRID = 48
THRESH_CELLS = 4.0        # candidate threshold in units of max speed / grid
CIRCLE_THRESH_CELLS = 3.0
CAND_CAP = 400000
REFINE_TOL = 1e-9
DEDUPE_RADIUS = 1e-6
DELTA_REP = 1e-3          # same-curve hits closer than this are degenerate
R_MAX = 1e3               # circles larger than this count as line degenerations
COLLINEAR_MARGIN = 1e-9


def _is_projective(curves) -> bool:
    flags = [isinstance(c, ProjectiveCurve) for c in curves]
    if any(flags) and not all(flags):
        raise InputError("cannot mix affine and homogeneous curves")
    return all(flags)


def _cell_grid(grid: int) -> np.ndarray:
    return (np.arange(grid) + 0.5) / grid


def _max_speed(curves, grid: int, projective: bool) -> float:
    g = np.linspace(0.0, 1.0, 4 * grid, endpoint=False)
    if projective:
        return max(float(norm(c.unit_deriv(g), axis=1).max()) for c in curves)
    return max(float(norm(c.deriv(g), axis=1).max()) for c in curves)


def _local_minima_mask(A: np.ndarray, threshold: float) -> np.ndarray:
    """Cells below the threshold that are also 1-d local minima along the
    last axis (wrap-around), which thins candidate tubes to one cell per
    crossing."""
    lo = A <= np.roll(A, 1, axis=-1)
    hi = A <= np.roll(A, -1, axis=-1)
    return lo & hi & (A < threshold)


def _combine_pair_candidates(mask_a: np.ndarray, mask_b: np.ndarray,
                             grid: int) -> np.ndarray:
    """Cartesian products of slot-3 and slot-4 candidates that share the
    same (slot-1, slot-2) cell.  Returns integer index rows (i, j, k, l)."""
    ia, ja, ka = np.nonzero(mask_a)
    ib, jb, lb = np.nonzero(mask_b)
    fa = ia * grid + ja
    fb = ib * grid + jb
    rows = []
    common = np.intersect1d(fa, fb)
    if common.size == 0:
        return np.empty((0, 4), dtype=int)
    order_a = np.argsort(fa, kind="stable")
    order_b = np.argsort(fb, kind="stable")
    fa_sorted = fa[order_a]
    fb_sorted = fb[order_b]
    for f in common:
        sa = slice(np.searchsorted(fa_sorted, f, "left"),
                   np.searchsorted(fa_sorted, f, "right"))
        sb = slice(np.searchsorted(fb_sorted, f, "left"),
                   np.searchsorted(fb_sorted, f, "right"))
        ks = ka[order_a[sa]]
        ls = lb[order_b[sb]]
        i, j = divmod(int(f), grid)
        for k in ks:
            for ell in ls:
                rows.append((i, j, k, ell))
    if len(rows) > CAND_CAP:
        raise SeedBudgetExceeded(
            f"oracle scan produced {len(rows)} candidate cells "
            f"(cap {CAND_CAP}); the scene is likely degenerate")
    return np.array(rows, dtype=int)


def _gauss_newton(fun, x0: np.ndarray, iters: int = 60,
                  tol: float = REFINE_TOL, step_cap: float = 0.25):
    """Batched Gauss-Newton for overdetermined residual rows.

    fun maps (B, n) -> (B, m) with m >= n; finite-difference Jacobians,
    normal-equation steps with a tiny Tikhonov floor.  Returns
    (x, resnorm)."""
    x = np.array(x0, dtype=float)
    r = fun(x)
    g = norm(r, axis=1)
    n = x.shape[1]
    for _ in range(iters):
        active = g > tol
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        J = fd_jacobian(fun, x[idx])
        JtJ = np.einsum("bmi,bmj->bij", J, J)
        Jtr = np.einsum("bmi,bm->bi", J, r[idx])
        JtJ += 1e-14 * np.eye(n)
        try:
            delta = np.linalg.solve(JtJ, -Jtr[..., None])[..., 0]
        except np.linalg.LinAlgError:
            JtJ += 1e-9 * np.eye(n)
            delta = np.linalg.solve(JtJ, -Jtr[..., None])[..., 0]
        dn = norm(delta, axis=1)
        big = dn > step_cap
        if big.any():
            delta[big] *= (step_cap / dn[big])[:, None]
        # halve steps that fail to decrease the residual
        trial = x[idx] + delta
        rt = fun(trial)
        gt = norm(rt, axis=1)
        for _ls in range(10):
            worse = gt >= g[idx]
            if not worse.any():
                break
            delta[worse] *= 0.5
            trial[worse] = x[idx[worse]] + delta[worse]
            rt[worse] = fun(trial[worse])
            gt[worse] = norm(rt[worse], axis=1)
        x[idx] = trial
        r[idx] = rt
        g[idx] = gt
    return x, g


def _drop_repeated_slot_degenerates(params: np.ndarray, curves) -> np.ndarray:
    """Remove rows where two slots hold the same curve at nearly the same
    parameter, which the solvers treat as degenerate hits."""
    keep = np.ones(params.shape[0], dtype=bool)
    n = len(curves)
    for a in range(n):
        for b in range(a + 1, n):
            if curves[a] is not curves[b]:
                continue
            d = np.abs(params[:, a] - params[:, b]) % 1.0
            d = np.minimum(d, 1.0 - d)
            keep &= d > DELTA_REP
    return params[keep]


def canonical_params(params: np.ndarray, curves) -> np.ndarray:
    """Sort parameters within groups of slots that hold the same curve.

    At a root the residual is invariant under permuting hits of one curve
    among its slots, so this canonical form makes root sets comparable."""
    out = np.array(params, dtype=float) % 1.0
    if out.ndim == 1:
        out = out[None, :]
    groups: dict[int, list[int]] = {}
    for s, c in enumerate(curves):
        groups.setdefault(id(c), []).append(s)
    for slots in groups.values():
        if len(slots) > 1:
            block = np.sort(out[:, slots], axis=1)
            out[:, slots] = block
    return out


def _finish(params: np.ndarray, res: np.ndarray, curves,
            tol: float) -> np.ndarray:
    if params.size == 0:
        return np.empty((0, len(curves)))
    good = params[res <= tol] % 1.0
    good = _drop_repeated_slot_degenerates(good, curves)
    if good.shape[0] == 0:
        return np.empty((0, len(curves)))
    good = canonical_params(good, curves)
    reps, _ = dedupe_rows(good, DEDUPE_RADIUS,
                          periodic=np.ones(good.shape[1], dtype=bool))
    good = good[reps]
    order = np.lexsort(good.T[::-1])
    return good[order]


# ---------------------------------------------------------------------------
# lines


def _affine_line_residual(curves):
    def fun(x):
        p = [curves[s].eval(x[:, s]) for s in range(4)]
        d = p[1] - p[0]
        dn = np.maximum(norm(d, axis=1, keepdims=True), 1e-300)
        dhat = d / dn
        return np.concatenate([np.cross(dhat, p[2] - p[0]),
                               np.cross(dhat, p[3] - p[0])], axis=1)

    return fun


def _projective_line_residual(curves):
    def fun(x):
        q = [curves[s].unit_eval(x[:, s]) for s in range(4)]
        b1 = q[0]
        u = q[1] - b1 * np.einsum("ij,ij->i", q[1], b1)[:, None]
        b2 = u / np.maximum(norm(u, axis=1, keepdims=True), 1e-300)

        def off_plane(w):
            return (w - b1 * np.einsum("ij,ij->i", w, b1)[:, None]
                    - b2 * np.einsum("ij,ij->i", w, b2)[:, None])

        return np.concatenate([off_plane(q[2]), off_plane(q[3])], axis=1)

    return fun


def _affine_scan_candidates(curves, grid: int, threshold: float):
    g = _cell_grid(grid)
    P = [c.eval(g) for c in curves]
    d = P[1][None, :, :] - P[0][:, None, :]
    dn = norm(d, axis=2)
    ok_pair = dn > 1e-9
    dhat = d / np.maximum(dn, 1e-300)[..., None]

    def slot_distance(k):
        w = P[k][None, :, :] - P[0][:, None, :]          # (i, k, 3)
        w2 = np.einsum("ikc,ikc->ik", w, w)
        dot = np.einsum("ijc,ikc->ijk", dhat, w)
        a2 = np.maximum(w2[:, None, :] - dot * dot, 0.0)
        A = np.sqrt(a2)
        A[~ok_pair] = np.inf
        return A

    mask_a = _local_minima_mask(slot_distance(2), threshold)
    mask_b = _local_minima_mask(slot_distance(3), threshold)
    idx = _combine_pair_candidates(mask_a, mask_b, grid)
    return g[idx] if idx.size else np.empty((0, 4))


def _projective_scan_candidates(curves, grid: int, threshold: float):
    g = _cell_grid(grid)
    Q = [c.unit_eval(g) for c in curves]
    dot01 = Q[0] @ Q[1].T                                # (i, j)
    u = Q[1][None, :, :] - dot01[..., None] * Q[0][:, None, :]
    un = norm(u, axis=2)
    ok_pair = un > 1e-6
    b2 = u / np.maximum(un, 1e-300)[..., None]

    def slot_distance(k):
        dot1 = Q[0] @ Q[k].T                             # (i, k)
        dot2 = np.einsum("ijc,kc->ijk", b2, Q[k])
        a2 = np.maximum(1.0 - dot1[:, None, :] ** 2 - dot2 * dot2, 0.0)
        A = np.sqrt(a2)
        A[~ok_pair] = np.inf
        return A

    mask_a = _local_minima_mask(slot_distance(2), threshold)
    mask_b = _local_minima_mask(slot_distance(3), threshold)
    idx = _combine_pair_candidates(mask_a, mask_b, grid)
    return g[idx] if idx.size else np.empty((0, 4))


def scan_lines(curves, grid: int = ORACLE_GRID,
               refine_tol: float = REFINE_TOL) -> np.ndarray:
    """Parameter rows (N, 4) of every transversal line found by a dense
    4-torus scan with least-squares refinement.

    Rows are canonicalized within repeated-curve slot groups, deduped and
    sorted, so the result is directly comparable to solver root params.
    """
    if len(curves) != 4:
        raise InputError("expected exactly four slot curves")
    projective = _is_projective(curves)
    vmax = _max_speed(curves, grid, projective)
    threshold = THRESH_CELLS * vmax / grid
    if projective:
        seeds = _projective_scan_candidates(curves, grid, threshold)
        fun = _projective_line_residual(curves)
    else:
        seeds = _affine_scan_candidates(curves, grid, threshold)
        fun = _affine_line_residual(curves)
    if seeds.shape[0] == 0:
        return np.empty((0, 4))
    x, res = _gauss_newton(fun, seeds)
    return _finish(x, res, curves, refine_tol)


# ---------------------------------------------------------------------------
# circles


def _circle_rows(p1, p3, p5):
    """Batched circumcircle through three point rows: returns (center,
    unit normal, radius, good)."""
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


def _circle_residual(curves, anchors=(0, 2, 4)):
    others = [i for i in range(6) if i not in anchors]

    def fun(x):
        p = [curves[i].eval(x[:, i]) for i in range(6)]
        center, normal, radius, good = _circle_rows(
            p[anchors[0]], p[anchors[1]], p[anchors[2]])
        comps = []
        for j in others:
            r = p[j] - center
            h = np.einsum("ij,ij->i", r, normal)
            rho = norm(r - h[:, None] * normal, axis=1) - radius
            comps.append(h)
            comps.append(rho)
        out = np.stack(comps, axis=1)
        out[~good] = 1e6
        return out

    return fun


def scan_circles(curves, grid: int = ORACLE_GRID,
                 refine_tol: float = REFINE_TOL,
                 chunk: int = 16384) -> np.ndarray:
    """Parameter rows (N, 6) of every transversal circle found by a dense
    anchor scan over slots (1, 3, 5) with full refinement.

    For each anchor triple the circle through the three points is formed
    and the remaining slots score their nearest sample; every triple whose
    total score clears the cell-size threshold seeds a six-parameter
    refinement.  No minima thinning: clustered roots with adjacent anchor
    cells must all keep their own seeds."""
    if len(curves) != 6:
        raise InputError("expected exactly six slot curves")
    if _is_projective(curves):
        raise InputError("circle scenes take affine curves only")
    anchors = (0, 2, 4)
    others = [1, 3, 5]
    g = _cell_grid(grid)
    m = 2 * grid
    s_grid = np.arange(m) / m
    other_pts = [curves[j].eval(s_grid) for j in others]
    vmax = _max_speed(curves, grid, False)
    threshold = CIRCLE_THRESH_CELLS * vmax / grid

    ii, jj, kk = np.meshgrid(np.arange(grid), np.arange(grid),
                             np.arange(grid), indexing="ij")
    trip = np.stack([ii.ravel(), jj.ravel(), kk.ravel()], axis=1)
    P0 = curves[anchors[0]].eval(g)
    P2 = curves[anchors[1]].eval(g)
    P4 = curves[anchors[2]].eval(g)

    total = np.empty(trip.shape[0])
    s_init = np.empty((trip.shape[0], 3))
    for lo in range(0, trip.shape[0], chunk):
        sl = slice(lo, min(lo + chunk, trip.shape[0]))
        rows = trip[sl]
        center, normal, radius, good = _circle_rows(
            P0[rows[:, 0]], P2[rows[:, 1]], P4[rows[:, 2]])
        tot = np.zeros(rows.shape[0])
        for col, pts in enumerate(other_pts):
            r = pts[None, :, :] - center[:, None, :]
            h = np.einsum("bmj,bj->bm", r, normal)
            rho = norm(r - h[..., None] * normal[:, None, :], axis=-1)
            dist = np.hypot(h, rho - radius[:, None])
            tot += dist.min(axis=1)
            s_init[sl, col] = s_grid[np.argmin(dist, axis=1)]
        tot[~good] = np.inf
        total[sl] = tot

    cand = total < threshold
    if cand.sum() > CAND_CAP:
        raise SeedBudgetExceeded(
            f"oracle scan produced {int(cand.sum())} candidate cells "
            f"(cap {CAND_CAP}); the scene is likely degenerate")
    if not cand.any():
        return np.empty((0, 6))

    seeds = np.empty((int(cand.sum()), 6))
    seeds[:, anchors] = g[trip[cand]]
    seeds[:, others] = s_init[cand]
    fun = _circle_residual(curves, anchors)

    def jac(x):
        return fd_jacobian(fun, x)

    x, ok, res = newton_batch(fun, jac, seeds, tol=refine_tol, max_iters=80)
    params = _finish(x, res, curves, refine_tol)
    if params.shape[0] == 0:
        return params
    # drop line degenerations the circle solver also excludes
    p = [curves[i].eval(params[:, i]) for i in anchors]
    _, _, radius, good = _circle_rows(*p)
    return params[good & (radius <= R_MAX)]


# ---------------------------------------------------------------------------
# comparison


def match_param_sets(a: np.ndarray, b: np.ndarray, tol: float = 1e-6,
                     curves=None) -> bool:
    """True when the two parameter-row sets agree within the wrap-around
    metric, pairing rows one to one.  When curves are given both sides are
    canonicalized within repeated-curve slot groups first."""
    a = np.asarray(a, dtype=float) % 1.0
    b = np.asarray(b, dtype=float) % 1.0
    if len(a) != len(b):
        return False
    if len(a) == 0:
        return True
    a = a.reshape(len(a), -1)
    b = b.reshape(len(b), -1)
    if curves is not None:
        a = canonical_params(a, curves)
        b = canonical_params(b, curves)
    used = np.zeros(b.shape[0], dtype=bool)
    for row in a:
        d = np.abs(row[None, :] - b) % 1.0
        d = np.minimum(d, 1.0 - d)
        dist = norm(d, axis=1)
        dist[used] = np.inf
        k = int(np.argmin(dist))
        if dist[k] > tol:
            return False
        used[k] = True
    return True
