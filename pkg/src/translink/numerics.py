"""Shared numerical machinery: batched damped Newton, finite-difference
Jacobians, kernel tangents, pseudo-arclength continuation of closed
one-dimensional solution branches, and greedy clustering."""

from __future__ import annotations

import numpy as np

from .errors import BranchNotClosed

NEWTON_TOL = 1e-10
NEWTON_MAX_ITERS = 50
FD_STEP = 1e-7
CONT_STEP = 1e-3
CONT_STEP_MIN = 1e-6
CONT_STEP_MAX = 1e-2
CONT_CORRECTOR_TOL = 1e-12
CONT_MAX_STEPS = 20000


def fd_jacobian(fun, x: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    """Central-difference Jacobian of a batched map.

    fun maps (B, n) -> (B, m); the result is (B, m, n).
    """
    x = np.asarray(x, dtype=float)
    B, n = x.shape
    cols = []
    for k in range(n):
        dx = np.zeros_like(x)
        dx[:, k] = h
        cols.append((fun(x + dx) - fun(x - dx)) / (2.0 * h))
    return np.stack(cols, axis=-1)


def _solve_damped(J: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Solve J delta = -r per batch row, Tikhonov-guarding singular rows."""
    n = J.shape[-1]
    det = np.abs(np.linalg.det(J))
    bad = det < 1e-14
    if bad.any():
        J = J.copy()
        J[bad] += 1e-10 * np.eye(n)
    try:
        return np.linalg.solve(J, -r[..., None])[..., 0]
    except np.linalg.LinAlgError:
        J = J + 1e-9 * np.eye(n)
        return np.linalg.solve(J, -r[..., None])[..., 0]


def newton_batch(fun, jac, x0: np.ndarray, tol: float = NEWTON_TOL,
                 max_iters: int = NEWTON_MAX_ITERS, step_cap: float = 0.5):
    """Damped Newton on a batch of square systems.

    fun: (B, n) -> (B, n); jac: (B, n) -> (B, n, n).  Armijo backtracking on
    the squared residual, per-row active masks.  Returns (x, ok, resnorm).
    """
    x = np.array(x0, dtype=float)
    r = fun(x)
    g = np.einsum("ij,ij->i", r, r)
    active = np.sqrt(g) > tol
    for _ in range(max_iters):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        J = jac(x[idx])
        delta = _solve_damped(J, r[idx])
        dn = np.linalg.norm(delta, axis=1)
        big = dn > step_cap
        if big.any():
            delta[big] *= (step_cap / dn[big])[:, None]
        alpha = np.ones(len(idx))
        remaining = np.ones(len(idx), dtype=bool)
        x_new = x[idx].copy()
        g_new = g[idx].copy()
        r_new = r[idx].copy()
        for _ls in range(12):
            if not remaining.any():
                break
            trial = x[idx[remaining]] + alpha[remaining, None] * delta[remaining]
            rt = fun(trial)
            gt = np.einsum("ij,ij->i", rt, rt)
            ok_step = gt <= (1.0 - 1e-4 * alpha[remaining]) * g[idx[remaining]]
            sub = np.nonzero(remaining)[0]
            acc = sub[ok_step]
            x_new[acc] = trial[ok_step]
            g_new[acc] = gt[ok_step]
            r_new[acc] = rt[ok_step]
            remaining[acc] = False
            alpha[remaining] *= 0.5
        # rows whose line search never accepted keep a tiny step anyway,
        # so stagnation is detected by the residual test below
        if remaining.any():
            sub = np.nonzero(remaining)[0]
            trial = x[idx[sub]] + alpha[sub, None] * delta[sub]
            rt = fun(trial)
            x_new[sub] = trial
            r_new[sub] = rt
            g_new[sub] = np.einsum("ij,ij->i", rt, rt)
        x[idx] = x_new
        r[idx] = r_new
        g[idx] = g_new
        active[idx] = np.sqrt(g_new) > tol
    resnorm = np.sqrt(g)
    return x, resnorm <= tol, resnorm


def null_tangent(J: np.ndarray, prev: np.ndarray | None = None) -> np.ndarray:
    """Unit kernel vector of an (n-1) x n Jacobian, sign-aligned to prev."""
    _, _, vt = np.linalg.svd(J)
    tau = vt[-1]
    if prev is not None and float(tau @ prev) < 0.0:
        tau = -tau
    return tau


def _wrap_diff(a: np.ndarray, b: np.ndarray, periodic: np.ndarray) -> np.ndarray:
    d = a - b
    if periodic is not None and periodic.any():
        d = d.copy()
        d[..., periodic] = (d[..., periodic] + 0.5) % 1.0 - 0.5
    return d


def continue_branch(fun, jac, x0: np.ndarray, periodic: np.ndarray | None = None,
                    h0: float = CONT_STEP, h_min: float = CONT_STEP_MIN,
                    h_max: float = CONT_STEP_MAX,
                    corrector_tol: float = CONT_CORRECTOR_TOL,
                    max_steps: int = CONT_MAX_STEPS,
                    tangent_sign: float = 1.0):
    """Trace the closed solution branch of fun: R^n -> R^(n-1) through x0.

    Pseudo-arclength predictor/corrector; the corrector solves the bordered
    square system [J; tau^T].  Step length adapts to corrector effort.
    Returns (points, tangents) with one row per accepted step; raises
    BranchNotClosed if the branch fails to return to x0.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    if periodic is None:
        periodic = np.zeros(n, dtype=bool)

    def correct(x_pred, tau, h):
        x = x_pred.copy()
        for _ in range(10):
            r = fun(x[None, :])[0]
            c = float(tau @ _wrap_diff(x, x_pred, periodic))
            rn = np.sqrt(float(r @ r) + c * c)
            if rn < corrector_tol:
                return x, True
            J = jac(x[None, :])[0]
            A = np.vstack([J, tau[None, :]])
            rhs = -np.concatenate([r, [c]])
            if A.shape[0] == A.shape[1]:
                try:
                    delta = np.linalg.solve(A, rhs)
                except np.linalg.LinAlgError:
                    return x, False
            else:
                delta = np.linalg.lstsq(A, rhs, rcond=None)[0]
            if np.linalg.norm(delta) > 4.0 * h + 1e-9:
                return x, False
            x = x + delta
        return x, False

    tau0 = null_tangent(jac(x0[None, :])[0]) * tangent_sign
    pts = [x0]
    taus = [tau0]
    x, tau = x0, tau0
    h = h0
    travelled = 0.0
    for _step in range(max_steps):
        while True:
            x_pred = x + h * tau
            x_new, ok = correct(x_pred, tau, h)
            if ok:
                break
            h *= 0.5
            if h < h_min:
                raise BranchNotClosed(
                    f"corrector stalled after {len(pts)} points")
        tau_new = null_tangent(jac(x_new[None, :])[0], prev=tau)
        step_len = float(np.linalg.norm(_wrap_diff(x_new, x, periodic)))
        travelled += step_len
        x, tau = x_new, tau_new
        pts.append(x.copy())
        taus.append(tau.copy())
        if travelled > 3.0 * h0 and len(pts) > 5:
            d0 = float(np.linalg.norm(_wrap_diff(x, x0, periodic)))
            if d0 < max(1.2 * h, 1e-7) and float(tau @ tau0) > 0.0:
                return np.array(pts), np.array(taus)
        h = min(h * 1.3, h_max)
    raise BranchNotClosed(f"no closure within {max_steps} steps")


def family_probe(fun, jac, x: np.ndarray, tol: float = NEWTON_TOL,
                 step: float = 1e-3, threshold: float = 5e-4) -> bool:
    """Detect whether a nearly singular root sits on a solution family.

    Pushes the root along the kernel direction of its Jacobian and lets
    Newton reconverge; an isolated root pulls the probe back, a root on a
    positive-dimensional set leaves it out at probing distance.  All
    coordinates are treated as periodic with period 1.
    """
    x = np.asarray(x, dtype=float)
    J = jac(x[None, :])[0]
    v = null_tangent(J)
    probe = (x + step * v)[None, :]
    xr, ok, _ = newton_batch(fun, jac, probe, tol=tol, max_iters=20)
    if not ok[0]:
        return False
    moved = float(np.linalg.norm((xr[0] - x + 0.5) % 1.0 - 0.5))
    return moved > threshold


def dedupe_rows(X: np.ndarray, radius: float,
                periodic: np.ndarray | None = None):
    """Greedy first-come clustering of rows within the given radius.

    Returns (representative_indices, labels).
    """
    X = np.asarray(X, dtype=float)
    reps: list[int] = []
    labels = np.empty(X.shape[0], dtype=int)
    for i, row in enumerate(X):
        if reps:
            d = _wrap_diff(row[None, :], X[reps], periodic
                           if periodic is not None else np.zeros(X.shape[1], bool))
            dist = np.linalg.norm(d, axis=1)
            k = int(np.argmin(dist))
            if dist[k] < radius:
                labels[i] = k
                continue
        reps.append(i)
        labels[i] = len(reps) - 1
    return np.array(reps, dtype=int), labels
