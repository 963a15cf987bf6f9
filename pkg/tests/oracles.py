"""Independent brute-force oracles for the solver tests.

Everything here works by direct enumeration and local refinement; nothing
calls the package's solvers, so agreement is genuine cross-validation.
"""

import numpy as np


def quad_value(W, H, g):
    """Rows of W scored under w'Hw/2 + g'w."""
    return 0.5 * np.einsum("ij,jk,ik->i", W, H, W) + W @ g


def simplex_grid(n_vars, resolution):
    """All grid points on the simplex with the given spacing."""
    steps = int(round(1.0 / resolution))
    if n_vars == 1:
        return np.array([[1.0]])
    if n_vars == 2:
        a = np.linspace(0.0, 1.0, steps + 1)
        return np.column_stack([a, 1.0 - a])
    if n_vars == 3:
        a, b = np.meshgrid(np.linspace(0, 1, steps + 1),
                           np.linspace(0, 1, steps + 1))
        W = np.column_stack([a.ravel(), b.ravel(), 1.0 - a.ravel() - b.ravel()])
        return W[W[:, 2] >= -1e-12]
    raise ValueError("simplex grid oracle supports up to 3 variables")


def _local_axes(center, width, lo, hi, points):
    return [np.linspace(max(c - width, lo), min(c + width, hi), points)
            for c in center]


def grid_simplex_qp(H, g, resolution=1e-2, refine_stages=4):
    """Argmin of w'Hw/2 + g'w on the simplex by grid search + refinement.

    Stage 1 enumerates the whole simplex; later stages re-grid a shrinking
    window around the incumbent (free coordinates parameterized, the last
    one implied), which is valid because the objective is convex.
    """
    H = np.asarray(H, float)
    g = np.asarray(g, float)
    S = g.size
    W = simplex_grid(S, resolution)
    best = W[np.argmin(quad_value(W, H, g))]
    width = 2.0 * resolution
    for _ in range(refine_stages):
        if S == 1:
            break
        axes = _local_axes(best[:-1], width, 0.0, 1.0, 33)
        mesh = np.meshgrid(*axes)
        Wf = np.column_stack([m.ravel() for m in mesh])
        last = 1.0 - Wf.sum(axis=1)
        W = np.column_stack([Wf, last])
        W = W[last >= -1e-12]
        if W.size == 0:
            break
        best = W[np.argmin(quad_value(W, H, g))]
        width /= 8.0
    return best


def grid_box_qp(H, g, resolution=2e-2, refine_stages=5):
    """Argmin of w'Hw/2 + g'w on [0,1]^S by grid search + refinement."""
    H = np.asarray(H, float)
    g = np.asarray(g, float)
    S = g.size
    steps = int(round(1.0 / resolution))
    axes = [np.linspace(0.0, 1.0, steps + 1)] * S
    width = 2.0 * resolution
    best = None
    for _ in range(refine_stages + 1):
        mesh = np.meshgrid(*axes)
        W = np.column_stack([m.ravel() for m in mesh])
        best = W[np.argmin(quad_value(W, H, g))]
        axes = _local_axes(best, width, 0.0, 1.0, 21)
        width /= 8.0
    return best


def grid_simplex_projection(v, resolution=1e-3):
    """Euclidean-nearest simplex point: dense grid plus local bisection."""
    v = np.asarray(v, float)
    H = np.eye(v.size)
    return grid_simplex_qp(H, -v, resolution=resolution, refine_stages=5)


def coordinate_descent_box(H, g, start, sweeps=200):
    """Exact coordinate minimization on the box; refines a grid incumbent."""
    H = np.asarray(H, float)
    g = np.asarray(g, float)
    w = np.asarray(start, float).copy()
    for _ in range(sweeps):
        moved = 0.0
        for i in range(w.size):
            rest = H[i] @ w - H[i, i] * w[i] + g[i]
            cand = np.clip(-rest / H[i, i], 0.0, 1.0)
            moved = max(moved, abs(cand - w[i]))
            w[i] = cand
        if moved < 1e-14:
            break
    return w


def sphere_nu_bisection(f, lo, hi, tol=1e-12, max_iter=400):
    """Root of f(nu) = 1 on a bracket where f is monotone increasing in nu."""
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if f(mid) < 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


def random_spd(rng, n, extra=2, jitter=0.05):
    """Well-conditioned random SPD matrix."""
    A = rng.standard_normal((n + extra, n))
    return A.T @ A + jitter * np.eye(n)


def random_panel(rng, T=40, S=3, noise=0.3):
    """Generic well-conditioned forecast panel with a known target."""
    F = rng.standard_normal((T, S)) + 0.5
    w_true = rng.uniform(0.1, 0.9, size=S)
    y = F @ w_true + noise * rng.standard_normal(T)
    return y, F
