"""Constrained solvers for strictly convex quadratics over the weight spaces.

Everything here minimizes

    q(w) = w' H w / 2 + g' w  (+ const)

with H symmetric positive definite.  The closed forms cover the
unconstrained and sum-to-one cases; a primal active-set method handles the
unit box and the simplex; the unit sphere goes through the spectral
Lagrangian (the stationarity system (H - nu I) w = -g with ||w|| = 1, whose
minimizing root lies below lambda_min).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DegenerateInputError, SingularProblemError
from .spaces import WeightSpace, project_simplex

# H counts as degenerate when lambda_min <= DEGENERACY_RATIO * lambda_max.
DEGENERACY_RATIO = 1e-10
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class QuadraticObjective:
    """Data of q(w) = w' H w / 2 + g' w + const, with H symmetric."""

    H: np.ndarray
    g: np.ndarray
    const: float = 0.0

    def __post_init__(self):
        H = np.array(self.H, dtype=float)
        g = np.array(self.g, dtype=float).reshape(-1)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise ValueError("H must be a square matrix")
        if H.shape[0] != g.size:
            raise ValueError("H and g dimensions disagree")
        scale = np.max(np.abs(H)) if H.size else 0.0
        if scale > 0 and np.max(np.abs(H - H.T)) > SYMMETRY_TOL * max(1.0, scale):
            raise ValueError("H is not symmetric")
        H = 0.5 * (H + H.T)
        H.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "g", g)

    @property
    def dim(self) -> int:
        return self.g.size

    def value(self, w: np.ndarray) -> float:
        w = np.asarray(w, dtype=float)
        return float(0.5 * w @ self.H @ w + self.g @ w + self.const)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues and orthonormal eigenvectors of a symmetric H."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])


def spectral_decomposition(H: np.ndarray) -> SpectralDecomposition:
    lam, Q = np.linalg.eigh(np.asarray(H, dtype=float))
    return SpectralDecomposition(eigenvalues=lam, eigenvectors=Q)


def require_positive_definite(obj: QuadraticObjective) -> SpectralDecomposition:
    """PD gate shared by all solvers; no silent ridge regularization."""
    dec = spectral_decomposition(obj.H)
    lam_min, lam_max = dec.lambda_min, dec.lambda_max
    if lam_min <= DEGENERACY_RATIO * max(lam_max, 0.0) or lam_min <= 0.0:
        raise SingularProblemError(
            f"quadratic term is numerically singular or indefinite: "
            f"lambda_min={lam_min:.6e}, lambda_max={lam_max:.6e}",
            lambda_min=lam_min, lambda_max=lam_max)
    return dec


def solve_equality_qp(obj: QuadraticObjective, sum_to_one: bool = False
                      ) -> tuple[np.ndarray, float | None]:
    """Minimize q over R^S, or over the sum-to-one hyperplane.

    Returns (w, rho) with the multiplier in the closed-form convention
    w = -H^{-1}(g + rho * 1); rho is None for the unconstrained solve.
    """
    require_positive_definite(obj)
    H, g = obj.H, obj.g
    if not sum_to_one:
        return np.linalg.solve(H, -g), None
    ones = np.ones(obj.dim)
    Hinv_g = np.linalg.solve(H, g)
    Hinv_1 = np.linalg.solve(H, ones)
    rho = -(1.0 + ones @ Hinv_g) / (ones @ Hinv_1)
    return -(Hinv_g + rho * Hinv_1), float(rho)


@dataclass(frozen=True)
class InequalityResult:
    """KKT point of the box/simplex solve.

    Stationarity identity: H w + g - rho * 1 - mu + kappa = 0, with
    mu, kappa >= 0 the lower/upper bound multipliers (rho = 0 for the box).
    active_lower/active_upper index the binding bounds; bound components of
    w are exact 0.0 / 1.0.
    """

    w: np.ndarray
    rho: float
    mu: np.ndarray
    kappa: np.ndarray
    active_lower: tuple[int, ...]
    active_upper: tuple[int, ...]
    iterations: int


def solve_inequality_qp(obj: QuadraticObjective, space: WeightSpace,
                        max_iter: int | None = None) -> InequalityResult:
    """Primal active-set solve over the unit box (C) or the simplex (D).

    Warm-started from the projected unconstrained minimizer.  Entering and
    leaving constraints are picked by worst violation with lowest-index
    tie-breaking, and an iteration cap guards against cycling.
    """
    if space not in (WeightSpace.C, WeightSpace.D):
        raise ValueError(f"inequality QP handles spaces C and D, not {space}")
    require_positive_definite(obj)
    H, g = obj.H, obj.g
    S = obj.dim
    simplex = space is WeightSpace.D
    if max_iter is None:
        max_iter = 50 * (S + 1) + 100
    mult_tol = 1e-11 * (1.0 + float(np.linalg.norm(g)))
    tie_tol = 1e-12

    w_unc = np.linalg.solve(H, -g)
    if simplex:
        w = project_simplex(w_unc)
        lower = w == 0.0
        upper = np.zeros(S, dtype=bool)
    else:
        w = np.clip(w_unc, 0.0, 1.0)
        lower = w == 0.0
        upper = w == 1.0

    for it in range(1, max_iter + 1):
        free = ~(lower | upper)
        grad = H @ w + g
        nf = int(free.sum())
        p = np.zeros(S)
        lam = 0.0
        if nf:
            if simplex:
                K = np.zeros((nf + 1, nf + 1))
                K[:nf, :nf] = H[np.ix_(free, free)]
                K[:nf, nf] = 1.0
                K[nf, :nf] = 1.0
                rhs = np.zeros(nf + 1)
                rhs[:nf] = -grad[free]
                sol = np.linalg.solve(K, rhs)
                p[free] = sol[:nf]
                lam = float(sol[nf])
            else:
                p[free] = np.linalg.solve(H[np.ix_(free, free)], -grad[free])

        if np.max(np.abs(p), initial=0.0) <= 1e-13 * (1.0 + np.max(np.abs(w))):
            # Stationary on the working set: test the bound multipliers.
            if simplex:
                mu = np.where(lower, grad + lam, 0.0)
                kappa = np.zeros(S)
            else:
                mu = np.where(lower, grad, 0.0)
                kappa = np.where(upper, -grad, 0.0)
            worst_val = 0.0
            worst_idx = -1
            worst_kind = ""
            for i in range(S):
                if lower[i] and mu[i] < worst_val - tie_tol:
                    worst_val, worst_idx, worst_kind = mu[i], i, "lower"
                if upper[i] and kappa[i] < worst_val - tie_tol:
                    worst_val, worst_idx, worst_kind = kappa[i], i, "upper"
            if worst_idx < 0 or worst_val >= -mult_tol:
                mu = np.maximum(mu, 0.0)
                kappa = np.maximum(kappa, 0.0)
                return InequalityResult(
                    w=w, rho=-lam, mu=mu, kappa=kappa,
                    active_lower=tuple(np.nonzero(lower)[0]),
                    active_upper=tuple(np.nonzero(upper)[0]),
                    iterations=it)
            if worst_kind == "lower":
                lower[worst_idx] = False
            else:
                upper[worst_idx] = False
            continue

        # Longest feasible step along p; add the blocking bound if any.
        alpha = 1.0
        block = -1
        block_kind = ""
        for i in range(S):
            if not free[i]:
                continue
            if p[i] < 0.0:
                r = w[i] / (-p[i])
                if r < alpha - tie_tol:
                    alpha, block, block_kind = r, i, "lower"
            elif p[i] > 0.0 and not simplex:
                r = (1.0 - w[i]) / p[i]
                if r < alpha - tie_tol:
                    alpha, block, block_kind = r, i, "upper"
        # near-ties can leave a ratio epsilon-negative; never step backwards,
        # just activate the blocking bound
        alpha = max(alpha, 0.0)
        w = w + alpha * p
        if block >= 0:
            if block_kind == "lower":
                w[block] = 0.0
                lower[block] = True
            else:
                w[block] = 1.0
                upper[block] = True
        w[lower] = 0.0
        w[upper] = 1.0

    raise ConvergenceError(
        f"active-set solve did not converge within {max_iter} iterations")


def _sphere_f(nu: float, lam: np.ndarray, b2: np.ndarray) -> float:
    return float(np.sum(b2 / (lam - nu) ** 2))


def solve_unit_norm(obj: QuadraticObjective) -> tuple[np.ndarray, float]:
    """Minimize q over the unit sphere via the spectral Lagrangian.

    Writes b = -g, H = Q diag(lam) Q'; the minimizer is
    w = (H - nu1 I)^{-1} b with nu1 the unique root of
    f(nu) = sum_i btilde_i^2 / (lam_i - nu)^2 = 1 below lambda_min
    (there, H - nu1 I is positive definite, so this branch is the global
    minimum).  f is monotone on that branch, so a bracketed bisection is
    safe; a few Newton polish steps on 1/sqrt(f) - 1 push the root to
    machine precision.
    """
    dec = require_positive_definite(obj)
    b = -obj.g
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        raise DegenerateInputError(
            "zero right-hand side: every unit vector is stationary; "
            "use the eigenvector method instead")
    lam = dec.eigenvalues
    btilde = dec.eigenvectors.T @ b
    b2 = btilde ** 2
    lam_min = dec.lambda_min

    lo = lam_min - bnorm - 1.0
    f_hi = 0.0
    hi = lam_min
    for eps in (1e-9, 1e-12, 1e-15):
        hi = lam_min - eps * (1.0 + abs(lam_min))
        f_hi = _sphere_f(hi, lam, b2)
        if f_hi >= 1.0:
            break
    if f_hi < 1.0:
        # b has (numerically) no component on the lambda_min eigenspace and
        # the remaining mass is too small to reach the sphere.
        raise ConvergenceError(
            "no unit-norm stationary point below lambda_min "
            f"(f at the bracket end = {f_hi:.3e} < 1)")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _sphere_f(mid, lam, b2) < 1.0:
            lo = mid
        else:
            hi = mid
    nu = 0.5 * (lo + hi)
    # Newton on h(nu) = 1/sqrt(f) - 1 (increasing, nearly linear near the root).
    for _ in range(8):
        fv = _sphere_f(nu, lam, b2)
        if fv <= 0.0:
            break
        h = 1.0 / np.sqrt(fv) - 1.0
        if abs(h) <= 1e-15:
            break
        fprime = float(np.sum(2.0 * b2 / (lam - nu) ** 3))
        hprime = -0.5 * fv ** (-1.5) * fprime
        if hprime == 0.0:
            break
        step = h / hprime
        nu_new = nu - step
        if not (lo - 1.0 <= nu_new < lam_min):
            break
        nu = nu_new
    w = dec.eigenvectors @ (btilde / (lam - nu))
    return w, float(nu)


def certify_interior_uniqueness(obj: QuadraticObjective,
                                grid_points: int = 2048) -> bool:
    """True iff f(nu) > 1 throughout the open spectral interval of H.

    f is convex between consecutive poles, so each gap is scanned on a
    dense grid and the best cell is polished by ternary search.  A True
    certifies that the two sphere-stationarity roots outside the spectrum
    are the only ones, hence the unit-norm minimizer is unique.  Returns
    False both when the condition genuinely fails and when the scan is
    inconclusive too close to a pole.
    """
    dec = require_positive_definite(obj)
    b = -obj.g
    btilde = dec.eigenvectors.T @ b
    b2 = btilde ** 2
    lam = dec.eigenvalues
    span = dec.lambda_max - dec.lambda_min
    if span <= 1e-12 * max(1.0, abs(dec.lambda_max)):
        return True  # degenerate (empty) open interval
    pad = 1e-9 * max(1.0, span)
    fmin = np.inf
    for i in range(lam.size - 1):
        left, right = lam[i], lam[i + 1]
        if right - left <= 2 * pad:
            continue
        xs = np.linspace(left + pad, right - pad, grid_points)
        vals = b2[None, :] / (lam[None, :] - xs[:, None]) ** 2
        fx = vals.sum(axis=1)
        k = int(np.argmin(fx))
        fmin = min(fmin, float(fx[k]))
        # ternary polish inside the best cell (f is convex per gap)
        a = xs[max(k - 1, 0)]
        c = xs[min(k + 1, grid_points - 1)]
        for _ in range(80):
            m1 = a + (c - a) / 3.0
            m2 = c - (c - a) / 3.0
            if _sphere_f(m1, lam, b2) <= _sphere_f(m2, lam, b2):
                c = m2
            else:
                a = m1
        fmin = min(fmin, _sphere_f(0.5 * (a + c), lam, b2))
    if not np.isfinite(fmin):
        return True  # no gap wide enough to host a stationary point
    return bool(fmin > 1.0)
