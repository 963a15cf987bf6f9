"""Weight estimation: every criterion crossed with every compatible space.

All fitters return a WeightSolution whose multipliers follow the
closed-form conventions (see solution.Multipliers).  Objectives are built
as q(w) = w' (X'X) w / 2 + g' w, which scales the textbook criteria by
one half: minimizers, active sets and multipliers are exactly the
closed-form quantities.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateInputError, PanelError
from .methods import (CrossValidation, Eigenvector, GeneralizedMallows,
                      Performance, Regression, SoftPenalized)
from .panel import ForecastPanel, validate_panel
from .qp import (QuadraticObjective, require_positive_definite,
                 solve_equality_qp, solve_inequality_qp, solve_unit_norm,
                 spectral_decomposition)
from .solution import Multipliers, WeightSolution
from .spaces import WeightSpace

# Multiplicity gap for the eigenvector method, relative to lambda_max.
EIG_GAP_RTOL = 1e-9


def _solve_over_space(obj: QuadraticObjective, space: WeightSpace,
                      method: dict) -> WeightSolution:
    """Dispatch one quadratic criterion over A/B/C/D/E."""
    if space in (WeightSpace.A, WeightSpace.APRIME):
        w, _ = solve_equality_qp(obj, sum_to_one=False)
        return WeightSolution(w=w, space=space, method=method,
                              unique_certified=True)
    if space is WeightSpace.B:
        w, rho = solve_equality_qp(obj, sum_to_one=True)
        return WeightSolution(w=w, space=space, method=method,
                              multipliers=Multipliers(rho0=rho),
                              unique_certified=True)
    if space in (WeightSpace.C, WeightSpace.D):
        res = solve_inequality_qp(obj, space)
        mult = Multipliers(
            rho0=-res.rho if space is WeightSpace.D else None,
            box=tuple(res.mu),
            box_upper=tuple(res.kappa) if space is WeightSpace.C else None)
        return WeightSolution(w=res.w, space=space, method=method,
                              multipliers=mult,
                              active_set=res.active_lower + res.active_upper,
                              unique_certified=True)
    if space is WeightSpace.E:
        w, nu = solve_unit_norm(obj)
        return WeightSolution(w=w, space=space, method=method,
                              multipliers=Multipliers(nu=nu))
    raise ValueError(f"unhandled space {space}")


def _gram(F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return F.T @ F, F.T


def fit_regression(panel: ForecastPanel, space: WeightSpace) -> WeightSolution:
    """Least-squares weights over the requested space.

    Space Aprime fits a free intercept alongside the weights; its residuals
    sum to zero by construction (empirical unbiasedness).
    """
    validate_panel(panel)
    y, F = panel.y, panel.F
    H, Ft = _gram(F)
    method = Regression().describe()
    if space is not WeightSpace.APRIME:
        return _solve_over_space(QuadraticObjective(H=H, g=-(Ft @ y)), space, method)

    # Intercept case: w_Aprime = w_A - delta0 * (F'F)^{-1} F'1, with
    # delta0 = 1'e_hat / theta and theta = T - 1'F (F'F)^{-1} F'1.
    T = panel.n_obs
    ones = np.ones(T)
    Ftil = np.column_stack([ones, F])
    require_positive_definite(QuadraticObjective(H=Ftil.T @ Ftil, g=np.zeros(F.shape[1] + 1)))
    wA, _ = solve_equality_qp(QuadraticObjective(H=H, g=-(Ft @ y)), sum_to_one=False)
    Hinv_F1 = np.linalg.solve(H, Ft @ ones)
    theta = T - ones @ F @ Hinv_F1
    delta0 = float((y - F @ wA).sum() / theta)
    w = wA - delta0 * Hinv_F1
    return WeightSolution(w=w, space=space, method=method, intercept=delta0,
                          unique_certified=True)


def estimate_sigma2(panel: ForecastPanel) -> float:
    """Residual variance of the full model with every candidate forecast,
    with a degrees-of-freedom correction: ||y - P_F y||^2 / (T - S)."""
    validate_panel(panel)
    T, S = panel.F.shape
    if T <= S:
        raise PanelError(f"sigma2 needs T > S, got T={T}, S={S}")
    H, Ft = _gram(panel.F)
    obj = QuadraticObjective(H=H, g=-(Ft @ panel.y))
    w, _ = solve_equality_qp(obj, sum_to_one=False)
    resid = panel.y - panel.F @ w
    return float(resid @ resid / (T - S))


class MallowsInputs:
    """Inputs of the generalized Mallows criterion: sigma2, k and (kl) phi."""

    def __init__(self, sigma2: float, k: np.ndarray,
                 phi: np.ndarray | None = None, variant: str = "mallows"):
        if sigma2 < 0:
            raise ValueError("sigma2 must be nonnegative")
        self.sigma2 = float(sigma2)
        self.k = np.asarray(k, dtype=float).reshape(-1)
        if np.any(self.k < 0):
            raise ValueError("k entries must be nonnegative")
        self.phi = None if phi is None else np.asarray(phi, dtype=float).reshape(-1)
        if variant not in ("mallows", "kl"):
            raise ValueError(f"unknown variant {variant!r}")
        if variant == "kl" and self.phi is None:
            raise ValueError("kl variant requires phi")
        self.variant = variant

    def psi(self, panel: ForecastPanel) -> np.ndarray:
        """psi = sigma2 * k - F'y (mallows) or sigma2 * k - phi - F'y (kl)."""
        psi = self.sigma2 * self.k - panel.F.T @ panel.y
        if self.variant == "kl":
            psi = psi - self.phi
        return psi


def mallows_inputs(panel: ForecastPanel, variant: str = "mallows",
                   phi: np.ndarray | None = None,
                   sigma2: float | None = None) -> MallowsInputs:
    """Standard recipe: sigma2 from the full model, k from the panel's q."""
    if panel.q is None:
        raise PanelError("generalized Mallows needs per-candidate q (tr P_s)")
    if sigma2 is None:
        sigma2 = estimate_sigma2(panel)
    return MallowsInputs(sigma2=sigma2, k=np.asarray(panel.q, dtype=float),
                         phi=None if phi is None else np.asarray(phi, dtype=float),
                         variant=variant)


def fit_generalized_mallows(panel: ForecastPanel, inputs: MallowsInputs,
                            space: WeightSpace) -> WeightSolution:
    """Minimize the generalized Mallows criterion over the requested space."""
    validate_panel(panel)
    if space is WeightSpace.APRIME:
        raise ValueError("generalized Mallows is defined without an intercept; "
                         "use spaces A, B, C, D or E")
    if inputs.k.size != panel.n_candidates:
        raise PanelError(f"k has length {inputs.k.size}, expected {panel.n_candidates}")
    if inputs.phi is not None and inputs.phi.size != panel.n_candidates:
        raise PanelError(f"phi has length {inputs.phi.size}, expected {panel.n_candidates}")
    H = panel.F.T @ panel.F
    method = GeneralizedMallows(
        variant=inputs.variant, sigma2=inputs.sigma2,
        phi=None if inputs.phi is None else tuple(inputs.phi)).describe()
    return _solve_over_space(QuadraticObjective(H=H, g=inputs.psi(panel)),
                             space, method)


def build_loo_forecasts(panel: ForecastPanel,
                        hat_diagonals: np.ndarray) -> ForecastPanel:
    """Fill the panel's leave-one-out forecasts from per-candidate leverages.

    For linear candidates, f[-t]_{t,s} = (f_{t,s} - h_{tt,s} y_t) / (1 - h_{tt,s}).
    """
    validate_panel(panel)
    h = np.asarray(hat_diagonals, dtype=float)
    if h.shape != panel.F.shape:
        raise PanelError(
            f"hat_diagonals shape {h.shape} does not match F shape {panel.F.shape}")
    if np.any(h < 0.0):
        raise PanelError("hat diagonals must be nonnegative")
    if np.any(h >= 1.0):
        worst = int(np.argmax(h.max(axis=1)))
        raise PanelError(
            f"leverage-one observation (h >= 1) at row {worst}: "
            "leave-one-out forecasts are undefined")
    loo = (panel.F - h * panel.y[:, None]) / (1.0 - h)
    return panel.with_loo(loo)


def fit_cv(panel: ForecastPanel, space: WeightSpace) -> WeightSolution:
    """Leave-one-out CV weights: least squares of y on the loo forecasts."""
    validate_panel(panel)
    if panel.loo is None:
        raise PanelError("CV weights need the panel's loo forecasts "
                         "(supply them or use build_loo_forecasts)")
    if space is WeightSpace.APRIME:
        raise ValueError("CV weights are defined without an intercept; "
                         "use spaces A, B, C, D or E")
    Fbar = panel.loo
    H = Fbar.T @ Fbar
    obj = QuadraticObjective(H=H, g=-(Fbar.T @ panel.y))
    return _solve_over_space(obj, space, CrossValidation().describe())


def smoothed_ic_weights(ic: np.ndarray) -> np.ndarray:
    """exp(-IC_s/2) normalized, computed max-shifted in log space."""
    z = -0.5 * np.asarray(ic, dtype=float)
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def inverse_loss_weights(loss: np.ndarray) -> np.ndarray:
    """Normalized reciprocals of a strictly positive per-model loss."""
    loss = np.asarray(loss, dtype=float).reshape(-1)
    if np.any(loss <= 0):
        raise ValueError("inverse-loss weights need strictly positive losses")
    inv = 1.0 / loss
    return inv / inv.sum()


def performance_weights(q: np.ndarray, n_obs: int, sigma2_s: np.ndarray,
                        a: float, b: float, c: float) -> np.ndarray:
    """General performance family w_s prop. to a^q_s (n-q_s)^b (sigma2_s)^c.

    Log-space with a max shift, so huge |c| (the smoothed-IC families use
    c = -n/2) cannot overflow.  Smoothed AIC is (a,b,c) = (e^-1, 0, -n/2),
    smoothed BIC is (n^-1/2, 0, -n/2), Bates-Granger is (1, 1, -1).
    """
    sigma2_s = np.asarray(sigma2_s, dtype=float).reshape(-1)
    q = np.asarray(q, dtype=float).reshape(-1)
    if not (a > 0 and b >= 0 and c <= 0):
        raise ValueError("performance family needs a > 0, b >= 0, c <= 0")
    if np.any(sigma2_s <= 0):
        raise ValueError("per-candidate variances must be strictly positive")
    logw = q * np.log(a) + c * np.log(sigma2_s)
    if b != 0.0:
        if np.any(n_obs - q <= 0):
            raise ValueError("need q_s < n for the (n - q_s)^b factor")
        logw = logw + b * np.log(float(n_obs) - q)
    logw = logw - logw.max()
    e = np.exp(logw)
    return e / e.sum()


_FAMILY_ABC = {
    "bates_granger": lambda n: (1.0, 1.0, -1.0),
    "saic": lambda n: (float(np.exp(-1.0)), 0.0, -n / 2.0),
    "sbic": lambda n: (float(n) ** -0.5, 0.0, -n / 2.0),
}


def candidate_mle_variances(panel: ForecastPanel) -> np.ndarray:
    """Per-candidate MLE error variances: mean squared deviation from y."""
    return np.mean((panel.y[:, None] - panel.F) ** 2, axis=0)


def fit_performance(panel: ForecastPanel, spec: Performance) -> WeightSolution:
    """Performance-based weights; the result lies on the simplex by construction."""
    validate_panel(panel)
    if spec.family == "inverse_loss":
        loss = np.asarray(spec.loss, dtype=float)
        if loss.size != panel.n_candidates:
            raise PanelError(f"loss has length {loss.size}, expected "
                             f"{panel.n_candidates}")
        w = inverse_loss_weights(loss)
    else:
        if panel.q is None:
            raise PanelError("performance weights need per-candidate q")
        sigma2_s = candidate_mle_variances(panel)
        if np.any(sigma2_s <= 0):
            raise DegenerateInputError(
                "a candidate fits y exactly; its MLE variance is zero")
        if spec.family == "general":
            a, b, c = spec.a, spec.b, spec.c
        else:
            a, b, c = _FAMILY_ABC[spec.family](panel.n_obs)
        w = performance_weights(panel.q, panel.n_obs, sigma2_s, a, b, c)
    return WeightSolution(w=w, space=WeightSpace.D, method=spec.describe(),
                          unique_certified=True)


def error_moment_matrix(panel: ForecastPanel) -> np.ndarray:
    """M = (1/T) (y 1' - F)' (y 1' - F): second moments of candidate errors."""
    R = panel.y[:, None] - panel.F
    return (R.T @ R) / panel.n_obs


def fit_eigenvector(panel: ForecastPanel) -> WeightSolution:
    """Unit eigenvector of M's smallest eigenvalue, sign-normalized so the
    first component above the noise floor is positive.

    A repeated smallest eigenvalue (within EIG_GAP_RTOL * lambda_max) is
    flagged via unique_certified=False; the deterministic LAPACK
    representative is still returned.
    """
    validate_panel(panel)
    M = error_moment_matrix(panel)
    dec = spectral_decomposition(M)
    w = dec.eigenvectors[:, 0].copy()
    nz = np.nonzero(np.abs(w) > 1e-14)[0]
    if nz.size and w[nz[0]] < 0:
        w = -w
    gap_tol = EIG_GAP_RTOL * max(dec.lambda_max, 0.0)
    multiplicity = int(np.sum(dec.eigenvalues <= dec.lambda_min + gap_tol))
    return WeightSolution(w=w, space=WeightSpace.E,
                          method=Eigenvector().describe(),
                          unique_certified=multiplicity == 1)


def fit_soft_penalized(panel: ForecastPanel, spec: SoftPenalized) -> WeightSolution:
    """Unconstrained solve of the squared loss plus a soft constraint penalty.

    flavor 'c': ||y-Fw||^2 - mu'w - nu'(1-w)   -> w = (F'F)^{-1}(F'y + (mu-nu)/2)
    flavor 'd': ||y-Fw||^2 + lam 1'w - mu'w    -> w = (F'F)^{-1}(F'y + (mu-lam 1)/2)
    flavor 'e': ||y-Fw||^2 + lam w'w           -> w = (F'F + lam I)^{-1} F'y
    """
    validate_panel(panel)
    y, F = panel.y, panel.F
    S = panel.n_candidates
    mu = np.zeros(S) if spec.mu is None else np.asarray(spec.mu, dtype=float)
    nu = np.zeros(S) if spec.nu is None else np.asarray(spec.nu, dtype=float)
    if mu.size != S or nu.size != S:
        raise PanelError("mu/nu length must match the candidate count")
    H = F.T @ F
    if spec.flavor == "e":
        H = H + spec.lam * np.eye(S)
        g = -(F.T @ y)
    elif spec.flavor == "c":
        g = -(F.T @ y) - 0.5 * (mu - nu)
    else:
        g = -(F.T @ y) - 0.5 * (mu - spec.lam * np.ones(S))
    w, _ = solve_equality_qp(QuadraticObjective(H=H, g=g), sum_to_one=False)
    return WeightSolution(w=w, space=WeightSpace.A, method=spec.describe(),
                          unique_certified=True)
