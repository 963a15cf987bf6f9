"""Evaluation quantities and theoretical checks for fitted combinations:
in-sample fit, bias, forecast-error moments, variance closed forms and
bounds, uniqueness certification, sparsity conditions, the shrinkage view
of binding non-negativity constraints, and interval lengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, PanelError, SingularProblemError
from .methods import (CrossValidation, Eigenvector, GeneralizedMallows,
                      Method)
from .panel import ForecastPanel, validate_panel
from .qp import (QuadraticObjective, certify_interior_uniqueness,
                 spectral_decomposition)
from .solution import ZERO_TOL, DiagnosticsReport, WeightSolution
from .spaces import WeightSpace
from .estimators import EIG_GAP_RTOL, error_moment_matrix, mallows_inputs

UNIQUENESS_TOL = 1e-10  # lambda_min(X'X/T) must exceed this, relative to lambda_max


def _check_dims(solution: WeightSolution, panel: ForecastPanel):
    if solution.n_candidates != panel.n_candidates:
        raise PanelError(
            f"solution has {solution.n_candidates} weights but panel has "
            f"{panel.n_candidates} candidates")


def ssr(solution: WeightSolution, panel: ForecastPanel) -> float:
    """Sum of squared in-sample residuals of the combined forecast."""
    validate_panel(panel)
    _check_dims(solution, panel)
    resid = panel.y - solution.predict(panel.F)
    return float(resid @ resid)


def empirical_bias(solution: WeightSolution, panel: ForecastPanel) -> float:
    """Mean training residual (1/T) 1'(y - yhat)."""
    validate_panel(panel)
    _check_dims(solution, panel)
    return float(np.mean(panel.y - solution.predict(panel.F)))


def msfe(solution: WeightSolution, test_panel: ForecastPanel) -> float:
    """Mean squared forecast error over the rows of a test panel."""
    if test_panel.n_obs == 0:
        raise PanelError("empty test panel")
    validate_panel(test_panel)
    _check_dims(solution, test_panel)
    resid = test_panel.y - solution.predict(test_panel.F)
    return float(np.mean(resid ** 2))


@dataclass(frozen=True)
class VarianceReport:
    """Conditional forecast variance: closed form where available, bound otherwise."""

    space_method: str
    bound_kind: str  # "exact" | "bound"
    upper_bound: float
    exact_variance: float | None = None

    def to_dict(self) -> dict:
        return {"space_method": self.space_method, "bound_kind": self.bound_kind,
                "upper_bound": float(self.upper_bound),
                "exact_variance": None if self.exact_variance is None
                else float(self.exact_variance)}


def conditional_variance(space: WeightSpace, f_next: np.ndarray,
                         panel: ForecastPanel, sigma2: float) -> VarianceReport:
    """Exact conditional variance of the regression combination at f_next.

    A:  sigma2 * f'(F'F)^{-1} f
    A': adds sigma2 * (1 - beta)^2 / theta, beta = f'(F'F)^{-1} F'1
    B:  subtracts sigma2 * (f'(F'F)^{-1} 1)^2 / (1'(F'F)^{-1} 1)
    """
    validate_panel(panel)
    f_next = np.asarray(f_next, dtype=float).reshape(-1)
    if f_next.size != panel.n_candidates:
        raise PanelError("f_next length does not match the candidate count")
    F = panel.F
    H = F.T @ F
    dec = spectral_decomposition(H)
    if dec.lambda_min <= UNIQUENESS_TOL * max(dec.lambda_max, 0.0):
        raise DegenerateInputError("F'F numerically singular; variance undefined")
    Hinv_f = np.linalg.solve(H, f_next)
    base = sigma2 * float(f_next @ Hinv_f)
    if space is WeightSpace.A:
        return VarianceReport("A/regression", "exact", base, base)
    if space is WeightSpace.APRIME:
        ones = np.ones(panel.n_obs)
        F1 = F.T @ ones
        theta = panel.n_obs - float(F1 @ np.linalg.solve(H, F1))
        if theta <= 0:
            raise DegenerateInputError("theta <= 0: the intercept is collinear with F")
        beta = float(f_next @ np.linalg.solve(H, F1))
        v = base + sigma2 * (1.0 - beta) ** 2 / theta
        return VarianceReport("Aprime/regression", "exact", v, v)
    if space is WeightSpace.B:
        ones_s = np.ones(panel.n_candidates)
        phi = float(ones_s @ np.linalg.solve(H, ones_s))
        v = base - sigma2 * float(f_next @ np.linalg.solve(H, ones_s)) ** 2 / phi
        return VarianceReport("B/regression", "exact", v, v)
    raise ValueError("closed-form variance exists for spaces A, Aprime, B; "
                     "use variance_bound for C, D, E")


def variance_bound(space: WeightSpace, f_next: np.ndarray,
                   n_candidates: int) -> VarianceReport:
    """Constraint-only variance bounds: C -> S f'f, D and E -> f'f."""
    f_next = np.asarray(f_next, dtype=float).reshape(-1)
    ff = float(f_next @ f_next)
    if space is WeightSpace.C:
        return VarianceReport("C", "bound", n_candidates * ff)
    if space in (WeightSpace.D, WeightSpace.E):
        return VarianceReport(space.value, "bound", ff)
    raise ValueError("variance bounds cover spaces C, D, E")


def msfe_bound(space: WeightSpace, mu_next: float, f_next: np.ndarray,
               n_candidates: int, sigma2: float) -> float:
    """Conditional-MSFE upper bound; unbounded (inf) for spaces A and B."""
    f_next = np.asarray(f_next, dtype=float).reshape(-1)
    ff = float(f_next @ f_next)
    if space in (WeightSpace.A, WeightSpace.APRIME, WeightSpace.B):
        return math.inf
    if space is WeightSpace.C:
        return sigma2 + 2.0 * mu_next ** 2 + 3.0 * n_candidates * ff
    if space in (WeightSpace.D, WeightSpace.E):
        return sigma2 + 2.0 * mu_next ** 2 + 3.0 * ff
    raise ValueError(f"unhandled space {space}")


@dataclass(frozen=True)
class UniquenessReport:
    condition_checked: str
    holds: bool
    lambda_min_scaled: float | None = None
    multiplicity: int | None = None

    def to_dict(self) -> dict:
        return {"condition_checked": self.condition_checked, "holds": bool(self.holds),
                "lambda_min_scaled": None if self.lambda_min_scaled is None
                else float(self.lambda_min_scaled),
                "multiplicity": self.multiplicity}


def check_uniqueness(method: Method, space: WeightSpace,
                     panel: ForecastPanel) -> UniquenessReport:
    """Evaluate the uniqueness condition matching (method, space).

    Convex spaces need lambda_min of the scaled Gram matrix positive; the
    unit sphere needs the stationarity curve to clear 1 on the open
    spectral interval; the eigenvector method needs a simple smallest
    eigenvalue.
    """
    validate_panel(panel)
    T = panel.n_obs

    if isinstance(method, Eigenvector):
        M = error_moment_matrix(panel)
        dec = spectral_decomposition(M)
        gap_tol = EIG_GAP_RTOL * max(dec.lambda_max, 0.0)
        mult = int(np.sum(dec.eigenvalues <= dec.lambda_min + gap_tol))
        return UniquenessReport(
            condition_checked="smallest eigenvalue of M is simple",
            holds=mult == 1, multiplicity=mult)

    if isinstance(method, CrossValidation):
        if panel.loo is None:
            raise PanelError("CV uniqueness check needs loo forecasts")
        X = panel.loo
        label = "lambda_min(loo Gram / T) > 0"
    elif space is WeightSpace.APRIME:
        X = np.column_stack([np.ones(T), panel.F])
        label = "lambda_min(intercept-augmented Gram / T) > 0"
    else:
        X = panel.F
        label = "lambda_min(F'F / T) > 0"

    H = X.T @ X
    if space is WeightSpace.E:
        if isinstance(method, GeneralizedMallows):
            inputs = mallows_inputs(panel, variant=method.variant,
                                    phi=method.phi, sigma2=method.sigma2)
            g = inputs.psi(panel)
        else:
            g = -(X.T @ panel.y)
        dec = spectral_decomposition(H)
        if dec.lambda_min <= UNIQUENESS_TOL * max(dec.lambda_max, 0.0):
            return UniquenessReport(
                condition_checked="stationarity curve stays above 1 on the "
                                  "open spectral interval",
                holds=False, lambda_min_scaled=dec.lambda_min / T)
        holds = certify_interior_uniqueness(QuadraticObjective(H=H, g=g))
        return UniquenessReport(
            condition_checked="stationarity curve stays above 1 on the "
                              "open spectral interval",
            holds=holds, lambda_min_scaled=dec.lambda_min / T)

    dec = spectral_decomposition(H / T)
    holds = dec.lambda_min > UNIQUENESS_TOL * max(dec.lambda_max, 0.0) and dec.lambda_min > 0.0
    return UniquenessReport(condition_checked=label, holds=bool(holds),
                            lambda_min_scaled=dec.lambda_min)


@dataclass(frozen=True)
class SparsityReport:
    measured_pct: float
    zero_indices: tuple[int, ...]
    sparsity_forced: bool
    detail: str

    def to_dict(self) -> dict:
        return {"measured_pct": float(self.measured_pct),
                "zero_indices": list(self.zero_indices),
                "sparsity_forced": bool(self.sparsity_forced),
                "detail": self.detail}


def _unconstrained_center(method: Method, panel: ForecastPanel) -> np.ndarray:
    """Minimizer of the method's criterion over all of R^S."""
    try:
        if isinstance(method, CrossValidation):
            if panel.loo is None:
                raise PanelError("CV sparsity check needs loo forecasts")
            X = panel.loo
            return np.linalg.solve(X.T @ X, X.T @ panel.y)
        if isinstance(method, GeneralizedMallows):
            inputs = mallows_inputs(panel, variant=method.variant,
                                    phi=method.phi, sigma2=method.sigma2)
            return np.linalg.solve(panel.F.T @ panel.F, -inputs.psi(panel))
        return np.linalg.solve(panel.F.T @ panel.F, panel.F.T @ panel.y)
    except np.linalg.LinAlgError as exc:
        raise SingularProblemError(f"singular Gram matrix: {exc}") from exc


def check_sparsity_conditions(solution: WeightSolution, panel: ForecastPanel,
                              method: Method, zero_tol: float = ZERO_TOL,
                              grad_tol: float = 1e-8) -> SparsityReport:
    """Measured zeros plus the analytic condition that forces them.

    Space D: sparsity fails to be forced only in the degenerate tangency
    where the criterion gradient at the solution is proportional to the
    all-ones vector.  Space C: sparsity is expected when the unconstrained
    center leaves the unit box with at least one negative component.
    """
    validate_panel(panel)
    _check_dims(solution, panel)
    if solution.space not in (WeightSpace.C, WeightSpace.D):
        raise ValueError("sparsity conditions apply to spaces C and D")
    zeros = tuple(int(i) for i in np.nonzero(np.abs(solution.w) <= zero_tol)[0])
    pct = 100.0 * len(zeros) / solution.n_candidates

    if solution.space is WeightSpace.D:
        # gradient of the method's criterion at the solution: proportional
        # to the all-ones vector only in the tangency degeneracy
        if isinstance(method, CrossValidation):
            if panel.loo is None:
                raise PanelError("CV sparsity check needs loo forecasts")
            X = panel.loo
            grad = -(2.0 / panel.n_obs) * (X.T @ (panel.y - X @ solution.w))
        elif isinstance(method, GeneralizedMallows):
            inputs = mallows_inputs(panel, variant=method.variant,
                                    phi=method.phi, sigma2=method.sigma2)
            grad = (2.0 / panel.n_obs) * (panel.F.T @ (panel.F @ solution.w)
                                          + inputs.psi(panel))
        else:
            resid = panel.y - panel.F @ solution.w
            grad = -(2.0 / panel.n_obs) * (panel.F.T @ resid)
        dev = float(np.max(np.abs(grad - grad.mean())))
        scale = 1.0 + float(np.max(np.abs(grad)))
        tangent = dev <= grad_tol * scale
        return SparsityReport(
            measured_pct=pct, zero_indices=zeros, sparsity_forced=not tangent,
            detail=("gradient at the solution is proportional to 1: "
                    "tangency degeneracy, sparsity not forced") if tangent else
                   ("gradient at the solution is not proportional to 1: "
                    "boundary solutions are sparse"))

    center = _unconstrained_center(method, panel)
    outside = bool(np.any(center < 0.0) or np.any(center > 1.0))
    has_negative = bool(np.any(center < 0.0))
    forced = outside and has_negative
    return SparsityReport(
        measured_pct=pct, zero_indices=zeros, sparsity_forced=forced,
        detail=f"unconstrained center "
               f"{'outside' if outside else 'inside'} the unit box"
               f"{' with a negative component' if has_negative else ''}")


def shrinkage_covariance(Sigma: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Rank-two shrinkage Sigma - (1 rho' + rho 1') induced by binding
    non-negativity multipliers: entry (i, s) drops by rho_i + rho_s."""
    Sigma = np.asarray(Sigma, dtype=float)
    rho = np.asarray(rho, dtype=float).reshape(-1)
    if Sigma.shape != (rho.size, rho.size):
        raise ValueError("Sigma and rho dimensions disagree")
    ones = np.ones(rho.size)
    return Sigma - np.outer(ones, rho) - np.outer(rho, ones)


def error_autocorrelation(solution: WeightSolution, panel: ForecastPanel,
                          max_lag: int) -> np.ndarray:
    """Sample autocorrelations of the combination error yhat - y at lags
    1..max_lag, biased (divide-by-T) normalization."""
    validate_panel(panel)
    _check_dims(solution, panel)
    if max_lag >= panel.n_obs:
        raise PanelError(f"max_lag={max_lag} must be below T={panel.n_obs}")
    e = solution.predict(panel.F) - panel.y
    e = e - e.mean()
    denom = float(e @ e)
    if denom == 0.0:
        raise DegenerateInputError("constant error series: autocorrelation undefined")
    out = np.empty(max_lag)
    for lag in range(1, max_lag + 1):
        out[lag - 1] = float(e[lag:] @ e[:-lag]) / denom
    return out


def chebyshev_length(msfe_estimate: float, alpha: float) -> float:
    """Half-length l = sqrt(MSFE / alpha); the interval yhat +- l covers with
    probability at least 1 - alpha."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if msfe_estimate < 0.0:
        raise ValueError("MSFE estimate must be nonnegative")
    return math.sqrt(msfe_estimate / alpha)


def diagnostics_report(solution: WeightSolution, panel: ForecastPanel,
                       test_panel: ForecastPanel | None = None,
                       max_lag: int | None = None,
                       zero_tol: float = ZERO_TOL) -> DiagnosticsReport:
    """Bundle of the per-solution evaluation quantities."""
    validate_panel(panel)
    notes: list[str] = []
    if max_lag is None:
        max_lag = min(10, panel.n_obs - 1)
    try:
        acf = tuple(error_autocorrelation(solution, panel, max_lag))
    except DegenerateInputError:
        acf = ()
        notes.append("constant error series: autocorrelations omitted")
    return DiagnosticsReport(
        ssr=ssr(solution, panel),
        empirical_bias=empirical_bias(solution, panel),
        sparsity_pct=solution.sparsity_pct(zero_tol),
        error_acf=acf,
        msfe=None if test_panel is None else msfe(solution, test_panel),
        notes=tuple(notes),
    )
