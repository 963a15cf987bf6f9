"""Monte Carlo harness: the 4 regressor cases x 4 candidate-set designs,
every requested criterion/space pair, and table emitters for the four
metrics (SSR, empirical bias, test MSFE, weight sparsity).
"""

from __future__ import annotations

import concurrent.futures
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import PanelError, WeightscapeError
from .methods import Performance
from .panel import ForecastPanel
from .solution import ZERO_TOL, WeightSolution
from .spaces import WeightSpace
from . import estimators
from .diagnostics import empirical_bias, msfe, ssr

THREADS_ENV = "WEIGHTSCAPE_THREADS"

BETA_PROFILES = ("one-over-j-squared", "one-over-j", "constant")
DEFAULT_BETA_PROFILE = "one-over-j-squared"
DEFAULT_BETA_SCALE = 1.5


def beta_profile(name: str, d: int, scale: float = DEFAULT_BETA_SCALE) -> np.ndarray:
    """Coefficient profiles for the data-generating process."""
    j = np.arange(1, d + 1, dtype=float)
    if name == "one-over-j-squared":
        return scale / j ** 2
    if name == "one-over-j":
        return scale / j
    if name == "constant":
        return scale * np.ones(d)
    raise ValueError(f"unknown beta profile {name!r}; "
                     f"expected one of {BETA_PROFILES}")


@dataclass(frozen=True)
class ScenarioSpec:
    """One cell of the experiment grid."""

    case: int
    candidate_set: int
    n_train: int = 2000
    n_test: int = 1000
    d: int = 42
    beta: np.ndarray | None = None
    seed: int = 0
    replications: int = 20

    def __post_init__(self):
        if self.case not in (1, 2, 3, 4):
            raise ValueError("case must be 1..4")
        if self.candidate_set not in (1, 2, 3, 4):
            raise ValueError("candidate_set must be 1..4")
        if self.d < 5:
            raise ValueError("d must be at least 5 for the candidate-set patterns")
        if self.n_train < self.d + 2:
            raise ValueError("n_train must exceed d + 1")
        if self.n_test < 1:
            raise ValueError("n_test must be positive")
        beta = (beta_profile(DEFAULT_BETA_PROFILE, self.d) if self.beta is None
                else np.array(self.beta, dtype=float))
        if beta.size != self.d:
            raise ValueError(f"beta has length {beta.size}, expected d={self.d}")
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)


def _scale_matrix(case: int, d: int) -> np.ndarray:
    if case in (1, 3):
        return np.eye(d)
    idx = np.arange(d)
    return 0.7 ** np.abs(idx[:, None] - idx[None, :])


def generate_regressors(case: int, T: int, d: int,
                        rng: np.random.Generator) -> np.ndarray:
    """Draw the T x d regressor block for one case.

    Cases 1-2: centered Gaussian with identity / 0.7^|i-j| covariance.
    Cases 3-4: multivariate t with 2 degrees of freedom on the same scale
    matrices, one chi-square mixing draw per observation row.
    """
    if d < 1:
        raise ValueError("d must be positive")
    scale = _scale_matrix(case, d)
    L = np.linalg.cholesky(scale)
    z = rng.standard_normal((T, d)) @ L.T
    if case in (3, 4):
        dof = 2.0
        g = rng.chisquare(dof, size=T)
        z = z * np.sqrt(dof / g)[:, None]
    return z


def build_candidate_sets(candidate_set: int, d: int) -> list[np.ndarray]:
    """0-based regressor index groups for one candidate-set design.

    Set 1: disjoint blocks of four over all d regressors.
    Set 2: the same blocks with the last two regressors dropped.
    Set 3: overlapping windows {s+2 .. min(s+4, d)} (1-based), s = 1..ceil(d/4).
    Set 4: the Set-3 windows with the last two regressors dropped.
    """
    if d < 5:
        raise ValueError("candidate-set patterns need d >= 5")
    groups: list[np.ndarray] = []
    if candidate_set == 1:
        for s in range(1, -(-d // 4) + 1):
            groups.append(np.arange(4 * (s - 1) + 1, min(4 * s, d) + 1))
    elif candidate_set == 2:
        dd = d - 2
        for s in range(1, -(-dd // 4) + 1):
            groups.append(np.arange(4 * (s - 1) + 1, min(4 * s, dd) + 1))
    elif candidate_set == 3:
        for s in range(1, -(-d // 4) + 1):
            groups.append(np.arange(s + 2, min(s + 4, d) + 1))
    elif candidate_set == 4:
        dd = d - 2
        for s in range(1, -(-dd // 4) + 1):
            groups.append(np.arange(s + 2, min(s + 4, dd) + 1))
    else:
        raise ValueError("candidate_set must be 1..4")
    out = [g - 1 for g in groups]
    if any(g.size == 0 for g in out):
        raise ValueError(f"d={d} is too small for candidate set {candidate_set}")
    return out


def fit_candidates(X: np.ndarray, y: np.ndarray, groups: list[np.ndarray]
                   ) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[np.ndarray]]:
    """Per-group OLS candidates on the training block.

    Returns (F, hat_diagonals, q, coefs): the in-sample projection
    forecasts P_s y, the leverages diag(P_s), the trace q_s = |group|, and
    the fitted coefficient vectors for out-of-sample forecasting.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    T = y.size
    S = len(groups)
    F = np.empty((T, S))
    hat = np.empty((T, S))
    q = np.empty(S)
    coefs: list[np.ndarray] = []
    for s, g in enumerate(groups):
        Xg = X[:, g]
        G = Xg.T @ Xg
        try:
            Ginv = np.linalg.inv(G)
        except np.linalg.LinAlgError as exc:
            raise PanelError(f"singular Gram matrix in candidate group {s}") from exc
        beta = Ginv @ (Xg.T @ y)
        F[:, s] = Xg @ beta
        hat[:, s] = np.einsum("ij,jk,ik->i", Xg, Ginv, Xg)
        q[s] = g.size
        coefs.append(beta)
    return F, hat, q, coefs


# (method token, space) pairs in the canonical reporting order.
GRID_COMBOS: tuple[tuple[str, WeightSpace], ...] = (
    ("reg", WeightSpace.APRIME),
    ("reg", WeightSpace.A), ("reg", WeightSpace.B), ("reg", WeightSpace.C),
    ("reg", WeightSpace.D), ("reg", WeightSpace.E),
    ("ma", WeightSpace.A), ("ma", WeightSpace.B), ("ma", WeightSpace.C),
    ("ma", WeightSpace.D), ("ma", WeightSpace.E),
    ("pf:saic", WeightSpace.D), ("pf:sbic", WeightSpace.D),
    ("eig", WeightSpace.E),
)

CV_COMBOS: tuple[tuple[str, WeightSpace], ...] = (
    ("cv", WeightSpace.A), ("cv", WeightSpace.B), ("cv", WeightSpace.C),
    ("cv", WeightSpace.D), ("cv", WeightSpace.E),
)

METRICS = ("ssr", "bias", "msfe", "sparsity")


def combos_for_methods(tokens: list[str]) -> tuple[tuple[str, WeightSpace], ...]:
    """Grid combos restricted to the requested method tokens, canonical order."""
    known = GRID_COMBOS + CV_COMBOS
    out = [c for c in known if c[0] in tokens]
    unknown = set(tokens) - {c[0] for c in known}
    if unknown:
        raise ValueError(f"unknown grid method tokens: {sorted(unknown)}")
    return tuple(out)


def combo_label(combo: tuple[str, WeightSpace]) -> str:
    return f"{combo[0]}|{combo[1].value}"


@dataclass
class ReplicationResult:
    """Metric values per combo for a single replication (NaN = failed cell)."""

    values: dict[str, np.ndarray]
    failures: dict[str, str] = field(default_factory=dict)
    weights: dict[str, np.ndarray] = field(default_factory=dict)
    y_max: float = 0.0  # max |y_t| of the training draw, for bias scaling


@dataclass
class ScenarioResult:
    spec: ScenarioSpec
    combos: tuple[tuple[str, WeightSpace], ...]
    replications: list[ReplicationResult]

    def per_rep(self, metric: str) -> np.ndarray:
        return np.vstack([r.values[metric] for r in self.replications])

    def mean(self, metric: str) -> np.ndarray:
        return self.per_rep(metric).mean(axis=0)

    def failures(self) -> list[str]:
        out = []
        for i, r in enumerate(self.replications):
            out.extend(f"rep {i}: {label}: {msg}" for label, msg in r.failures.items())
        return out


def _fit_combo(token: str, space: WeightSpace, panel: ForecastPanel,
               loo_panel: ForecastPanel | None,
               mallows: estimators.MallowsInputs | None) -> WeightSolution:
    if token == "reg":
        return estimators.fit_regression(panel, space)
    if token == "ma":
        if mallows is None:
            raise PanelError("mallows inputs unavailable")
        return estimators.fit_generalized_mallows(panel, mallows, space)
    if token == "cv":
        if loo_panel is None:
            raise PanelError("leave-one-out forecasts unavailable")
        return estimators.fit_cv(loo_panel, space)
    if token == "pf:saic":
        return estimators.fit_performance(panel, Performance(family="saic"))
    if token == "pf:sbic":
        return estimators.fit_performance(panel, Performance(family="sbic"))
    if token == "pf:bg":
        return estimators.fit_performance(panel, Performance(family="bates_granger"))
    if token == "eig":
        return estimators.fit_eigenvector(panel)
    raise ValueError(f"unknown method token {token!r}")


def run_replication(spec: ScenarioSpec, rep: int,
                    combos: tuple[tuple[str, WeightSpace], ...]
                    ) -> ReplicationResult:
    """Draw one train/test pair, fit candidates, evaluate every combo."""
    ss = np.random.SeedSequence(
        entropy=(int(spec.seed), int(spec.case), int(spec.candidate_set), int(rep)))
    rng = np.random.default_rng(ss)
    X = generate_regressors(spec.case, spec.n_train, spec.d, rng)
    y = X @ spec.beta + rng.standard_normal(spec.n_train)
    X_test = generate_regressors(spec.case, spec.n_test, spec.d, rng)
    y_test = X_test @ spec.beta + rng.standard_normal(spec.n_test)

    groups = build_candidate_sets(spec.candidate_set, spec.d)
    F, hat, q, coefs = fit_candidates(X, y, groups)
    F_test = np.column_stack([X_test[:, g] @ b for g, b in zip(groups, coefs)])
    panel = ForecastPanel(y=y, F=F, q=q)
    test_panel = ForecastPanel(y=y_test, F=F_test, q=q)

    need_cv = any(token == "cv" for token, _ in combos)
    loo_panel = None
    loo_error: str | None = None
    if need_cv:
        try:
            loo_panel = estimators.build_loo_forecasts(panel, hat)
        except WeightscapeError as exc:
            loo_error = str(exc)
    need_ma = any(token == "ma" for token, _ in combos)
    mallows = None
    mallows_error: str | None = None
    if need_ma:
        try:
            mallows = estimators.mallows_inputs(panel)
        except WeightscapeError as exc:
            mallows_error = str(exc)

    values = {metric: np.full(len(combos), np.nan) for metric in METRICS}
    failures: dict[str, str] = {}
    weights: dict[str, np.ndarray] = {}
    for i, (token, space) in enumerate(combos):
        label = combo_label((token, space))
        try:
            if token == "cv" and loo_panel is None:
                raise PanelError(loo_error or "leave-one-out forecasts unavailable")
            if token == "ma" and mallows is None:
                raise PanelError(mallows_error or "mallows inputs unavailable")
            sol = _fit_combo(token, space, panel, loo_panel, mallows)
        except WeightscapeError as exc:
            failures[label] = str(exc)
            continue
        values["ssr"][i] = ssr(sol, panel)
        values["bias"][i] = empirical_bias(sol, panel)
        values["msfe"][i] = msfe(sol, test_panel)
        values["sparsity"][i] = sol.sparsity_pct(ZERO_TOL)
        weights[label] = sol.w
    return ReplicationResult(values=values, failures=failures, weights=weights,
                             y_max=float(np.max(np.abs(y))))


def run_scenario(spec: ScenarioSpec,
                 combos: tuple[tuple[str, WeightSpace], ...] = GRID_COMBOS
                 ) -> ScenarioResult:
    reps = [run_replication(spec, r, combos) for r in range(spec.replications)]
    return ScenarioResult(spec=spec, combos=combos, replications=reps)


def _worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    return max(1, n)


def run_grid(cases: list[int], candidate_sets: list[int], *,
             n_train: int = 2000, n_test: int = 1000, d: int = 42,
             beta: np.ndarray, seed: int = 0, replications: int = 20,
             combos: tuple[tuple[str, WeightSpace], ...] = GRID_COMBOS
             ) -> dict[tuple[int, int], ScenarioResult]:
    """Run every (case, candidate_set) cell; parallel across cells when
    WEIGHTSCAPE_THREADS allows, with per-cell seeding so the output is
    identical either way."""
    specs = {
        (case, cset): ScenarioSpec(case=case, candidate_set=cset,
                                   n_train=n_train, n_test=n_test, d=d,
                                   beta=beta, seed=seed,
                                   replications=replications)
        for case in cases for cset in candidate_sets
    }
    workers = _worker_count()
    results: dict[tuple[int, int], ScenarioResult] = {}
    if workers == 1:
        for key, spec in specs.items():
            results[key] = run_scenario(spec, combos)
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {key: pool.submit(run_scenario, spec, combos)
                       for key, spec in specs.items()}
            for key, fut in futures.items():
                results[key] = fut.result()
    return {key: results[key] for key in sorted(results)}


def _format_value(v: float) -> str:
    return repr(float(v))


def emit_tables(results: dict[tuple[int, int], ScenarioResult],
                out_dir: str | Path, fmt: str = "csv") -> list[Path]:
    """One file per metric; rows are (case, set) cells, columns the combos.

    SSR is emitted scaled by 1e-4.  Failed cells print as nan.  Float
    formatting is the shortest round-trip representation, so identical runs
    produce byte-identical files.
    """
    if not results:
        raise ValueError("no results to emit")
    if fmt not in ("csv", "markdown"):
        raise ValueError(f"unknown table format {fmt!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    first = next(iter(results.values()))
    labels = [combo_label(c) for c in first.combos]
    ext = "csv" if fmt == "csv" else "md"
    paths = []
    for metric in METRICS:
        lines = []
        header = ["case", "set", *labels]
        if fmt == "csv":
            lines.append(",".join(header))
        else:
            lines.append("| " + " | ".join(header) + " |")
            lines.append("|" + "---|" * len(header))
        for (case, cset) in sorted(results):
            res = results[(case, cset)]
            row = res.mean(metric)
            if metric == "ssr":
                row = row * 1e-4
            cells = [str(case), str(cset), *(_format_value(v) for v in row)]
            if fmt == "csv":
                lines.append(",".join(cells))
            else:
                lines.append("| " + " | ".join(cells) + " |")
        path = out_dir / f"{metric}.{ext}"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        paths.append(path)
    return paths
