"""Split-conformal selection of a weight space.

Three disjoint folds: candidate models are trained on the first, the
combination weights are fitted on the second (per candidate space), and
held-out absolute residuals on the third give a distribution-free interval
half-length per space.  The space with the shortest interval wins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

import numpy as np

from .errors import PanelError, SingularProblemError, WeightscapeError
from .estimators import fit_regression
from .panel import ForecastPanel
from .spaces import CANONICAL_ORDER, WeightSpace


class Trainer(Protocol):
    """Fits S candidate models on training data; returns a forecaster."""

    def __call__(self, X: np.ndarray, y: np.ndarray
                 ) -> Callable[[np.ndarray], np.ndarray]: ...


def split_indices(T: int, seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Seeded shuffle of {0..T-1} into three nearly equal folds.

    Sizes are ceil(T/3), ceil((T - n1)/2) and the remainder; deterministic
    for a fixed seed.
    """
    if T < 6:
        raise PanelError(f"conformal selection needs T >= 6, got {T}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(T)
    n1 = math.ceil(T / 3)
    n2 = math.ceil((T - n1) / 2)
    i1 = np.sort(perm[:n1])
    i2 = np.sort(perm[n1:n1 + n2])
    i3 = np.sort(perm[n1 + n2:])
    return i1, i2, i3


def conformal_quantile(residuals: np.ndarray, alpha: float) -> float:
    """k-th smallest residual with k = ceil((n + 1)(1 - alpha)).

    Returns +inf when k exceeds n (too few calibration points for the
    requested coverage).
    """
    residuals = np.asarray(residuals, dtype=float).reshape(-1)
    n = residuals.size
    if n == 0:
        raise PanelError("empty residual set")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    k = math.ceil((n + 1) * (1.0 - alpha))
    if k > n:
        return math.inf
    return float(np.sort(residuals)[k - 1])


def ols_group_trainer(groups: Sequence[np.ndarray]) -> Trainer:
    """Per-group OLS candidates: model s regresses y on X[:, groups[s]]."""

    def train(X: np.ndarray, y: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float).reshape(-1)
        coefs = []
        for g in groups:
            Xg = X[:, g]
            beta, *_ = np.linalg.lstsq(Xg, y, rcond=None)
            coefs.append(beta)

        def forecast(Xnew: np.ndarray) -> np.ndarray:
            Xnew = np.asarray(Xnew, dtype=float)
            return np.column_stack([Xnew[:, g] @ b for g, b in zip(groups, coefs)])

        return forecast

    return train


@dataclass(frozen=True)
class SelectionResult:
    chosen: WeightSpace
    lengths: dict[WeightSpace, float]
    i1: tuple[int, ...]
    i2: tuple[int, ...]
    i3: tuple[int, ...]
    alpha: float
    seed: int
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "chosen": self.chosen.value,
            "lengths": {s.value: (None if math.isinf(v) else float(v))
                        for s, v in self.lengths.items()},
            "splits": {"i1": list(self.i1), "i2": list(self.i2), "i3": list(self.i3)},
            "alpha": float(self.alpha),
            "seed": int(self.seed),
            "notes": list(self.notes),
        }


def select_space(X: np.ndarray, y: np.ndarray, trainer: Trainer,
                 spaces: Sequence[WeightSpace], alpha: float,
                 seed: int) -> SelectionResult:
    """Pick the weight space whose conformal interval is shortest.

    Ties break by the fixed order A, B, C, D, E, Aprime.  A space whose
    weight fit is singular gets an infinite length and a note; if every
    space is infeasible the selection fails.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise PanelError("X must be T x d with rows matching y")
    if not spaces:
        raise ValueError("no candidate spaces given")
    i1, i2, i3 = split_indices(y.size, seed)
    forecast = trainer(X[i1], y[i1])
    F2 = np.asarray(forecast(X[i2]), dtype=float)
    F3 = np.asarray(forecast(X[i3]), dtype=float)
    if F2.ndim != 2 or F2.shape[0] != i2.size:
        raise PanelError("trainer forecasts must be (rows, candidates)")

    panel2 = ForecastPanel(y=y[i2], F=F2)
    lengths: dict[WeightSpace, float] = {}
    notes: list[str] = []
    failed = 0
    for space in spaces:
        try:
            sol = fit_regression(panel2, space)
        except WeightscapeError as exc:
            lengths[space] = math.inf
            notes.append(f"space {space.value}: {exc}")
            failed += 1
            continue
        resid = np.abs(y[i3] - sol.predict(F3))
        lengths[space] = conformal_quantile(resid, alpha)
    if failed == len(lengths):
        raise SingularProblemError("every candidate space failed to fit")

    order = {s: i for i, s in enumerate(CANONICAL_ORDER)}
    chosen = min(lengths, key=lambda s: (lengths[s], order[s]))
    return SelectionResult(chosen=chosen, lengths=lengths,
                           i1=tuple(int(v) for v in i1),
                           i2=tuple(int(v) for v in i2),
                           i3=tuple(int(v) for v in i3),
                           alpha=alpha, seed=seed, notes=tuple(notes))
