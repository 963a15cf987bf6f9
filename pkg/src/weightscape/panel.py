"""Forecast panels: the target series plus the candidate forecast matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PanelError


def _as_readonly(a, dtype=float):
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ForecastPanel:
    """Immutable bundle of a target series and S candidate forecasts.

    y    : target observations, length T
    F    : T x S matrix, column s holds the s-th candidate forecast
    loo  : optional T x S matrix of leave-one-out candidate forecasts
    q    : optional effective parameter count per candidate (tr of the
           candidate's projection matrix, for linear candidates)
    labels : optional candidate names
    """

    y: np.ndarray
    F: np.ndarray
    loo: np.ndarray | None = None
    q: np.ndarray | None = None
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "y", _as_readonly(self.y).reshape(-1))
        F = _as_readonly(self.F)
        if F.ndim != 2:
            raise PanelError(f"F must be a 2-d matrix, got ndim={F.ndim}")
        object.__setattr__(self, "F", F)
        if self.loo is not None:
            object.__setattr__(self, "loo", _as_readonly(self.loo))
        if self.q is not None:
            object.__setattr__(self, "q", _as_readonly(self.q).reshape(-1))
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))

    @property
    def n_obs(self) -> int:
        return self.y.size

    @property
    def n_candidates(self) -> int:
        return self.F.shape[1]

    def with_loo(self, loo: np.ndarray) -> "ForecastPanel":
        return ForecastPanel(self.y, self.F, loo=loo, q=self.q, labels=self.labels)


def validate_panel(panel: ForecastPanel) -> ForecastPanel:
    """Check every panel invariant; return the panel unchanged when sound.

    Raises PanelError on dimension mismatches, non-finite entries, T < 2,
    or malformed metadata.
    """
    T, S = panel.F.shape
    if panel.y.size != T:
        raise PanelError(f"y has length {panel.y.size} but F has {T} rows")
    if T < 2:
        raise PanelError(f"need at least 2 observations, got T={T}")
    if S < 1:
        raise PanelError("need at least one candidate forecast")
    if not np.all(np.isfinite(panel.y)):
        raise PanelError("y contains non-finite entries")
    if not np.all(np.isfinite(panel.F)):
        raise PanelError("F contains non-finite entries")
    if panel.loo is not None:
        if panel.loo.shape != panel.F.shape:
            raise PanelError(
                f"loo shape {panel.loo.shape} does not match F shape {panel.F.shape}")
        if not np.all(np.isfinite(panel.loo)):
            raise PanelError("loo contains non-finite entries")
    if panel.q is not None:
        if panel.q.size != S:
            raise PanelError(f"q has length {panel.q.size}, expected {S}")
        if np.any(panel.q < 0) or np.any(panel.q > T):
            raise PanelError("q entries must lie in [0, T]")
    if panel.labels is not None and len(panel.labels) != S:
        raise PanelError(f"labels has length {len(panel.labels)}, expected {S}")
    return panel
