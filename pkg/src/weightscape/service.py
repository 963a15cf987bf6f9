"""HTTP service wrapping the combination, diagnosis and selection operations.

Run with: uvicorn weightscape.service:app
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .conformal import ols_group_trainer, select_space
from .diagnostics import (check_sparsity_conditions, check_uniqueness,
                          diagnostics_report)
from .errors import PanelError, WeightscapeError
from .methods import parse_method
from .panel import ForecastPanel, validate_panel
from .simulation import build_candidate_sets
from .spaces import WeightSpace
from .cli import _COMPAT, _fit_one

app = FastAPI(title="weightscape",
              description="Forecast combination under explicit weight constraints",
              version=__version__)


class PanelPayload(BaseModel):
    """Row-major panel: y and the T x S forecast matrix."""

    y: list[float]
    forecasts: list[list[float]]
    loo: list[list[float]] | None = None
    q: list[float] | None = None
    labels: list[str] | None = None

    def to_panel(self) -> ForecastPanel:
        try:
            panel = ForecastPanel(y=np.asarray(self.y, dtype=float),
                                  F=np.asarray(self.forecasts, dtype=float),
                                  loo=None if self.loo is None
                                  else np.asarray(self.loo, dtype=float),
                                  q=self.q, labels=self.labels)
            return validate_panel(panel)
        except (PanelError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))


class SolutionModel(BaseModel):
    weights: list[float]
    intercept: float | None
    multipliers: dict
    active_set: list[int]
    space: str
    method: dict
    converged: bool
    unique_certified: bool | None


class DiagnosticsModel(BaseModel):
    ssr: float
    empirical_bias: float
    msfe: float | None
    sparsity_pct: float
    error_acf: list[float]
    notes: list[str]


class CombineRequest(BaseModel):
    panel: PanelPayload
    methods: list[str] = Field(default=["reg"])
    spaces: list[str] = Field(default=["A", "B", "C", "D", "E"])


class CombineResult(BaseModel):
    method: str
    space: str
    solution: SolutionModel | None = None
    diagnostics: DiagnosticsModel | None = None
    error: str | None = None


class CombineResponse(BaseModel):
    results: list[CombineResult]


def _pairs_or_422(methods: list[str], spaces: list[str]):
    try:
        parsed_spaces = [WeightSpace.parse(s) for s in spaces]
        for token in methods:
            if token not in _COMPAT:
                raise ValueError(f"unknown method token {token!r}")
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    pairs = [(token, space) for token in methods for space in parsed_spaces
             if space.value in _COMPAT[token]]
    if not pairs:
        raise HTTPException(status_code=422,
                            detail="no compatible (method, space) pairs")
    return pairs


@app.get("/healthz")
def healthz() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/combine", response_model=CombineResponse)
def combine(req: CombineRequest) -> CombineResponse:
    panel = req.panel.to_panel()
    results = []
    for token, space in _pairs_or_422(req.methods, req.spaces):
        try:
            sol = _fit_one(token, space, panel)
            report = diagnostics_report(sol, panel)
        except WeightscapeError as exc:
            results.append(CombineResult(method=token, space=space.value,
                                         error=str(exc)))
            continue
        results.append(CombineResult(
            method=token, space=space.value,
            solution=SolutionModel(**sol.to_dict()),
            diagnostics=DiagnosticsModel(**report.to_dict())))
    return CombineResponse(results=results)


class DiagnoseRequest(BaseModel):
    panel: PanelPayload
    methods: list[str] = Field(default=["reg"])
    spaces: list[str] = Field(default=["A", "B", "C", "D", "E"])


class DiagnoseResult(BaseModel):
    method: str
    space: str
    uniqueness: dict | None = None
    sparsity: dict | None = None
    error: str | None = None


class DiagnoseResponse(BaseModel):
    results: list[DiagnoseResult]


@app.post("/diagnose", response_model=DiagnoseResponse)
def diagnose(req: DiagnoseRequest) -> DiagnoseResponse:
    panel = req.panel.to_panel()
    results = []
    for token, space in _pairs_or_422(req.methods, req.spaces):
        method = parse_method(token)
        entry = DiagnoseResult(method=token, space=space.value)
        try:
            entry.uniqueness = check_uniqueness(method, space, panel).to_dict()
            if space in (WeightSpace.C, WeightSpace.D):
                sol = _fit_one(token, space, panel)
                entry.sparsity = check_sparsity_conditions(
                    sol, panel, method).to_dict()
        except WeightscapeError as exc:
            entry.error = str(exc)
        results.append(entry)
    return DiagnoseResponse(results=results)


class SelectSpaceRequest(BaseModel):
    x: list[list[float]]
    y: list[float]
    alpha: float = 0.1
    seed: int = 0
    spaces: list[str] = Field(default=["A", "B", "C", "D", "E"])
    candidate_set: int = 1


class SelectSpaceResponse(BaseModel):
    chosen: str
    lengths: dict[str, float | None]
    splits: dict[str, list[int]]
    alpha: float
    seed: int
    notes: list[str]


@app.post("/select-space", response_model=SelectSpaceResponse)
def select_space_endpoint(req: SelectSpaceRequest) -> SelectSpaceResponse:
    X = np.asarray(req.x, dtype=float)
    y = np.asarray(req.y, dtype=float)
    try:
        spaces = [WeightSpace.parse(s) for s in req.spaces]
        groups = build_candidate_sets(req.candidate_set, X.shape[1])
        trainer = ols_group_trainer(groups)
        result = select_space(X, y, trainer, spaces,
                              alpha=req.alpha, seed=req.seed)
    except (WeightscapeError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return SelectSpaceResponse(**result.to_dict())
