"""File formats: panel CSV, sidecar metadata, and the JSON solution envelope."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import PanelError
from .panel import ForecastPanel, validate_panel
from .solution import DiagnosticsReport, WeightSolution


def read_panel_csv(path: str | Path, metadata_path: str | Path | None = None
                   ) -> ForecastPanel:
    """Load a panel from CSV: header row `y,f1,...,fS`, one observation per row.

    An optional JSON sidecar may carry `q` (per-candidate parameter counts)
    and `labels`.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise PanelError(f"{path}: empty file")
        header = [h.strip() for h in header]
        if not header or header[0] != "y":
            raise PanelError(f"{path}: first column must be named 'y', got {header[:1]}")
        expected = [f"f{i}" for i in range(1, len(header))]
        if header[1:] != expected:
            raise PanelError(
                f"{path}: forecast columns must be named f1..f{len(header) - 1}")
        if len(header) < 2:
            raise PanelError(f"{path}: need at least one forecast column")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise PanelError(f"{path}:{lineno}: expected {len(header)} fields, "
                                 f"got {len(row)}")
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise PanelError(f"{path}:{lineno}: {exc}")
    if not rows:
        raise PanelError(f"{path}: no data rows")
    data = np.asarray(rows, dtype=float)
    q = labels = None
    if metadata_path is not None:
        meta = json.loads(Path(metadata_path).read_text(encoding="utf-8"))
        q = meta.get("q")
        labels = meta.get("labels")
    panel = ForecastPanel(y=data[:, 0], F=data[:, 1:], q=q, labels=labels)
    return validate_panel(panel)


def read_loo_csv(path: str | Path, panel: ForecastPanel) -> ForecastPanel:
    """Attach leave-one-out forecasts stored in the same CSV layout."""
    loo_panel = read_panel_csv(path)
    if loo_panel.F.shape != panel.F.shape:
        raise PanelError(
            f"loo matrix shape {loo_panel.F.shape} does not match panel "
            f"{panel.F.shape}")
    return panel.with_loo(loo_panel.F)


def write_panel_csv(path: str | Path, panel: ForecastPanel) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y"] + [f"f{i}" for i in range(1, panel.n_candidates + 1)])
        for t in range(panel.n_obs):
            writer.writerow([repr(float(panel.y[t]))]
                            + [repr(float(v)) for v in panel.F[t]])


def solution_to_json(solution: WeightSolution,
                     diagnostics: DiagnosticsReport | None = None) -> str:
    """Serialize with sorted keys and shortest round-trip floats, so equal
    solutions give byte-identical output."""
    payload: dict = solution.to_dict()
    if diagnostics is not None:
        payload["diagnostics"] = diagnostics.to_dict()
    return json.dumps(payload, sort_keys=True, indent=2)


def solution_from_json(text: str) -> WeightSolution:
    return WeightSolution.from_dict(json.loads(text))
