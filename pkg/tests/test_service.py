import numpy as np
import pytest
from fastapi.testclient import TestClient

from weightscape.service import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


@pytest.fixture
def panel_payload(rng):
    F = rng.standard_normal((30, 2)) + 0.5
    y = F @ np.array([0.6, 0.5]) + 0.2 * rng.standard_normal(30)
    return {"y": y.tolist(), "forecasts": F.tolist(), "q": [2.0, 3.0]}


def test_healthz(client):
    res = client.get("/healthz")
    assert res.status_code == 200
    assert res.json()["status"] == "ok"


def test_combine_endpoint(client, panel_payload):
    res = client.post("/combine", json={
        "panel": panel_payload,
        "methods": ["reg", "ma"],
        "spaces": ["A", "D"],
    })
    assert res.status_code == 200
    results = res.json()["results"]
    assert len(results) == 4
    for entry in results:
        assert entry["error"] is None
        assert entry["solution"]["space"] in ("A", "D")
        assert entry["diagnostics"]["ssr"] >= 0.0
    d_entries = [e for e in results if e["space"] == "D"]
    for e in d_entries:
        assert abs(sum(e["solution"]["weights"]) - 1.0) <= 1e-10


def test_combine_solver_failure_reported_per_pair(client, rng):
    col = rng.standard_normal(12)
    y = rng.standard_normal(12)
    res = client.post("/combine", json={
        "panel": {"y": y.tolist(),
                  "forecasts": np.column_stack([col, col]).tolist()},
        "methods": ["reg"],
        "spaces": ["A"],
    })
    assert res.status_code == 200
    entry = res.json()["results"][0]
    assert entry["solution"] is None
    assert "singular" in entry["error"]


def test_combine_rejects_malformed_panel(client):
    res = client.post("/combine", json={
        "panel": {"y": [1.0, 2.0, 3.0], "forecasts": [[1.0], [2.0]]},
        "methods": ["reg"], "spaces": ["A"],
    })
    assert res.status_code == 422


def test_combine_rejects_unknown_method(client, panel_payload):
    res = client.post("/combine", json={
        "panel": panel_payload, "methods": ["bogus"], "spaces": ["A"],
    })
    assert res.status_code == 422


def test_diagnose_endpoint(client, panel_payload):
    res = client.post("/diagnose", json={
        "panel": panel_payload, "methods": ["reg"], "spaces": ["A", "D"],
    })
    assert res.status_code == 200
    results = res.json()["results"]
    assert len(results) == 2
    assert results[0]["uniqueness"]["holds"] is True
    d_entry = [e for e in results if e["space"] == "D"][0]
    assert d_entry["sparsity"] is not None


def test_select_space_endpoint(client, rng):
    d = 8
    X = rng.standard_normal((120, d))
    y = X @ (1.0 / np.arange(1, d + 1)) + 0.3 * rng.standard_normal(120)
    res = client.post("/select-space", json={
        "x": X.tolist(), "y": y.tolist(), "alpha": 0.2, "seed": 4,
        "spaces": ["A", "B", "D"],
    })
    assert res.status_code == 200
    payload = res.json()
    assert payload["chosen"] in ("A", "B", "D")
    assert set(payload["lengths"]) == {"A", "B", "D"}


def test_select_space_rejects_tiny_input(client):
    res = client.post("/select-space", json={
        "x": [[1.0]] * 4, "y": [1.0, 2.0, 3.0, 4.0],
    })
    assert res.status_code == 422
