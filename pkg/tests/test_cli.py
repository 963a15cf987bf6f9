import json

import numpy as np
import pytest

from weightscape.cli import main


@pytest.fixture
def panel_csv(tmp_path, rng):
    F = rng.standard_normal((40, 2)) + 0.5
    y = F @ np.array([0.6, 0.5]) + 0.25 * rng.standard_normal(40)
    path = tmp_path / "panel.csv"
    lines = ["y,f1,f2"]
    for t in range(40):
        lines.append(f"{float(y[t])!r},{float(F[t, 0])!r},{float(F[t, 1])!r}")
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def data_csv(tmp_path, rng):
    d = 8
    X = rng.standard_normal((120, d))
    y = X @ (1.0 / np.arange(1, d + 1)) + 0.3 * rng.standard_normal(120)
    path = tmp_path / "data.csv"
    header = "y," + ",".join(f"x{i}" for i in range(1, d + 1))
    lines = [header]
    for t in range(120):
        lines.append(",".join([repr(float(y[t]))] + [repr(float(v)) for v in X[t]]))
    path.write_text("\n".join(lines) + "\n")
    return path


def test_combine_writes_one_file_per_pair(panel_csv, tmp_path, capsys):
    out = tmp_path / "res"
    rc = main(["combine", "--input", str(panel_csv), "--methods", "reg",
               "--spaces", "A,D", "--out", str(out)])
    assert rc == 0
    files = sorted(p.name for p in out.glob("*.json"))
    assert files == ["reg_A.json", "reg_D.json"]
    payload = json.loads((out / "reg_D.json").read_text())
    assert abs(sum(payload["weights"]) - 1.0) <= 1e-10
    assert "diagnostics" in payload


def test_combine_identical_columns_exits_one(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    rows = ["y,f1,f2"] + [f"{i}.0,1.0,1.0" for i in range(6)]
    path.write_text("\n".join(rows) + "\n")
    rc = main(["combine", "--input", str(path), "--methods", "reg",
               "--spaces", "A", "--out", str(tmp_path / "o")])
    assert rc == 1
    assert "singular" in capsys.readouterr().err.lower()


def test_combine_malformed_csv_exits_two(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("y,f1\n1.0\n")
    rc = main(["combine", "--input", str(path), "--methods", "reg",
               "--spaces", "A", "--out", str(tmp_path / "o")])
    assert rc == 2


def test_combine_unknown_method_exits_two(panel_csv, tmp_path):
    rc = main(["combine", "--input", str(panel_csv), "--methods", "bogus",
               "--spaces", "A", "--out", str(tmp_path / "o")])
    assert rc == 2


def test_combine_performance_on_simplex(panel_csv, tmp_path):
    meta = panel_csv.parent / "meta.json"
    meta.write_text(json.dumps({"q": [2.0, 3.0]}))
    out = tmp_path / "pf"
    rc = main(["combine", "--input", str(panel_csv), "--metadata", str(meta),
               "--methods", "pf:saic", "--spaces", "D", "--out", str(out)])
    assert rc == 0
    payload = json.loads((out / "pf-saic_D.json").read_text())
    w = payload["weights"]
    assert abs(sum(w) - 1.0) <= 1e-12
    assert min(w) >= 0.0


def test_combine_cv_needs_loo(panel_csv, tmp_path, capsys):
    rc = main(["combine", "--input", str(panel_csv), "--methods", "cv",
               "--spaces", "A", "--out", str(tmp_path / "o")])
    assert rc == 1
    assert "loo" in capsys.readouterr().err


def test_diagnose_reports(panel_csv, tmp_path, capsys):
    report = tmp_path / "diag.json"
    rc = main(["diagnose", "--input", str(panel_csv), "--methods", "reg",
               "--spaces", "A,D", "--out", str(report)])
    assert rc == 0
    captured = capsys.readouterr().out
    assert "reg/A: unique=True" in captured
    payload = json.loads(report.read_text())
    assert len(payload["reports"]) == 2
    d_entry = [r for r in payload["reports"] if r["space"] == "D"][0]
    assert "sparsity" in d_entry


def test_diagnose_collinear_panel(tmp_path, capsys):
    path = tmp_path / "col.csv"
    rows = ["y,f1,f2"]
    rng = np.random.default_rng(0)
    for _ in range(10):
        v = float(rng.standard_normal())
        rows.append(f"{float(rng.standard_normal())!r},{v!r},{v!r}")
    path.write_text("\n".join(rows) + "\n")
    rc = main(["diagnose", "--input", str(path), "--methods", "reg",
               "--spaces", "A"])
    assert rc == 0
    assert "unique=False" in capsys.readouterr().out


def test_select_space_outputs_json(data_csv, tmp_path, capsys):
    out = tmp_path / "sel.json"
    rc = main(["select-space", "--input", str(data_csv), "--alpha", "0.2",
               "--seed", "9", "--out", str(out)])
    assert rc == 0
    payload = json.loads(out.read_text())
    assert payload["chosen"] in ("A", "B", "C", "D", "E")
    assert set(payload["splits"]) == {"i1", "i2", "i3"}
    assert payload["alpha"] == 0.2


def test_simulate_deterministic_and_failfree(tmp_path):
    args = ["simulate", "--cases", "1", "--sets", "1,3", "--t", "300",
            "--t-test", "100", "--d", "12", "--reps", "2", "--seed", "5",
            "--methods", "reg,ma"]
    rc1 = main(args + ["--out-dir", str(tmp_path / "run1")])
    rc2 = main(args + ["--out-dir", str(tmp_path / "run2")])
    assert rc1 == 0 and rc2 == 0
    for name in ("ssr.csv", "bias.csv", "msfe.csv", "sparsity.csv"):
        b1 = (tmp_path / "run1" / name).read_bytes()
        b2 = (tmp_path / "run2" / name).read_bytes()
        assert b1 == b2


def test_simulate_custom_beta_file(tmp_path):
    beta_file = tmp_path / "beta.txt"
    beta_file.write_text("\n".join(["0.5"] * 12) + "\n")
    rc = main(["simulate", "--cases", "2", "--sets", "2", "--t", "300",
               "--t-test", "100", "--d", "12", "--reps", "1", "--seed", "3",
               "--methods", "reg", "--beta-profile", f"custom-file:{beta_file}",
               "--out-dir", str(tmp_path / "custom")])
    assert rc == 0


def test_config_file_supplies_defaults_flags_win(panel_csv, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("methods=reg\nspaces=A,B\n")
    out = tmp_path / "cfgout"
    rc = main(["--config", str(cfg), "combine", "--input", str(panel_csv),
               "--spaces", "A",  # explicit flag beats the config value
               "--out", str(out)])
    assert rc == 0
    assert sorted(p.name for p in out.glob("*.json")) == ["reg_A.json"]


def test_version_flag(capsys):
    rc = main(["--version"])
    assert rc == 0


def test_combine_output_byte_identical(panel_csv, tmp_path):
    meta = tmp_path / "meta.json"
    meta.write_text(json.dumps({"q": [2.0, 3.0]}))
    rc1 = main(["combine", "--input", str(panel_csv), "--metadata", str(meta),
                "--methods", "reg,ma",
                "--spaces", "A,D,E", "--out", str(tmp_path / "o1")])
    rc2 = main(["combine", "--input", str(panel_csv), "--metadata", str(meta),
                "--methods", "reg,ma",
                "--spaces", "A,D,E", "--out", str(tmp_path / "o2")])
    assert rc1 == 0 and rc2 == 0
    names = sorted(p.name for p in (tmp_path / "o1").glob("*.json"))
    assert names
    for name in names:
        assert (tmp_path / "o1" / name).read_bytes() \
            == (tmp_path / "o2" / name).read_bytes()


def test_config_equals_form(panel_csv, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("spaces=B\n")
    out = tmp_path / "cfgeq"
    rc = main([f"--config={cfg}", "combine", "--input", str(panel_csv),
               "--out", str(out)])
    assert rc == 0
    assert sorted(p.name for p in out.glob("*.json")) == ["reg_B.json"]


def test_bad_thread_env_is_input_error(tmp_path, monkeypatch):
    monkeypatch.setenv("WEIGHTSCAPE_THREADS", "lots")
    rc = main(["simulate", "--cases", "1", "--sets", "1", "--t", "300",
               "--t-test", "50", "--d", "12", "--reps", "1", "--seed", "1",
               "--methods", "reg", "--out-dir", str(tmp_path / "x")])
    assert rc == 2


def test_diagnose_flags_eigenvector_multiplicity(tmp_path, capsys, rng):
    y = rng.standard_normal(12)
    path = tmp_path / "dup.csv"
    rows = ["y,f1,f2"]
    for t in range(12):
        rows.append(f"{float(y[t])!r},{float(y[t])!r},{float(y[t])!r}")
    path.write_text("\n".join(rows) + "\n")
    rc = main(["diagnose", "--input", str(path), "--methods", "eig",
               "--spaces", "E"])
    assert rc == 0
    assert "multiplicity=2" in capsys.readouterr().out
