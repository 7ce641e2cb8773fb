import json
import subprocess
import sys

import pytest

from kanfraud.cli import main
from kanfraud.synthetic import make_spline_boundary, shuffled_labels, write_csv


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    data = make_spline_boundary(n=1000, dim=30, seed=0)
    write_csv(data, d / "sep.csv")
    write_csv(shuffled_labels(data, seed=1), d / "shuf.csv")
    write_csv(make_spline_boundary(n=200, dim=6, seed=0), d / "small.csv")
    return d


def manifest(out, command):
    return json.loads((out / f"{command}.manifest.json").read_text())


def test_assess_exit_codes(files, tmp_path, capsys):
    assert main(["assess", "--input", str(files / "sep.csv"), "--out-dir", str(tmp_path / "a"), "--jobs", "1"]) == 0
    assert "KAN recommended" in capsys.readouterr().out
    doc = json.loads((tmp_path / "a" / "verdict.json").read_text())
    assert doc["suitable"] is True and doc["verdict"].startswith("KAN recommended")
    assert (tmp_path / "a" / "pca_projection.svg").exists()
    m = manifest(tmp_path / "a", "assess")
    assert all((tmp_path / "a" / p).exists() for p in m["artifact_paths"])
    assert set(m["seeds"]) == {"balance", "assess"}
    assert main(["assess", "--input", str(files / "shuf.csv"), "--out-dir", str(tmp_path / "b"), "--jobs", "1"]) == 10
    assert "KAN not recommended" in capsys.readouterr().out


def test_missing_file_exit(tmp_path, capsys):
    assert main(["assess", "--input", str(tmp_path / "ghost.csv"), "--out-dir", str(tmp_path)]) == 12
    assert "ghost.csv" in capsys.readouterr().err


def test_bad_usage_is_config_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["tune", "sideways"])
    assert exc.value.code == 11


def test_invalid_config_file(files, tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[kanfraud]\nversion = 9\n")
    assert main(["assess", "--input", str(files / "sep.csv"), "--config", str(bad), "--out-dir", str(tmp_path)]) == 11


def test_data_error_exit(tmp_path):
    p = tmp_path / "one.csv"
    p.write_text("a,Class\n1,0\n2,0\n3,0\n")
    assert main(["train", "--input", str(p), "--out-dir", str(tmp_path / "o")]) == 13


def test_tune_heuristic(files, tmp_path, capsys):
    assert main(["tune", "heuristic", "--input", str(files / "sep.csv"), "--out-dir", str(tmp_path)]) == 0
    assert "width [30, 15, 1], k 15, grid 5" in capsys.readouterr().out
    assert "width = 30, 15, 1" in (tmp_path / "best_config.ini").read_text()
    assert main(["tune", "heuristic", "--input-dim", "51", "--out-dir", str(tmp_path)]) == 0
    assert "width [51, 25, 1]" in capsys.readouterr().out


def test_tune_grid_budget(files, tmp_path):
    out = tmp_path / "g"
    args = ["tune", "grid", "--input", str(files / "small.csv"), "--budget", "4", "--epochs", "20",
            "--out-dir", str(out), "--jobs", "1"]
    assert main(args) == 0
    lines = (out / "trials.csv").read_text().splitlines()
    assert len(lines) == 5 and lines[0].startswith("Width,K,Grid,Precision,Recall,F1 Score")
    assert "trials.json" in manifest(out, "tune-grid")["timing_artifacts"]


def test_tune_ga_deterministic(files, tmp_path):
    outs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        assert main(["tune", "ga", "--input", str(files / "small.csv"), "--seed", "3", "--epochs", "15",
                     "--width2-range", "3..4", "--k-range", "3..4", "--grid-range", "3..4",
                     "--population", "4", "--generations", "2", "--out-dir", str(out), "--jobs", "1"]) == 0
        outs.append(out)
    for name in ("trials.csv", "ga_history.json", "best_config.ini"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_train_then_evaluate(files, tmp_path, capsys):
    out = tmp_path / "t"
    assert main(["train", "--input", str(files / "sep.csv"), "--out-dir", str(out)]) == 0
    assert (out / "model.json").exists() and (out / "training_log.csv").exists()
    assert main(["evaluate", "--input", str(files / "sep.csv"), "--out-dir", str(out), "--format", "json"]) == 0
    report = json.loads(capsys.readouterr().out.split("\n", 1)[1])
    assert report["f1"] >= 0.95
    text = (out / "report.txt").read_text()
    for row in ("Width", "K", "Grid", "Precision", "Recall", "F1 Score", "Accuracy", "AUC-ROC",
                "True Positive Rate (Sensitivity)", "False Positive Rate", "True Negative Rate",
                "Logarithmic Loss"):
        assert any(line.startswith(row) for line in text.splitlines()), row
    baseline = (out / "baseline_comparison.csv").read_text().splitlines()
    assert baseline[1].startswith("KAN,") and baseline[2].startswith("LogisticRegression,")
    assert (out / "confusion.svg").read_text().startswith("<svg")
    assert (out / "train.manifest.json").exists() and (out / "evaluate.manifest.json").exists()

    # a model trained on 30 columns cannot score the 6-column fixture
    assert main(["evaluate", "--input", str(files / "small.csv"), "--model", str(out / "model.json"),
                 "--out-dir", str(tmp_path / "x")]) == 13


def test_unreadable_model(files, tmp_path):
    bad = tmp_path / "m.json"
    bad.write_text("{not json")
    assert main(["evaluate", "--input", str(files / "sep.csv"), "--model", str(bad), "--out-dir", str(tmp_path)]) == 12


def test_estimate(capsys, tmp_path):
    assert main(["estimate", "--shortest", "14", "--longest", "105", "--count", "14112"]) == 0
    out = capsys.readouterr().out
    assert "235.2 hours" in out and "839,664 s" in out and "846,720 s" in out
    assert main(["estimate", "--shortest", "10", "--longest", "10", "--count", "1", "--format", "json",
                 "--out-dir", str(tmp_path)]) == 0
    assert json.loads(capsys.readouterr().out)["exact"]["total_s"] == 10
    assert main(["estimate", "--shortest", "5", "--longest", "1", "--count", "3"]) == 11


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "kanfraud.cli", "estimate", "--shortest", "14", "--longest", "105",
                           "--count", "14112"], capture_output=True, text=True)
    assert proc.returncode == 0 and "235.2 hours" in proc.stdout
