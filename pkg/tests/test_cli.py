import csv
import json

import pytest

from jointprofile.cli import main, replay
from jointprofile.formats import write_native

FIG2 = "identical:n=10,k=2,p=0.1,0.9,seed=0"


def test_analyze_writes_all_artifacts(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["analyze", "--generate", FIG2, "--out", str(out)]) == 0
    names = {p.name for p in out.iterdir()}
    assert {"moments.json", "clt.json", "curves.csv", "histogram.csv", "coverage.csv", "profile.json",
            "fit.json", "summary.txt", "manifest.json", "network.json"} <= names
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "analyze" and manifest["seeds"]["generate"] == 0
    profile = json.loads((out / "profile.json").read_text())
    assert profile["coverage"]["cumulative_mass"][10] == pytest.approx(0.73609893, abs=1e-8)
    assert "mass of top 11" in capsys.readouterr().out


def test_analyze_threads_are_bit_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    spec = "dirichlet_random:n=9,k=3,max_in_degree=2,seed=4"
    assert main(["analyze", "--generate", spec, "--out", str(a), "--threads", "1"]) == 0
    assert main(["analyze", "--generate", spec, "--out", str(b), "--threads", "8"]) == 0
    for f in a.iterdir():
        if f.name != "manifest.json":
            assert f.read_bytes() == (b / f.name).read_bytes(), f.name


def test_cap_exit_code_and_sampling_fallback(tmp_path):
    big = "identical:n=30,k=2,p=0.2,0.8,seed=1"
    assert main(["analyze", "--generate", big, "--out", str(tmp_path / "x"), "--cap", "1000"]) == 3
    assert (tmp_path / "x" / "moments.json").exists()
    code = main(["analyze", "--generate", big, "--out", str(tmp_path / "y"), "--cap", "1000",
                 "--sample", "5000", "--seed", "12"])
    assert code == 0
    sample = json.loads((tmp_path / "y" / "sample.json").read_text())
    assert sample["seed"] == 12 and sample["m"] == 5000


def test_auto_seed_is_recorded_and_replayable(tmp_path):
    out = tmp_path / "s"
    assert main(["sample", "--generate", "identical:n=8,p=0.3,0.7", "--m", "3000", "--out", str(out)]) == 0
    first = json.loads((out / "sample.json").read_text())
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seeds"]["sample"] == first["seed"] == manifest["seeds"]["generate"]
    assert replay(out / "manifest.json") == 0
    assert json.loads((out / "sample.json").read_text()) == first


def test_topk_csv_and_manifest(tmp_path, sprinkler):
    net = tmp_path / "net.json"
    net.write_text(write_native(sprinkler))
    out = tmp_path / "top.csv"
    assert main(["topk", str(net), "--epsilon", "0.2", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0]) == ["rank", "state_index", "Cloudy", "Sprinkler", "Rain", "Wet",
                             "probability", "cumulative_mass"]
    assert float(rows[-1]["cumulative_mass"]) >= 0.8
    manifest = json.loads((tmp_path / "top.csv.manifest.json").read_text())
    assert manifest["search"]["rule"] == {"kind": "residual_mass", "value": 0.2}
    assert len(manifest["inputs"][str(net)]) == 64


def test_topk_truncation_exit_code(tmp_path):
    code = main(["topk", "--generate", "dirichlet_random:n=30,k=3,seed=2", "--k", "100000",
                 "--node-cap", "500", "--out", str(tmp_path / "t.csv")])
    assert code == 4


def test_threshold_from_parameters(capsys):
    assert main(["threshold", "--xi", "-12.039728043", "--phi2", "12.069489608", "--epsilon", "0.1",
                 "--states", "1024"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["ln_t"] == pytest.approx(-5.6962, abs=1e-4)
    assert doc["rank_estimate"]["estimate"] == pytest.approx(34.48, abs=0.01)


@pytest.mark.parametrize(
    "argv",
    [
        ["threshold", "--xi", "-3", "--f", "0.1"],
        ["threshold", "--xi", "-3", "--phi2", "2"],
        ["threshold", "--xi", "-3", "--phi2", "2", "--f", "1.5"],
        ["topk", "--k", "3"],
        ["analyze", "--generate", "identical:n=2", "--out", "x"],
        ["fit", "does-not-exist.json"],
    ],
)
def test_input_errors_exit_2(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    try:
        code = main(argv)
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    assert code == 2


def test_parse_error_reports_location(tmp_path, capsys):
    bad = tmp_path / "bad.bif"
    bad.write_text("variable A { type discrete [2] { x, y }; }\nprobability ( A ) { table 0.5, 0.6; }\n")
    assert main(["check-clt", str(bad)]) == 2
    assert f"{bad}:2:" in capsys.readouterr().err


def test_fit_from_values_file(tmp_path, capsys):
    values = tmp_path / "v.csv"
    values.write_text("ln_p\n-1\n-2\n-3\n")
    assert main(["fit", "--values", str(values)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["fit"]["xi"] == -2.0 and doc["fit"]["phi2"] == pytest.approx(2 / 3)


def test_generate_and_check_clt(tmp_path, capsys):
    out = tmp_path / "g.json"
    assert main(["generate", "identical:n=100,p=0.1,0.9", "--seed", "1", "--out", str(out)]) == 0
    assert main(["check-clt", str(out)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["ratio"] == pytest.approx(0.1, rel=1e-12)
