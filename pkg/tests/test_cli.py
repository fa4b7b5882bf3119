import json
import subprocess
import sys

import numpy as np
import pytest

from rankpca import cli, elliptic
from rankpca.errors import DimensionError, ParseError


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def data_csv(tmp_path):
    fam = elliptic.parse_family("t:5", 3)
    X = elliptic.sample_elliptical(120, np.zeros(3), 1.0, np.diag([4.0, 1.0, 0.25]), fam,
                                   np.random.default_rng(0))
    path = tmp_path / "x.csv"
    lines = ["a,b,c"] + [",".join(repr(float(v)) for v in row) for row in X]
    path.write_text("\n".join(lines) + "\n")
    return path, X


def test_ingest_csv_header_and_values(data_csv):
    path, X = data_csv
    ds = cli.ingest_csv(path)
    assert ds.names == ["a", "b", "c"]
    assert np.array_equal(ds.X, X)
    assert (ds.n, ds.k) == (120, 3)


@pytest.mark.parametrize("body,exc,where", [
    ("1,2\n3,nan\n5,6\n7,8\n", ParseError, (2, 2)),
    ("1,2\n3,x\n5,6\n7,8\n", ParseError, (2, 2)),
    ("1,2\n3,4,5\n", DimensionError, None),
    ("1,2\n3,4\n", DimensionError, None),
    ("1\n2\n3\n", DimensionError, None),
])
def test_ingest_csv_errors(tmp_path, body, exc, where):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(exc) as info:
        cli.ingest_csv(p)
    if where:
        assert (info.value.line, info.value.column) == where


def test_are_single_json(capsys):
    code, out, _ = run(capsys, "are", "--score", "vdw", "--family", "t:5", "--k", "2")
    assert code == 0
    d = json.loads(out)
    assert set(d) == {"are", "family", "k", "score"}
    assert d["are"] == pytest.approx(2.204, abs=5e-4)


def test_are_csv_grid(capsys):
    code, out, _ = run(capsys, "are", "--score", "vdw,wilcoxon", "--family", "gaussian,e:2",
                       "--k", "2,3", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "score,family,k,are" and len(lines) == 9


def test_are_infinite_moments_exit_3(capsys):
    code, _, err = run(capsys, "are", "--score", "vdw", "--family", "t:3", "--k", "3")
    assert code == 3 and "fourth" in err


def test_eigvec_report(capsys, data_csv):
    path, X = data_csv
    code, out, _ = run(capsys, "test-eigvec", "--data", str(path), "--beta0", "1,0,0",
                       "--method", "rank", "--score", "sign")
    d = json.loads(out)
    assert code == 0
    assert set(d) == {"method", "statistic", "reference", "p_value", "alpha", "reject", "n",
                      "k", "nuisance"}
    assert d["reference"] == "chi2(2)" and d["nuisance"]["score"] == "sign"


def test_eigvec_beta0_handling(capsys, data_csv):
    path, _ = data_csv
    code, _, err = run(capsys, "test-eigvec", "--data", str(path), "--beta0", "1,1,0")
    assert code == 2 and "unit norm" in err
    code, _, _ = run(capsys, "test-eigvec", "--data", str(path), "--beta0", "1,0")
    assert code == 2
    code, out, _ = run(capsys, "test-eigvec", "--data", str(path), "--beta0", "1.0000001,0,0",
                       "--method", "gauss")
    assert code == 0 and json.loads(out)["nuisance"]["notes"]


def test_eigvec_bad_data_exit_2(capsys, tmp_path):
    p = tmp_path / "nan.csv"
    p.write_text("1,2,3\n4,nan,6\n7,8,9\n1,1,2\n5,3,1\n")
    code, _, err = run(capsys, "test-eigvec", "--data", str(p), "--beta0", "1,0,0")
    assert code == 2 and "line 2, column 2" in err


def test_eigval_warning_into_notes(capsys, data_csv, tmp_path):
    path, _ = data_csv
    out_file = tmp_path / "r.json"
    code, out, err = run(capsys, "test-eigval", "--data", str(path), "--p", "1/3", "--q", "1",
                         "--out", str(out_file))
    assert code == 0 and out == ""
    d = json.loads(out_file.read_text())
    assert "overreject" in err and any("overreject" in s for s in d["nuisance"]["notes"])
    assert d["reference"] == "normal-lower"


def test_eigval_davis_kurtosis_choice(capsys, data_csv):
    path, _ = data_csv
    vals = {}
    for kurt in ("moment", "robust"):
        code, out, _ = run(capsys, "test-eigval", "--data", str(path), "--p", "0.2", "--q", "1",
                           "--method", "davis", "--kurtosis", kurt)
        assert code == 0
        vals[kurt] = json.loads(out)["nuisance"]["kappa"]
    assert vals["moment"] != vals["robust"]


def test_simulate_and_critval(capsys, tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("reps = 20\nfamilies = gaussian\nxis = 0, 1\nmethods = anderson, rank:vdw\n")
    code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--threads", "1",
                       "--format", "csv", "--seed", "9")
    assert code == 0 and out.splitlines()[0].startswith("method,family")
    assert len(out.strip().splitlines()) == 1 + 4
    code, _, _ = run(capsys, "simulate", "--config", str(cfg), "--threads", "0")
    assert code == 2
    cfg.write_text("speed = 3\n")
    code, _, err = run(capsys, "simulate", "--config", str(cfg))
    assert code == 2 and "speed" in err
    code, out, _ = run(capsys, "critval", "--score", "sign", "--problem", "eigval", "--k", "3",
                       "--n", "40", "--reps", "1000", "--method", "oracle", "--lambda0", "10,4,1")
    d = json.loads(out)
    assert code == 0 and d["critical_value"] < 0 and d["score"] == "sign"


def test_json_floats_round_trip():
    x = 0.1 + 0.2
    assert json.loads(cli.dumps({"v": x}))["v"] == x
    assert json.loads(cli.dumps({"a": np.float64(1 / 3)}))["a"] == 1 / 3


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "rankpca", "are", "--score", "sign",
                          "--family", "gaussian", "--k", "3"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["score"] == "sign"
