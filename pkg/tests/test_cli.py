import json

import numpy as np
import pytest

from tensnorm.cli import main
from tensnorm.fileio import load_decomposition, save_tensor


@pytest.fixture
def w_file(tmp_path):
    path = tmp_path / "w.json"
    assert main(["known-state", "W", "-p", "n=3", "-o", str(path)]) == 0
    return path


def test_spectral_and_nuclear(w_file, tmp_path, capsys):
    assert main(["spectral", "-i", str(w_file), "--field", "C", "--restarts", "3"]) == 0
    assert "0.6667" in capsys.readouterr().out
    dec = tmp_path / "dec.json"
    code = main(["nuclear", "-i", str(w_file), "--field", "C", "--restarts", "2", "--format", "json",
                 "--emit-decomposition", str(dec)])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert abs(out[0]["nuclear"] - 1.5) < 1e-3
    d, target = load_decomposition(dec)
    assert d.residual(target) < 1e-7


def test_measure_is_replayable(w_file, capsys):
    args = ["measure", "-i", str(w_file), "--field", "C", "--restarts", "2", "--seed", "4",
            "--format", "json"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first
    assert abs(json.loads(first)[0]["P"] - 1) < 2e-3


def test_separability_and_ppt_flag(tmp_path, capsys):
    path = tmp_path / "rho.json"
    assert main(["known-state", "werner", "-p", "b=0.2", "-o", str(path)]) == 0
    assert main(["separability", "-i", str(path), "--restarts", "2", "--ppt", "1",
                 "--format", "csv"]) == 0
    out = capsys.readouterr().out
    assert "Separable" in out and "1:pass" in out


def test_search_and_bounds(tmp_path, capsys):
    csv_path = tmp_path / "s.csv"
    assert main(["search", "--shape", "2,2", "--field", "R", "--samples", "2", "--restarts", "1",
                 "--spectral-restarts", "2", "--csv", str(csv_path)]) == 0
    assert len(csv_path.read_text().splitlines()) == 3
    assert main(["bounds", "--shape", "2,2,2", "--field", "C"]) == 0
    assert "1.5000" in capsys.readouterr().out


def test_known_state_to_stdout(capsys):
    assert main(["known-state", "T", "-p", "n=3", "-p", "lam=-i"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["field"] == "R" and doc["metadata"]["name"] == "T"  # the two conjugate terms sum to a real tensor


def test_exit_codes(tmp_path):
    assert main(["spectral", "-i", str(tmp_path / "missing.json")]) == 2
    assert main(["spectral"]) == 2
    assert main(["spectral", "--bogus"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema_version": 1, "shape": [2, 2], "field": "R",
                               "entries": [[1, 0]] * 3}))
    assert main(["nuclear", "-i", str(bad)]) == 2
    notpsd = tmp_path / "notpsd.json"
    save_tensor(np.diag([1.5, -0.5, 0, 0]).reshape(2, 2, 2, 2), notpsd)
    assert main(["separability", "-i", str(notpsd)]) == 4
    big = tmp_path / "big.json"
    save_tensor(np.ones((2, 2)), big)
    assert main(["measure", "-i", str(big)]) == 4
    zero = tmp_path / "zero.json"
    save_tensor(np.zeros((2, 2, 2)), zero)
    assert main(["nuclear", "-i", str(zero)]) == 4


def test_numerical_failure_exit_code(w_file, monkeypatch):
    import tensnorm.cli as cli
    from tensnorm.nuclear import nuclear_upper

    def broken(*args, **kwargs):
        res = nuclear_upper(*args, **kwargs)
        res.status = "ReconstructionFailed"
        return res

    monkeypatch.setattr(cli, "nuclear_upper", broken)
    assert main(["nuclear", "-i", str(w_file), "--restarts", "1"]) == 3
