import csv
import io
import json

import numpy as np
import pytest
import yaml

from rigidcrlb.cli import BOUND_COLUMNS, EXIT_INVALID, EXIT_OK, EXIT_RUNTIME, main
from rigidcrlb.config import bundled_config_text


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def small_config(tmp_path, **changes):
    tree = yaml.safe_load(bundled_config_text("table3.cfg"))
    tree.update(changes)
    path = tmp_path / "small.cfg"
    path.write_text(yaml.safe_dump(tree))
    return str(path)


def test_bound_sweep(capsys):
    code, out, _ = run(capsys, "bound", "--config", "table3.cfg")
    assert code == EXIT_OK
    assert out.splitlines()[0] == ",".join(BOUND_COLUMNS)
    table = rows(out)
    assert len(table) == 10
    crlb_t = [float(r["crlb_t"]) for r in table]
    assert all(b > a for a, b in zip(crlb_t, crlb_t[1:]))
    for r in table:
        assert float(r["crlb_t_approx"]) <= float(r["crlb_t"])
        assert float(r["crlb_Q_approx"]) <= float(r["crlb_Q"])
        assert float(r["ccrb_Q"]) < float(r["crlb_Q"])
        assert r["flags"] == ""


def test_bound_json_slopes(capsys):
    code, out, _ = run(capsys, "bound", "--config", "table3.cfg", "--format", "json")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["sweep_parameter"] == "sigma"
    slope = doc["diagnostics"]["loglog_slope"]["crlb_t"]
    assert slope == pytest.approx(2.0, abs=0.01)
    assert len(doc["rows"]) == 10


def test_simulate_columns_and_determinism(tmp_path, capsys):
    cfg = small_config(tmp_path, trials=60, sweep={"parameter": "sigma", "values": [0.05, 0.1]},
                       estimators=["procrustes", "ls", "nls"])
    out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "simulate", "--config", cfg, "--out", str(out_a))[0] == EXIT_OK
    assert run(capsys, "simulate", "--config", cfg, "--out", str(out_b), "--threads", "3")[0] == EXIT_OK
    assert out_a.read_bytes() == out_b.read_bytes()
    header = out_a.read_text().splitlines()[0].split(",")
    for est in ("procrustes", "ls", "nls"):
        for f in ("mse_t", "se_t", "mse_Q", "se_Q", "fail_rate"):
            assert f"{f}_{est}" in header
    assert header[:8] == BOUND_COLUMNS[:8] and header[-1] == "flags"
    table = rows(out_a.read_text())
    assert len(table) == 2
    assert all(float(r["fail_rate_nls"]) == 0.0 for r in table)


def test_seed_override_changes_output(tmp_path, capsys):
    cfg = small_config(tmp_path, trials=30, sweep={"parameter": "sigma", "values": [0.1]})
    _, a, _ = run(capsys, "simulate", "--config", cfg)
    _, b, _ = run(capsys, "simulate", "--config", cfg, "--seed", "99")
    _, c, _ = run(capsys, "simulate", "--config", cfg, "--seed", "0")
    assert a != b and a == c


def test_trials_zero_is_validation_failure(tmp_path, capsys):
    cfg = small_config(tmp_path, trials=0)
    code, _, err = run(capsys, "simulate", "--config", cfg)
    assert code == EXIT_INVALID and "trials" in err
    code, _, err = run(capsys, "simulate", "--config", "table3.cfg", "--trials", "0")
    assert code == EXIT_INVALID


def test_parse_failure_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("target: [1, 2\n")
    code, _, err = run(capsys, "bound", "--config", str(bad))
    assert code == EXIT_INVALID and "line" in err


def test_numerical_failure_exit_code(tmp_path, capsys):
    # target sitting exactly on an anchor: zero distance
    tree = yaml.safe_load(bundled_config_text("table3.cfg"))
    tree["pose"] = {"angles_deg": [0, 0, 0], "translation": [-9.5, -9.5, -9.5]}
    path = tmp_path / "degenerate.cfg"
    path.write_text(yaml.safe_dump(tree))
    code, _, err = run(capsys, "bound", "--config", str(path))
    assert code == EXIT_RUNTIME and "DegenerateGeometry" in err


def test_rank_deficient_rows_are_flagged(tmp_path, capsys):
    cfg = small_config(tmp_path, connectivity={"fraction": 0.05, "seed": 1})
    code, out, _ = run(capsys, "bound", "--config", cfg)
    assert code == EXIT_OK
    r = rows(out)[0]
    assert r["flags"] != ""


def test_validate_passes(capsys):
    code, out, _ = run(capsys, "validate", "--seed", "3")
    assert code == EXIT_OK
    last = out.strip().splitlines()[-1]
    passed, total = last.split()[1].split("/")
    assert passed == total
    assert "INFO" in out


def test_validate_fails_on_published_von_mises_value(tmp_path, capsys):
    tree = yaml.safe_load(bundled_config_text("table3.cfg"))
    tree.pop("sweep")
    tree["edges"].append({"name": "bearing", "kind": "aoa",
                          "noise": {"model": "von_mises", "omega": 5.0, "source": "table"}})
    path = tmp_path / "vm.cfg"
    path.write_text(yaml.safe_dump(tree))
    code, out, _ = run(capsys, "validate", "--config", str(path))
    assert code == EXIT_INVALID
    assert any(line.startswith("FAIL") and "VonMises" in line for line in out.splitlines())


def test_bound_out_file(tmp_path, capsys):
    out = tmp_path / "b.csv"
    assert run(capsys, "bound", "--config", "table3.cfg", "--out", str(out))[0] == EXIT_OK
    data = np.genfromtxt(out, delimiter=",", names=True, usecols=range(8))
    assert data.shape == (10,)


def test_usage_error_is_invalid_input(capsys):
    with pytest.raises(SystemExit) as info:
        main(["bound"])
    assert info.value.code == EXIT_INVALID
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == EXIT_INVALID
