import csv
import io
import json
import subprocess
import sys

import pytest

from rtbp_duffing import cli
from rtbp_duffing.errors import NoConvergence


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_identities(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "identities")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == 1
    assert doc["runs"][0]["criterion"] == 1 and doc["runs"][0]["passed"] is True
    assert len(doc["config_hash"]) == 16


def test_melnikov_csv(capsys, tmp_path):
    args = ["melnikov", "--eps", "0.45", "--theta0-grid", "4"]
    code, out, _ = run(capsys, *args)
    assert code == 0
    lines = out.split("\r\n")
    assert lines[-1] == "" and lines[-2].startswith("# schema=1 config_hash=")
    rows = list(csv.DictReader(io.StringIO("\r\n".join(lines[:-2]))))
    assert list(rows[0]) == ["eps", "theta0", "D0_direct", "D0_series", "series_tail", "leading"]
    assert len(rows) == 4
    for r in rows:
        gap = abs(float(r["D0_direct"]) - float(r["D0_series"]))
        assert gap <= max(1e-4 * abs(float(r["D0_direct"])), float(r["series_tail"])) + 1e-15


def test_output_is_byte_deterministic(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert cli.main(["homoclinic", "--eps", "0.4", "--t-end", "3", "--samples", "7",
                         "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_config_hash_ignores_output_options(tmp_path, capsys):
    cli.main(["homoclinic", "--eps", "0.4", "--samples", "3", "--out", str(tmp_path / "x.csv")])
    code, out, _ = run(capsys, "homoclinic", "--eps", "0.4", "--samples", "3")
    assert (tmp_path / "x.csv").read_text().splitlines()[-1] == out.splitlines()[-1]


def test_manifold_json(capsys):
    code, out, _ = run(capsys, "manifold", "--rho", "0.2", "--eps", "0.3", "--theta0", "0.7")
    assert code == 0
    run0 = json.loads(out)["runs"][0]
    res = run0["residuals_stable"]
    assert res[-1] < 1e-12
    assert all(b < a for a, b in zip(res[1:], res[2:]))
    assert run0["max_ratio_stable"] < 1


def test_sweeps(capsys):
    code, out, _ = run(capsys, "homoclinic", "--eps-sweep", "0.3:0.5:3", "--samples", "2")
    assert code == 0
    eps = sorted({float(r["eps"]) for r in csv.DictReader(io.StringIO(out.rsplit("#", 1)[0]))})
    assert eps == pytest.approx([0.3, 0.4, 0.5])


@pytest.mark.parametrize("argv", [["melnikov", "--eps", "2"],
                                  ["homoclinic", "--eps-sweep", "0.3:x:2"],
                                  ["manifold", "--rho", "5", "--eps", "0.3"]])
def test_config_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert json.loads(err)["error"] in ("ConfigError", "DomainError")


def test_bad_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        cli.main(["melnikov", "--no-such-flag"])
    assert exc.value.code == 2


def test_numeric_failure_exits_3(capsys, monkeypatch):
    def boom(job):
        raise NoConvergence("forced")
    monkeypatch.setitem(cli._TASKS, "melnikov", boom)
    code, out, err = run(capsys, "melnikov", "--eps", "0.45")
    assert code == 3
    msg = json.loads(err)
    assert msg["error"] == "NoConvergence" and msg["module"] == "rtbp_duffing.errors"


def test_failed_check_exits_1(capsys, monkeypatch):
    from rtbp_duffing import verify
    monkeypatch.setitem(verify.CHECKS, 1, lambda: verify.CheckResult(1, "identities", False, "x"))
    code, out, _ = run(capsys, "verify", "--suite", "identities")
    assert code == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rtbp_duffing", "homoclinic", "--eps", "0.4",
                           "--samples", "3", "--format", "json"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert len(json.loads(proc.stdout)["runs"]) == 3
