import csv
import json
import os
import subprocess
import sys

import pytest

from multiconn import analytic, cli, reproduce, specialfn

SMALL = "[region]\nwidth = 150\nheight = 150\n"


def _cfg(tmp_path, text, name="e.cfg"):
    f = tmp_path / name
    f.write_text(text)
    return str(f)


def _sidecar(out, name):
    with open(os.path.join(out, name + ".spec.json")) as fh:
        return json.load(fh)


def test_analytic_writes_outputs(tmp_path, capsys):
    cfg = _cfg(tmp_path, "[params]\nk = 3\n[failure]\nkind = random\nvalue = 0.3\n"
                         "[sweep]\npath = params.k\nvalues = 1..3\n")
    out = str(tmp_path / "o")
    assert cli.main(["analytic", "--config", cfg, "--out", out]) == cli.EXIT_OK
    assert sorted(f for f in os.listdir(out) if not f.endswith(".spec.json")) == \
        ["analytic.csv", "analytic.json", "analytic.svg"]
    rows = list(csv.DictReader(open(os.path.join(out, "analytic.csv"))))
    assert len(rows) == 1 + 2 + 3
    assert float(rows[0]["e_log2_snr_exact"]) == pytest.approx(
        analytic.expected_log_snr(1, analytic.NetworkParams()), rel=1e-14)
    doc = json.load(open(os.path.join(out, "analytic.json")))
    assert doc["schema_version"] == 1 and len(doc["results"]) == 3
    assert doc["results"][2]["outage_probability"] == pytest.approx(0.027)
    side = _sidecar(out, "analytic.csv")
    assert side["seed"] == 0 and side["spec"]["sweep"]["path"] == "params.k"
    assert "sum_capacity_exact=" in capsys.readouterr().out


def test_simulate_is_reproducible(tmp_path):
    cfg = _cfg(tmp_path, SMALL + "[params]\nk = 2\n[failure]\nkind = los\nvalue = 7.5\n")
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    assert cli.main(["simulate", "--config", cfg, "--out", a, "--seed", "5"]) == 0
    assert cli.main(["simulate", "--config", cfg, "--out", b, "--seed", "5"]) == 0
    for name in ("simulate.csv", "simulate.json", "simulate_cdf.svg"):
        assert open(os.path.join(a, name), "rb").read() == open(os.path.join(b, name), "rb").read()
        assert _sidecar(a, name)["seed"] == 5
    head = open(os.path.join(a, "simulate.csv")).readline().strip()
    assert head == "replication,user_id,n_links_surviving,capacity_bps"


def test_sweep_command(tmp_path):
    cfg = _cfg(tmp_path, "outputs = csv\n" + SMALL + "[failure]\nkind = distance\nvalue = 10\n"
                                 "[sweep]\npath = failure.value\nvalues = 10, 20\n")
    out = str(tmp_path / "o")
    assert cli.main(["sweep", "--config", cfg, "--out", out]) == 0
    rows = list(csv.DictReader(open(os.path.join(out, "sweep.csv"))))
    assert [r["sweep_value"] for r in rows] == ["10", "20"]
    assert {"analytic_capacity", "sim_capacity", "sim_outage"} <= set(rows[0])
    assert not os.path.exists(os.path.join(out, "sweep.json"))


def test_usage_errors(tmp_path, capsys):
    out = str(tmp_path / "o")
    assert cli.main([]) == cli.EXIT_USAGE
    assert cli.main(["bogus"]) == cli.EXIT_USAGE
    assert cli.main(["reproduce", "nofig", "--out", out]) == cli.EXIT_USAGE
    assert cli.main(["analytic", "--seed", "-3", "--out", out]) == cli.EXIT_USAGE
    assert cli.main(["sweep", "--out", out]) == cli.EXIT_USAGE
    assert cli.main(["analytic", "--config", str(tmp_path / "missing.cfg"), "--out", out]) == cli.EXIT_USAGE
    bad = _cfg(tmp_path, "[params]\nalpha = oops\n")
    assert cli.main(["analytic", "--config", bad, "--out", out]) == cli.EXIT_USAGE
    assert "line 2" in capsys.readouterr().err


def test_numeric_failure_exit_code(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise specialfn.TruncationError("series did not converge", 1.0, 5)
    monkeypatch.setattr(analytic, "expected_log_snr_exact", boom)
    assert cli.main(["analytic", "--out", str(tmp_path)]) == cli.EXIT_NUMERIC


def _reproduce(tmp_path, out):
    cfg = _cfg(tmp_path, SMALL)
    return cli.main(["reproduce", "no_failure_capacity", "--config", cfg, "--out", out, "--replications", "1"])


def test_reproduce_reports(tmp_path, capsys):
    out = str(tmp_path / "o")
    code = _reproduce(tmp_path, out)
    text = capsys.readouterr().out
    verdict = json.load(open(os.path.join(out, "no_failure_capacity.verdict.json")))
    assert verdict["figure"] == "no_failure_capacity"
    assert code == (cli.EXIT_OK if verdict["pass"] else cli.EXIT_REPRO)
    lines = [l for l in text.splitlines() if l.startswith(("PASS", "FAIL"))]
    assert len(lines) == len(verdict["checks"]) > 0
    assert os.path.exists(os.path.join(out, "no_failure_capacity.svg"))
    assert _sidecar(out, "no_failure_capacity.svg")["spec"]["replications"] == 1


def test_reproduce_out_of_tolerance_exit_code(tmp_path, monkeypatch, capsys):
    table = dict(reproduce.REFERENCE_LOSS_TABLE)
    table["no_failure"] = [(90.0, 90.0)] * 4
    monkeypatch.setattr(reproduce, "REFERENCE_LOSS_TABLE", table)
    out = str(tmp_path / "o")
    assert _reproduce(tmp_path, out) == cli.EXIT_REPRO
    assert "FAIL  no_failure_capacity: sim_loss_k2_pct" in capsys.readouterr().out
    assert not json.load(open(os.path.join(out, "no_failure_capacity.verdict.json")))["pass"]


def test_full_scale_flag(tmp_path):
    args = cli.build_parser().parse_args(["simulate", "--full-scale"])
    assert cli.resolve_spec(args).region.width == 1500.0
    args = cli.build_parser().parse_args(["simulate"])
    assert cli.resolve_spec(args).region.width == 500.0


def test_console_script_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "multiconn.cli", "analytic", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert "sum_capacity_exact" in out.stdout
