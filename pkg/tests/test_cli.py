import csv
import json
import math
import subprocess
import sys

import pytest

from ghostfield.cli import EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_OK, SWEEP_COLUMNS, parse_config, run_command
from ghostfield.errors import ConfigError

BASE = ["--coupling", "em", "--q", "1", "--ra", "0,0,0", "--rb", "2,0,0", "--t", "1"]
FIXED_TIME = "2000-01-01T00:00:00+00:00"


def run(tmp_path, *argv, now=FIXED_TIME):
    code = run_command([*argv, "--output-dir", str(tmp_path)], now=now)
    return code


def record(tmp_path, command):
    return json.loads((tmp_path / f"{command}.json").read_text(encoding="utf-8"))


def test_phase_command(tmp_path):
    assert run(tmp_path, "phase", *BASE) == EXIT_OK
    rec = record(tmp_path, "phase")
    assert list(rec) == ["command", "config_digest", "spec", "results", "tool_version", "timestamp"]
    assert rec["results"]["phase"] == pytest.approx(0.0397887, abs=1e-7)
    assert rec["spec"]["quadrature"]["tail"] == "analytic-sine-integral"
    assert len(rec["config_digest"]) == 64


def test_json_is_byte_identical_across_runs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    run(a, "heisenberg", "--coupling", "em", "--q", "1", "--ra", "0,0,0", "--ra", "0,0,1", "--rb", "1,0,0",
        "--t", "1", "--n-nodes", "64", "--n-max", "16")
    run(b, "heisenberg", "--coupling", "em", "--q", "1", "--ra", "0,0,0", "--ra", "0,0,1", "--rb", "1,0,0",
        "--t", "1", "--n-nodes", "64", "--n-max", "16", now="2030-05-05T05:05:05+00:00")
    body = lambda p: {k: v for k, v in json.loads((p / "heisenberg.json").read_text()).items() if k != "timestamp"}  # noqa: E731
    assert body(a) == body(b)
    strip = lambda p: (p / "heisenberg.json").read_text().replace("2030-05-05T05:05:05", "2000-01-01T00:00:00")  # noqa: E731
    assert strip(a) == strip(b)


def test_entangle_all_equal_distances(tmp_path):
    code = run(tmp_path, "entangle", "--coupling", "em", "--q", "1", "--ra", "0,1,0", "--ra", "0,-1,0",
               "--rb", "1,0,0", "--rb=-1,0,0", "--t", "1")
    assert code == EXIT_OK
    assert record(tmp_path, "entangle")["results"]["concurrence"] == pytest.approx(0.0, abs=1e-12)


def test_selftest(tmp_path):
    assert run(tmp_path, "selftest") == EXIT_OK
    rec = record(tmp_path, "selftest")
    assert rec["results"]["all_passed"] is True
    assert len(rec["results"]["checks"]) >= 5


def test_modes_tomography_heisenberg(tmp_path):
    assert run(tmp_path, "modes", *BASE, "--k", "0.5,2") == EXIT_OK
    modes = record(tmp_path, "modes")["results"]["modes"]
    assert [m["k"] for m in modes] == [0.5, 2.0]
    assert all(m["phase_diff"] < 1e-8 and m["ghost_quadrature"] < 1e-7 for m in modes)
    sup = ["--coupling", "em", "--q", "2", "--ra", "0,0,0", "--ra", "0,0,1", "--rb", "1,0,0", "--t", "1"]
    assert run(tmp_path, "tomography", *sup, "--n-samples", "0") == EXIT_OK
    tomo = record(tmp_path, "tomography")["results"]
    assert tomo["estimate"] == pytest.approx(tomo["relative_phase"], abs=1e-15)
    sup[3] = "1"
    assert run(tmp_path, "heisenberg", *sup, "--n-nodes", "64", "--n-max", "24") == EXIT_OK
    assert record(tmp_path, "heisenberg")["results"]["rel_diff"] < 1e-4


def test_sweep_csv_order_and_thread_independence(tmp_path, monkeypatch):
    outs = []
    for threads in ("1", "4"):
        d = tmp_path / threads
        d.mkdir()
        monkeypatch.setenv("GHOSTFIELD_THREADS", threads)
        assert run(d, "sweep", *BASE, "--R", "5,0.5,2", "--t-values", "1,0.1") == EXIT_OK
        outs.append((d / "sweep.csv").read_bytes())
    assert outs[0] == outs[1]
    rows = list(csv.DictReader(outs[0].decode().splitlines()))
    assert tuple(rows[0]) == SWEEP_COLUMNS
    assert [(float(r["R"]), float(r["t"])) for r in rows] == [(5, 1), (5, 0.1), (0.5, 1), (0.5, 0.1), (2, 1), (2, 0.1)]
    assert all(r["param"] == "R,t" and float(r["rel_err"]) < 1e-6 for r in rows)


def test_bad_thread_count(tmp_path, monkeypatch):
    monkeypatch.setenv("GHOSTFIELD_THREADS", "0")
    assert run(tmp_path, "sweep", *BASE) == EXIT_CONFIG


def test_exit_codes(tmp_path, capsys):
    assert run(tmp_path, "phase", *BASE, "--frobnicate") == EXIT_CONFIG
    assert "usage" in capsys.readouterr().err
    assert run(tmp_path, "explode") == EXIT_CONFIG
    assert run(tmp_path, "phase", "--coupling", "em", "--q", "1", "--ra", "0,0,0", "--rb", "0,0,0", "--t", "1") == EXIT_CONFIG
    assert run(tmp_path, "phase", "--coupling", "em", "--ra", "0,0,0", "--rb", "1,0,0", "--t", "1") == EXIT_CONFIG
    code = run(tmp_path, "phase", *BASE, "--tail", "none", "--k-max", "10", "--rtol", "1e-6")
    assert code == EXIT_CONVERGENCE
    assert "est_error" in capsys.readouterr().err
    assert run(tmp_path, "modes", *BASE, "--k", "0.001", "--n-max", "4") == EXIT_CONVERGENCE


def test_parse_config(tmp_path):
    good = tmp_path / "good.cfg"
    good.write_text("# minimal\ncoupling = em\nq=1\nra=0,0,0\nrb = 1, 0, 0   # trailing comment\nt=1\n", encoding="utf-8")
    cfg, spec = parse_config(good)
    assert cfg.charge == 1.0 and cfg.time == 1.0
    assert cfg.positions_b[0].tolist() == [1.0, 0.0, 0.0]
    assert spec.n_nodes == 256
    sup = tmp_path / "sup.cfg"
    sup.write_text("coupling=gravity\nm=2\nra=0,0,0; 0,0,1\nrb=3,0,0\nt=2\nn_nodes=512\ntail=none\n")
    cfg, spec = parse_config(sup)
    assert len(cfg.positions_a) == 2 and spec.n_nodes == 512 and spec.tail.value == "none"


@pytest.mark.parametrize("text, match", [
    ("coupling=em\nq=1\nra=0,0,0\nrb=0,0,0\nt=1\n", "coincides"),
    ("coupling=em\nq=1\nra=0,0,0\nrb=1,0,0\nt=1\nfoo=1\n", "foo"),
    ("coupling=em\nq=1\nra=0,0,0\nt=1\n", "rb"),
    ("coupling=em\nq=1\nra=0,0\nrb=1,0,0\nt=1\n", "three"),
    ("coupling=em\nq=one\nra=0,0,0\nrb=1,0,0\nt=1\n", "q"),
    ("coupling=em\nq=1\nq=2\nra=0,0,0\nrb=1,0,0\nt=1\n", "duplicate"),
    ("coupling=em\nq=1\nm=1\nra=0,0,0\nrb=1,0,0\nt=1\n", "either"),
    ("coupling em\n", "key=value"),
])
def test_parse_config_errors(tmp_path, text, match):
    path = tmp_path / "bad.cfg"
    path.write_text(text)
    with pytest.raises(ConfigError, match=match):
        parse_config(path)


def test_config_file_with_cli_override(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("coupling=em\nq=1\nra=0,0,0\nrb=1,0,0\nt=1\n")
    assert run(tmp_path, "phase", "--config", str(path), "--rb", "4,0,0") == EXIT_OK
    assert record(tmp_path, "phase")["results"]["pairs"][0]["R"] == 4.0


def test_gravity_substitution_end_to_end(tmp_path):
    m = 1.7
    q = m * math.sqrt(4 * math.pi)
    common = ["--ra", "0,0,0", "--rb", "2.5,0,0", "--t", "3"]
    assert run(tmp_path, "phase", "--coupling", "gravity", "--m", str(m), *common) == EXIT_OK
    grav = record(tmp_path, "phase")["results"]["phase"]
    assert run(tmp_path, "phase", "--coupling", "em", "--q", repr(q), *common) == EXIT_OK
    em = record(tmp_path, "phase")["results"]["phase"]
    assert abs(grav - em) <= 1e-12 * abs(em)
    assert grav == pytest.approx(m**2 * 3 / 2.5, rel=1e-6)


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ghostfield", "phase", *BASE, "--output-dir", str(tmp_path),
                           "--print-json"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["phase"] == pytest.approx(0.0397887, abs=1e-7)
