import csv
import subprocess
import sys
from pathlib import Path

import pytest

from cpeps import serialization as ser
from cpeps.cli import main
from cpeps.gaussian_core import derive_cf_params


def read_csv(path):
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def body(path):
    return [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("# timestamp")]


def test_approximate_cf(tmp_path):
    assert main(["--out", str(tmp_path), "approximate", "--m", "1", "--D", "2", "--mode", "cf",
                 "--Lambda", "2"]) == 0
    rows = read_csv(tmp_path / "dispersion.csv")
    assert len(rows) == 512
    row = next(r for r in rows if float(r["k"]) == 1.0)
    assert float(row["omega_D"]) == pytest.approx(1.4, rel=1e-14)
    header = (tmp_path / "dispersion.csv").read_text().splitlines()[:3]
    assert header[0].startswith("# cpeps ") and "approximate" in header[1]


def test_approximate_pade(tmp_path):
    assert main(["--out", str(tmp_path), "approximate", "--D", "0", "--mode", "pade", "--u0", "0",
                 "--m", "1.5"]) == 0
    assert {float(r["omega_D"]) for r in read_csv(tmp_path / "dispersion.csv")} == {1.5}
    assert main(["--out", str(tmp_path), "approximate", "--mode", "pade", "--D", "1", "--u0", "0",
                 "--m", "1"]) == 0
    R = ser.rational_from_text((tmp_path / "rational.txt").read_text())
    assert [c.real for c in R.num] == pytest.approx([1.0, 0.75])
    assert [c.real for c in R.den] == pytest.approx([1.0, 0.25])


def test_fidelity_identical(tmp_path):
    assert main(["--out", str(tmp_path), "fidelity", "--params", "free", "--d", "2"]) == 0
    assert float(read_csv(tmp_path / "fidelity.csv")[0]["per_site"]) == 0.0


def test_fidelity_sweeps(tmp_path):
    params = tmp_path / "p.txt"
    params.write_text(ser.params_to_text(derive_cf_params(1.0, 2)))
    assert main(["--out", str(tmp_path), "fidelity", "--params", str(params),
                 "--Lambda", "10,20,40", "--N", "64,128,256"]) == 0
    assert len(read_csv(tmp_path / "fidelity.csv")) == 3
    lat = [r for r in read_csv(tmp_path / "finite_lattice.csv") if float(r["Lambda"]) == 10.0]
    totals = [float(r["total_log_fidelity"]) for r in lat]
    assert abs(totals[1] / totals[0] - 2) < 1e-3 and abs(totals[2] / totals[1] - 2) < 1e-3


def test_optimize_config_and_reproducibility(tmp_path):
    cfg = tmp_path / "opt.cfg"
    cfg.write_text("d = 1\nD = 1\ninit = pade\nrestarts = 2\nmax_iter = 300\n")
    for out in ("a", "b"):
        assert main(["--config", str(cfg), "--out", str(tmp_path / out), "--seed", "4",
                     "optimize"]) == 0
    row = read_csv(tmp_path / "a" / "optimize.csv")[0]
    assert float(row["best_value"]) >= float(row["init_value"])
    for name in ("optimize.csv", "trace.csv"):
        assert body(tmp_path / "a" / name) == body(tmp_path / "b" / name)
    assert "# seed = 4" in (tmp_path / "a" / "optimize.csv").read_text()


def test_optimize_file_init(tmp_path):
    init = tmp_path / "init.txt"
    init.write_text("tilde_num = 0.1 7.5\ntilde_den = 1 25\n")
    cfg = tmp_path / "opt.cfg"
    cfg.write_text("d = 1\nD = 1\ninit = file:init.txt\nmax_iter = 50\n")
    assert main(["--config", str(cfg), "--out", str(tmp_path), "optimize"]) == 0


def test_lattice_command(tmp_path):
    cfg = tmp_path / "lat.cfg"
    cfg.write_text("d = 1\nepsilon = 0.2 0.1 0.05\nN = 32\nparams = cf:2\n")
    assert main(["--config", str(cfg), "--out", str(tmp_path), "lattice"]) == 0
    rows = read_csv(tmp_path / "convergence.csv")
    assert list(rows[0]) == ["epsilon", "k", "omega_lat", "omega_cont", "abs_err"]
    ratios = [float(r["ratio"]) for r in read_csv(tmp_path / "richardson.csv")]
    assert all(3.3 <= q <= 4.7 for q in ratios)


def test_ctns_command(tmp_path):
    assert main(["--out", str(tmp_path), "--seed", "2", "ctns"]) == 0
    rows = read_csv(tmp_path / "roundtrip.csv")
    assert len(rows) == 50
    assert max(float(r["roundtrip_max_abs_err"]) for r in rows) < 1e-12
    params = tmp_path / "p.txt"
    params.write_text(ser.params_to_text(derive_cf_params(1.0, 2)))
    assert main(["--out", str(tmp_path / "one"), "ctns", "--params", str(params)]) == 0
    assert float(read_csv(tmp_path / "one" / "roundtrip.csv")[0]["roundtrip_max_abs_err"]) < 1e-12


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("bogus = 1\n")
    assert main(["--config", str(bad), "--out", str(tmp_path), "optimize"]) == 2
    assert main(["--out", str(tmp_path), "approximate", "--mode", "spline"]) == 2
    assert main(["--out", str(tmp_path), "fidelity", "--params", str(tmp_path / "missing")]) == 4
    nonphys = tmp_path / "r.txt"
    nonphys.write_text("num = 1 -1\nden = 1\n")
    assert main(["--out", str(tmp_path), "fidelity", "--params", str(nonphys)]) == 2
    sing = tmp_path / "s.txt"
    sing.write_text("D = 1\nZ = 0\nA = 0\nz = 0\na = 1\nc = 1\n")
    assert main(["--out", str(tmp_path), "fidelity", "--params", str(sing)]) == 3
    assert main(["--out", str(tmp_path), "nosuchcommand"]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "cpeps", "--out", str(tmp_path), "approximate",
                           "--D", "1"], capture_output=True, text=True)
    assert proc.returncode == 0
    proc = subprocess.run([sys.executable, "-m", "cpeps", "approximate", "--mode", "x"],
                          capture_output=True, text=True, cwd=tmp_path)
    assert proc.returncode == 2 and "mode" in proc.stderr
