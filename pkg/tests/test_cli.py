import csv
import io

import numpy as np
import pytest

from decobudget.cli import main
from decobudget.pipeline import loglog_slope, strip_timestamp


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def test_table_subset_and_manifest(capsys):
    code, out, err = run(capsys, "table", "--missions", "maqro,beccal", "--backgrounds",
                         "solar-photons,solar-wind")
    assert code == 0
    assert "notice:" in err
    head = [ln for ln in out.splitlines() if ln.startswith("#")]
    for key in ("spec_revision:", "code_revision:", "seed:", "timestamp:", "mission:", "data:"):
        assert any(key in ln for ln in head), key
    r = rows(out)
    photon = {x["mission"]: x for x in r if x["background"] == "solar-photons"}
    assert 0.5 < float(photon["MAQRO"]["gamma_tot[1/s]"]) / 1.2e7 < 2
    assert all(x["quadrature_rel_err"] and x["converged"] == "true" for x in r)
    wind = [x["regime"] for x in r if x["background"] == "solar-wind" and x["mission"] == "BECCAL"]
    assert wind == ["lowq", "highq", "total"]


def test_table_empty_missions_is_config_error(capsys):
    code, _, err = run(capsys, "table", "--missions", "", "--backgrounds", "dust")
    assert code == 1 and "error" in err


def test_table_unknown_background(capsys):
    code, _, _ = run(capsys, "table", "--missions", "beccal", "--backgrounds", "gravitons")
    assert code == 1


def test_missing_data_dir_exit_2(capsys, tmp_path):
    code, _, _ = run(capsys, "table", "--missions", "beccal", "--backgrounds", "dust",
                     "--data-dir", str(tmp_path / "nope"))
    assert code == 2


def test_bad_data_file_exit_2(capsys, tmp_path):
    (tmp_path / "dust_grun1985.csv").write_text("log10_m[log10 g], dn_dlogm[cm^-3]\n-8, x\n")
    code, _, err = run(capsys, "table", "--missions", "beccal", "--backgrounds", "dust",
                       "--data-dir", str(tmp_path))
    assert code == 2 and "dust_grun1985.csv:2:" in err


def test_env_var_data_dir(capsys, tmp_path, monkeypatch):
    (tmp_path / "dust_grun1985.csv").write_text(
        "log10_m[log10 g], dn_dlogm[cm^-3]\n-8, 1e-20\n-7, 1e-20\n")
    monkeypatch.setenv("DECOBUDGET_DATA", str(tmp_path))
    code, out, _ = run(capsys, "table", "--missions", "beccal", "--backgrounds", "dust")
    assert code == 0 and str(tmp_path) in out


def test_quadrature_failure_exit_3(capsys):
    code, _, err = run(capsys, "table", "--missions", "maqro", "--backgrounds", "solar-photons",
                       "--rel-tol", "1e-12", "--max-subdivisions", "1")
    assert code == 3 and "converge" in err


def test_table_byte_identical_across_jobs(capsys, monkeypatch):
    args = ("table", "--missions", "beccal,gdm", "--backgrounds", "solar-wind,dust")
    _, a, _ = run(capsys, *args, "--jobs", "1")
    _, b, _ = run(capsys, *args, "--jobs", "4")
    assert strip_timestamp(a) == strip_timestamp(b)
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    _, c, _ = run(capsys, *args)
    _, d, _ = run(capsys, *args, "--jobs", "3")
    assert c == d


def test_table_out_file(capsys, tmp_path):
    out = tmp_path / "t.csv"
    code, stdout, _ = run(capsys, "table", "--missions", "aedge", "--backgrounds", "dust",
                          "--out", str(out))
    assert code == 0 and stdout == ""
    assert rows(out.read_text())[0]["mission"] == "AEDGE"


def test_scan_n_atoms_wind_highq(capsys):
    code, out, _ = run(capsys, "scan", "--parameter", "n_atoms", "--range", "1e5:1e8:8",
                       "--mission", "beccal", "--background", "solar-wind", "--regime", "highq")
    assert code == 0
    r = rows(out)
    x = [float(v["n_atoms"]) for v in r]
    g = [float(v["gamma_tot[1/s]"]) for v in r]
    assert loglog_slope(x, g) == pytest.approx(1.0, abs=0.02)
    assert "# loglog_slope:" in out


def test_scan_dx_to_zero(capsys):
    code, out, _ = run(capsys, "scan", "--parameter", "dx", "--range", "1e-14:1e-8:8",
                       "--mission", "beccal", "--background", "solar-photons")
    assert code == 0
    snr = np.array([float(v["snr_shot"]) for v in rows(out)])
    assert np.all(np.diff(snr) > 0) and snr[0] < 1e-6 * snr[-1]


def test_scan_too_few_points(capsys):
    code, _, _ = run(capsys, "scan", "--parameter", "dx", "--range", "1e-3:1e-2:4")
    assert code == 1


def test_validate_angular_deterministic(capsys):
    code, a, _ = run(capsys, "validate", "--suite", "angular", "--seed", "42")
    assert code == 0
    _, b, _ = run(capsys, "validate", "--suite", "angular", "--seed", "42", "--jobs", "4")
    assert a == b
    assert a.splitlines()[-1] == "SUMMARY 6/6 passed"


def test_validate_xsec(capsys):
    code, out, _ = run(capsys, "validate", "--suite", "xsec")
    assert code == 0
    assert out.splitlines()[-1] == "SUMMARY 16/16 passed"


def test_validate_forced_failure(capsys):
    code, out, err = run(capsys, "validate", "--suite", "xsec", "--tolerance", "0")
    assert code == 3 and "FAIL" in out and "failed" in err


def test_ingest_roundtrip(capsys, tmp_path):
    raw = tmp_path / "raw.tsv"
    raw.write_text("# raw\nK[MeV]\tJ[1/(m^2 s sr MeV)]\n10\t2\n100\t1\n1000\t0.5\n")
    code, out, _ = run(capsys, "ingest", str(raw), "--species", "proton")
    assert code == 0
    canon = tmp_path / "canon.csv"
    canon.write_text(out)
    code, out2, _ = run(capsys, "ingest", str(canon), "--species", "proton")
    a = [ln for ln in out.splitlines() if not ln.startswith("#")]
    b = [ln for ln in out2.splitlines() if not ln.startswith("#")]
    assert a[0] == "K[eV], flux[1/(cm^2 s eV)]"
    assert a == b


def test_ingest_bad_unit_exit_2(capsys, tmp_path):
    raw = tmp_path / "raw.csv"
    raw.write_text("K[MeV], J[parsec]\n10, 2\n100, 1\n")
    code, _, _ = run(capsys, "ingest", str(raw))
    assert code == 2
