import json
import subprocess
import sys

import pytest

from assoc_totient.cli import build_parser, main, parse_bytes, parse_count
from assoc_totient.errors import EXIT_DATA_GAP, EXIT_DOMAIN, EXIT_OK, EXIT_PARSE
from assoc_totient.sieve import CSV_HEADER

DELTA_CHI5 = "gl2:source=delta,chi=q=5,index=1"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _field(text, key):
    for line in text.splitlines():
        if line.startswith(key + " = "):
            return line.split(" = ", 1)[1]
    raise KeyError(key)


def test_parse_count():
    assert parse_count("1e6") == 10**6
    assert parse_count("12") == 12
    assert parse_bytes("2G") == 2 * 1024**3
    assert parse_bytes("512MiB") == 512 * 1024**2


def test_help_lists_commands_and_flags():
    text = build_parser().format_help()
    for word in ("const", "phi", "scan", "series", "dump", "selftest", "--threads", "--memory-cap",
                 "--format", "--out", "--allow-ramanujan-violations"):
        assert word in text


def test_const_zeta(capsys):
    code, out, _ = run(capsys, "const", "zeta")
    assert code == EXIT_OK
    assert _field(out, "C").startswith("0.30396355092701")


def test_const_dirichlet(capsys):
    code, out, _ = run(capsys, "const", "dirichlet:q=4,index=1")
    assert code == EXIT_OK
    assert _field(out, "C").startswith("0.545872")


def test_const_loose(capsys):
    code, out, _ = run(capsys, "const", "zeta", "--tol", "0.5")
    assert code == EXIT_OK
    assert float(_field(out, "tail_bound")) <= 0.5


def test_const_json(capsys):
    code, out, _ = run(capsys, "--format", "json", "const", "zeta")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["schema"] == 1 and doc["C"]["re"] == pytest.approx(0.30396355092701331)


def test_const_gl2_partial(capsys):
    code, _, _ = run(capsys, "const", DELTA_CHI5)
    assert code == EXIT_DATA_GAP
    code, out, _ = run(capsys, "const", DELTA_CHI5, "--partial")
    assert code == EXIT_OK and float(_field(out, "tail_bound")) < 1e-3


def test_phi_commands(capsys):
    code, out, _ = run(capsys, "phi", "zeta", "12")
    assert code == EXIT_OK
    assert float(_field(out, "phi")) == pytest.approx(4) and float(_field(out, "divisor_sum")) == pytest.approx(4)
    code, out, _ = run(capsys, "phi", "zeta", "1")
    assert _field(out, "phi") == "1"
    code, out, _ = run(capsys, "phi", DELTA_CHI5, "10")
    assert code == EXIT_OK and float(_field(out, "abs_diff")) <= 1e-12


def test_scan_small(capsys, tmp_path):
    out_path = tmp_path / "s.csv"
    code, _, err = run(capsys, "scan", "zeta", "--xmax", "10", "--checkpoints", "10", "--out", str(out_path))
    lines = out_path.read_text().splitlines()
    assert code == EXIT_OK
    assert lines[0] == CSV_HEADER
    assert lines[1].split(",")[:2] == ["10", "32"]
    assert "C =" in err


def test_scan_checkpoint_out_of_range(capsys):
    code, _, err = run(capsys, "scan", "zeta", "--xmax", "5", "--checkpoints", "7")
    assert code == EXIT_DOMAIN and "7" in err


def test_scan_needs_xmax(capsys):
    code, _, _ = run(capsys, "scan", "zeta")
    assert code == EXIT_DOMAIN


def test_scan_geometric_and_reports(capsys, tmp_path):
    csv_path = tmp_path / "a.csv"
    rep_path = tmp_path / "r.json"
    code, _, err = run(capsys, "scan", "zeta", "--xmax", "1e6", "--out", str(csv_path), "--report", str(rep_path))
    assert code == EXIT_OK
    assert len(csv_path.read_text().splitlines()) == 1 + 21
    doc = json.loads(rep_path.read_text())
    assert doc["schema"] == 1 and doc["fit"]["slope"] < 0
    assert "decay fit" in err


def test_scan_plot_data(capsys):
    code, out, _ = run(capsys, "--format", "plot-data", "scan", "zeta", "--xmax", "1e4")
    assert code == EXIT_OK
    assert out.startswith("# sqrt_log_x log_abs_R")


def test_scan_twisted_reports_offset(capsys):
    code, out, err = run(capsys, "--format", "json", "scan", DELTA_CHI5, "--xmax", "1e4")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["offset_estimate"] is not None
    assert "offset estimate" in err


def test_scan_twisted_gap(capsys):
    code, _, err = run(capsys, "scan", DELTA_CHI5, "--xmax", "1e5")
    assert code == EXIT_DATA_GAP and "10007" in err


def test_series_zeta(capsys):
    code, out, err = run(capsys, "series", "zeta", "--nmax", "1000")
    rows = out.splitlines()
    assert code == EXIT_OK
    assert rows[1] == "1,1,0" and all(r.endswith(",0,0") for r in rows[2:])
    assert "0.6079" in err
    code, out, err = run(capsys, "--format", "json", "series", "zeta", "--nmax", "1")
    assert json.loads(out)["partial"]["re"] == 1


def test_series_twisted_gaps_shrink(capsys):
    gaps = []
    for n in ("1000", "10000"):
        code, out, _ = run(capsys, "--format", "json", "series", DELTA_CHI5, "--nmax", n)
        assert code == EXIT_OK
        gaps.append(json.loads(out)["gap"])
    assert gaps[1] < gaps[0]


def test_dump(capsys):
    code, out, _ = run(capsys, "dump", "zeta", "--xmax", "12")
    lines = out.splitlines()
    assert code == EXIT_OK and len(lines) == 13
    assert lines[12].startswith("12,0.333333333333333")


def test_parse_errors(capsys, tmp_path):
    assert run(capsys, "const", "bogus")[0] == EXIT_PARSE
    bad = tmp_path / "bad.txt"
    bad.write_text("2,0.5\n3,oops\n")
    code, _, err = run(capsys, "const", f"gl2:source=file:{bad}", "--partial")
    assert code == EXIT_PARSE and f"{bad}:2" in err


def test_ramanujan_flag(capsys, tmp_path):
    f = tmp_path / "lam.txt"
    f.write_text("2,2.4\n3,0.1\n5,0.2\n7,0.3\n")
    assert run(capsys, "phi", f"gl2:source=file:{f}", "6")[0] == EXIT_PARSE
    assert run(capsys, "--allow-ramanujan-violations", "phi", f"gl2:source=file:{f}", "6")[0] == EXIT_OK


def test_config_file_flags_win(capsys, tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# run settings\nformat = json\ntol = 0.5\n")
    code, out, _ = run(capsys, "--config", str(conf), "const", "zeta")
    assert code == EXIT_OK and json.loads(out)["tail_bound"] <= 0.5
    code, out, _ = run(capsys, "--config", str(conf), "--format", "csv", "const", "zeta", "--tol", "1e-12")
    assert out.startswith("C = ")


def test_bad_config_key(capsys, tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("colour = blue\n")
    assert run(capsys, "--config", str(conf), "const", "zeta")[0] == EXIT_DOMAIN


def test_flag_position_independent(capsys):
    a = run(capsys, "--format", "json", "const", "zeta")[1]
    b = run(capsys, "const", "zeta", "--format", "json")[1]
    assert a == b


def test_memory_cap_flag(capsys):
    code, _, err = run(capsys, "--memory-cap", "1K", "scan", "zeta", "--xmax", "1e6")
    assert code == EXIT_DOMAIN and "memory cap" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "assoc_totient", "phi", "zeta", "12"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "phi = 4" in proc.stdout


def test_selftest_quick_corrupt_file(capsys, tmp_path):
    bad = tmp_path / "maass.txt"
    bad.write_text("2,0.1\n3,zz\n")
    code, out, _ = run(capsys, "selftest", "--quick", "--eigenvalues", str(bad))
    assert code == 1
    line = next(l for l in out.splitlines() if l.startswith("[FAIL]"))
    assert str(bad) in line
