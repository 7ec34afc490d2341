import json

import pytest

from siegel.cli import main, scan_grid
from siegel.io import payload, read_table


def run(capsys, *argv):
    status = main(list(argv))
    return status, capsys.readouterr()


def test_brjuno_json(capsys):
    status, out = run(capsys, "brjuno", "--alpha", "golden", "--terms", "40", "--json")
    data = json.loads(out.out)
    assert status == 0
    assert data["brjuno_sum"] == pytest.approx(3.286129382114853, rel=1e-12)
    assert data["classification"] == "brjuno-like"


def test_brjuno_rational(capsys):
    status, out = run(capsys, "brjuno", "--alpha", "3/7")
    assert status == 0 and "rational 3/7" in out.out


def test_bad_alpha_is_usage_error(capsys):
    status, out = run(capsys, "radius", "--alpha", "banana")
    assert status == 2 and "error" in out.err


def test_radius_refuses_small_N(capsys):
    status, out = run(capsys, "radius", "--alpha", "golden", "--N", "32")
    assert status == 2


def test_radius_resonance_is_success(capsys):
    status, out = run(capsys, "radius", "--alpha", "2/5", "--N", "128", "--json")
    data = json.loads(out.out)
    assert status == 0 and data["radius"] == 0.0 and data["resonance_order"] == 6


def test_radius_dump_and_replay(tmp_path, capsys):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    status, _ = run(capsys, "radius", "--alpha", "silver", "--N", "256", "--dump", str(first))
    assert status == 0
    config, meta, cols, rows = read_table(first)
    assert config["command"] == "radius" and config["N"] == 256
    assert len(rows) == 256
    assert run(capsys, "replay", str(first), "--out", str(second))[0] == 0
    assert first.read_bytes() == second.read_bytes()


def test_output_dir_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("SIEGEL_OUTPUT_DIR", str(tmp_path))
    status, _ = run(capsys, "herman", "lockscan", "--grid", "8", "--out", "lock.csv")
    assert status == 0
    config, _, cols, rows = read_table(tmp_path / "lock.csv")
    assert cols == ["lambda", "rho", "error"] and len(rows) == 8


def test_scan_grid_snaps_rationals():
    grid = scan_grid(0.60, 0.64, 512, 8)
    exact = [g for g in grid if not isinstance(g, float)]
    assert [str(g) for g in exact] == ["3/5", "5/8"]
    assert len(grid) == 512


def test_scan_and_replay(tmp_path, capsys):
    out1, out2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
    status, _ = run(capsys, "scan", "--count", "12", "--N", "512", "--workers", "2",
                    "--out", str(out1))
    assert status == 0
    _, _, cols, rows = read_table(out1)
    zeros = [r for r in rows if r[3] == "1"]
    assert [float(r[0]) for r in zeros] == [0.6, 0.625]
    assert all(float(r[1]) == 0.0 for r in zeros)
    assert run(capsys, "replay", str(out1), "--out", str(out2))[0] == 0
    assert payload(out1) == payload(out2)


def test_scan_preconditions(capsys):
    assert run(capsys, "scan", "--count", "0")[0] == 2
    assert run(capsys, "scan", "--count", "100000", "--N", "16384")[0] == 2


def test_scan_probe(capsys, tmp_path):
    status, out = run(capsys, "scan", "--count", "4", "--N", "512", "--probe-alpha", "golden",
                      "--probe-scales", "1e-2,1e-3", "--probe-samples", "4", "--json")
    data = json.loads(out.out)
    assert status == 0 and len(data["probe"]) == 2


def test_search_usage_errors(capsys):
    assert run(capsys, "search")[0] == 2
    assert run(capsys, "search", "--r-target", "0.9", "--N0", "512")[0] == 2


def test_search_nonconvergence_status(capsys, tmp_path):
    out = tmp_path / "t.csv"
    status, text = run(capsys, "search", "--r-fraction", "0.5", "--N0", "1024", "--max-stages",
                       "1", "--out", str(out))
    assert status == 1
    config, meta, cols, rows = read_table(out)
    assert cols == ["i", "beta", "eps", "r", "dist"] and meta["converged"] == "False"


def test_herman_commands(capsys, tmp_path):
    status, out = run(capsys, "herman", "rotnum", "--lambda", "0", "--json")
    assert status == 0 and json.loads(out.out)["rho"] == 0.0
    status, out = run(capsys, "herman", "solve", "--rho", "0", "--json")
    assert status == 0 and json.loads(out.out)["mode_locked"]
    status, out = run(capsys, "herman", "conjugacy", "--rho", "golden", "--n", "512",
                      "--out", str(tmp_path / "c.csv"))
    assert status == 0
    _, meta, cols, rows = read_table(tmp_path / "c.csv")
    assert cols == ["k", "re_w", "im_w"] and rows[0][:3] == ["0", "1.0", "0.0"]


def test_herman_conjugacy_rational_is_usage_error(capsys):
    assert run(capsys, "herman", "conjugacy", "--lambda", "0", "--n", "256")[0] == 2


def test_bad_family_parameter(capsys):
    assert run(capsys, "herman", "rotnum", "--a", "2", "--lambda", "0")[0] == 2
    assert run(capsys, "herman", "rotnum", "--family", "arnold", "--a", "0.1+0.1j",
               "--lambda", "0")[0] == 2


def test_argparse_errors(capsys):
    assert run(capsys, "nonsense")[0] == 2


def test_quadratic_literal(capsys):
    status, out = run(capsys, "brjuno", "--alpha", "(sqrt5-1)/2", "--terms", "30", "--json")
    data = json.loads(out.out)
    assert status == 0 and data["quotients"] == [1] * 30


def test_quotient_list_echo(capsys):
    status, out = run(capsys, "brjuno", "--quotients", "1,2,1,2,1,2", "--json")
    assert status == 0 and json.loads(out.out)["quotients"] == [1, 2, 1, 2, 1, 2]


def test_single_point_scan_matches_radius(capsys, tmp_path):
    out = tmp_path / "one.csv"
    assert run(capsys, "scan", "--min", "0.61", "--max", "0.61", "--count", "1", "--N", "1024",
               "--out", str(out))[0] == 0
    _, _, _, rows = read_table(out)
    status, text = run(capsys, "radius", "--alpha", "0.61", "--N", "1024", "--json")
    assert len(rows) == 1 and float(rows[0][1]) == json.loads(text.out)["radius"]


def test_radius_half_resonance(capsys):
    status, out = run(capsys, "radius", "--alpha", "1/2", "--N", "64", "--json")
    data = json.loads(out.out)
    assert status == 0 and data["radius"] == 0.0 and data["resonance_order"] == 3


def test_search_bad_target(capsys):
    assert run(capsys, "search", "--r-target", "-0.1", "--N0", "512")[0] == 2


@pytest.mark.slow
def test_radius_golden_regression(capsys):
    status, out = run(capsys, "radius", "--alpha", "golden", "--N", "16384", "--json")
    assert status == 0
    assert json.loads(out.out)["radius"] == pytest.approx(0.32525732224837667, rel=1e-9)
