import json
import subprocess
import sys

import pytest

from qdb import data
from qdb.cli import EXIT_REPRO_FAIL, EXIT_VALIDATION, main, parse_mass_spec, UsageError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_fit_embedded_narrow(capsys):
    code, out, _ = run(capsys, "fit")
    assert code == 0
    rows = [l for l in out.splitlines() if l.split() and l.split()[0] in data.SOURCES]
    assert len(rows) == 6
    assert all(l.split()[8] == "0.0833" for l in rows)
    assert "mean relative error" in out


def test_fit_json_output_round_trips(tmp_path, capsys):
    out_path = tmp_path / "out.json"
    code, out, _ = run(capsys, "fit", "--format", "json", "-o", str(out_path))
    assert code == 0 and out == ""
    assert load_names(out_path) == [r.source_id for r in data.narrow_experiments()]


def load_names(path):
    return [r.source_id for r in data.load_experiments(path)]


def test_fit_csv_from_input_file(tmp_path, capsys):
    src = tmp_path / "in.csv"
    data.export_results(data.embedded_experiments(), src, "csv")
    code, out, _ = run(capsys, "fit", "-i", str(src), "--format", "csv")
    assert code == 0
    assert len(out.strip().splitlines()) == 13


def test_fit_bad_input(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    rows = [data.record_to_dict(r) for r in data.narrow_experiments()]
    rows[2]["p_attack_given_bad"] = -0.5
    bad.write_text(json.dumps(rows))
    code, _, err = run(capsys, "fit", "-i", str(bad))
    assert code == EXIT_VALIDATION
    assert "row 3" in err and "p_attack_given_bad" in err


def test_missing_input_file(tmp_path, capsys):
    code, _, err = run(capsys, "fit", "-i", str(tmp_path / "nope.json"))
    assert code == EXIT_VALIDATION


def test_predict(capsys):
    code, out, _ = run(capsys, "predict", "--pg", "0.5", "--hg", "0", "--hb", "0")
    assert code == 0
    assert "P_T       = 0.4167" in out and "P(A)      = 0.5000" in out
    code, out, _ = run(capsys, "predict", "--pg", "1", "--hg", "0", "--hb", "99")
    assert "P_T       = 0.4167" in out


def test_predict_matches_fit_row(capsys):
    _, out, _ = run(capsys, "fit", "--format", "json")
    row = json.loads(out)[0]["fit"]
    _, out, _ = run(capsys, "predict", "--pg", "0.17", "--hg", repr(row["h_g"]), "--hb", repr(row["h_b"]), "--format", "json")
    pred = json.loads(out)
    assert pred["p_total_cd"] == pytest.approx(row["pred_p_t"], abs=1e-12)
    assert pred["p_attack_d_alone"] == pytest.approx(row["pred_p_attack"], abs=1e-12)


def test_predict_rejects_bad_prior(capsys):
    code, _, err = run(capsys, "predict", "--pg", "1.5", "--hg", "0", "--hb", "0")
    assert code == EXIT_VALIDATION


def test_reproduce_t4(capsys):
    code, out, _ = run(capsys, "reproduce", "t4")
    assert code == 0
    assert out.count("PASS") == 6 and "FAIL" not in out
    town = next(l for l in out.splitlines() if l.startswith("Townsend2000")).split()
    assert town[3:5] == ["0.5926", "0.5923"] and town[6:8] == ["0.6759", "0.6756"]


def test_reproduce_t4_fails_under_other_weight_reading(capsys):
    # the probability-level 0.5 reading of the uncertain split cannot match the table
    code, out, _ = run(capsys, "reproduce", "t4", "--wcd", "0.5")
    assert code == EXIT_REPRO_FAIL
    assert "FAIL" in out


def test_reproduce_t5(capsys):
    code, out, _ = run(capsys, "reproduce", "t5")
    assert code == 0
    avg_obs = next(l for l in out.splitlines() if l.startswith("Average") and "Observed" in l).split()
    assert avg_obs[2:4] == ["0.5700", "0.6400"]
    assert "opaque" in out
    code, out, _ = run(capsys, "reproduce", "t5", "--format", "json")
    doc = json.loads(out)
    assert doc["all_pass"] and doc["rows"][0]["stored_MarkovBA"] == {"p_t": 0.576, "p_attack": 0.576}


def test_ppt(capsys):
    assert run(capsys, "ppt", "A,W:1")[1] == "A=0.5000 W=0.5000\n"
    assert run(capsys, "ppt", "A:0.4 A,W:0.6")[1] == "A=0.7000 W=0.3000\n"
    code, _, err = run(capsys, "ppt", "A:0.5")
    assert code == EXIT_VALIDATION and "sum" in err


def test_mass_spec_errors_report_position():
    with pytest.raises(UsageError, match="token 2 .* column 6"):
        parse_mass_spec("A:.5 W=.5")
    with pytest.raises(UsageError, match="not a number"):
        parse_mass_spec("A:x")
    with pytest.raises(UsageError, match="empty label"):
        parse_mass_spec("A,:1")


@pytest.mark.parametrize(
    "argv",
    [["fit", "--wcd", "1.5"], ["fit", "--time", "-1"], ["fit", "--grid-step", "0"], ["fit", "--hmin", "3", "--hmax", "1"], ["bogus"]],
)
def test_invalid_flags(capsys, argv):
    try:
        code = main(argv)
    except SystemExit as exc:  # argparse rejects unknown commands itself
        code = exc.code
    assert code == EXIT_VALIDATION


def test_deterministic(capsys):
    outs = [run(capsys, "reproduce", "t5", "--format", "json")[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qdb", "ppt", "A,U,W:0.3 U:0.7"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout == "A=0.1000 U=0.8000 W=0.1000\n"
