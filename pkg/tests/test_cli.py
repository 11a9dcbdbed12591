import json

from ptlab.cli import main


def write(tmp_path, **cfg):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_run_writes_outputs_and_exit_code(tmp_path, capsys):
    path = write(tmp_path, property="zero-string", tester="zero-string", n=32, eps=0.5, trials=20,
                 expect={"acceptance_rate_min": 1.0})
    assert main(["run", str(path), "--out", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "trials.csv").exists()
    assert (tmp_path / "out" / "summary.json").exists()
    assert "[PASS] acceptance_rate_min" in capsys.readouterr().out


def test_run_fails_on_broken_assertion(tmp_path):
    path = write(tmp_path, property="zero-string", tester="zero-string", n=32, eps=0.5, trials=20,
                 instance="far", expect={"acceptance_rate_min": 0.9})
    assert main(["run", str(path), "--out", str(tmp_path / "out")]) == 1


def test_run_rejects_bad_config(tmp_path):
    path = write(tmp_path, property="zero-string", tester="zero-string", n=32, eps=2.0)
    assert main(["run", str(path)]) == 2


def test_list(capsys):
    for what in ("properties", "testers", "adversaries"):
        assert main(["list", what]) == 0
    out = capsys.readouterr().out
    assert "distinct-elements:tau=T" in out and "seed-elim" in out and "ww-estimate" in out


def test_oracle_check(capsys):
    assert main(["oracle-check", "5", "3"]) == 0
    assert "0 mismatches" in capsys.readouterr().out


def test_verify_single_suite(capsys):
    assert main(["verify", "rep-complete"]) == 0
    assert "[PASS] rep-complete" in capsys.readouterr().out
