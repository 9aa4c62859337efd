import subprocess
import sys

import pytest

from hamcouple import cli

MATCHED_BAD = """type = "matched_pair"
name = "bad"
left_action = [[0, 0, 1, 1.0]]
right_action = []
[g]
dim = 2
c = []
[k]
dim = 2
c = [[0, 1, 0, 1.0]]
"""

BLOWUP = """name = "blowup"
bracket = "hydro"
steps = 50
dt = 5.0
[grid]
dims = [8, 1, 1]
[initial]
kind = "random"
amplitude = 0.9
"""


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_passes(capsys, tmp_path):
    code, out, _ = run(["verify", "--bracket", "hydro", "--csv", str(tmp_path / "v.csv")], capsys)
    assert code == 0
    assert "jacobi" in out
    text = (tmp_path / "v.csv").read_text()
    assert text.startswith("bracket,check,residual")
    assert ",FAIL," not in text


def test_usage_errors(capsys):
    assert run(["verify", "--bracket", "nope"], capsys)[0] == 2
    assert run(["verify"], capsys)[0] == 2
    assert run(["simulate", "--config", "maxwell_planewave", "--steps", "0", "--no-plot"], capsys)[0] == 2
    assert run(["simulate", "--config", "nope"], capsys)[0] == 2
    assert run(["project", "--map", "binary_sum", "--fine", "hydro", "--coarse", "hydro"], capsys)[0] == 2
    with pytest.raises(SystemExit) as err:
        cli.main(["bogus"])
    assert err.value.code == 2


def test_blowup_exit(capsys, tmp_path):
    cfg = tmp_path / "b.toml"
    cfg.write_text(BLOWUP)
    code, _, err = run(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o"), "--no-plot"], capsys)
    assert code == 3
    assert "blow-up at step" in err


def test_compatibility_exit(capsys, tmp_path):
    spec = tmp_path / "bad.toml"
    spec.write_text(MATCHED_BAD)
    code, _, err = run(["compose", "--spec", str(spec)], capsys)
    assert code == 4
    assert "compatibility failure" in err


def test_parity_exit(capsys):
    assert run(["ocrr", "--bracket", "vlasov"], capsys)[0] == 5
    assert run(["ocrr", "--bracket", "em_canonical"], capsys)[0] == 5


def test_failing_check_exit(capsys, tmp_path):
    spec = tmp_path / "wrong.toml"
    text = open(cli.cp.resolve_spec("direct_so3_heisenberg")).read().replace('"direct"', '"se3"')
    spec.write_text(text)
    code, out, _ = run(["compose", "--spec", str(spec)], capsys)
    assert code == 1
    assert "FAIL" in out


def test_compose_shipped(capsys):
    code, out, _ = run(["compose", "--spec", "semidirect_hydro"], capsys)
    assert code == 0
    assert "equivalence to catalog hydro" in out
    assert run(["compose", "--spec", "se3"], capsys)[0] == 0


def test_ocrr_writes_csv(capsys, tmp_path):
    path = tmp_path / "o.csv"
    code, out, _ = run(["ocrr", "--bracket", "mhd", "--states", "2", "--csv", str(path)], capsys)
    assert code == 0
    rows = path.read_text().splitlines()
    assert rows[0].startswith("state,block")
    assert all(r.endswith("PASS") for r in rows[1:])


def test_project(capsys, tmp_path):
    code, out, _ = run(["project", "--map", "binary_sum", "--fine", "hydro_binary",
                        "--coarse", "classical_binary", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert (tmp_path / "project_binary_sum.csv").exists()


def test_simulate_outputs_and_determinism(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        code, out, _ = run(["simulate", "--config", "maxwell_planewave", "--out", str(d)], capsys)
        assert code == 0
        assert "L2 error" in out
    for f in ("series.csv", "final.snap", "monitors.png"):
        assert (a / f).exists()
    assert (a / "series.csv").read_bytes() == (b / "series.csv").read_bytes()


def test_out_env(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("HAMCOUPLE_OUT", str(tmp_path))
    code, _, _ = run(["simulate", "--config", "maxwell_planewave", "--steps", "3", "--no-plot"], capsys)
    assert code == 0
    assert (tmp_path / "maxwell_planewave" / "series.csv").exists()


def test_console_script():
    r = subprocess.run([sys.executable, "-c", "import sys; from hamcouple.cli import main; sys.exit(main())",
                        "ocrr", "--bracket", "hydro", "--states", "1"], capture_output=True, text=True)
    assert r.returncode == 0
    assert "PASS" in r.stdout
