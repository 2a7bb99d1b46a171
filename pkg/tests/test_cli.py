import json

import pytest

from repot import ValidationError
from repot.cli import RunConfig, SweepCell, gen_instance, main, run_sweep, run_worked_examples
from repot.errors import RejectionBudgetExceeded

GOLDEN_POINTS = [0.453135854388672, 0.06759148910943846,
                 0.5084927162770209, 0.02724123778816767]
GOLDEN_WEIGHTS = [0.08491128722523499, 0.48061536847279646,
                  0.025413583089338974, 0.40905976121262966]


def test_gen_instance_golden_snapshot():
    rho = gen_instance(RunConfig(seed=42), SweepCell(2, 4, 1, 1), 0)
    assert rho.points.ravel().tolist() == GOLDEN_POINTS
    assert rho.weights.tolist() == GOLDEN_WEIGHTS


def test_gen_instance_conditioning_and_separation():
    cfg = RunConfig(seed=7)
    for index in range(20):
        rho = gen_instance(cfg, SweepCell(3, 5, 2, 20), index)
        assert rho.weights.max() < 1 / 3
        assert rho.min_pairwise_distance() >= 1e-3


def test_gen_instance_single_atom_rejected():
    with pytest.raises(ValidationError):
        gen_instance(RunConfig(seed=0), SweepCell(2, 1, 1, 1), 0)


def test_gen_instance_impossible_conditioning():
    # two atoms cannot both weigh less than 1/2
    with pytest.raises(RejectionBudgetExceeded):
        gen_instance(RunConfig(seed=0), SweepCell(2, 2, 1, 1), 0)


def test_gen_instance_stream_independence():
    cfg = RunConfig(seed=5)
    cell = SweepCell(2, 4, 1, 3)
    later_first = gen_instance(cfg, cell, 2)
    _ = gen_instance(cfg, cell, 0)
    again = gen_instance(cfg, cell, 2)
    assert later_first.points.tolist() == again.points.tolist()
    assert later_first.weights.tolist() == again.weights.tolist()


def test_run_sweep_deterministic_bytes():
    cfg = RunConfig(seed=9, cells=(SweepCell(2, 4, 1, 4), SweepCell(3, 4, 2, 2)))
    first, ok1 = run_sweep(cfg)
    second, ok2 = run_sweep(cfg)
    assert first == second and ok1 and ok2
    assert first.splitlines()[0].startswith("instance_id,")
    assert len(first.splitlines()) == 7


def test_run_sweep_empty_config():
    csv, ok = run_sweep(RunConfig(seed=0))
    assert ok and csv == "instance_id,N,h,C_integral,C_sup,bound_main,bound_2,holds,slack,status\n"


def test_run_sweep_survives_bad_cell():
    # an impossible conditioning cell turns into an error row, not a crash
    cfg = RunConfig(seed=0, cells=(SweepCell(2, 2, 1, 1), SweepCell(2, 4, 1, 2)))
    csv, ok = run_sweep(cfg)
    rows = csv.splitlines()[1:]
    assert len(rows) == 3
    assert rows[0].endswith("error:RejectionBudgetExceeded")
    assert not ok


def test_worked_examples_pass(capsys):
    assert run_worked_examples() == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out


def test_cli_solve_and_kappa(tmp_path, capsys):
    measure = tmp_path / "m.json"
    measure.write_text('{"type":"discrete","dim":1,"points":[[0.0],[1.0],[10.0]],'
                       '"weights":[0.5,0.1,0.4]}')
    assert main(["solve", "integral", "--measure", str(measure), "--N", "2"]) == 0
    out = capsys.readouterr().out
    assert float(out.split("value=")[1].split()[0]) == pytest.approx(0.28, abs=1e-9)
    out_path = tmp_path / "coupling.json"
    assert main(["solve", "supremal", "--measure", str(measure), "--rational",
                 "--out", str(out_path)]) == 0
    capsys.readouterr()
    obj = json.loads(out_path.read_text())
    assert obj["shape"] == [3, 3] and obj["N"] == 2
    assert sum(obj["weights_flat"]) == pytest.approx(1.0, abs=1e-9)
    assert main(["kappa", "--measure", str(measure), "--alpha", "2"]) == 0
    assert capsys.readouterr().out.strip() == "0.6"
    assert main(["kappa", "--measure", str(measure), "--profile", "--grid", "0:1:0.5"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "alpha,kappa" and len(lines) == 4


def test_cli_verify_and_classify(tmp_path, capsys):
    measure = tmp_path / "m.json"
    measure.write_text('{"type":"discrete","dim":1,"points":[[0.0],[1.0],[10.0]],'
                       '"weights":[0.5,0.1,0.4]}')
    report = tmp_path / "report.csv"
    assert main(["verify", "--measure", str(measure), "--N", "2",
                 "--out", str(report)]) == 0
    body = report.read_text().splitlines()
    assert body[0].startswith("instance_id,") and body[1].split(",")[7] == "true"
    assert main(["classify", "--measure", str(measure)]) == 0
    parsed = json.loads(capsys.readouterr().out)
    assert any("error" in entry for entry in parsed)          # heaviest atom is 1/2
    assert any(entry.get("class", "").startswith("tail-control") for entry in parsed)


def test_cli_radial(capsys):
    assert main(["radial", "tau", "--profile", "uniform:1", "--dim", "1", "--r", "0.25"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.75, abs=1e-8)
    assert main(["radial", "cinf", "--profile", "cauchy:1", "--dim", "1"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.5, abs=1e-8)


def test_cli_exit_codes(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 2
    measure = tmp_path / "big.json"
    pts = [[float(i)] for i in range(30)]
    measure.write_text(json.dumps({"type": "discrete", "dim": 1, "points": pts,
                                   "weights": [1 / 30] * 30}))
    assert main(["solve", "integral", "--measure", str(measure), "--N", "4"]) == 3
    capsys.readouterr()
    missing = tmp_path / "missing.json"
    assert main(["solve", "integral", "--measure", str(missing)]) == 2
    capsys.readouterr()


def test_cli_sweep_roundtrip(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--seed", "3", "--cells", "2:4:1:3", "--out", str(out)]) == 0
    content = out.read_text()
    parsed_rows = content.splitlines()
    assert len(parsed_rows) == 4
    assert all(row.endswith("ok") for row in parsed_rows[1:])
