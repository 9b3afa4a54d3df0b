import json
import math

import numpy as np
import pytest

from corrmax.bounds import cross_norm_bound, two_qubit_max
from corrmax.cli import emit_csv, main
from corrmax.io import save_pom, save_state
from corrmax.measurement import trine_pom
from corrmax.state import bell_ket, isotropic, pure_density, random_density


def _run(capsys, *argv):
    rc = main(["--json", *argv])
    out = capsys.readouterr().out
    return rc, (json.loads(out) if rc == 0 and out.strip().startswith("{") else out)


def test_demo_trine(capsys):
    rc, rep = _run(capsys, "demo", "trine")
    assert rc == 0
    assert rep["coincidence"] == pytest.approx(2 / 3, abs=1e-12)
    assert rep["classification"] == "saddle" and rep["vwcon_a"] and rep["vwcon_b"]


def test_demo_isotropic_matches_library(capsys):
    rc, rep = _run(capsys, "demo", "isotropic")
    assert rc == 0 and len(rep["series"]) == 11
    for w, c in rep["series"]:
        assert c == two_qubit_max(isotropic(w)).value


def test_demo_mirror_csv(tmp_path, capsys):
    path = tmp_path / "m.csv"
    assert main(["demo", "mirror", "--csv", str(path)]) == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "x,value" and len(lines) == 102
    x, v = map(float, lines[34].split(","))
    assert v == pytest.approx(2 / 3 + 0.75 * (x - 1 / 3) ** 2, abs=1e-12)


def test_bound_cross_norm_bell(tmp_path, capsys):
    rho = pure_density(bell_ket(2), 2, 2)
    save_state(rho, tmp_path / "b.json")
    rc, rep = _run(capsys, "bound", "--state", str(tmp_path / "b.json"), "--kind", "cross-norm")
    assert rc == 0 and rep["value"] == pytest.approx(2.0, abs=1e-12)
    assert rep["value"] == cross_norm_bound(rho).value


def test_bound_theorem_inf(tmp_path, capsys):
    save_state(random_density(2, 2, seed=1), tmp_path / "s.json")
    rc, rep = _run(capsys, "bound", "--state", str(tmp_path / "s.json"), "--kind", "theorem", "--n", "inf")
    assert rc == 0 and math.isfinite(rep["value"])


def test_bound_family_csv(tmp_path, capsys):
    path = tmp_path / "w.csv"
    rc = main(["bound", "--kind", "cross-norm", "--family", "werner", "--d", "3", "--grid", "-1", "1", "5", "--csv", str(path)])
    assert rc == 0
    rows = [tuple(map(float, l.split(","))) for l in path.read_text().splitlines()[1:]]
    for x, v in rows:
        assert v == pytest.approx(1 / 3 + abs(x - 1 / 3), abs=1e-9)


def test_solve_and_check(tmp_path, capsys):
    rho = random_density(2, 2, seed=4)
    save_state(rho, tmp_path / "s.json")
    rc, rep = _run(
        capsys, "solve", "--state", str(tmp_path / "s.json"), "--n", "2", "--seed", "1", "--restarts", "2",
        "--out-a", str(tmp_path / "a.json"), "--out-b", str(tmp_path / "b.json"),
    )
    assert rc == 0
    assert rep["coincidence"] == pytest.approx(two_qubit_max(rho).value, abs=1e-8)
    rc, rep2 = _run(capsys, "check", "--state", str(tmp_path / "s.json"), "--pom-a", str(tmp_path / "a.json"), "--pom-b", str(tmp_path / "b.json"))
    assert rc == 0 and rep2["coincidence"] == pytest.approx(rep["coincidence"], abs=1e-12)


def test_check_dimension_mismatch(tmp_path, capsys):
    save_state(random_density(2, 3, seed=4), tmp_path / "s.json")
    save_pom(trine_pom(), tmp_path / "t.json")
    rc = main(["check", "--state", str(tmp_path / "s.json"), "--pom-a", str(tmp_path / "t.json"), "--pom-b", str(tmp_path / "t.json")])
    assert rc == 2


def test_seed_from_environment(tmp_path, capsys, monkeypatch):
    save_state(random_density(2, 2, seed=5), tmp_path / "s.json")
    monkeypatch.setenv("CORRMAX_SEED", "11")
    _, a = _run(capsys, "solve", "--state", str(tmp_path / "s.json"), "--n", "3", "--restarts", "1")
    _, b = _run(capsys, "solve", "--state", str(tmp_path / "s.json"), "--n", "3", "--restarts", "1")
    assert a["coincidence"] == b["coincidence"]
    monkeypatch.setenv("CORRMAX_SEED", "abc")
    assert main(["solve", "--state", str(tmp_path / "s.json")]) == 2


def test_scan_and_resume(tmp_path, capsys):
    out = str(tmp_path / "s.jsonl")
    rc, rep = _run(capsys, "scan", "--count", "3", "--restarts", "1", "--seed", "2", "--out", out)
    assert rc == 0 and rep["count"] == 3 and rep["max_gap"] <= 1e-5
    rc, rep2 = _run(capsys, "scan", "--count", "4", "--restarts", "1", "--seed", "2", "--out", out, "--resume")
    assert rc == 0 and rep2["count"] == 4


def test_convert(tmp_path, capsys):
    save_state(random_density(2, 2, seed=6), tmp_path / "a.json")
    assert main(["convert", str(tmp_path / "a.json"), str(tmp_path / "b.json")]) == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


@pytest.mark.parametrize(
    "argv",
    [
        ["bound", "--state", "/nonexistent.json"],
        ["bogus"],
        ["demo", "nope"],
        ["bound", "--kind", "theorem", "--n", "many", "--state", "x"],
        ["bound", "--csv", "x.csv"],
    ],
)
def test_invalid_input_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_runtime_failure_exit_3(tmp_path, monkeypatch, capsys):
    import corrmax.cli as cli

    def boom(*a, **k):
        raise RuntimeError("x")

    monkeypatch.setattr(cli, "certify", boom)
    assert main(["demo", "trine"]) == 3


def test_plain_output(capsys):
    assert main(["demo", "trine"]) == 0
    out = capsys.readouterr().out
    assert "classification: saddle" in out


def test_emit_csv_empty(tmp_path):
    emit_csv([], tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text() == "x,value\n"


def test_emit_csv_stdout(capsys):
    emit_csv([(0.5, np.float64(1.25))], "-")
    assert capsys.readouterr().out == "x,value\n0.5,1.25\n"
