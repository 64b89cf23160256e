import json
import subprocess
import sys

import pytest

from growthlab.balls import BallProfile, ball_profile
from growthlab.catalog import lookup
from growthlab.cli import main
from growthlab.growth import fit_growth
from growthlab.suites import cyclic_reduction


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_profile_then_fit_round_trip(tmp_path, capsys):
    for fmt in ("csv", "json"):
        code, text, _ = run(capsys, "profile", "zxzmod:64", "--radius", "256", "--out", fmt)
        assert code == 0
        path = tmp_path / f"p.{fmt}"
        path.write_text(text, encoding="utf-8")
        prof = BallProfile.parse(text)
        assert prof.beta == ball_profile(lookup("zxzmod:64").group, lookup("zxzmod:64").generators, 256).beta
        # re-serialising the parsed profile reproduces the bytes
        again = prof.to_csv() if fmt == "csv" else json.dumps(prof.to_json(), indent=2, ensure_ascii=False) + "\n"
        assert again.rstrip("\n") == text.rstrip("\n")
        code, fitted, _ = run(capsys, "fit", str(path))
        assert code == 0
        assert json.loads(fitted) == json.loads(json.dumps(fit_growth(prof).to_json()))
        assert json.loads(fitted)["degrees"] == [2, 1]
    csv_fit = run(capsys, "fit", str(tmp_path / "p.csv"))[1]
    json_fit = run(capsys, "fit", str(tmp_path / "p.json"))[1]
    assert csv_fit == json_fit


def test_fit_csv_output(tmp_path, capsys):
    _, text, _ = run(capsys, "profile", "z", "--radius", "32", "--out", "csv")
    path = tmp_path / "z.csv"
    path.write_text(text)
    code, out, _ = run(capsys, "fit", str(path), "--out", "csv")
    assert code == 0 and out.splitlines()[0] == "n,beta,fit"


def test_exit_code_short_profile(tmp_path, capsys):
    _, text, _ = run(capsys, "profile", "z", "--radius", "4", "--out", "csv")
    path = tmp_path / "short.csv"
    path.write_text(text)
    code, _, err = run(capsys, "fit", str(path), "--anchor", "4")
    assert code == 4 and "error" in err


def test_exit_code_resource_cap(capsys):
    code, _, err = run(capsys, "profile", "heisenberg", "--radius", "40", "--cap", "500")
    assert code == 3 and "truncated" in err


def test_exit_code_bad_input(tmp_path, capsys):
    assert run(capsys, "profile", "no-such-group", "--radius", "3")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "fit", str(bad))[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["profile"])
    assert exc.value.code == 2
    assert run(capsys, "relscales", "heisenberg")[0] == 2


def test_exit_code_failed_invariant(capsys):
    code, out, _ = run(capsys, "witness", "cyclic-strip", "--corrupt", "scales", "--radius", "64")
    assert code == 1 and json.loads(out)["conclusions"]["scales"]["status"] == "fail"
    code, out, _ = run(capsys, "witness", "cyclic-strip", "--radius", "64")
    assert code == 0 and json.loads(out)["ok"]


def test_witness_dump_and_reload(tmp_path, capsys):
    _, text, _ = run(capsys, "witness", "cyclic-strip", "--dump")
    path = tmp_path / "w.json"
    path.write_text(text)
    code, out, _ = run(capsys, "witness", str(path), "--radius", "64")
    assert code == 0 and json.loads(out)["ok"]


def test_prog_inj_and_injz(tmp_path, capsys):
    path = tmp_path / "p.json"
    path.write_text(json.dumps(cyclic_reduction(10, 3).to_json()))
    code, out, _ = run(capsys, "inj", str(path), "--radius", "8")
    assert code == 0 and json.loads(out)["display"] == "3"
    code, out, _ = run(capsys, "prog", "enumerate", str(path), "--power", "2", "--list")
    doc = json.loads(out)
    assert code == 0 and doc["size"] == 10 and len(doc["elements"]) == 10
    code, out, _ = run(capsys, "prog", "zeta", str(path))
    assert code == 0 and json.loads(out)["zeta"] == [1]
    code, out, _ = run(capsys, "injz", str(path), "--radius", "4")
    assert code == 0


def test_lssc_commands(capsys):
    code, out, _ = run(capsys, "lssc", "h1", "cycle:8", "--k", "7", "--k-max", "8")
    rows = json.loads(out)
    assert code == 0 and [r["rank"] for r in rows] == [1, 0]
    code, out, _ = run(capsys, "lssc", "homotopy", "grid:2,2", "--path", "0,1,3", "--path", "0,2,3")
    assert code == 0 and json.loads(out)["verdict"] == "equivalent"
    code, out, _ = run(capsys, "lssc", "h1", "zmod:6", "--k", "6")
    assert code == 0 and json.loads(out)["rank"] == 0


def test_relscales_and_catalog(capsys):
    code, out, _ = run(capsys, "relscales", "prod:4,64")
    assert code == 0 and json.loads(out)["new_relation_scales"] == [2, 6]
    code, out, _ = run(capsys, "catalog")
    assert code == 0 and "heisenberg" in json.loads(out)["names"]
    code, out, _ = run(capsys, "catalog", "zmod:100")
    assert code == 0 and json.loads(out)["name"] == "zmod:100"


def test_verify_text_and_json(capsys):
    code, out, _ = run(capsys, "verify", "relation-scales")
    assert code == 0 and out.strip().splitlines()[-1].startswith("relation-scales:")
    code, out, _ = run(capsys, "verify", "lssc", "--out", "json")
    assert code == 0 and json.loads(out)["ok"]


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "growthlab.cli", "catalog"], capture_output=True, text=True)
    assert proc.returncode == 0 and "names" in json.loads(proc.stdout)
