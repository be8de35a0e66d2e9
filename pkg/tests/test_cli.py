import io
import json
import os
import shutil
import subprocess
import sys

import pytest

from cmlpo import __version__
from cmlpo.cli import main

from conftest import CORPUS_FILES, corpus_path

Z3 = shutil.which("z3")


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_version(capsys):
    code = main(["--version"])
    assert code == 0
    assert capsys.readouterr().out.strip() == f"cmlpo {__version__}"


def test_unknown_flag_is_usage_error(capsys):
    assert main(["pog", corpus_path("division.cml"), "--frobnicate"]) == 64
    assert "usage:" in capsys.readouterr().err


def test_missing_subcommand_is_usage_error(capsys):
    assert main([]) == 64


def test_bad_numeric_flag_is_usage_error(capsys):
    assert main(["discharge", corpus_path("division.cml"), "--int-bound", "0"]) == 64


def test_check(tmp_path):
    code, out, _ = run("check", corpus_path("dwarf.cml"))
    assert code == 0 and "ok" in out


def test_missing_file_exits_3():
    code, _, err = run("check", "/nonexistent/model.cml")
    assert code == 3 and "error" in err


def test_type_errors_exit_3_with_locations(tmp_path):
    bad = tmp_path / "bad.cml"
    bad.write_text("values\n a : int = true\n b : bool = 1\n")
    code, _, err = run("pog", str(bad))
    assert code == 3
    lines = err.strip().splitlines()
    assert len(lines) == 2
    assert lines[0].startswith(f"{bad}:2:") and ": error: " in lines[0]


def test_parse_error_exits_3(tmp_path):
    bad = tmp_path / "bad.cml"
    bad.write_text("functions f : int -> int f(x) == (x +")
    assert run("check", str(bad))[0] == 3


def test_unsupported_construct_exits_3(tmp_path):
    bad = tmp_path / "bad.cml"
    bad.write_text("channels c")
    code, _, err = run("check", str(bad))
    assert code == 3 and "channels" in err


def test_pog_json_division():
    code, out, _ = run("pog", corpus_path("division.cml"), "--json")
    assert code == 0
    data = json.loads(out)
    assert len(data) == 1 and data[0]["kind"] == "partial_operator"
    assert data[0]["predicate"] == "forall x:int, y:int & (y <> 0)"
    assert data[0]["status"] == "open"


def test_pog_text_lists_obligations_and_definitions():
    code, out, _ = run("pog", corpus_path("dwarf.cml"))
    assert code == 0
    assert out.strip().endswith("10 proof obligations")
    assert "inv_ProperState(ps) == (ps in set {dark, stop, warning, drive})" in out


def test_pog_empty_model(tmp_path):
    empty = tmp_path / "empty.cml"
    empty.write_text("-- nothing here\n")
    code, out, _ = run("pog", str(empty))
    assert code == 0 and out.strip() == "0 proof obligations"


@pytest.mark.parametrize("path", CORPUS_FILES)
def test_pog_json_is_byte_stable(path):
    assert run("pog", path, "--json")[1] == run("pog", path, "--json")[1]


def test_discharge_exit_codes():
    code, out, _ = run("discharge", corpus_path("division.cml"))
    assert code == 1
    assert "refuted [x = 0, y = 0]" in out
    assert out.strip().endswith("0 discharged, 1 refuted, 0 unknown")
    code, out, _ = run("discharge", corpus_path("division_pre.cml"))
    assert code == 0 and out.strip().endswith("2 discharged, 0 refuted, 0 unknown")


def test_discharge_dwarf_init_discharged():
    code, out, _ = run("discharge", corpus_path("dwarf.cml"), "--json")
    records = json.loads(out)
    init = [r for r in records if r["origin"]["def"] == "Dwarf.Init"]
    assert [r["status"] for r in init] == ["discharged"] * 3
    assert code == 1  # other operations have refuted subtype obligations


def test_discharge_selection_and_unknown_id():
    code, out, _ = run("discharge", corpus_path("dwarf.cml"), "--po", "PO1")
    assert code == 0 and out.startswith("PO1 ")
    code, _, err = run("discharge", corpus_path("dwarf.cml"), "--po", "PO99")
    assert code == 64 and "PO99" in err


def test_discharge_only_unknowns_exits_2(tmp_path):
    m = tmp_path / "sq.cml"
    m.write_text("types Nat1 = int inv n == n * n >= n\n"
                 "functions sq : int -> Nat1 sq(k) == k\n")
    code, out, _ = run("discharge", str(m))
    assert code == 2 and "unknown(infinite-domain)" in out


def test_smt_prints_script():
    code, out, _ = run("smt", corpus_path("division.cml"), "--po", "PO1")
    assert code == 0
    assert "(assert (not (forall ((x Int) (y Int)) (distinct y 0))))" in out


def test_smt_writes_file_into_directory(tmp_path):
    code, out, _ = run("smt", corpus_path("dwarf.cml"), "--po", "PO3", "-o", str(tmp_path))
    assert code == 0
    assert (tmp_path / "dwarf_PO3.smt2").read_text().endswith("(check-sat)\n")


def test_smt_requires_po():
    assert run("smt", corpus_path("division.cml"))[0] == 64


def test_smt_missing_solver_exits_3():
    code, _, err = run("smt", corpus_path("division.cml"), "--po", "PO1",
                       "--solver", "no-such-solver-binary")
    assert code == 3 and "not found" in err


@pytest.mark.skipif(Z3 is None, reason="no z3 binary on PATH")
def test_smt_with_solver():
    code, out, _ = run("smt", corpus_path("division.cml"), "--po", "PO1", "--solver", Z3)
    assert code == 1 and "refuted (smt)" in out
    code, out, _ = run("smt", corpus_path("division_pre.cml"), "--po", "PO2", "--solver", Z3)
    assert code == 0 and "discharged(smt)" in out


def test_session_workflow(tmp_path):
    src = tmp_path / "division.cml"
    shutil.copy(corpus_path("division.cml"), src)
    root = tmp_path / "sessions"
    code, out, _ = run("session", "new", str(src), "--root", str(root))
    assert code == 0 and "1 proof obligation, all open" in out
    (sid,) = os.listdir(root)
    d = str(root / sid)
    code, out, _ = run("session", "discharge", d)
    assert code == 1 and "refuted [x = 0, y = 0]" in out
    code, out, _ = run("session", "status", d)
    assert code == 0 and "0 discharged, 1 refuted, 0 unknown" in out
    code, _, err = run("session", "discharge", d, "--po", "PO99")
    assert code == 64


def test_session_status_of_non_session(tmp_path):
    assert run("session", "status", str(tmp_path))[0] == 3


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cmlpo", "pog", corpus_path("division.cml")],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "forall x:int, y:int & (y <> 0)" in proc.stdout
