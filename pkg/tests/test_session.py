import datetime as dt
import json
import os
import shutil
import stat

import pytest

from cmlpo.discharge import DischargeConfig
from cmlpo.errors import ModelErrors, SessionError, UnknownPOId
from cmlpo.session import (load_session, session_discharge, session_new, session_status,
                           summary_line)

from conftest import corpus_path

NOON = dt.datetime(2026, 3, 1, 12, 0, 0, tzinfo=dt.timezone.utc)


@pytest.fixture
def workdir(tmp_path):
    for name in ("division.cml", "division_pre.cml", "dwarf.cml"):
        shutil.copy(corpus_path(name), tmp_path / name)
    return tmp_path


def test_new_session_layout(workdir):
    s = session_new(str(workdir / "dwarf.cml"), root=str(workdir / "sessions"), now=NOON)
    assert s.session_id == "20260301T120000Z"
    assert sorted(os.listdir(s.directory)) == ["dwarf.cml", "manifest.json", "pos.json"]
    mode = stat.S_IMODE(os.stat(os.path.join(s.directory, "dwarf.cml")).st_mode)
    assert mode & 0o222 == 0
    records = json.load(open(os.path.join(s.directory, "pos.json")))
    assert [r["id"] for r in records] == [f"PO{i}" for i in range(1, 11)]
    assert {r["status"] for r in records} == {"open"}
    manifest = json.load(open(os.path.join(s.directory, "manifest.json")))
    assert manifest["session_id"] == s.session_id
    assert manifest["created"] == "2026-03-01T12:00:00Z"
    assert len(manifest["source_sha256"]) == 64
    assert manifest["config"] == DischargeConfig().to_json()


def test_two_sessions_in_one_second_are_distinct(workdir):
    root = str(workdir / "sessions")
    a = session_new(str(workdir / "division.cml"), root=root, now=NOON)
    b = session_new(str(workdir / "division.cml"), root=root, now=NOON)
    c = session_new(str(workdir / "division.cml"), root=root, now=NOON)
    assert [a.session_id, b.session_id, c.session_id] == [
        "20260301T120000Z", "20260301T120000Z-2", "20260301T120000Z-3"]


def test_unwritable_root_leaves_nothing(workdir):
    root = workdir / "locked"
    root.mkdir()
    root.chmod(0o500)
    try:
        if os.access(root, os.W_OK):
            pytest.skip("running with privileges that ignore directory permissions")
        with pytest.raises(OSError):
            session_new(str(workdir / "division.cml"), root=str(root))
        assert os.listdir(root) == []
    finally:
        root.chmod(0o700)


def test_target_under_a_file_is_an_io_error(workdir):
    blocker = workdir / "plain.txt"
    blocker.write_text("")
    with pytest.raises(OSError):
        session_new(str(workdir / "division.cml"), root=str(blocker / "sessions"))
    assert sorted(os.listdir(workdir)) == ["division.cml", "division_pre.cml", "dwarf.cml",
                                           "plain.txt"]


def test_failure_during_build_leaves_nothing(workdir, monkeypatch):
    root = workdir / "sessions"

    def boom(*a, **k):
        raise OSError("disk full")

    import cmlpo.session as session
    monkeypatch.setattr(session, "dump_json", boom)
    with pytest.raises(OSError):
        session_new(str(workdir / "division.cml"), root=str(root))
    assert os.listdir(root) == []


def test_models_with_errors_are_refused(workdir):
    bad = workdir / "bad.cml"
    bad.write_text("values v : int = true")
    with pytest.raises(ModelErrors):
        session_new(str(bad), root=str(workdir / "sessions"))
    assert not (workdir / "sessions").exists() or os.listdir(workdir / "sessions") == []


def test_division_session_is_refuted(workdir):
    s = session_new(str(workdir / "division.cml"), root=str(workdir / "s"))
    _, done = session_discharge(s.directory)
    assert [r["status"] for r in done] == ["refuted"]
    assert done[0]["witness"] == {"x": "0", "y": "0"}
    assert summary_line(done) == "0 discharged, 1 refuted, 0 unknown"


def test_division_pre_session_discharges(workdir):
    s = session_new(str(workdir / "division_pre.cml"), root=str(workdir / "s"))
    _, done = session_discharge(s.directory)
    assert [(r["status"], r["method"]) for r in done] == [("discharged", "entailment"),
                                                           ("discharged", "normalize")]
    assert all(isinstance(r["duration_ms"], int) for r in done)


def test_selection(workdir):
    s = session_new(str(workdir / "dwarf.cml"), root=str(workdir / "s"))
    _, done = session_discharge(s.directory, ["PO3", "PO1"])
    assert [r["id"] for r in done] == ["PO3", "PO1"]
    status = {r["id"]: r["status"] for r in session_status(s.directory).records}
    assert status["PO1"] == status["PO3"] == "discharged"
    assert status["PO2"] == "open"


def test_unknown_po_id(workdir):
    s = session_new(str(workdir / "division.cml"), root=str(workdir / "s"))
    with pytest.raises(UnknownPOId):
        session_discharge(s.directory, ["PO99"])
    assert {r["status"] for r in session_status(s.directory).records} == {"open"}


def test_snapshot_integrity(workdir):
    src = workdir / "division.cml"
    s = session_new(str(src), root=str(workdir / "s"))
    before = json.load(open(os.path.join(s.directory, "pos.json")))
    src.write_text(src.read_text().replace("x / y", "x + y"))
    _, done = session_discharge(s.directory)
    assert done[0]["predicate"] == before[0]["predicate"]
    assert done[0]["status"] == "refuted"


def test_tampered_snapshot_is_detected(workdir):
    s = session_new(str(workdir / "division.cml"), root=str(workdir / "s"))
    snap = os.path.join(s.directory, "division.cml")
    os.chmod(snap, 0o644)
    with open(snap, "a") as fh:
        fh.write("\n-- edited\n")
    with pytest.raises(SessionError):
        session_discharge(s.directory)


def test_regenerated_pos_match_the_stored_list(workdir):
    s = session_new(str(workdir / "dwarf.cml"), root=str(workdir / "s"))
    stored = open(os.path.join(s.directory, "pos.json")).read()
    s2 = session_new(str(workdir / "dwarf.cml"), root=str(workdir / "s"))
    assert open(os.path.join(s2.directory, "pos.json")).read() == stored


def test_reproducible_verdicts(workdir):
    s = session_new(str(workdir / "dwarf.cml"), root=str(workdir / "s"))
    session_discharge(s.directory)
    first = [{k: r[k] for k in ("id", "status", "method", "witness")}
             for r in session_status(s.directory).records]
    session_discharge(s.directory)
    second = [{k: r[k] for k in ("id", "status", "method", "witness")}
              for r in session_status(s.directory).records]
    assert first == second


def test_config_recorded_and_reused(workdir):
    cfg = DischargeConfig(int_bound=3)
    s = session_new(str(workdir / "division.cml"), cfg, root=str(workdir / "s"))
    assert load_session(s.directory).config["int_bound"] == 3
    manifest, _ = session_discharge(s.directory)
    assert manifest.config["int_bound"] == 3


def test_lock_excludes_concurrent_discharge(workdir):
    s = session_new(str(workdir / "division.cml"), root=str(workdir / "s"))
    open(os.path.join(s.directory, ".lock"), "w").close()
    with pytest.raises(SessionError):
        session_discharge(s.directory)


def test_not_a_session(workdir):
    with pytest.raises(SessionError):
        session_status(str(workdir))
