"""Proof sessions: a read-only snapshot of a model plus persisted verdicts.

A session is a directory ``<root>/<YYYYMMDDTHHMMSSZ>[-n]/`` holding

* the source snapshot (mode 0444),
* ``pos.json``: one record per obligation with its status and verdict,
* ``manifest.json``: session id, creation time, SHA-256 of the source and the
  discharge configuration.

Sessions are built in a temporary sibling directory and renamed into place,
so a failure never leaves a partial session behind.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import json
import os
import shutil
import tempfile
import time
from dataclasses import dataclass, field
from typing import Optional

from .discharge import DischargeConfig, discharge
from .errors import SessionError, UnknownPOId
from .pog import ProofObligation, generate
from .syntax import parse_model
from .typecheck import CheckedModel, check_model

POS_FILE = "pos.json"
MANIFEST_FILE = "manifest.json"
LOCK_FILE = ".lock"


@dataclass
class SessionManifest:
    session_id: str
    created: str
    directory: str
    snapshot: str
    source: str
    source_sha256: str
    config: dict
    records: list[dict] = field(default_factory=list)

    @property
    def snapshot_path(self) -> str:
        return os.path.join(self.directory, self.snapshot)

    def to_json(self) -> dict:
        return {"session_id": self.session_id, "created": self.created,
                "source": self.source, "snapshot": self.snapshot,
                "source_sha256": self.source_sha256, "config": self.config}

    def results(self) -> dict[str, dict]:
        return {r["id"]: r for r in self.records}


def dump_json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=False) + "\n"


def _write_atomic(path: str, text: str):
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_model(text: str, label: str) -> CheckedModel:
    return check_model(parse_model(text, label))


def open_record(po: ProofObligation) -> dict:
    rec = po.to_json()
    rec.update({"method": None, "witness": None, "duration_ms": None})
    return rec


def render_record(rec: dict) -> str:
    status = rec["status"]
    if status == "discharged":
        return f"discharged({rec['method']})"
    if status == "refuted":
        if rec["witness"] is None:
            return f"refuted ({rec['method']})"
        return "refuted [" + ", ".join(f"{k} = {v}" for k, v in rec["witness"].items()) + "]"
    if status == "unknown":
        return f"unknown({rec['method']})"
    return "open"


def summary_line(records) -> str:
    counts = {"discharged": 0, "refuted": 0, "unknown": 0}
    for r in records:
        if r["status"] in counts:
            counts[r["status"]] += 1
    return (f"{counts['discharged']} discharged, {counts['refuted']} refuted, "
            f"{counts['unknown']} unknown")


def exit_code(records) -> int:
    """0 when all discharged, 1 when any refuted, 2 otherwise."""
    statuses = {r["status"] for r in records}
    if "refuted" in statuses:
        return 1
    if statuses <= {"discharged"}:
        return 0
    return 2


def _timestamp(now: Optional[dt.datetime]) -> tuple[str, str]:
    now = (now or dt.datetime.now(dt.timezone.utc)).astimezone(dt.timezone.utc)
    return now.strftime("%Y%m%dT%H%M%SZ"), now.strftime("%Y-%m-%dT%H:%M:%SZ")


def session_new(path: str, cfg: DischargeConfig = DischargeConfig(), root: str = "sessions",
                now: Optional[dt.datetime] = None) -> SessionManifest:
    """Snapshot ``path`` into a fresh session directory under ``root``."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    snapshot = os.path.basename(path)
    model = load_model(text, snapshot)
    records = [open_record(po) for po in generate(model)]
    stamp, created = _timestamp(now)
    os.makedirs(root, exist_ok=True)
    tmp = tempfile.mkdtemp(dir=root, prefix=".new-")
    try:
        os.chmod(tmp, 0o755)
        snap = os.path.join(tmp, snapshot)
        with open(snap, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.chmod(snap, 0o444)
        manifest = SessionManifest("", created, "", snapshot, os.path.abspath(path),
                                   hashlib.sha256(text.encode("utf-8")).hexdigest(),
                                   cfg.to_json(), records)
        with open(os.path.join(tmp, POS_FILE), "w") as fh:
            fh.write(dump_json(records))
        n = 1
        while True:
            sid = stamp if n == 1 else f"{stamp}-{n}"
            target = os.path.join(root, sid)
            manifest.session_id = sid
            with open(os.path.join(tmp, MANIFEST_FILE), "w") as fh:
                fh.write(dump_json(manifest.to_json()))
            try:
                if os.path.exists(target):
                    raise FileExistsError(target)
                os.rename(tmp, target)
                break
            except FileExistsError:
                n += 1
            except OSError as exc:
                if os.path.exists(target):
                    n += 1
                    continue
                raise exc
        manifest.directory = target
        return manifest
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise


def load_session(directory: str) -> SessionManifest:
    try:
        with open(os.path.join(directory, MANIFEST_FILE)) as fh:
            meta = json.load(fh)
        with open(os.path.join(directory, POS_FILE)) as fh:
            records = json.load(fh)
    except FileNotFoundError as exc:
        raise SessionError(f"not a session directory: {directory} ({exc.filename} missing)")
    return SessionManifest(meta["session_id"], meta["created"], directory, meta["snapshot"],
                           meta["source"], meta["source_sha256"], meta["config"], records)


def _snapshot_model(s: SessionManifest) -> CheckedModel:
    with open(s.snapshot_path, encoding="utf-8") as fh:
        text = fh.read()
    if hashlib.sha256(text.encode("utf-8")).hexdigest() != s.source_sha256:
        raise SessionError(f"snapshot {s.snapshot_path} does not match its recorded hash")
    return load_model(text, s.snapshot)


class _Lock:
    def __init__(self, directory: str):
        self.path = os.path.join(directory, LOCK_FILE)

    def __enter__(self):
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise SessionError(f"session is locked by another process ({self.path})") from None
        with os.fdopen(fd, "w") as fh:
            fh.write(str(os.getpid()))
        return self

    def __exit__(self, *exc):
        os.unlink(self.path)


def session_discharge(directory: str, selection: Optional[list[str]] = None,
                      cfg: Optional[DischargeConfig] = None) -> tuple[SessionManifest, list[dict]]:
    """Discharge the selected obligations (all when ``selection`` is None).

    Returns the updated manifest and the records that were discharged.
    """
    with _Lock(directory):
        s = load_session(directory)
        if cfg is None:
            cfg = DischargeConfig(**s.config)
        model = _snapshot_model(s)
        pos = {po.id: po for po in generate(model)}
        by_id = s.results()
        for po in pos.values():
            stored = by_id.get(po.id)
            if stored is None or stored["predicate"] != po.display():
                raise SessionError(f"stored obligations do not match the snapshot at {po.id}")
        ids = list(selection) if selection else [r["id"] for r in s.records]
        for pid in ids:
            if pid not in pos:
                raise UnknownPOId(f"no proof obligation {pid} in session {s.session_id}")
        done = []
        for pid in dict.fromkeys(ids):
            start = time.perf_counter()
            verdict = discharge(pos[pid], model, cfg)
            rec = by_id[pid]
            rec.update(verdict.to_json())
            rec["duration_ms"] = int(round((time.perf_counter() - start) * 1000))
            done.append(rec)
        s.config = cfg.to_json()
        _write_atomic(os.path.join(directory, POS_FILE), dump_json(s.records))
        _write_atomic(os.path.join(directory, MANIFEST_FILE), dump_json(s.to_json()))
        return s, done


def session_status(directory: str) -> SessionManifest:
    return load_session(directory)
