"""Command-line interface.

Exit codes: 0 every selected obligation discharged (or the command succeeded),
1 some obligation refuted, 2 only unknowns remain, 3 parse, type or I/O
errors, 64 usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import __version__
from .discharge import DischargeConfig, discharge
from .errors import CmlError, ModelErrors, UnknownPOId
from .pog import auxiliary_definitions, generate
from .session import (exit_code, render_record, session_discharge, session_new,
                      session_status, summary_line)
from .smt import emit_script, run_external, script_name, validate, verdict_from
from .syntax import parse_model, pretty_print
from .typecheck import check_model

EXIT_OK, EXIT_REFUTED, EXIT_UNKNOWN, EXIT_ERROR, EXIT_USAGE = 0, 1, 2, 3, 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {value}")
    return value


def _config_flags(p: argparse.ArgumentParser, defaults: bool = True):
    d = DischargeConfig()
    p.add_argument("--int-bound", type=_positive, default=d.int_bound if defaults else None,
                   help="largest integer magnitude tried during refutation")
    p.add_argument("--timeout", type=_positive, default=d.timeout_ms if defaults else None,
                   metavar="MS", help="per-obligation wall-clock limit in milliseconds")
    p.add_argument("--enum-limit", type=_positive, default=d.enum_limit if defaults else None,
                   help="maximum number of assignments to enumerate")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cmlpo", description="Proof obligations for contract-rich models.")
    p.add_argument("--version", action="version", version=f"cmlpo {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    c = sub.add_parser("check", help="parse and type-check a model")
    c.add_argument("file")

    g = sub.add_parser("pog", help="list the proof obligations of a model")
    g.add_argument("file")
    g.add_argument("--json", action="store_true", help="print a JSON array")

    d = sub.add_parser("discharge", help="discharge obligations without a session")
    d.add_argument("file")
    d.add_argument("--po", action="append", metavar="ID", help="only this obligation")
    d.add_argument("--json", action="store_true")
    _config_flags(d)

    s = sub.add_parser("smt", help="emit an SMT-LIB 2 script for one obligation")
    s.add_argument("file")
    s.add_argument("--po", required=True, metavar="ID")
    s.add_argument("-o", "--output", metavar="FILE",
                   help="write the script here (a directory gets <model>_<ID>.smt2)")
    s.add_argument("--solver", metavar="CMD", help="run this solver on the script")
    s.add_argument("--timeout", type=_positive, default=DischargeConfig().timeout_ms, metavar="MS")

    ss = sub.add_parser("session", help="proof sessions")
    ssub = ss.add_subparsers(dest="action", metavar="ACTION")
    ssub.required = True
    n = ssub.add_parser("new", help="snapshot a model into a new session")
    n.add_argument("file")
    n.add_argument("--root", default="sessions", help="parent directory of sessions")
    _config_flags(n)
    sd = ssub.add_parser("discharge", help="discharge obligations of a session")
    sd.add_argument("dir")
    sd.add_argument("--po", action="append", metavar="ID")
    _config_flags(sd, defaults=False)
    st = ssub.add_parser("status", help="show a session")
    st.add_argument("dir")
    return p


def _load(path: str):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return check_model(parse_model(text, path))


def _config(args) -> DischargeConfig:
    return DischargeConfig(int_bound=args.int_bound, enum_limit=args.enum_limit,
                           timeout_ms=args.timeout)


def _select(pos, ids):
    if not ids:
        return pos
    by_id = {po.id: po for po in pos}
    for pid in ids:
        if pid not in by_id:
            raise UnknownPOId(f"no proof obligation {pid}")
    return [by_id[pid] for pid in dict.fromkeys(ids)]


def _plural(n: int) -> str:
    return f"{n} proof obligation" + ("" if n == 1 else "s")


def cmd_check(args, out) -> int:
    m = _load(args.file)
    a = m.ast
    counts = ", ".join(f"{k}: {len(v)}" for k, v in (("types", a.type_defs), ("values", a.value_defs),
                                                    ("functions", a.function_defs),
                                                    ("processes", a.process_defs)))
    out.write(f"{args.file}: ok ({counts})\n")
    return EXIT_OK


def cmd_pog(args, out) -> int:
    m = _load(args.file)
    pos = generate(m)
    if args.json:
        out.write(json.dumps([po.to_json() for po in pos], indent=2) + "\n")
        return EXIT_OK
    for po in pos:
        out.write(f"{po.id} {po.kind.value} {po.definition} ({po.origin})\n")
        out.write(f"    {po.display()}\n")
    defs = auxiliary_definitions(pos, m)
    if defs:
        out.write("where\n")
        for name, params, body in defs:
            out.write(f"    {name}({', '.join(params)}) == {pretty_print(body)}\n")
    out.write(_plural(len(pos)) + "\n")
    return EXIT_OK


def cmd_discharge(args, out) -> int:
    m = _load(args.file)
    cfg = _config(args)
    records = []
    for po in _select(generate(m), args.po):
        start = time.perf_counter()
        verdict = discharge(po, m, cfg)
        rec = po.to_json()
        rec.update(verdict.to_json())
        rec["duration_ms"] = int(round((time.perf_counter() - start) * 1000))
        records.append(rec)
    if args.json:
        out.write(json.dumps(records, indent=2) + "\n")
    else:
        for rec in records:
            out.write(f"{rec['id']} {rec['kind']} {rec['origin']['def']}: {render_record(rec)}\n")
        out.write(summary_line(records) + "\n")
    return exit_code(records)


def cmd_smt(args, out) -> int:
    m = _load(args.file)
    po = _select(generate(m), [args.po])[0]
    script = emit_script(po, m)
    validate(script)
    if args.output:
        path = args.output
        if os.path.isdir(path):
            path = os.path.join(path, script_name(args.file, po))
        with open(path, "w") as fh:
            fh.write(script)
        out.write(f"wrote {path}\n")
    elif not args.solver:
        out.write(script)
    if not args.solver:
        return EXIT_OK
    verdict = verdict_from(run_external(script, args.solver, args.timeout), po)
    out.write(f"{po.id}: {verdict.render()}\n")
    return {"discharged": EXIT_OK, "refuted": EXIT_REFUTED}.get(verdict.status, EXIT_UNKNOWN)


def cmd_session(args, out) -> int:
    if args.action == "new":
        s = session_new(args.file, _config(args), root=args.root)
        out.write(f"session {s.session_id}: {s.directory}\n")
        out.write(_plural(len(s.records)) + ", all open\n")
        return EXIT_OK
    if args.action == "discharge":
        cfg = None
        if any(v is not None for v in (args.int_bound, args.timeout, args.enum_limit)):
            base = session_status(args.dir).config
            cfg = DischargeConfig(
                int_bound=args.int_bound or base["int_bound"],
                enum_limit=args.enum_limit or base["enum_limit"],
                depth_limit=base["depth_limit"],
                timeout_ms=args.timeout or base["timeout_ms"])
        _, done = session_discharge(args.dir, args.po, cfg)
        for rec in done:
            out.write(f"{rec['id']} {rec['kind']} {rec['origin']['def']}: {render_record(rec)}\n")
        out.write(summary_line(done) + "\n")
        return exit_code(done)
    s = session_status(args.dir)
    out.write(f"session {s.session_id} created {s.created}\n")
    out.write(f"snapshot {s.snapshot} sha256 {s.source_sha256}\n")
    for rec in s.records:
        out.write(f"{rec['id']} {rec['kind']} {rec['origin']['def']}: {render_record(rec)}\n")
    out.write(summary_line(s.records) + "\n")
    return EXIT_OK


COMMANDS = {"check": cmd_check, "pog": cmd_pog, "discharge": cmd_discharge,
            "smt": cmd_smt, "session": cmd_session}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except UnknownPOId as exc:
        err.write(f"cmlpo: error: {exc.message}\n")
        return EXIT_USAGE
    except ModelErrors as exc:
        err.write(exc.render() + "\n")
        return EXIT_ERROR
    except CmlError as exc:
        err.write(exc.render() + "\n")
        return EXIT_ERROR
    except OSError as exc:
        err.write(f"cmlpo: error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
