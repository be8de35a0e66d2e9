"""Running an external SMT solver on an emitted script."""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile

from ..discharge import Discharged, Refuted, Unknown
from ..errors import SolverTimeout, SolverUnavailable

RESULTS = ("sat", "unsat", "unknown")


def run_external(script: str, command: str, timeout_ms: int = 5_000) -> str:
    """Run ``command <tmpfile>`` and return ``sat``, ``unsat`` or ``unknown``.

    The script is written to a temporary file whose path is appended to the
    command line. Output other than one of the three results maps to
    ``unknown``.
    """
    argv = shlex.split(command)
    if not argv:
        raise SolverUnavailable("empty solver command")
    fd, path = tempfile.mkstemp(suffix=".smt2")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(script)
        try:
            proc = subprocess.run(argv + [path], capture_output=True, text=True,
                                  timeout=timeout_ms / 1000)
        except FileNotFoundError:
            raise SolverUnavailable(f"solver not found: {argv[0]}") from None
        except PermissionError:
            raise SolverUnavailable(f"solver not executable: {argv[0]}") from None
        except subprocess.TimeoutExpired:
            raise SolverTimeout(f"solver exceeded {timeout_ms} ms") from None
    finally:
        os.unlink(path)
    for token in proc.stdout.split():
        return token if token in RESULTS else "unknown"
    return "unknown"


def verdict_from(result: str, po):
    if result == "unsat":
        return Discharged("smt")
    if result == "sat":
        return Refuted(None, po.conclusion, method="smt")
    return Unknown("solver-unknown")
