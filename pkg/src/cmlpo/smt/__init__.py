"""SMT-LIB 2 bridge: script emission, a bundled validator and external solver runs."""

from .emit import emit_script, script_name
from .solver import run_external, verdict_from
from .validate import SmtSyntaxError, validate

__all__ = ["emit_script", "script_name", "run_external", "verdict_from", "validate",
           "SmtSyntaxError"]
