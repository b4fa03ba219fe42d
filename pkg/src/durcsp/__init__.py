"""Duration-CSP workbench: timed causal semantics, timed-CTS compilation
and bisimulation checking."""

from .config import TimedEvent, canonicalize, initial_config, psi, render_config
from .constraints import enabling_window, make_window, shift
from .equivalence import (
    Bisimilar,
    CheckParams,
    Inconclusive,
    NotBisimilar,
    config_bisimilar,
    cts_run_bisimilar,
    refinement_preserved,
    tau_bisimilar,
)
from .opsem import apply_delay, causal_tree, enabled_actions, min_makespan
from .syntax import make_spec, parse_process, parse_spec, render, render_spec
from .tcts import compile_spec, validate_cts

__all__ = [
    "Bisimilar",
    "CheckParams",
    "Inconclusive",
    "NotBisimilar",
    "TimedEvent",
    "apply_delay",
    "canonicalize",
    "causal_tree",
    "compile_spec",
    "config_bisimilar",
    "cts_run_bisimilar",
    "enabled_actions",
    "enabling_window",
    "initial_config",
    "make_spec",
    "make_window",
    "min_makespan",
    "parse_process",
    "parse_spec",
    "psi",
    "refinement_preserved",
    "render",
    "render_config",
    "render_spec",
    "shift",
    "tau_bisimilar",
    "validate_cts",
]
