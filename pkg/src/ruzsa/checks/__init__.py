"""Registry of named inequality checks."""
from . import library  # noqa: F401  (registers the checks)
from .ensemble import GENERATORS, EnsembleSummary, run_ensemble
from .library import as_pd_matrix, tau
from .registry import REGISTRY, CheckSpec, check, get_check, list_checks
from .result import (
    CONJECTURE,
    FAIL,
    OBSERVATIONAL,
    PASS,
    SKIPPED,
    TOLERANCES,
    CheckResult,
)

__all__ = [
    "REGISTRY", "CheckSpec", "CheckResult", "check", "get_check", "list_checks",
    "run_ensemble", "EnsembleSummary", "GENERATORS", "as_pd_matrix", "tau",
    "PASS", "FAIL", "SKIPPED", "CONJECTURE", "OBSERVATIONAL", "TOLERANCES",
]
