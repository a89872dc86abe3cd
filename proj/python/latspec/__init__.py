"""Exact lattice, haystack, volume and spectral computations."""

import json

from ._core import (
    ConfigError,
    FiniteSystem,
    HardFailure,
    LatspecError,
    __version__,
    ap_certificate,
    complete_to_basis,
    det,
    expansion_bound_check,
    experiment_kinds,
    haystack,
    hnf,
    invariant_factors,
    is_primitive,
    max_directional_expansion,
    shrink_rational_spectrum,
    spectral_masses,
    verify_haystack_sample,
    volume_spectrum,
)
from . import _core


def run(kind, config, threads=1, seed=None):
    """Run an experiment; config is a dict. Returns (exit_code, report dict, csv text)."""
    code, report, csv = _core.run(kind, json.dumps(config), threads, seed)
    return code, json.loads(report), csv


def verify_report(report):
    """Recheck the witnesses of a report dict. Returns (exit_code, verification dict)."""
    code, out = _core.verify_report(json.dumps(report))
    return code, json.loads(out)


def report_body(report):
    """The report without its timing member."""
    return {k: v for k, v in report.items() if k != "timing"}


__all__ = [
    "ConfigError",
    "FiniteSystem",
    "HardFailure",
    "LatspecError",
    "__version__",
    "ap_certificate",
    "complete_to_basis",
    "det",
    "expansion_bound_check",
    "experiment_kinds",
    "haystack",
    "hnf",
    "invariant_factors",
    "is_primitive",
    "max_directional_expansion",
    "report_body",
    "run",
    "shrink_rational_spectrum",
    "spectral_masses",
    "verify_haystack_sample",
    "verify_report",
    "volume_spectrum",
]
