"""Python access to the fwis core: certificates, simulation and trace analysis.

Configs may be given as a preset name, a dict, or a path to a JSON file.
"""

from __future__ import annotations

import json
import os
from typing import Any, Mapping, Union

from . import _core
from ._core import ConfigError, DivergenceError, TraceParseError, TRACE_COLUMNS

ConfigLike = Union[str, os.PathLike, Mapping[str, Any]]

__all__ = [
    "ConfigError",
    "DivergenceError",
    "TraceParseError",
    "TRACE_COLUMNS",
    "preset_names",
    "config",
    "with_parameter",
    "certify",
    "simulate",
    "analyze",
    "run_and_analyze",
    "fixture_quantity",
    "validate_fixtures",
    "jacobian",
    "m_tilde",
    "c_tilde",
    "b_tilde",
]

jacobian = _core.jacobian
m_tilde = _core.m_tilde
c_tilde = _core.c_tilde
b_tilde = _core.b_tilde


def preset_names() -> list[str]:
    return list(_core.preset_names())


def _config_text(cfg: ConfigLike) -> str:
    if isinstance(cfg, Mapping):
        return json.dumps(cfg)
    cfg = os.fspath(cfg)
    if cfg in _core.preset_names():
        return json.dumps({"preset": cfg})
    with open(cfg, encoding="utf-8") as fh:
        return fh.read()


def config(cfg: ConfigLike) -> dict:
    """Fully resolved config as a dict."""
    return json.loads(_core.normalize_config(_config_text(cfg)))


def with_parameter(cfg: ConfigLike, path: str, value: float) -> dict:
    return json.loads(_core.with_parameter(_config_text(cfg), path, float(value)))


def certify(cfg: ConfigLike) -> dict:
    return json.loads(_core.certify(_config_text(cfg)))


def simulate(cfg: ConfigLike) -> dict:
    """Trace columns as numpy arrays keyed by the CSV column names."""
    return _core.simulate(_config_text(cfg))


def analyze(cfg: ConfigLike, trace_csv: Union[str, os.PathLike]) -> dict:
    """Analyze a CSV trace file written by the CLI or by simulate_csv."""
    with open(trace_csv, encoding="utf-8") as fh:
        text = fh.read()
    return json.loads(_core.analyze_csv(_config_text(cfg), text))


def run_and_analyze(cfg: ConfigLike) -> dict:
    return json.loads(_core.run_and_analyze(_config_text(cfg)))


def fixture_quantity(cfg: ConfigLike, quantity: str) -> float:
    return _core.fixture_quantity(_config_text(cfg), quantity)


def validate_fixtures(directory: Union[str, os.PathLike]) -> tuple[bool, int, list[str]]:
    return _core.validate_fixtures(os.fspath(directory))
