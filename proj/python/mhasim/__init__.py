"""Python front end for the mhasim simulator."""

import json

from ._mhasim import (
    ConfigError,
    DeadlockError,
    MappingError,
    TraceError,
    classify_contention,
    default_config,
    footprint,
    generate,
    logit_mapping,
    make_config,
    parse_config,
    report,
    run_json,
    step_gear,
    sweep,
)


def run(traces, config="", **overrides):
    """Simulate a trace-set directory and return the stats document as a dict."""
    text = run_json(traces, config, {k: _value(v) for k, v in overrides.items()})
    return json.loads(text)


def _value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


__all__ = [
    "ConfigError",
    "DeadlockError",
    "MappingError",
    "TraceError",
    "classify_contention",
    "default_config",
    "footprint",
    "generate",
    "logit_mapping",
    "make_config",
    "parse_config",
    "report",
    "run",
    "run_json",
    "step_gear",
    "sweep",
]
