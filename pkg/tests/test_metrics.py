"""Tests for the structured diagnostic events in src/metrics.py."""

import json
import logging

from src.metrics import ClampDiagnostics, emit_metric


def test_emit_metric_logs_one_json_line(caplog):
    with caplog.at_level(logging.INFO, logger="src.metrics"):
        event = emit_metric(
            namespace="sweep",
            metrics={"Points": (20, "Count"), "Duration": (0.5, "Seconds")},
            dimensions={"Target": "tplr"},
        )

    assert event["namespace"] == "sweep"
    assert event["Points"] == 20
    assert event["units"] == {"Points": "Count", "Duration": "Seconds"}
    assert event["Target"] == "tplr"
    logged = json.loads(caplog.records[-1].getMessage())
    assert logged == event


def test_clamp_counter_keeps_count_and_largest_excess():
    diagnostics = ClampDiagnostics()
    diagnostics.record("ghq", 1e-12)
    diagnostics.record("ghq", 3e-12)
    diagnostics.record("robust", 2e-9)
    assert diagnostics.snapshot() == {"ghq": (2, 3e-12), "robust": (1, 2e-9)}
    diagnostics.reset()
    assert diagnostics.snapshot() == {}
