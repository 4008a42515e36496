import json
import logging
import threading
import time
from collections import Counter

logger = logging.getLogger(__name__)


def emit_metric(namespace: str, metrics: dict, dimensions: dict = {}) -> dict:
    """Log one structured JSON diagnostic event and return it.

    Args:
        namespace: Event family, e.g. "transmission" or "sweep".
        metrics: Mapping of metric name to a (value, unit) pair.
        dimensions: Flat string labels attached to the event.

    Returns:
        dict: The event as serialised to the log.
    """
    event = {
        "timestamp": int(time.time() * 1000),
        "namespace": namespace,
        "units": {name: unit for name, (_, unit) in metrics.items()},
        **dimensions,
        **{name: value for name, (value, _) in metrics.items()},
    }

    logger.info(json.dumps(event))
    return event


class ClampDiagnostics:
    """Thread-safe tally of probabilities forced back into [0, 1]."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._counts: Counter[str] = Counter()
        self._magnitude: dict[str, float] = {}

    def record(self, method: str, excess: float) -> None:
        with self._lock:
            self._counts[method] += 1
            self._magnitude[method] = max(self._magnitude.get(method, 0.0), excess)
        emit_metric(
            namespace="transmission",
            metrics={
                "ClampCount": (1, "Count"),
                "ClampMagnitude": (excess, "None"),
            },
            dimensions={"Method": method},
        )

    def snapshot(self) -> dict[str, tuple[int, float]]:
        """Per-method (count, largest excess) since the last reset."""
        with self._lock:
            return {m: (c, self._magnitude[m]) for m, c in self._counts.items()}

    def reset(self) -> None:
        with self._lock:
            self._counts.clear()
            self._magnitude.clear()


clamp_diagnostics = ClampDiagnostics()
