import logging
import threading
import time
from collections import deque
from contextlib import contextmanager
from typing import Any, Dict, Iterator

from config import settings

# Configure logging
logger = logging.getLogger(__name__)


class RunMonitor:
    """Windowed tracking of sweep-point durations and failures"""

    def __init__(self, name: str, window_size: int = None):
        self.name = name
        self.window_size = window_size or settings.monitor_window_size
        self.run_times = deque(maxlen=self.window_size)
        self.failures = deque(maxlen=self.window_size)
        self.total_runs = 0
        self._lock = threading.Lock()

    def record_run(self, run_time: float, success: bool):
        """Record the duration and outcome of one run"""
        with self._lock:
            self.run_times.append(run_time)
            self.failures.append(0 if success else 1)
            self.total_runs += 1

    @contextmanager
    def track(self, label: str) -> Iterator[None]:
        """Time a block; an exception marks the run failed and propagates"""
        start = time.perf_counter()
        success = False
        try:
            yield
            success = True
        finally:
            elapsed = time.perf_counter() - start
            self.record_run(elapsed, success)
            logger.debug(f"{self.name} {label}: {'ok' if success else 'failed'} in {elapsed:.3f}s")

    def get_summary(self) -> Dict[str, Any]:
        """Aggregate of the runs inside the window"""
        with self._lock:
            times = list(self.run_times)
            failures = list(self.failures)
            total = self.total_runs
        return {
            "total_runs": total,
            "failed_runs": sum(failures),
            "failure_rate": (sum(failures) / len(failures) * 100) if failures else 0,
            "avg_run_time": sum(times) / len(times) if times else 0,
            "max_run_time": max(times) if times else 0,
            "metrics_window_size": len(times),
        }

    def log_summary(self):
        summary = self.get_summary()
        level = logging.WARNING if summary["failed_runs"] else logging.INFO
        logger.log(
            level,
            f"📊 {self.name}: {summary['total_runs']} runs, {summary['failed_runs']} failed, "
            f"avg {summary['avg_run_time']:.3f}s, max {summary['max_run_time']:.3f}s",
        )
