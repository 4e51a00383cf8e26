"""Prometheus metrics for solver activity."""
import time
from functools import wraps
from pathlib import Path
from typing import Callable, Union

import structlog
from prometheus_client import REGISTRY, Counter, Histogram, Info, write_to_textfile

from tze_dynsys.config import settings

logger = structlog.get_logger()

# Application info
app_info = Info("tze_app", "Application information")
app_info.info(
    {
        "name": settings.app_name,
        "version": settings.app_version,
    }
)

# Solver metrics
solves_total = Counter(
    "tze_solves_total",
    "Total number of solver runs",
    ["method", "outcome"],
)

solve_iterations = Histogram(
    "tze_solve_iterations",
    "Iterations used per solver run",
    ["method"],
    buckets=[1, 5, 10, 20, 50, 100, 250, 500, 1000, 5000],
)

solve_duration = Histogram(
    "tze_solve_duration_seconds",
    "Solver run duration in seconds",
    ["method"],
    buckets=[0.0005, 0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0, 5.0],
)

tie_events_total = Counter(
    "tze_tie_events_total",
    "Eigenvalue ties broken by proximity to the current iterate",
)

# Harness metrics
experiment_trials_total = Counter(
    "tze_experiment_trials_total",
    "Total number of experiment trials",
    ["variant", "outcome"],
)

srw_steps_total = Counter(
    "tze_srw_steps_total", "Total number of simulated spacey random walk steps"
)


def track_solver(method: str):
    """Decorator to track solver outcome, iterations and duration."""

    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            if not settings.metrics_enabled:
                return func(*args, **kwargs)

            start_time = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                solve_duration.labels(method=method).observe(
                    time.perf_counter() - start_time
                )
                solves_total.labels(method=method, outcome=type(e).__name__).inc()
                raise

            solve_duration.labels(method=method).observe(
                time.perf_counter() - start_time
            )
            outcome = "converged" if result.converged else "not_converged"
            solves_total.labels(method=method, outcome=outcome).inc()
            solve_iterations.labels(method=method).observe(result.iterations)
            if result.tie_events:
                tie_events_total.inc(result.tie_events)
            return result

        return wrapper

    return decorator


def record_trial(variant: str, outcome: str):
    """Count one experiment trial."""
    if settings.metrics_enabled:
        experiment_trials_total.labels(variant=variant, outcome=outcome).inc()


def record_srw_steps(steps: int):
    """Count simulated random walk steps."""
    if settings.metrics_enabled:
        srw_steps_total.inc(steps)


def write_metrics(path: Union[str, Path]) -> None:
    """Write a Prometheus text-format snapshot."""
    try:
        write_to_textfile(str(path), REGISTRY)
        logger.info("Wrote metrics snapshot", path=str(path))
    except OSError as e:
        logger.error("Failed to write metrics", path=str(path), error=str(e))
        raise
