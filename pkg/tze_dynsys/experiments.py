"""Randomized-trial experiments, timing benchmarks and trajectory dumps."""
import re
import time
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path
from typing import Callable, List, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd
import structlog

from tze_dynsys.baselines import sshopm
from tze_dynsys.config import settings
from tze_dynsys.errors import InvalidArgumentError, TensorEigError
from tze_dynsys.integrator import iterate_euler, random_start, solve, start_renorm
from tze_dynsys.io import read_tensor
from tze_dynsys.metrics import record_trial
from tze_dynsys.models import (
    BenchRow,
    EigenCluster,
    EigenMapSpec,
    ExperimentReport,
    IntegratorConfig,
    Renorm,
    Selector,
    SSHopmConfig,
    VariantTally,
)
from tze_dynsys.tensor import (
    CubicTensor,
    make_alternating,
    make_diagonal,
    make_kolda_mayo,
    make_random_transition,
)

logger = structlog.get_logger()

DEFAULT_VARIANTS = ("lm:1", "sm:1", "la:1", "sa:1", "sa:2")
BENCH_METHODS = ("dynsys", "sshopm")
REPORT_COLUMNS = ["tensor", "variant", "trials", "cluster", "lambda", "hits"]

_ALTERNATING_RE = re.compile(r"^alternating(-literal)?:(\d+):(\d+)$")
_DIAG_RE = re.compile(r"^diag:([^:]+)(?::(\d+))?$")
_RANDOM_TRANSITION_RE = re.compile(r"^random-transition:(\d+)(?::(\d+))?$")


class Variant(NamedTuple):
    """One column of an experiment: a dynamical-system map or an SS-HOPM shift."""

    name: str
    spec: Optional[EigenMapSpec] = None
    gamma: Optional[float] = None


class TrialOutcome(NamedTuple):
    variant_index: int
    trial: int
    rayleigh: float
    residual: float
    iterations: int
    converged: bool
    error: Optional[str]
    seconds: float


def sshopm_variant(gamma: float) -> Variant:
    return Variant(name=f"sshopm:{gamma:g}", gamma=float(gamma))


def resolve_tensor(name: str) -> CubicTensor:
    """Built-in tensor by name, or a tenz v1 file path.

    Names: ``kolda-mayo``, ``alternating:m:n``, ``alternating-literal:m:n``,
    ``diag:d1,d2,...[:m]`` (order 3 by default) and
    ``random-transition:n[:seed]`` (3-mode).
    """
    text = name.strip()
    if text == "kolda-mayo":
        return make_kolda_mayo()

    match = _ALTERNATING_RE.match(text)
    if match:
        literal = match.group(1) is not None
        return make_alternating(int(match.group(2)), int(match.group(3)), literal)

    match = _DIAG_RE.match(text)
    if match:
        try:
            values = [float(v) for v in match.group(1).split(",")]
        except ValueError as e:
            raise InvalidArgumentError(f"bad diagonal values in '{name}'") from e
        order = int(match.group(2)) if match.group(2) else 3
        return make_diagonal(values, order)

    match = _RANDOM_TRANSITION_RE.match(text)
    if match:
        seed = int(match.group(2)) if match.group(2) else 0
        return make_random_transition(int(match.group(1)), seed=seed)

    path = Path(text)
    if not path.exists():
        raise InvalidArgumentError(f"'{name}' is neither a built-in tensor nor a file")
    return read_tensor(path)


def _run_trial(
    tensor: CubicTensor,
    cfg: IntegratorConfig,
    sshopm_cfg: SSHopmConfig,
    seed: int,
    variants: Sequence[Variant],
    task: tuple,
) -> TrialOutcome:
    variant_index, trial = task
    variant = variants[variant_index]
    rng = np.random.default_rng([seed, variant_index, trial])
    start = time.perf_counter()
    try:
        if variant.spec is not None:
            x0 = random_start(tensor.dim, start_renorm(variant.spec, cfg.renorm), rng)
            result = solve(tensor, variant.spec, cfg, x0=x0)
        else:
            x0 = random_start(tensor.dim, Renorm.SPHERE2, rng)
            shifted = sshopm_cfg.model_copy(update={"gamma": variant.gamma})
            result = sshopm(tensor, shifted, x0=x0)
    except TensorEigError as e:
        return TrialOutcome(
            variant_index,
            trial,
            float("nan"),
            float("nan"),
            0,
            False,
            type(e).__name__,
            time.perf_counter() - start,
        )

    lam = result.lambda_
    # (x, lambda) and (-x, -lambda) are the same eigenpair for odd order
    if tensor.order % 2 == 1 and lam < 0:
        lam = -lam
    return TrialOutcome(
        variant_index,
        trial,
        lam,
        result.residual,
        result.iterations,
        result.converged,
        None,
        time.perf_counter() - start,
    )


def _map_ordered(fn: Callable, tasks: List[tuple], workers: int) -> list:
    """Map ``fn`` over ``tasks``, results in task order regardless of workers."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]
    chunksize = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, tasks, chunksize=chunksize))


def cluster_eigenvalues(
    values: Sequence[float], residuals: Sequence[float], tol: float
) -> tuple:
    """Greedy 1-D clustering of sorted eigenvalues.

    A new cluster starts once a value exceeds the cluster's smallest member by
    more than ``tol``. Returns the clusters and each input's cluster index.
    """
    order = np.argsort(np.asarray(values, dtype=float), kind="stable")
    labels = [0] * len(values)
    groups: List[List[int]] = []
    for idx in order:
        if not groups or values[idx] - values[groups[-1][0]] > tol:
            groups.append([])
        groups[-1].append(int(idx))
        labels[idx] = len(groups) - 1

    clusters = []
    for index, members in enumerate(groups):
        vals = np.array([values[i] for i in members])
        clusters.append(
            EigenCluster(
                index=index,
                representative=float(np.mean(vals)),
                members=len(members),
                spread=float(vals.max() - vals.min()),
                residual=float(max(residuals[i] for i in members)),
            )
        )
    return clusters, labels


def run_experiment(
    tensor: CubicTensor,
    specs: Sequence[EigenMapSpec],
    trials: Optional[int] = None,
    cfg: Optional[IntegratorConfig] = None,
    seed: Optional[int] = None,
    tensor_id: str = "tensor",
    sshopm_gammas: Sequence[float] = (),
    workers: Optional[int] = None,
) -> ExperimentReport:
    """Run seeded random-start trials per map and tally eigenvalue clusters.

    Trial ``t`` of variant ``v`` draws its start from
    ``default_rng([seed, v, t])``, so the report does not depend on
    ``workers``. Non-converged or failed trials count as failures.
    """
    trials = settings.trials if trials is None else trials
    if trials < 1:
        raise InvalidArgumentError("trials must be >= 1")
    cfg = cfg if cfg is not None else IntegratorConfig()
    seed = settings.seed if seed is None else seed
    workers = settings.workers if workers is None else workers

    variants = [Variant(name=spec.label, spec=spec) for spec in specs]
    variants.extend(sshopm_variant(gamma) for gamma in sshopm_gammas)
    if not variants:
        raise InvalidArgumentError("at least one map or SS-HOPM shift is required")
    for variant in variants:
        if variant.spec is not None and variant.spec.selector == Selector.PERRON:
            if cfg.renorm == Renorm.SPHERE2:
                raise InvalidArgumentError(
                    "the perron map needs renorm simplex1 or none"
                )

    sshopm_cfg = SSHopmConfig(tol=cfg.tol, max_iters=cfg.max_iters)
    tasks = [(v, t) for v in range(len(variants)) for t in range(trials)]
    worker = partial(_run_trial, tensor, cfg, sshopm_cfg, seed, variants)
    outcomes: List[TrialOutcome] = _map_ordered(worker, tasks, workers)

    hits = [o for o in outcomes if o.converged]
    clusters, labels = cluster_eigenvalues(
        [o.rayleigh for o in hits], [o.residual for o in hits], settings.cluster_tol
    )

    tallies = [VariantTally(variant=v.name, trials=trials) for v in variants]
    label_iter = iter(labels)
    for outcome in outcomes:
        tally = tallies[outcome.variant_index]
        tally.seconds += outcome.seconds
        if outcome.converged:
            cluster = next(label_iter)
            tally.hits[cluster] = tally.hits.get(cluster, 0) + 1
            tally.iterations.append(outcome.iterations)
            record_trial(tally.variant, "converged")
            continue
        tally.failures += 1
        if outcome.error is not None:
            logger.warning(
                "Trial failed",
                variant=tally.variant,
                trial=outcome.trial,
                error=outcome.error,
            )
            record_trial(tally.variant, "error")
        else:
            record_trial(tally.variant, "not_converged")

    for tally in tallies:
        logger.info(
            "Experiment variant finished",
            tensor=tensor_id,
            variant=tally.variant,
            trials=tally.trials,
            failures=tally.failures,
            clusters=len(tally.hits),
        )
    return ExperimentReport(tensor_id=tensor_id, variants=tallies, clusters=clusters)


def report_frame(
    report: ExperimentReport, include_timing: bool = False
) -> pd.DataFrame:
    """Long-format hit table: one row per (variant, cluster) plus a failure row.

    The failure row has an empty cluster and lambda. Timing columns are only
    added on request so equal seeds give byte-identical reports.
    """
    rows = []
    for tally in report.variants:
        for cluster in report.clusters:
            rows.append(
                {
                    "tensor": report.tensor_id,
                    "variant": tally.variant,
                    "trials": tally.trials,
                    "cluster": cluster.index,
                    "lambda": round(cluster.representative, 4),
                    "hits": tally.hits.get(cluster.index, 0),
                }
            )
        rows.append(
            {
                "tensor": report.tensor_id,
                "variant": tally.variant,
                "trials": tally.trials,
                "cluster": None,
                "lambda": None,
                "hits": tally.failures,
            }
        )
    frame = pd.DataFrame(rows, columns=REPORT_COLUMNS)
    frame["cluster"] = frame["cluster"].astype("Int64")
    if include_timing:
        seconds = {tally.variant: tally.seconds for tally in report.variants}
        frame["seconds"] = frame["variant"].map(seconds)
    return frame


def cluster_frame(report: ExperimentReport) -> pd.DataFrame:
    """Cluster summary: representative, members, spread and worst residual."""
    return pd.DataFrame(
        [c.model_dump() for c in report.clusters],
        columns=list(EigenCluster.model_fields),
    )


def run_bench(
    orders: Sequence[int],
    dims: Sequence[int],
    methods: Sequence[str] = BENCH_METHODS,
    seed: Optional[int] = None,
    trials_per_map: Optional[int] = None,
    sshopm_trials_per_dim: Optional[int] = None,
    workers: Optional[int] = None,
) -> List[BenchRow]:
    """Time both solvers on the alternating test tensors.

    ``dynsys`` runs ``la:k`` and ``lm:k`` for k = 1..n; ``sshopm`` uses gamma = 1
    and ``100 n`` random starts by default. Cells run in a process pool when
    ``workers > 1``; each row times its own cell only.
    """
    unknown = set(methods) - set(BENCH_METHODS)
    if unknown:
        raise InvalidArgumentError(f"unknown bench methods: {sorted(unknown)}")
    seed = settings.seed if seed is None else seed
    workers = settings.workers if workers is None else workers
    per_map = (
        settings.bench_trials_per_map if trials_per_map is None else trials_per_map
    )
    per_dim = (
        settings.bench_sshopm_trials_per_dim
        if sshopm_trials_per_dim is None
        else sshopm_trials_per_dim
    )

    tasks = [
        (order, dim, method) for order in orders for dim in dims for method in methods
    ]
    worker = partial(_bench_task, seed, per_map, per_dim)
    return _map_ordered(worker, tasks, workers)


def _bench_task(seed: int, per_map: int, per_dim: int, task: tuple) -> BenchRow:
    order, dim, method = task
    tensor = make_alternating(order, dim)
    if method == "dynsys":
        specs = [
            EigenMapSpec(selector=selector, k=k)
            for selector in (Selector.LARGEST_ALGEBRAIC, Selector.LARGEST_MAGNITUDE)
            for k in range(1, dim + 1)
        ]
        runs = [spec for spec in specs for _ in range(per_map)]
        return _bench_cell(tensor, method, runs, len(specs), IntegratorConfig(), seed)
    runs = [None] * (per_dim * dim)
    return _bench_cell(tensor, method, runs, 1, IntegratorConfig(), seed)


def _bench_cell(
    tensor: CubicTensor,
    method: str,
    runs: List[Optional[EigenMapSpec]],
    maps: int,
    cfg: IntegratorConfig,
    seed: int,
) -> BenchRow:
    sshopm_cfg = SSHopmConfig(gamma=1.0, tol=1e-6, max_iters=cfg.max_iters)
    converged = 0
    total_iterations = 0
    start = time.perf_counter()
    for index, spec in enumerate(runs):
        rng = np.random.default_rng([seed, tensor.order, tensor.dim, index])
        x0 = random_start(tensor.dim, Renorm.SPHERE2, rng)
        try:
            if spec is not None:
                result = solve(tensor, spec, cfg, x0=x0)
            else:
                result = sshopm(tensor, sshopm_cfg, x0=x0)
        except TensorEigError as e:
            logger.warning("Bench run failed", method=method, error=type(e).__name__)
            continue
        converged += int(result.converged)
        total_iterations += result.iterations
    row = BenchRow(
        order=tensor.order,
        dim=tensor.dim,
        method=method,
        maps=maps,
        trials=len(runs),
        converged=converged,
        total_iterations=total_iterations,
        seconds=time.perf_counter() - start,
    )
    logger.info("Bench row", **row.model_dump())
    return row


def bench_frame(
    rows: Sequence[BenchRow], include_timing: bool = True
) -> pd.DataFrame:
    """Timing table with one row per (order, dim, method)."""
    frame = pd.DataFrame(
        [row.model_dump() for row in rows], columns=list(BenchRow.model_fields)
    )
    if not include_timing:
        frame = frame.drop(columns=["seconds"])
    return frame


def dump_trajectory(
    tensor: CubicTensor,
    spec: EigenMapSpec,
    cfg: Optional[IntegratorConfig] = None,
    x0: Optional[np.ndarray] = None,
    steps: int = 100,
    seed: Optional[int] = None,
) -> pd.DataFrame:
    """Every Euler iterate as a row ``iter, x1, ..., xn``.

    No stopping test is applied; divergence still raises.
    """
    cfg = cfg if cfg is not None else IntegratorConfig()
    if steps < 0:
        raise InvalidArgumentError("steps must be >= 0")
    if x0 is None:
        renorm = start_renorm(spec, cfg.renorm)
        x0 = random_start(tensor.dim, renorm, np.random.default_rng(seed))
    iterates = np.vstack(list(iterate_euler(tensor, spec, cfg, x0, steps)))
    frame = pd.DataFrame(iterates, columns=[f"x{i}" for i in range(1, tensor.dim + 1)])
    frame.insert(0, "iter", np.arange(iterates.shape[0]))
    return frame
