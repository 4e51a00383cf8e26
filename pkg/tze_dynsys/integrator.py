"""Forward Euler integration of dx/dt = Lambda(T[x]^{m-2}) - x."""
from pathlib import Path
from typing import IO, Iterator, Optional, Tuple, Union

import numpy as np
import pandas as pd
import structlog

from tze_dynsys.eigenmaps import eig_all, select, select_eigenvector
from tze_dynsys.errors import DivergenceError, InvalidArgumentError, NormalizationError
from tze_dynsys.metrics import track_solver
from tze_dynsys.models import (
    EigenMapSpec,
    IntegratorConfig,
    Renorm,
    Selector,
    SolveResult,
    TracePoint,
)
from tze_dynsys.tensor import CubicTensor, apply, collapse

logger = structlog.get_logger()

DIVERGENCE_NORM = 1e6
SIMPLEX_NEG_TOL = 1e-10
TRACE_COLUMNS = ["iter", "rayleigh", "update_norm", "residual"]


def random_start(
    dim: int, renorm: Renorm = Renorm.SPHERE2, rng: Optional[np.random.Generator] = None
) -> np.ndarray:
    """Uniform random start on the unit sphere (or the simplex for simplex1)."""
    rng = rng if rng is not None else np.random.default_rng()
    if renorm == Renorm.SIMPLEX1:
        return rng.dirichlet(np.ones(dim))
    while True:
        g = rng.standard_normal(dim)
        norm = np.linalg.norm(g)
        if norm > 0:
            return g / norm


def renormalize(y: np.ndarray, renorm: Renorm) -> np.ndarray:
    """Apply the per-step normalization, rejecting divergent iterates."""
    if not np.all(np.isfinite(y)):
        raise DivergenceError("iterate has non-finite entries")
    norm2 = float(np.linalg.norm(y))
    if norm2 > DIVERGENCE_NORM:
        raise DivergenceError(f"iterate norm {norm2:.3e} exceeds {DIVERGENCE_NORM:g}")
    if norm2 == 0.0:
        raise DivergenceError("iterate collapsed to zero")

    if renorm == Renorm.SPHERE2:
        return y / norm2
    if renorm == Renorm.SIMPLEX1:
        low = float(np.min(y))
        if low < -SIMPLEX_NEG_TOL:
            raise NormalizationError(
                f"simplex renormalization of negative iterate (min {low:.3e})"
            )
        clipped = np.clip(y, 0.0, None)
        return clipped / clipped.sum()
    return y


def rayleigh_residual(T: CubicTensor, x: np.ndarray) -> Tuple[float, float]:
    """Rayleigh quotient x^T T x^{m-1} / x^T x and its eigen-residual."""
    ax = apply(T, x)
    lam = float(x @ ax) / float(x @ x)
    return lam, float(np.linalg.norm(ax - lam * x))


def euler_step(
    T: CubicTensor, x: np.ndarray, spec: EigenMapSpec, h: float
) -> np.ndarray:
    """One forward Euler step ``x + h (Lambda(T[x]^{m-2}) - x)``."""
    vec = np.asarray(x, dtype=float)
    target = select(spec, eig_all(collapse(T, vec)), vec)
    return vec + h * (target - vec)


def _check_pairing(spec: EigenMapSpec, cfg: IntegratorConfig) -> None:
    if spec.selector == Selector.PERRON and cfg.renorm == Renorm.SPHERE2:
        raise InvalidArgumentError(
            "the perron map returns unit 1-norm vectors; use renorm simplex1 or none"
        )


def start_renorm(spec: EigenMapSpec, renorm: Renorm) -> Renorm:
    """Normalization applied to the starting point of a solve.

    Perron starts always lie on the simplex, whatever the per-step renorm.
    """
    if spec.selector == Selector.PERRON or renorm == Renorm.SIMPLEX1:
        return Renorm.SIMPLEX1
    return Renorm.SPHERE2


def _initial_iterate(
    T: CubicTensor, x0: Optional[np.ndarray], renorm: Renorm, seed: Optional[int]
) -> np.ndarray:
    if x0 is None:
        return random_start(T.dim, renorm, np.random.default_rng(seed))
    x = np.asarray(x0, dtype=float)
    if x.shape != (T.dim,):
        raise InvalidArgumentError(f"x0 must have length {T.dim}, got shape {x.shape}")
    if not np.any(x):
        raise InvalidArgumentError("x0 must be nonzero")
    return renormalize(x, renorm)


def _renormalize_step(y: np.ndarray, renorm: Renorm) -> np.ndarray:
    if not np.any(y):
        # x = -Lambda(x) with h = 0.5 lands exactly on the origin
        raise DivergenceError("Euler step from the antipode of Lambda(x) hit zero")
    return renormalize(y, renorm)


@track_solver("dynsys")
def solve(
    T: CubicTensor,
    spec: EigenMapSpec,
    cfg: Optional[IntegratorConfig] = None,
    x0: Optional[np.ndarray] = None,
    seed: Optional[int] = None,
) -> SolveResult:
    """Integrate until ``||Lambda(x_k) - x_k|| <= tol`` or ``max_iters`` steps.

    ``x0`` is scaled to unit 1-norm for simplex1 or the Perron map and to unit
    2-norm otherwise; without ``x0`` a seeded random start is drawn.
    """
    cfg = cfg if cfg is not None else IntegratorConfig()
    _check_pairing(spec, cfg)
    x = _initial_iterate(T, x0, start_renorm(spec, cfg.renorm), seed)

    trace = [] if cfg.record_trace else None
    tie_events = 0
    iterations = 0
    stopped = False
    h = cfg.step_h

    while True:
        selection = select_eigenvector(spec, eig_all(collapse(T, x)), x)
        tie_events += int(selection.tied)
        direction = selection.vector - x
        update_norm = float(np.linalg.norm(direction))

        if trace is not None:
            lam, residual = rayleigh_residual(T, x)
            trace.append(TracePoint(iterations, lam, update_norm, residual))

        if update_norm <= cfg.tol:
            stopped = True
            break
        if iterations >= cfg.max_iters:
            break
        x = _renormalize_step(x + h * direction, cfg.renorm)
        iterations += 1

    lam, residual = rayleigh_residual(T, x)
    converged = stopped and residual <= 10 * cfg.tol * max(1.0, abs(lam))
    logger.debug(
        "Solve finished",
        map=spec.label,
        iterations=iterations,
        converged=converged,
        rayleigh=lam,
        residual=residual,
        tie_events=tie_events,
    )
    return SolveResult(
        x=x,
        lambda_=lam,
        residual=residual,
        iterations=iterations,
        converged=converged,
        trace=trace,
        tie_events=tie_events,
    )


def iterate_euler(
    T: CubicTensor,
    spec: EigenMapSpec,
    cfg: IntegratorConfig,
    x0: np.ndarray,
    steps: int,
) -> Iterator[np.ndarray]:
    """Yield ``x0`` and the next ``steps`` iterates without a stopping test."""
    _check_pairing(spec, cfg)
    x = _initial_iterate(T, x0, start_renorm(spec, cfg.renorm), None)
    yield x
    for _ in range(steps):
        x = _renormalize_step(euler_step(T, x, spec, cfg.step_h), cfg.renorm)
        yield x


def closed_form_diag_trajectory(
    d: np.ndarray, x0: np.ndarray, i: int, t: float
) -> np.ndarray:
    """Exact ``x(t) = e^{-t}(x(0) - e_i) + e_i`` for the closest-to-e_i map.

    ``i`` is 1-based.
    """
    start = np.asarray(x0, dtype=float)
    n = start.shape[0]
    if np.asarray(d).shape[0] != n:
        raise InvalidArgumentError("diagonal and start vector lengths differ")
    if not 1 <= i <= n:
        raise InvalidArgumentError(f"basis index {i} out of range 1..{n}")
    e_i = np.zeros(n)
    e_i[i - 1] = 1.0
    return np.exp(-t) * (start - e_i) + e_i


def trace_frame(result: SolveResult) -> pd.DataFrame:
    """Trace rows as a DataFrame with the trace CSV columns."""
    if result.trace is None:
        raise InvalidArgumentError("solve was run without record_trace")
    return pd.DataFrame([tuple(p) for p in result.trace], columns=TRACE_COLUMNS)


def write_trace_csv(result: SolveResult, dest: Union[str, Path, IO[str]]) -> None:
    """Write ``iter,rayleigh,update_norm,residual`` rows."""
    trace_frame(result).to_csv(dest, index=False)
