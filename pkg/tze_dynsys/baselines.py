"""Power-method baselines and the Euler equivalences they satisfy."""
from typing import Optional

import numpy as np
import structlog

from tze_dynsys.eigenmaps import eig_all, select, sign_canonicalize
from tze_dynsys.errors import (
    DegenerateIterateError,
    InvalidArgumentError,
    InvalidInputError,
)
from tze_dynsys.integrator import rayleigh_residual
from tze_dynsys.metrics import track_solver
from tze_dynsys.models import (
    EigenMapSpec,
    Selector,
    SolveResult,
    SSHopmConfig,
    TracePoint,
)
from tze_dynsys.tensor import CubicTensor, apply, collapse

logger = structlog.get_logger()

PREMISE_ATOL = 1e-10
PERRON_MAP = EigenMapSpec(selector=Selector.PERRON)


def _unit(x: np.ndarray, ord: int = 2) -> np.ndarray:
    vec = np.asarray(x, dtype=float)
    norm = float(np.linalg.norm(vec, ord=ord))
    if norm == 0.0 or not np.isfinite(norm):
        raise InvalidArgumentError("start vector must be nonzero and finite")
    return vec / norm


def _shifted_power_update(
    T: CubicTensor, x: np.ndarray, gamma: float, ord: int = 2
) -> np.ndarray:
    y = (apply(T, x) + gamma * x) / (1.0 + gamma)
    norm = float(np.linalg.norm(y, ord=ord))
    if norm == 0.0 or not np.isfinite(norm):
        raise DegenerateIterateError("shifted power update vanished")
    return y / norm


@track_solver("sshopm")
def sshopm(
    T: CubicTensor,
    cfg: Optional[SSHopmConfig] = None,
    x0: Optional[np.ndarray] = None,
    seed: Optional[int] = None,
) -> SolveResult:
    """Shifted symmetric higher-order power method.

    Iterates ``x <- (T x^{m-1} + gamma x) / ||T x^{m-1} + gamma x||`` until the
    step is below ``tol``; gamma = 0 is the unshifted method. Only the reported
    eigenvector is sign-canonicalized.
    """
    cfg = cfg if cfg is not None else SSHopmConfig()
    if x0 is None:
        rng = np.random.default_rng(seed)
        x0 = rng.standard_normal(T.dim)
    x = _unit(x0)
    if x.shape != (T.dim,):
        raise InvalidArgumentError(f"x0 must have length {T.dim}")

    trace = [] if cfg.record_trace else None
    if trace is not None:
        lam, residual = rayleigh_residual(T, x)
        trace.append(TracePoint(0, lam, float("nan"), residual))

    iterations = 0
    stopped = False
    while iterations < cfg.max_iters:
        x_next = _shifted_power_update(T, x, cfg.gamma)
        step = float(np.linalg.norm(x_next - x))
        x = x_next
        iterations += 1
        if trace is not None:
            lam, residual = rayleigh_residual(T, x)
            trace.append(TracePoint(iterations, lam, step, residual))
        if step <= cfg.tol:
            stopped = True
            break

    x = sign_canonicalize(x)
    lam, residual = rayleigh_residual(T, x)
    converged = stopped and residual <= 10 * cfg.tol * max(1.0, abs(lam))
    return SolveResult(
        x=x,
        lambda_=lam,
        residual=residual,
        iterations=iterations,
        converged=converged,
        trace=trace,
    )


def sshopm_stochastic(
    P: CubicTensor, gamma: float, x0: np.ndarray, steps: int
) -> np.ndarray:
    """1-norm shifted power iterates on a transition tensor, one row per iterate."""
    x = np.asarray(x0, dtype=float)
    if np.any(x < 0):
        raise InvalidArgumentError("stochastic iterates need a nonnegative start")
    x = _unit(x, ord=1)
    rows = [x]
    for _ in range(steps):
        x = _shifted_power_update(P, x, gamma, ord=1)
        rows.append(x)
    return np.vstack(rows)


def stochastic_shift_norms(
    P: CubicTensor, gamma: float, rows: np.ndarray
) -> np.ndarray:
    """``||P x^{m-1} + gamma x||_1`` per iterate; equals 1 + gamma on the simplex."""
    return np.array([np.abs(apply(P, x) + gamma * x).sum() for x in rows])


def _projected_euler_update(
    T: CubicTensor, x: np.ndarray, h: float, norm: str
) -> np.ndarray:
    if norm == "l1":
        # dx/dt = P x^{m-1} - x; stochastic iterates need no projection
        return x + h * (apply(T, x) - x)
    x_next = x + h * (apply(T, x) - np.linalg.norm(x) * x)
    return x_next / np.linalg.norm(x_next)


def sshopm_euler_equivalence(
    T: CubicTensor,
    gamma: float,
    x0: np.ndarray,
    steps: int,
    norm: str = "l2",
    coupled: bool = True,
) -> float:
    """Max deviation between shifted power iterates and Euler with step 1/(1+gamma).

    ``norm="l2"`` integrates ``dx/dt = T x^{m-1} - ||x|| x`` and projects onto the
    sphere; ``norm="l1"`` integrates ``dx/dt = P x^{m-1} - x`` from a stochastic
    start. With ``coupled`` both updates start from the shared power iterate
    each step, otherwise the two trajectories run independently.
    """
    if steps < 1:
        raise InvalidArgumentError("steps must be >= 1")
    if gamma < 0:
        raise InvalidArgumentError("gamma must be >= 0")
    if norm not in ("l1", "l2"):
        raise InvalidArgumentError(f"norm must be 'l1' or 'l2', got {norm!r}")
    ord = 1 if norm == "l1" else 2
    h = 1.0 / (1.0 + gamma)

    x_power = _unit(x0, ord=ord)
    x_euler = x_power.copy()
    deviation = 0.0
    for _ in range(steps):
        power_next = _shifted_power_update(T, x_power, gamma, ord=ord)
        base = x_power if coupled else x_euler
        euler_next = _projected_euler_update(T, base, h, norm)
        deviation = max(deviation, float(np.linalg.norm(power_next - euler_next)))
        x_power, x_euler = power_next, euler_next
    return deviation


def _check_nonnegative_cubic(B: CubicTensor) -> None:
    if B.order != 3:
        raise InvalidArgumentError(f"a 3-mode tensor is required, got order {B.order}")
    if np.any(B.entries < 0):
        raise InvalidInputError("tensor entries must be nonnegative")


def _qve_pieces(B: CubicTensor):
    F = B.entries.sum(axis=1)
    Be = B.entries.sum(axis=2)
    return F, Be


def qve_perron_tensor(B: CubicTensor, a: np.ndarray) -> CubicTensor:
    """Tensor T = W + Z - B whose collapse is F + B[e] - B[x] on stochastic x.

    Requires ``a + B e^2 = e`` with ``a, B >= 0``.
    """
    _check_nonnegative_cubic(B)
    vec = np.asarray(a, dtype=float)
    n = B.dim
    if vec.shape != (n,):
        raise InvalidArgumentError(f"a must have length {n}, got shape {vec.shape}")
    if np.any(vec < 0):
        raise InvalidInputError("a must be nonnegative")
    e = np.ones(n)
    gap = float(np.max(np.abs(vec + apply(B, e) - e)))
    if gap > PREMISE_ATOL:
        raise InvalidInputError(
            f"all-ones vector does not solve x = a + B x^2 (max deviation {gap:.3e})"
        )

    F, Be = _qve_pieces(B)
    W = np.repeat(F[:, :, np.newaxis], n, axis=2)
    Z = np.repeat(Be[:, :, np.newaxis], n, axis=2)
    return CubicTensor(W + Z - B.entries)


def perron_iteration(B: CubicTensor, x0: np.ndarray, steps: int) -> np.ndarray:
    """Iterates ``x_{k+1} = Pi[F + B[e] - B[x_k]]``, one row per iterate."""
    _check_nonnegative_cubic(B)
    F, Be = _qve_pieces(B)
    x = _unit(x0, ord=1)
    rows = [x]
    for _ in range(steps):
        x = select(PERRON_MAP, eig_all(F + Be - collapse(B, x)), x)
        rows.append(x)
    return np.vstack(rows)


def qve_minimal_solution(
    a: np.ndarray, B: CubicTensor, tol: float = 1e-12, max_iters: int = 1000
) -> np.ndarray:
    """Minimal nonnegative solution of ``x = a + B x^2`` by the Perron iteration.

    Writes x = e - y with y = alpha u, u the Perron vector of F + B[e] - B[y]
    and alpha = (e^T (F + B[e]) u - 1) / (e^T B[u] u). When alpha <= 0 the
    minimal solution is e itself.
    """
    # validates the premise
    qve_perron_tensor(B, a)
    F, Be = _qve_pieces(B)
    n = B.dim
    e = np.ones(n)
    y = np.zeros(n)
    for iteration in range(1, max_iters + 1):
        u = select(PERRON_MAP, eig_all(F + Be - collapse(B, y)), y)
        denom = float(np.sum(apply(B, u)))
        alpha = (float(np.sum((F + Be) @ u)) - 1.0) / denom if denom > 0 else 0.0
        if alpha <= 0:
            logger.debug("QVE minimal solution is the all-ones vector")
            return e
        y_next = alpha * u
        if np.linalg.norm(y_next - y) <= tol:
            return e - y_next
        y = y_next
    logger.warning("QVE Perron iteration hit the iteration cap", max_iters=max_iters)
    return e - y


def spacey_perron_tensor(P: CubicTensor, m: np.ndarray) -> CubicTensor:
    """``T[i,j,l] = P[i,j,l] (1 + m_j + m_l)`` for a given solution ``m = P m^2``."""
    _check_nonnegative_cubic(P)
    vec = np.asarray(m, dtype=float)
    if vec.shape != (P.dim,) or np.any(vec < 0):
        raise InvalidInputError("m must be a nonnegative vector of matching length")
    gap = float(np.max(np.abs(apply(P, vec) - vec)))
    if gap > PREMISE_ATOL:
        raise InvalidInputError(
            f"m does not satisfy m = P m^2 (max deviation {gap:.3e})"
        )
    weight = 1.0 + vec[np.newaxis, :, np.newaxis] + vec[np.newaxis, np.newaxis, :]
    return CubicTensor(P.entries * weight)
