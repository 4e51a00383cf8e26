"""Monte Carlo simulation of the spacey random walk on 3-mode transition tensors.

At each step the walk forgets its second-last state, draws a stand-in Y from
its own visit history (initial and current state included) and moves from the
current state X with probability ``P[next, X, Y]``.
"""
from bisect import bisect_right
from itertools import accumulate
from typing import List, Optional

import numpy as np
import structlog

from tze_dynsys.errors import CorruptTensorError, InvalidArgumentError
from tze_dynsys.integrator import solve
from tze_dynsys.metrics import record_srw_steps
from tze_dynsys.models import (
    EigenMapSpec,
    IntegratorConfig,
    Renorm,
    Selector,
    WalkState,
)
from tze_dynsys.tensor import CubicTensor

logger = structlog.get_logger()

COLUMN_ATOL = 1e-10


def _column_cdfs(P: CubicTensor) -> List[List[List[float]]]:
    """Cumulative sums of every column ``P[:, j, k]``, indexed ``[j][k]``."""
    if P.order != 3:
        raise InvalidArgumentError(
            f"the spacey random walk needs a 3-mode tensor, got order {P.order}"
        )
    entries = P.entries
    sums = entries.sum(axis=0)
    worst = float(np.max(np.abs(sums - 1.0)))
    if np.any(entries < 0) or worst > COLUMN_ATOL:
        raise CorruptTensorError(
            f"transition tensor columns are not stochastic (max deviation {worst:.3e})"
        )
    cdf = np.cumsum(np.transpose(entries, (1, 2, 0)), axis=2)
    return cdf.tolist()


def _draw(cumulative: List[float], u: float) -> int:
    return min(bisect_right(cumulative, u * cumulative[-1]), len(cumulative) - 1)


def _advance(
    cdfs: List[List[List[float]]],
    counts: List[int],
    current: int,
    u_history: float,
    u_next: float,
) -> int:
    history = _draw(list(accumulate(counts)), u_history)
    return _draw(cdfs[current][history], u_next)


def srw_step(
    P: CubicTensor, state: WalkState, rng: Optional[np.random.Generator] = None
) -> WalkState:
    """One spacey random walk transition.

    Without ``rng`` the randomness is derived from ``(state.seed, state.steps)``
    so the transition is a pure function of the state.
    """
    cdfs = _column_cdfs(P)
    if len(state.history_counts) != P.dim:
        raise InvalidArgumentError("walk state and tensor dimensions differ")
    rng = rng if rng is not None else np.random.default_rng([state.seed, state.steps])
    u_history, u_next = rng.random(2)
    nxt = _advance(cdfs, state.history_counts, state.current, u_history, u_next)
    counts = list(state.history_counts)
    counts[nxt] += 1
    return WalkState(
        current=nxt, history_counts=counts, steps=state.steps + 1, seed=state.seed
    )


def initial_state(dim: int, seed: int, rng: Optional[np.random.Generator] = None):
    """Walk state at a uniformly drawn initial vertex."""
    rng = rng if rng is not None else np.random.default_rng(seed)
    start = int(rng.integers(dim))
    counts = [0] * dim
    counts[start] = 1
    return WalkState(current=start, history_counts=counts, steps=0, seed=seed)


def srw_walk(P: CubicTensor, steps: int, seed: int = 0) -> WalkState:
    """Run ``steps`` transitions from a uniform random initial state."""
    if steps < 0:
        raise InvalidArgumentError("steps must be >= 0")
    cdfs = _column_cdfs(P)
    rng = np.random.default_rng(seed)
    state = initial_state(P.dim, seed, rng)
    counts = list(state.history_counts)
    current = state.current

    uniforms = rng.random((steps, 2)).tolist()
    for u_history, u_next in uniforms:
        current = _advance(cdfs, counts, current, u_history, u_next)
        counts[current] += 1

    record_srw_steps(steps)
    return WalkState(current=current, history_counts=counts, steps=steps, seed=seed)


def srw_run(P: CubicTensor, steps: int, seed: int = 0) -> np.ndarray:
    """Occupation vector ``history_counts / (steps + 1)`` after ``steps`` moves."""
    state = srw_walk(P, steps, seed)
    logger.info("Spacey random walk finished", steps=steps, seed=seed)
    return state.occupation


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    """Total variation distance ``0.5 * ||p - q||_1``."""
    a = np.asarray(p, dtype=float)
    b = np.asarray(q, dtype=float)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"shape mismatch {a.shape} vs {b.shape}")
    return 0.5 * float(np.abs(a - b).sum())


def solve_spacey_fixed_point(
    P: CubicTensor, cfg: Optional[IntegratorConfig] = None, seed: Optional[int] = 0
):
    """Stochastic x with ``P x^2 = x`` via the Perron-map dynamical system."""
    cfg = cfg if cfg is not None else IntegratorConfig(renorm=Renorm.SIMPLEX1)
    if cfg.renorm == Renorm.SPHERE2:
        cfg = cfg.model_copy(update={"renorm": Renorm.SIMPLEX1})
    return solve(P, EigenMapSpec(selector=Selector.PERRON), cfg, seed=seed)
