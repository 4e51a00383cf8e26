"""Dense cubic tensors and the two contractions the solvers are built on.

Indices in the formulas below are 1-based; storage is a 0-based numpy array of
shape ``(n,) * m`` in row-major order (first index slowest).
"""
from functools import reduce
from itertools import permutations
from math import factorial
from typing import Optional, Sequence, Union

import numpy as np
import structlog

from tze_dynsys.errors import InvalidArgumentError

logger = structlog.get_logger()

ArrayLike = Union[np.ndarray, Sequence[float]]

STOCHASTIC_ATOL = 1e-12

KOLDA_MAYO_SLICES = (
    (
        (-0.1281, 0.0516, -0.0954),
        (0.0516, -0.1958, -0.179),
        (-0.0954, -0.179, -0.2676),
    ),
    (
        (0.0516, -0.1958, -0.179),
        (-0.1958, 0.3251, 0.2513),
        (-0.179, 0.2513, 0.1773),
    ),
    (
        (-0.0954, -0.179, -0.2676),
        (-0.179, 0.2513, 0.1773),
        (-0.2676, 0.1773, 0.0338),
    ),
)


class CubicTensor:
    """Immutable dense order-m tensor with every mode of size n."""

    def __init__(self, entries: ArrayLike):
        data = np.array(entries, dtype=float)
        if data.ndim < 3:
            raise InvalidArgumentError(
                f"cubic tensor needs order >= 3, got order {data.ndim}"
            )
        if len(set(data.shape)) != 1 or data.shape[0] < 1:
            raise InvalidArgumentError(
                f"all modes must share one positive size, got shape {data.shape}"
            )
        if not np.all(np.isfinite(data)):
            raise InvalidArgumentError("tensor entries must be finite")
        data.flags.writeable = False
        self._entries = data

    @classmethod
    def from_flat(cls, values: ArrayLike, order: int, dim: int) -> "CubicTensor":
        """Build a tensor from n^m row-major values."""
        flat = np.asarray(values, dtype=float).ravel()
        if flat.size != dim**order:
            raise InvalidArgumentError(
                f"expected {dim ** order} entries for order {order} dim {dim}, "
                f"got {flat.size}"
            )
        return cls(flat.reshape((dim,) * order))

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def order(self) -> int:
        return self._entries.ndim

    @property
    def dim(self) -> int:
        return self._entries.shape[0]

    @property
    def flat(self) -> np.ndarray:
        return self._entries.ravel()

    def __getitem__(self, key):
        return self._entries[key]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CubicTensor):
            return NotImplemented
        return self._entries.shape == other._entries.shape and bool(
            np.array_equal(self._entries, other._entries)
        )

    def __hash__(self) -> int:
        return hash((self._entries.shape, self._entries.tobytes()))

    def __repr__(self) -> str:
        return f"<{type(self).__name__}(order={self.order}, dim={self.dim})>"


class TransitionTensor(CubicTensor):
    """Nonnegative cubic tensor whose first-mode fibers each sum to one."""

    def __init__(self, entries: ArrayLike):
        super().__init__(entries)
        if np.any(self.entries < 0):
            raise InvalidArgumentError("transition tensor entries must be >= 0")
        sums = self.entries.sum(axis=0)
        worst = float(np.max(np.abs(sums - 1.0)))
        if worst > STOCHASTIC_ATOL:
            raise InvalidArgumentError(
                f"first-mode fibers must sum to 1 (max deviation {worst:.3e})"
            )


def _as_vector(T: CubicTensor, x: ArrayLike) -> np.ndarray:
    vec = np.asarray(x, dtype=float)
    if vec.ndim != 1 or vec.shape[0] != T.dim:
        raise InvalidArgumentError(
            f"vector of length {T.dim} required, got shape {vec.shape}"
        )
    return vec


def apply(T: CubicTensor, x: ArrayLike) -> np.ndarray:
    """Tensor apply ``T x^{m-1}``: contract every mode but the first with x."""
    vec = _as_vector(T, x)
    return reduce(np.dot, [T.entries] + [vec] * (T.order - 1))


def collapse(T: CubicTensor, x: ArrayLike) -> np.ndarray:
    """Tensor collapse ``T[x]^{m-2}``: contract modes 3..m with x."""
    vec = _as_vector(T, x)
    return reduce(np.dot, [T.entries] + [vec] * (T.order - 2))


def rayleigh(T: CubicTensor, x: ArrayLike) -> float:
    """Tensor Rayleigh quotient ``x^T T x^{m-1}``."""
    vec = _as_vector(T, x)
    if not np.any(vec):
        raise InvalidArgumentError("rayleigh quotient of the zero vector")
    return float(vec @ apply(T, vec))


def is_symmetric(T: CubicTensor, atol: float = 1e-12) -> bool:
    """True when T is invariant under every permutation of its modes."""
    return all(
        np.allclose(T.entries, np.transpose(T.entries, axes=perm), atol=atol, rtol=0)
        for perm in permutations(range(T.order))
    )


def make_diagonal(d: ArrayLike, order: int) -> CubicTensor:
    """Diagonal tensor with ``T[i,...,i] = d_i``."""
    diag = np.asarray(d, dtype=float).ravel()
    n = diag.shape[0]
    entries = np.zeros((n,) * order)
    for i, value in enumerate(diag):
        entries[(i,) * order] = value
    return CubicTensor(entries)


def make_kolda_mayo() -> CubicTensor:
    """The 3x3x3 symmetric test tensor with seven Z-eigenvalues."""
    # stored slices are T[:, :, k]
    slices = np.array(KOLDA_MAYO_SLICES)
    return CubicTensor(np.transpose(slices, (1, 2, 0)))


def make_alternating(order: int, dim: int, literal: bool = False) -> CubicTensor:
    """Sum-of-alternating-reciprocals test tensor.

    ``T[i1..im] = sum_r (-1)^{i_r} / i_r``; at order 3 this is the 5x5x5 test
    case with eigenvalues {0, 4.2876, 9.9779}. ``literal=True`` gives the
    constant tensor ``sum_{r=1}^{m} (-1)^r / r`` instead.
    """
    if order < 3 or dim < 1:
        raise InvalidArgumentError(
            f"alternating tensor needs order >= 3 and dim >= 1, got {order}, {dim}"
        )
    if literal:
        value = sum((-1) ** r / r for r in range(1, order + 1))
        return CubicTensor(np.full((dim,) * order, value))

    idx = np.arange(1, dim + 1, dtype=float)
    term = (-1.0) ** idx / idx
    entries = np.zeros((dim,) * order)
    for axis in range(order):
        shape = [1] * order
        shape[axis] = dim
        entries = entries + term.reshape(shape)
    return CubicTensor(entries)


def make_random_symmetric(
    dim: int, order: int = 3, seed: Optional[int] = None
) -> CubicTensor:
    """Gaussian tensor averaged over all mode permutations."""
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((dim,) * order)
    total = sum(np.transpose(raw, axes=perm) for perm in permutations(range(order)))
    return CubicTensor(total / factorial(order))


def make_random_transition(
    dim: int, order: int = 3, seed: Optional[int] = None
) -> TransitionTensor:
    """Strictly positive transition tensor with normalized first-mode fibers."""
    if dim < 1:
        raise InvalidArgumentError(f"dim must be >= 1, got {dim}")
    rng = np.random.default_rng(seed)
    raw = rng.uniform(0.05, 1.0, size=(dim,) * order)
    return TransitionTensor(raw / raw.sum(axis=0, keepdims=True))
