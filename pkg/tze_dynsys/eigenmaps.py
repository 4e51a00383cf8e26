"""Eigenvector maps: pick one real unit eigenvector of a square matrix."""
import re
from pathlib import Path
from typing import List, NamedTuple, Optional

import numpy as np
import scipy.linalg
import structlog

from tze_dynsys.config import settings
from tze_dynsys.errors import DegeneracyError, EigensolverError, InvalidArgumentError
from tze_dynsys.io import read_vector
from tze_dynsys.models import EigenMapSpec, Selector

logger = structlog.get_logger()

_RANKED_RE = re.compile(r"^(lm|sm|la|sa):(\d+)$")
_BASIS_RE = re.compile(r"^e(\d+)$")


class EigenPairSet(NamedTuple):
    """All eigenpairs of a matrix; ``vectors`` holds them as columns."""

    values: np.ndarray
    vectors: np.ndarray
    complex_flags: np.ndarray


class Selection(NamedTuple):
    vector: np.ndarray
    tied: bool


def sign_canonicalize(v: np.ndarray, threshold: Optional[float] = None) -> np.ndarray:
    """Flip v so its first significant entry is positive."""
    threshold = settings.sign_threshold if threshold is None else threshold
    vec = np.array(v, dtype=float)
    significant = np.flatnonzero(np.abs(vec) > threshold)
    if significant.size and vec[significant[0]] < 0:
        vec = -vec
    return vec


def _canonical_columns(vectors: np.ndarray) -> np.ndarray:
    """Unit-normalize and sign-canonicalize every column at once."""
    cols = vectors / np.linalg.norm(vectors, axis=0)
    significant = np.abs(cols) > settings.sign_threshold
    first = np.argmax(significant, axis=0)
    leading = cols[first, np.arange(cols.shape[1])]
    flip = significant.any(axis=0) & (leading < 0)
    return np.where(flip, -cols, cols)


def _real_unit(v: np.ndarray) -> np.ndarray:
    """Real part of a complex eigenvector after rotating away its phase."""
    if not np.any(v.imag):
        real = v.real
    else:
        phase = 0.5 * np.angle(np.sum(v * v))
        real = (v * np.exp(-1j * phase)).real
    return real / np.linalg.norm(real)


def _looks_symmetric(mat: np.ndarray) -> bool:
    scale = max(1.0, float(np.max(np.abs(mat))))
    return bool(np.allclose(mat, mat.T, rtol=0.0, atol=1e-14 * scale))


def eig_all(M: np.ndarray) -> EigenPairSet:
    """All eigenpairs of M with real, unit-norm, sign-canonical vectors."""
    mat = np.asarray(M, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InvalidArgumentError(f"square matrix required, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise InvalidArgumentError("matrix entries must be finite")

    n = mat.shape[0]
    try:
        # finiteness is checked above
        if _looks_symmetric(mat):
            values, vectors = scipy.linalg.eigh(
                0.5 * (mat + mat.T), check_finite=False
            )
            complex_flags = np.zeros(n, dtype=bool)
        else:
            w, raw = scipy.linalg.eig(mat, check_finite=False)
            values = w.real
            complex_flags = w.imag != 0
            vectors = np.column_stack([_real_unit(raw[:, j]) for j in range(n)])
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError) as e:
        raise EigensolverError(mat.shape, str(e)) from e

    return EigenPairSet(
        np.asarray(values, dtype=float), _canonical_columns(vectors), complex_flags
    )


def _ordering_key(selector: Selector, values: np.ndarray) -> np.ndarray:
    # ascending key order is the selector's preference order
    if selector == Selector.LARGEST_MAGNITUDE:
        return -np.abs(values)
    if selector == Selector.SMALLEST_MAGNITUDE:
        return np.abs(values)
    if selector in (Selector.LARGEST_ALGEBRAIC, Selector.PERRON):
        return -values
    return values


def _to_perron(v: np.ndarray) -> np.ndarray:
    tol = settings.perron_neg_tol
    if np.min(v) < -tol:
        raise DegeneracyError(
            f"Perron vector has mixed signs (min entry {float(np.min(v)):.3e})"
        )
    vec = np.clip(v, 0.0, None)
    total = float(vec.sum())
    if total <= 0.0:
        raise DegeneracyError("Perron vector vanished after clipping")
    return vec / total


def _eigenvalue_groups(values: np.ndarray, candidates: List[int]) -> List[List[int]]:
    # lambda and -lambda tie under the magnitude orderings but span
    # different eigenspaces
    groups: List[List[int]] = []
    for j in candidates:
        for group in groups:
            anchor = float(values[group[0]])
            if abs(values[j] - anchor) <= settings.tie_rtol * max(1.0, abs(anchor)):
                group.append(j)
                break
        else:
            groups.append([j])
    return groups


def closest_in_eigenspace(
    eigs: EigenPairSet, candidates: List[int], current: np.ndarray
) -> Optional[np.ndarray]:
    """Unit vector of a tied eigenspace closest in angle to ``current``.

    That is the normalized orthogonal projection of ``current`` onto the
    eigenspace it overlaps most. Returns None when ``current`` is numerically
    orthogonal to every tied eigenspace.
    """
    ref = np.asarray(current, dtype=float)
    scale = float(np.linalg.norm(ref))
    best, best_norm = None, 0.0
    for group in _eigenvalue_groups(eigs.values, candidates):
        basis = scipy.linalg.orth(eigs.vectors[:, group])
        projection = basis @ (basis.T @ ref)
        norm = float(np.linalg.norm(projection))
        if norm > best_norm:
            best, best_norm = projection, norm
    if best is None or best_norm <= settings.tie_rtol * scale:
        return None
    return sign_canonicalize(best / best_norm)


def select_eigenvector(
    spec: EigenMapSpec,
    eigs: EigenPairSet,
    current: Optional[np.ndarray] = None,
) -> Selection:
    """Pick one eigenvector per ``spec`` and report whether a tie was broken."""
    n = eigs.values.shape[0]
    if n == 0:
        raise InvalidArgumentError("no eigenpairs to select from")

    if spec.selector == Selector.CLOSEST:
        target = spec.target_vector(n)
        if target.shape[0] != n:
            raise InvalidArgumentError(
                f"closest target has length {target.shape[0]}, matrix is {n}x{n}"
            )
        idx = int(np.argmax(np.abs(eigs.vectors.T @ target)))
        return Selection(eigs.vectors[:, idx].copy(), False)

    k = 1 if spec.selector == Selector.PERRON else spec.k
    if k > n:
        raise InvalidArgumentError(f"rank k={k} out of range for {n}x{n} matrix")

    key = _ordering_key(spec.selector, eigs.values)
    order = np.argsort(key, kind="stable")
    idx = int(order[k - 1])
    chosen = key[idx]
    window = settings.tie_rtol * max(1.0, abs(float(chosen)))
    candidates = [int(j) for j in order if abs(key[j] - chosen) <= window]

    tied = len(candidates) > 1
    vector = eigs.vectors[:, idx].copy()
    if tied and current is not None:
        closest = closest_in_eigenspace(eigs, candidates, current)
        if closest is None:
            ref = np.asarray(current, dtype=float)
            overlaps = np.abs(eigs.vectors[:, candidates].T @ ref)
            closest = eigs.vectors[:, candidates[int(np.argmax(overlaps))]].copy()
        vector = closest

    if spec.selector == Selector.PERRON:
        vector = _to_perron(vector)
    return Selection(vector, tied)


def select(
    spec: EigenMapSpec, eigs: EigenPairSet, current: Optional[np.ndarray] = None
) -> np.ndarray:
    """The eigenvector chosen by ``spec``."""
    return select_eigenvector(spec, eigs, current).vector


def parse_map_spec(text: str) -> EigenMapSpec:
    """Parse ``lm:k``, ``sm:k``, ``la:k``, ``sa:k``, ``closest:...`` or ``perron``."""
    raw = text.strip()
    lowered = raw.lower()
    if lowered == "perron":
        return EigenMapSpec(selector=Selector.PERRON)

    match = _RANKED_RE.match(lowered)
    if match:
        k = int(match.group(2))
        if k < 1:
            raise InvalidArgumentError(f"rank must be >= 1 in '{text}'")
        return EigenMapSpec(selector=Selector(match.group(1)), k=k)

    if lowered.startswith("closest:"):
        arg = raw.split(":", 1)[1]
        basis = _BASIS_RE.match(arg)
        if basis:
            index = int(basis.group(1))
            if index < 1:
                raise InvalidArgumentError(f"basis index must be >= 1 in '{text}'")
            return EigenMapSpec(selector=Selector.CLOSEST, basis=index)
        target = read_vector(Path(arg))
        if not np.any(target):
            raise InvalidArgumentError(f"closest target in {arg} is the zero vector")
        return EigenMapSpec(selector=Selector.CLOSEST, target=tuple(target))

    raise InvalidArgumentError(
        f"unknown map '{text}' "
        "(expected lm:k, sm:k, la:k, sa:k, closest:<e_i|path>, perron)"
    )
