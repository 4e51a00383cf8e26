"""Declarative configuration and result models."""
from enum import Enum
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from tze_dynsys.config import settings
from tze_dynsys.errors import InvalidArgumentError


class Selector(str, Enum):
    """Which eigenvector of the collapsed matrix the map picks."""

    LARGEST_MAGNITUDE = "lm"
    SMALLEST_MAGNITUDE = "sm"
    LARGEST_ALGEBRAIC = "la"
    SMALLEST_ALGEBRAIC = "sa"
    CLOSEST = "closest"
    PERRON = "perron"


RANKED_SELECTORS = (
    Selector.LARGEST_MAGNITUDE,
    Selector.SMALLEST_MAGNITUDE,
    Selector.LARGEST_ALGEBRAIC,
    Selector.SMALLEST_ALGEBRAIC,
)


class Renorm(str, Enum):
    """Per-step renormalization applied after each Euler step."""

    NONE = "none"
    SPHERE2 = "sphere2"
    SIMPLEX1 = "simplex1"


class EigenMapSpec(BaseModel):
    """Declarative description of the eigenvector map.

    ``target`` holds the unit vector for ``closest``; ``basis`` is the 1-based
    index of a standard basis target whose length is fixed when applied.
    """

    selector: Selector
    k: int = Field(1, ge=1)
    target: Optional[Tuple[float, ...]] = None
    basis: Optional[int] = Field(None, ge=1)

    model_config = {"frozen": True}

    @field_validator("target")
    @classmethod
    def normalize_target(cls, v):
        if v is None:
            return v
        vec = np.asarray(v, dtype=float)
        norm = float(np.linalg.norm(vec))
        if vec.ndim != 1 or norm == 0.0 or not np.isfinite(norm):
            raise ValueError("closest target must be a nonzero finite vector")
        return tuple(float(t) for t in vec / norm)

    @model_validator(mode="after")
    def check_target(self):
        if self.selector == Selector.CLOSEST:
            if (self.target is None) == (self.basis is None):
                raise ValueError("closest needs exactly one of target or basis")
        elif self.target is not None or self.basis is not None:
            raise ValueError(f"{self.selector.value} does not take a target")
        return self

    @property
    def label(self) -> str:
        if self.selector in RANKED_SELECTORS:
            return f"{self.selector.value}:{self.k}"
        if self.selector == Selector.CLOSEST:
            if self.basis is not None:
                return f"closest:e{self.basis}"
            return "closest:" + ",".join(f"{t:.6g}" for t in self.target)
        return self.selector.value

    def target_vector(self, dim: int) -> np.ndarray:
        if self.basis is not None:
            vec = np.zeros(dim)
            if self.basis > dim:
                raise InvalidArgumentError(
                    f"basis e{self.basis} exceeds dimension {dim}"
                )
            vec[self.basis - 1] = 1.0
            return vec
        return np.asarray(self.target, dtype=float)


class IntegratorConfig(BaseModel):
    """Forward Euler settings."""

    step_h: float = Field(default_factory=lambda: settings.step_h, gt=0, le=1)
    renorm: Renorm = Field(default_factory=lambda: Renorm(settings.renorm))
    tol: float = Field(default_factory=lambda: settings.tol, gt=0)
    max_iters: int = Field(default_factory=lambda: settings.max_iters, ge=1)
    record_trace: bool = False


class SSHopmConfig(BaseModel):
    """Shifted symmetric higher-order power method settings."""

    gamma: float = Field(default_factory=lambda: settings.sshopm_gamma, ge=0)
    tol: float = Field(default_factory=lambda: settings.tol, gt=0)
    max_iters: int = Field(default_factory=lambda: settings.max_iters, ge=1)
    record_trace: bool = False


class TracePoint(NamedTuple):
    """Diagnostics for one iterate."""

    iter: int
    rayleigh: float
    update_norm: float
    residual: float


class SolveResult(BaseModel):
    """Eigenpair estimate returned by every solver."""

    x: np.ndarray
    lambda_: float = Field(..., alias="lambda")
    residual: float
    iterations: int
    converged: bool
    trace: Optional[List[TracePoint]] = None
    tie_events: int = 0

    model_config = {"arbitrary_types_allowed": True, "populate_by_name": True}

    @property
    def rayleigh_trace(self) -> Optional[List[float]]:
        if self.trace is None:
            return None
        return [point.rayleigh for point in self.trace]


class WalkState(BaseModel):
    """Spacey random walk state; counts include the initial state."""

    current: int = Field(..., ge=0)
    history_counts: List[int]
    steps: int = Field(0, ge=0)
    seed: int = 0

    @model_validator(mode="after")
    def check_counts(self):
        if self.current >= len(self.history_counts):
            raise ValueError("current state outside the state space")
        if any(c < 0 for c in self.history_counts):
            raise ValueError("visit counts must be nonnegative")
        if sum(self.history_counts) != self.steps + 1:
            raise ValueError("visit counts must sum to steps + 1")
        return self

    @property
    def occupation(self) -> np.ndarray:
        counts = np.asarray(self.history_counts, dtype=float)
        return counts / (self.steps + 1)


class EigenCluster(BaseModel):
    """Converged eigenvalues grouped within the clustering tolerance."""

    index: int
    representative: float
    members: int
    spread: float
    residual: float


class VariantTally(BaseModel):
    """Per-method trial outcome counts."""

    variant: str
    trials: int
    hits: Dict[int, int] = Field(default_factory=dict)
    failures: int = 0
    iterations: List[int] = Field(default_factory=list)
    seconds: float = 0.0

    @property
    def median_iterations(self) -> Optional[float]:
        if not self.iterations:
            return None
        return float(np.median(self.iterations))


class ExperimentReport(BaseModel):
    """Eigenvalue hit table for one tensor across several methods."""

    tensor_id: str
    variants: List[VariantTally]
    clusters: List[EigenCluster]

    def tally(self, variant: str) -> VariantTally:
        for tally in self.variants:
            if tally.variant == variant:
                return tally
        raise KeyError(variant)

    def hits_near(self, variant: str, value: float, atol: float = 5e-4) -> int:
        """Hits of ``variant`` on clusters within ``atol`` of ``value``."""
        tally = self.tally(variant)
        return sum(
            tally.hits.get(cluster.index, 0)
            for cluster in self.clusters
            if abs(cluster.representative - value) <= atol
        )


class BenchRow(BaseModel):
    """One timing measurement of the scalability benchmark."""

    order: int
    dim: int
    method: str
    maps: int
    trials: int
    converged: int
    total_iterations: int
    seconds: float
