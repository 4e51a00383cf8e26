"""Unit tests for data models."""
import numpy as np
import pytest
from pydantic import ValidationError

from tze_dynsys.errors import InvalidArgumentError
from tze_dynsys.models import (
    EigenCluster,
    EigenMapSpec,
    ExperimentReport,
    IntegratorConfig,
    Renorm,
    Selector,
    SolveResult,
    VariantTally,
    WalkState,
)

pytestmark = pytest.mark.unit


class TestEigenMapSpec:
    """Test EigenMapSpec validation."""

    def test_ranked_label(self):
        """Ranked selectors render as <sel>:<k>."""
        spec = EigenMapSpec(selector=Selector.SMALLEST_ALGEBRAIC, k=2)
        assert spec.label == "sa:2"

    def test_zero_rank_rejected(self):
        """k is 1-based."""
        with pytest.raises(ValidationError):
            EigenMapSpec(selector=Selector.LARGEST_MAGNITUDE, k=0)

    def test_closest_target_normalized(self):
        """Targets are stored with unit 2-norm."""
        spec = EigenMapSpec(selector=Selector.CLOSEST, target=(3.0, 0.0, 4.0))
        assert spec.target == pytest.approx((0.6, 0.0, 0.8))

    def test_closest_needs_target(self):
        """closest without a target is invalid."""
        with pytest.raises(ValidationError):
            EigenMapSpec(selector=Selector.CLOSEST)

    def test_closest_rejects_both(self):
        """A target vector and a basis index are exclusive."""
        with pytest.raises(ValidationError):
            EigenMapSpec(selector=Selector.CLOSEST, target=(1.0, 0.0), basis=1)

    def test_zero_target_rejected(self):
        """The zero vector has no direction."""
        with pytest.raises(ValidationError):
            EigenMapSpec(selector=Selector.CLOSEST, target=(0.0, 0.0))

    def test_ranked_rejects_target(self):
        """Only closest takes a target."""
        with pytest.raises(ValidationError):
            EigenMapSpec(selector=Selector.LARGEST_ALGEBRAIC, basis=1)

    def test_basis_target_vector(self):
        """A basis target expands to e_i of the requested length."""
        spec = EigenMapSpec(selector=Selector.CLOSEST, basis=2)
        np.testing.assert_array_equal(spec.target_vector(3), [0.0, 1.0, 0.0])
        with pytest.raises(InvalidArgumentError):
            spec.target_vector(1)

    def test_frozen(self):
        """Specs are immutable and hashable."""
        spec = EigenMapSpec(selector=Selector.PERRON)
        with pytest.raises(ValidationError):
            spec.k = 3
        assert hash(spec) == hash(EigenMapSpec(selector=Selector.PERRON))


class TestIntegratorConfig:
    """Test integrator settings validation."""

    def test_defaults(self):
        """Defaults come from settings."""
        cfg = IntegratorConfig()
        assert cfg.step_h == 0.5
        assert cfg.renorm == Renorm.SPHERE2
        assert cfg.tol == 1e-6
        assert cfg.max_iters == 1000

    @pytest.mark.parametrize("h", [0.0, -0.1, 1.5])
    def test_step_out_of_range(self, h):
        """h must lie in (0, 1]."""
        with pytest.raises(ValidationError):
            IntegratorConfig(step_h=h)

    def test_renorm_from_string(self):
        """Renorm values parse from their names."""
        assert IntegratorConfig(renorm="simplex1").renorm == Renorm.SIMPLEX1


class TestSolveResult:
    """Test SolveResult."""

    def test_lambda_alias(self):
        """lambda is accepted and dumped under its alias."""
        result = SolveResult(
            x=np.ones(2),
            **{"lambda": 1.5},
            residual=0.0,
            iterations=3,
            converged=True,
        )
        assert result.lambda_ == 1.5
        assert result.model_dump(by_alias=True)["lambda"] == 1.5

    def test_rayleigh_trace_absent(self):
        """Without a recorded trace there is no Rayleigh history."""
        result = SolveResult(
            x=np.ones(2), lambda_=0.0, residual=0.0, iterations=1, converged=True
        )
        assert result.rayleigh_trace is None


class TestWalkState:
    """Test WalkState validation."""

    def test_occupation(self):
        """Occupation divides counts by steps + 1."""
        state = WalkState(current=1, history_counts=[1, 3], steps=3)
        np.testing.assert_allclose(state.occupation, [0.25, 0.75])

    def test_counts_must_match_steps(self):
        """Counts sum to steps + 1."""
        with pytest.raises(ValidationError):
            WalkState(current=0, history_counts=[1, 1], steps=3)

    def test_current_in_range(self):
        """The current state indexes the count vector."""
        with pytest.raises(ValidationError):
            WalkState(current=2, history_counts=[1, 0], steps=0)

    def test_negative_counts(self):
        """Counts are nonnegative."""
        with pytest.raises(ValidationError):
            WalkState(current=0, history_counts=[2, -1], steps=0)


class TestExperimentReport:
    """Test report lookups."""

    @pytest.fixture
    def report(self):
        clusters = [
            EigenCluster(
                index=0, representative=0.4306, members=3, spread=0.0, residual=1e-7
            ),
            EigenCluster(
                index=1, representative=0.8730, members=2, spread=0.0, residual=1e-7
            ),
        ]
        tallies = [
            VariantTally(
                variant="lm:1",
                trials=6,
                hits={0: 3, 1: 2},
                failures=1,
                iterations=[4, 8, 6, 10, 2],
            )
        ]
        return ExperimentReport(tensor_id="t", variants=tallies, clusters=clusters)

    def test_hits_near(self, report):
        """Hits are summed over clusters near the value."""
        assert report.hits_near("lm:1", 0.8730) == 2
        assert report.hits_near("lm:1", 0.4307) == 3
        assert report.hits_near("lm:1", 0.2294) == 0

    def test_unknown_variant(self, report):
        """Unknown variants raise KeyError."""
        with pytest.raises(KeyError):
            report.tally("sa:1")

    def test_median_iterations(self, report):
        """Median over converged trials."""
        assert report.tally("lm:1").median_iterations == 6.0

    def test_empty_median(self):
        """No converged trials, no median."""
        assert VariantTally(variant="sa:1", trials=3).median_iterations is None
