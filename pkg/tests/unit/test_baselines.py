"""Unit tests for power-method baselines and their Euler equivalences."""
import numpy as np
import pytest
from pydantic import ValidationError

from tests.conftest import KOLDA_MAYO_UNSTABLE
from tze_dynsys.baselines import (
    perron_iteration,
    qve_minimal_solution,
    qve_perron_tensor,
    spacey_perron_tensor,
    sshopm,
    sshopm_euler_equivalence,
    sshopm_stochastic,
    stochastic_shift_norms,
)
from tze_dynsys.eigenmaps import parse_map_spec
from tze_dynsys.errors import (
    DegenerateIterateError,
    InvalidArgumentError,
    InvalidInputError,
)
from tze_dynsys.integrator import iterate_euler
from tze_dynsys.models import IntegratorConfig, Renorm, SSHopmConfig
from tze_dynsys.tensor import (
    CubicTensor,
    apply,
    collapse,
    make_random_symmetric,
    make_random_transition,
)

pytestmark = pytest.mark.unit


def qve_instance(n, seed):
    """Positive B scaled so that B e^2 = 0.9 e, with a = e - B e^2."""
    rng = np.random.default_rng(seed)
    raw = rng.uniform(0.1, 1.0, size=(n, n, n))
    raw = 0.9 * raw / raw.sum(axis=(1, 2), keepdims=True)
    B = CubicTensor(raw)
    a = np.ones(n) - apply(B, np.ones(n))
    return a, B


class TestSSHopm:
    """Test the shifted symmetric higher-order power method."""

    def test_basis_vector_is_fixed_point(self, diag_521):
        """From e_i the iteration stops at once with lambda = d_i."""
        result = sshopm(diag_521, SSHopmConfig(gamma=1.0), x0=np.array([0.0, 1.0, 0.0]))
        assert result.converged
        assert result.iterations == 1
        assert result.lambda_ == pytest.approx(2.0)

    def test_unit_norm_result(self, kolda_mayo):
        """The reported vector has unit 2-norm."""
        result = sshopm(kolda_mayo, SSHopmConfig(gamma=1.0), seed=4)
        assert np.linalg.norm(result.x) == pytest.approx(1.0, abs=1e-12)

    def test_trace_rows(self, kolda_mayo):
        """The trace has one row per iterate, starting with the initial vector."""
        result = sshopm(
            kolda_mayo, SSHopmConfig(gamma=1.0, record_trace=True), seed=4
        )
        assert len(result.trace) == result.iterations + 1
        assert np.isnan(result.trace[0].update_norm)

    def test_shifted_never_finds_unstable(self, kolda_mayo):
        """Converged SS-HOPM runs avoid the unstable eigenvalues."""
        for seed in range(20):
            result = sshopm(kolda_mayo, SSHopmConfig(gamma=1.0), seed=seed)
            if result.converged:
                lam = abs(result.lambda_)
                assert all(abs(lam - u) > 5e-4 for u in KOLDA_MAYO_UNSTABLE)

    def test_zero_update(self):
        """A vanishing update is a degenerate iterate."""
        tensor = CubicTensor(np.zeros((2, 2, 2)))
        with pytest.raises(DegenerateIterateError):
            sshopm(tensor, SSHopmConfig(gamma=0.0), x0=np.array([1.0, 0.0]))

    def test_negative_shift_rejected(self):
        """gamma must be nonnegative."""
        with pytest.raises(ValidationError):
            SSHopmConfig(gamma=-0.5)

    def test_zero_start_rejected(self, kolda_mayo):
        """x0 must be nonzero."""
        with pytest.raises(InvalidArgumentError):
            sshopm(kolda_mayo, x0=np.zeros(3))


class TestEulerEquivalence:
    """Test SS-HOPM as projected forward Euler with h = 1/(1+gamma)."""

    @pytest.mark.parametrize("dim", [3, 5, 8])
    @pytest.mark.parametrize("gamma", [0.0, 0.5, 1.0, 2.0])
    def test_sphere_variant(self, dim, gamma):
        """Iterates agree to 1e-12 on random symmetric tensors."""
        for seed in range(50 // 3 + 1):
            tensor = make_random_symmetric(dim, 3, seed=seed)
            x0 = np.random.default_rng(seed).standard_normal(dim)
            assert sshopm_euler_equivalence(tensor, gamma, x0, 50) <= 1e-12

    @pytest.mark.parametrize("gamma", [0.0, 1.0])
    def test_order_four(self, gamma):
        """The equivalence holds for m = 4."""
        for seed in range(10):
            tensor = make_random_symmetric(4, 4, seed=seed)
            x0 = np.random.default_rng(seed).standard_normal(4)
            assert sshopm_euler_equivalence(tensor, gamma, x0, 50) <= 1e-12

    @pytest.mark.parametrize("gamma", [0.0, 0.5, 1.0, 2.0])
    def test_stochastic_variant(self, gamma):
        """1-norm iterates on transition tensors agree to 1e-12."""
        P = make_random_transition(4, seed=3)
        x0 = np.full(4, 0.25)
        assert sshopm_euler_equivalence(P, gamma, x0, 50, norm="l1") <= 1e-12

    def test_uncoupled_short_run(self, kolda_mayo):
        """Independent trajectories also agree over a short horizon."""
        x0 = np.array([1.0, 2.0, 3.0])
        deviation = sshopm_euler_equivalence(kolda_mayo, 1.0, x0, 5, coupled=False)
        assert deviation <= 1e-12

    def test_invalid_arguments(self, kolda_mayo):
        """steps, gamma and norm are validated."""
        x0 = np.ones(3)
        with pytest.raises(InvalidArgumentError):
            sshopm_euler_equivalence(kolda_mayo, 1.0, x0, 0)
        with pytest.raises(InvalidArgumentError):
            sshopm_euler_equivalence(kolda_mayo, -1.0, x0, 5)
        with pytest.raises(InvalidArgumentError):
            sshopm_euler_equivalence(kolda_mayo, 1.0, x0, 5, norm="linf")


class TestStochasticShift:
    """Test the 1-norm shifted power method on transition tensors."""

    @pytest.mark.parametrize("gamma", [0.0, 0.5, 1.0, 3.0])
    def test_shift_norm_is_one_plus_gamma(self, gamma):
        """||P x^{m-1} + gamma x||_1 = 1 + gamma along the iteration."""
        P = make_random_transition(5, seed=11)
        rows = sshopm_stochastic(P, gamma, np.arange(1.0, 6.0), 30)
        np.testing.assert_allclose(
            stochastic_shift_norms(P, gamma, rows), 1.0 + gamma, atol=1e-12
        )
        np.testing.assert_allclose(rows.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(rows >= 0)

    def test_order_four(self):
        """Stochasticity is preserved for m = 4 as well."""
        P = make_random_transition(3, order=4, seed=2)
        rows = sshopm_stochastic(P, 1.0, np.ones(3), 10)
        np.testing.assert_allclose(rows.sum(axis=1), 1.0, atol=1e-12)

    def test_negative_start(self, transition_tensor):
        """Starts must be nonnegative."""
        with pytest.raises(InvalidArgumentError):
            sshopm_stochastic(transition_tensor, 1.0, np.array([1.0, -1, 0, 0]), 3)


class TestPerronIteration:
    """Test the quadratic vector equation constructions."""

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_collapse_identity(self, n):
        """collapse(T, x) = F + B[e] - B[x] for stochastic x."""
        a, B = qve_instance(n, seed=n)
        T = qve_perron_tensor(B, a)
        x = np.random.default_rng(n).dirichlet(np.ones(n))
        F = B.entries.sum(axis=1)
        Be = B.entries.sum(axis=2)
        np.testing.assert_allclose(
            collapse(T, x), F + Be - collapse(B, x), atol=1e-12
        )

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_unit_step_euler(self, n):
        """Perron-map Euler with h = 1 reproduces the Perron iterates."""
        a, B = qve_instance(n, seed=10 + n)
        T = qve_perron_tensor(B, a)
        x0 = np.random.default_rng(n).dirichlet(np.ones(n))
        cfg = IntegratorConfig(step_h=1.0, renorm=Renorm.SIMPLEX1)
        euler = np.vstack(list(iterate_euler(T, parse_map_spec("perron"), cfg, x0, 20)))
        np.testing.assert_allclose(euler, perron_iteration(B, x0, 20), atol=1e-12)

    @pytest.mark.parametrize("b", [0.6, 0.8, 0.95])
    def test_scalar_supercritical_root(self, b):
        """n = 1 with b > 1/2: the minimal root of b x^2 - x + (1 - b) is (1-b)/b."""
        B = CubicTensor(np.full((1, 1, 1), b))
        x = qve_minimal_solution(np.array([1.0 - b]), B)
        assert x[0] == pytest.approx((1.0 - b) / b, abs=1e-10)

    def test_scalar_subcritical_root(self):
        """n = 1 with b <= 1/2: the minimal root is 1."""
        B = CubicTensor(np.full((1, 1, 1), 0.3))
        x = qve_minimal_solution(np.array([0.7]), B)
        np.testing.assert_allclose(x, [1.0])

    def test_minimal_solution_solves_equation(self):
        """The returned x satisfies x = a + B x^2 and lies in [0, 1]."""
        a, B = qve_instance(3, seed=21)
        x = qve_minimal_solution(a, B)
        np.testing.assert_allclose(x, a + apply(B, x), atol=1e-8)
        assert np.all(x >= -1e-12)
        assert np.all(x <= 1.0 + 1e-12)

    def test_premise_violated(self):
        """e must solve x = a + B x^2."""
        a, B = qve_instance(3, seed=1)
        with pytest.raises(InvalidInputError):
            qve_perron_tensor(B, a + 0.1)

    def test_negative_b(self):
        """B must be nonnegative."""
        with pytest.raises(InvalidInputError):
            qve_perron_tensor(CubicTensor(-np.ones((2, 2, 2))), np.ones(2))

    def test_order_four_rejected(self):
        """The construction is defined for 3-mode tensors."""
        with pytest.raises(InvalidArgumentError):
            qve_perron_tensor(CubicTensor(np.zeros((2, 2, 2, 2))), np.ones(2))


class TestSpaceyPerronTensor:
    """Test the weighted transition tensor built from a solution of m = P m^2."""

    def test_zero_solution(self, transition_tensor):
        """m = 0 leaves P unchanged."""
        T = spacey_perron_tensor(transition_tensor, np.zeros(4))
        assert T == transition_tensor

    def test_single_state(self):
        """With one state m = 1 and every entry is weighted by 3."""
        P = CubicTensor(np.ones((1, 1, 1)))
        T = spacey_perron_tensor(P, np.ones(1))
        assert T[0, 0, 0] == pytest.approx(3.0)

    def test_premise_violated(self, transition_tensor):
        """m must satisfy m = P m^2."""
        with pytest.raises(InvalidInputError):
            spacey_perron_tensor(transition_tensor, np.full(4, 0.5))
