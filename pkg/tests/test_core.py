import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from uqfd.core import (
    EmptySetError,
    GaussianStep,
    ManeuverSet,
    NegativeProbabilityError,
    NonFiniteError,
    ShapeMismatchError,
    SumNotOneError,
    Trajectory,
    average_trajectory,
    validate_prob_vector,
)


class TestManeuverSet:
    def test_default_labels(self):
        ms = ManeuverSet()
        assert ms.labels == ("straight", "left", "right", "stop")
        assert ms.z == 4

    def test_rejects_duplicates_and_singletons(self):
        with pytest.raises(ValueError):
            ManeuverSet(("a", "a"))
        with pytest.raises(ValueError):
            ManeuverSet(("only",))


class TestValidateProbVector:
    def test_uniform_ok(self):
        pv = validate_prob_vector([0.25, 0.25, 0.25, 0.25])
        assert np.allclose(pv.p, 0.25)

    def test_sum_not_one(self):
        with pytest.raises(SumNotOneError):
            validate_prob_vector([0.5, 0.5, 0.1])

    @pytest.mark.parametrize("z", [2, 3, 4, 7])
    def test_one_hot_ok(self, z):
        p = np.zeros(z)
        p[0] = 1.0
        validate_prob_vector(p)

    def test_negative(self):
        with pytest.raises(NegativeProbabilityError):
            validate_prob_vector([1.1, -0.1])

    def test_non_finite(self):
        with pytest.raises(NonFiniteError):
            validate_prob_vector([np.nan, 1.0])

    def test_not_renormalized(self):
        # values are preserved exactly, not rescaled
        pv = validate_prob_vector([0.3, 0.7])
        assert pv.p[0] == 0.3 and pv.p[1] == 0.7

    def test_immutability(self):
        pv = validate_prob_vector([0.5, 0.5])
        with pytest.raises(ValueError):
            pv.p[0] = 0.9


class TestTrajectory:
    def test_shape_checks(self):
        with pytest.raises(ShapeMismatchError):
            Trajectory(np.zeros((3, 3)))
        with pytest.raises(ShapeMismatchError):
            Trajectory(np.zeros((0, 2)))
        with pytest.raises(NonFiniteError):
            Trajectory([[np.inf, 0.0]])


class TestAverageTrajectory:
    def test_identity_for_duplicates(self):
        t = Trajectory([[0.0, 1.0], [2.0, 3.0]])
        avg = average_trajectory([t, t])
        assert np.array_equal(avg.points, t.points)

    def test_midpoint(self):
        avg = average_trajectory([Trajectory([[0.0, 0.0]]), Trajectory([[2.0, 0.0]])])
        assert np.array_equal(avg.points, [[1.0, 0.0]])

    def test_against_per_coordinate_sum(self):
        rng = np.random.default_rng(3)
        trajs = [Trajectory(rng.normal(size=(6, 2))) for _ in range(5)]
        avg = average_trajectory(trajs)
        # oracle: explicit per-coordinate summation
        for i in range(6):
            for j in range(2):
                expected = sum(t.points[i, j] for t in trajs) / 5.0
                assert avg.points[i, j] == pytest.approx(expected, abs=1e-12)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(4)
        trajs = [Trajectory(rng.normal(size=(4, 2))) for _ in range(4)]
        a = average_trajectory(trajs)
        b = average_trajectory(trajs[::-1])
        assert np.allclose(a.points, b.points, atol=1e-15)

    def test_errors(self):
        with pytest.raises(EmptySetError):
            average_trajectory([])
        with pytest.raises(ShapeMismatchError):
            average_trajectory([Trajectory([[0, 0]]), Trajectory([[0, 0], [1, 1]])])

    @given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=10))
    def test_single_input_is_identity(self, xs):
        t = Trajectory(np.column_stack([xs, xs]))
        assert np.array_equal(average_trajectory([t]).points, t.points)


class TestGaussianStep:
    def test_asymmetric_rejected(self):
        with pytest.raises(ShapeMismatchError):
            GaussianStep(mean=[0.0, 0.0], cov=[[1.0, 0.5], [0.2, 1.0]])

    def test_symmetric_ok(self):
        step = GaussianStep(mean=[1.0, 2.0], cov=[[2.0, 0.3], [0.3, 1.0]])
        assert step.cov[0, 1] == 0.3
