import math

import numpy as np
import pytest
import scipy.special
from hypothesis import given
from hypothesis import strategies as st

from uqfd.uq_class import (
    ClassScores,
    EvidenceVector,
    ProbMatrix,
    data_entropy,
    digamma,
    edl_alpha,
    edl_scores,
    edl_u,
    ensemble_scores,
    entropy,
    mean_probs,
    mutual_information,
    nmap,
    total_entropy,
)


def entropy_oracle(p):
    """Independent plain-Python summation of -sum p ln p."""
    return -sum(x * math.log(x) for x in p if x > 0)


def random_matrix(rng, k=None, z=None):
    k = k or int(rng.integers(1, 9))
    z = z or int(rng.integers(2, 7))
    rows = rng.dirichlet(np.ones(z), size=k)
    rows /= rows.sum(axis=1, keepdims=True)
    return ProbMatrix(rows)


class TestEntropy:
    def test_deterministic(self):
        assert entropy([1.0, 0.0, 0.0, 0.0]) == 0.0

    def test_uniform(self):
        assert entropy([0.25] * 4) == pytest.approx(math.log(4), abs=1e-12)

    def test_oracle(self):
        p = [0.7, 0.2, 0.1]
        assert entropy(p) == pytest.approx(entropy_oracle(p), abs=1e-12)
        assert entropy(p) == pytest.approx(0.801819, abs=1e-6)


class TestMeanProbs:
    def test_symmetry(self):
        m = ProbMatrix([[1.0, 0.0], [0.0, 1.0]])
        assert np.allclose(mean_probs(m).p, [0.5, 0.5])

    def test_single_row_identity(self):
        m = ProbMatrix([[0.3, 0.7]])
        assert np.array_equal(mean_probs(m).p, [0.3, 0.7])

    def test_columnwise_oracle(self):
        rng = np.random.default_rng(11)
        m = random_matrix(rng, k=5, z=4)
        mean = mean_probs(m).p
        for j in range(4):
            assert mean[j] == pytest.approx(sum(m.rows[:, j]) / 5.0, abs=1e-12)


class TestEnsembleEntropies:
    def test_total_entropy_disagreement(self):
        m = ProbMatrix([[1.0, 0.0], [0.0, 1.0]])
        assert total_entropy(m) == pytest.approx(math.log(2), abs=1e-12)
        assert data_entropy(m) == 0.0
        assert mutual_information(m) == pytest.approx(math.log(2), abs=1e-12)

    def test_identical_rows(self):
        q = [0.6, 0.3, 0.1]
        m = ProbMatrix([q, q, q])
        assert total_entropy(m) == pytest.approx(entropy_oracle(q), abs=1e-12)
        assert abs(mutual_information(m)) <= 1e-12

    def test_uniform_rows_data_entropy(self):
        m = ProbMatrix([[0.25] * 4] * 3)
        assert data_entropy(m) == pytest.approx(math.log(4), abs=1e-12)

    def test_random_matrix_oracles(self):
        rng = np.random.default_rng(12)
        m = random_matrix(rng, k=5, z=4)
        te_oracle = entropy_oracle(m.rows.mean(axis=0))
        de_oracle = sum(entropy_oracle(row) for row in m.rows) / m.k
        assert total_entropy(m) == pytest.approx(te_oracle, abs=1e-12)
        assert data_entropy(m) == pytest.approx(de_oracle, abs=1e-12)
        assert mutual_information(m) == pytest.approx(te_oracle - de_oracle, abs=1e-12)

    def test_identity_and_jensen_bounds(self):
        rng = np.random.default_rng(13)
        for _ in range(300):
            m = random_matrix(rng)
            s = ensemble_scores(m)
            assert s.te == pytest.approx(s.de + s.mi, abs=1e-12)
            assert -1e-12 <= s.mi
            assert 0.0 <= s.de <= s.te + 1e-12 <= math.log(m.z) + 2e-12

    def test_member_permutation_invariance(self):
        rng = np.random.default_rng(14)
        m = random_matrix(rng, k=6, z=4)
        perm = ProbMatrix(m.rows[::-1])
        a, b = ensemble_scores(m), ensemble_scores(perm)
        assert (a.te, a.de, a.mi, a.nmap) == pytest.approx((b.te, b.de, b.mi, b.nmap), abs=1e-12)

    def test_label_permutation_invariance(self):
        rng = np.random.default_rng(15)
        m = random_matrix(rng, k=4, z=5)
        perm = ProbMatrix(m.rows[:, [3, 0, 4, 1, 2]])
        a, b = ensemble_scores(m), ensemble_scores(perm)
        assert (a.te, a.de, a.mi) == pytest.approx((b.te, b.de, b.mi), abs=1e-12)


class TestNmap:
    def test_single_row(self):
        assert nmap(ProbMatrix([[0.7, 0.2, 0.1]])) == pytest.approx(-0.7)

    def test_mean_uniform(self):
        assert nmap(ProbMatrix([[1.0, 0.0], [0.0, 1.0]])) == pytest.approx(-0.5)

    def test_uniform_rows(self):
        assert nmap(ProbMatrix([[0.25] * 4] * 2)) == pytest.approx(-0.25)

    def test_range(self):
        rng = np.random.default_rng(16)
        for _ in range(50):
            m = random_matrix(rng)
            assert -1.0 <= nmap(m) <= -1.0 / m.z + 1e-12


class TestDigamma:
    def test_against_scipy(self):
        xs = np.concatenate([np.linspace(1.0, 20.0, 97), [50.0, 123.4, 1e4, 1e6]])
        for x in xs:
            assert digamma(float(x)) == pytest.approx(scipy.special.digamma(x), abs=1e-11)

    def test_recurrence(self):
        # psi(x + 1) = psi(x) + 1/x
        for x in (1.0, 2.5, 7.3):
            assert digamma(x + 1.0) == pytest.approx(digamma(x) + 1.0 / x, abs=1e-12)

    def test_domain(self):
        with pytest.raises(Exception):
            digamma(0.0)


class TestEdl:
    def test_alpha_zero_evidence(self):
        assert np.array_equal(edl_alpha(EvidenceVector(np.zeros(4))), np.ones(4))

    def test_alpha_add_one(self):
        assert np.array_equal(edl_alpha([3.0, 1.0, 0.0, 0.0]), [4.0, 2.0, 1.0, 1.0])

    def test_alpha_random(self):
        rng = np.random.default_rng(17)
        e = rng.uniform(0, 10, size=5)
        assert np.allclose(edl_alpha(e), e + 1.0)

    def test_negative_evidence_rejected(self):
        with pytest.raises(ValueError):
            EvidenceVector(np.array([-0.1, 1.0]))

    def test_u_maximal_ignorance(self):
        assert edl_u([1.0, 1.0, 1.0, 1.0]) == 1.0

    def test_u_arithmetic(self):
        assert edl_u([4.0, 2.0, 1.0, 1.0]) == pytest.approx(0.5)

    def test_u_limit(self):
        assert edl_u([1e6, 1e6]) == pytest.approx(1e-6, rel=1e-9)

    def test_u_strictly_decreasing_in_total_evidence(self):
        us = [edl_u(np.array([1.0 + e, 1.0, 1.0])) for e in (0.0, 0.5, 2.0, 10.0)]
        assert all(a > b for a, b in zip(us, us[1:]))

    def test_scores_alpha_11(self):
        s = edl_scores([1.0, 1.0])
        # psi(3) - psi(2) = 1/2 by the recurrence
        assert s.te == pytest.approx(math.log(2), abs=1e-12)
        assert s.de == pytest.approx(0.5, abs=1e-9)
        assert s.mi == pytest.approx(math.log(2) - 0.5, abs=1e-9)
        assert s.u == 1.0

    def test_scores_concentration_limit(self):
        p = np.array([0.3, 0.7])
        s = edl_scores(1e6 * p)
        assert s.te == pytest.approx(entropy_oracle(p), abs=1e-6)
        assert s.de == pytest.approx(entropy_oracle(p), abs=1e-3)
        assert abs(s.mi) < 1e-3
        assert s.u == pytest.approx(2e-6, rel=1e-6)

    def test_scores_digamma_sum_oracle(self):
        alpha = np.array([2.0, 1.0, 1.0, 1.0])
        s = edl_scores(alpha)
        total = alpha.sum()
        p_bar = alpha / total
        assert np.allclose(p_bar, [0.4, 0.2, 0.2, 0.2])
        de_oracle = sum(
            pz * (scipy.special.digamma(total + 1) - scipy.special.digamma(az + 1))
            for pz, az in zip(p_bar, alpha)
        )
        assert s.te == pytest.approx(entropy_oracle(p_bar), abs=1e-12)
        assert s.de == pytest.approx(de_oracle, abs=1e-10)
        assert s.nmap == pytest.approx(-0.4, abs=1e-12)

    @given(st.lists(st.floats(0.0, 50.0), min_size=2, max_size=6))
    def test_identity_holds_for_edl(self, evidence):
        s = edl_scores(np.array(evidence) + 1.0)
        assert s.te == pytest.approx(s.de + s.mi, abs=1e-12)
        assert s.de >= -1e-12
