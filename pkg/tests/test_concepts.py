"""Concept representation, sampling, and Chow oracle checks.

Frozen expected values were computed by independent oracles: closed-form
Gaussian integrals and 30-digit adaptive quadrature, cross-checked against
each other before freezing.
"""

from math import comb, sqrt, pi

import numpy as np
import pytest

from chowforge import (
    ConfigError,
    SparsePTF,
    chow_oracle,
    chow_support_bound,
    enumerate_basis,
    evaluate_ptf,
    misclassification_rate,
    random_concept,
    sample_clean,
)

SQRT_2_OVER_PI = 0.7978845608028654


def sign_x1(n, d=1):
    basis = enumerate_basis(n, d)
    mi = tuple(1 if c == 0 else 0 for c in range(n))
    return SparsePTF(n, d, [0], {basis.index_of(mi): 1.0})


class TestSparsePTF:
    def test_rejects_off_support_coefficient(self):
        basis = enumerate_basis(3, 2)
        j = basis.index_of((0, 1, 0))
        with pytest.raises(ConfigError):
            SparsePTF(3, 2, [0], {j: 1.0})

    def test_rejects_all_zero(self):
        with pytest.raises(ConfigError):
            SparsePTF(2, 2, [0], {1: 0.0})

    def test_roundtrip_json(self, tmp_path):
        f = random_concept(6, 2, 2, seed=3)
        path = tmp_path / "concept.json"
        f.save(path)
        g = SparsePTF.load(path)
        assert g.support == f.support
        assert g.coeffs == f.coeffs

    def test_from_multi_indices(self):
        f = SparsePTF.from_multi_indices(4, 2, {(0, 2, 0, 0): 1.5, (0, 1, 0, 0): -0.5})
        assert f.support == (1,)
        assert f.K == 1


class TestEvaluatePTF:
    def test_sign_of_first_coordinate(self):
        f = sign_x1(2)
        assert evaluate_ptf(f, np.array([2.0, -5.0])) == 1
        assert evaluate_ptf(f, np.array([-0.3, 9.0])) == -1

    def test_tie_rule(self):
        f = sign_x1(2)
        assert evaluate_ptf(f, np.array([0.0, 1.0])) == 1

    def test_quadratic(self):
        # sign(x1^2 - 1) via the He2 representation
        f = SparsePTF.from_multi_indices(1, 2, {(2,): 1.0, (0,): -0.0})
        # q = He2(x)= (x^2-1)/sqrt(2); sign at 0.5 is negative
        assert evaluate_ptf(f, np.array([0.5])) == -1
        assert evaluate_ptf(f, np.array([2.0])) == 1

    def test_dimension_mismatch(self):
        with pytest.raises(ConfigError):
            evaluate_ptf(sign_x1(2), np.zeros(3))


class TestChowSupportBound:
    def test_values(self):
        assert chow_support_bound(1, 3) == 4
        assert chow_support_bound(2, 2) == 8
        assert chow_support_bound(3, 1) == 6

    def test_dominates_true_support_count(self):
        # possibly non-zero entries number C(K+d, d)
        for K in range(1, 4):
            for d in range(1, 4):
                reduced = enumerate_basis(K, d)
                assert reduced.size == comb(K + d, d)
                assert reduced.size <= chow_support_bound(K, d)


class TestChowOracle:
    def test_sign_x1_quadrature_exact(self):
        f = sign_x1(5)
        chow = chow_oracle(f, method="quadrature")
        assert chow.provenance == "oracle-quadrature"
        expected = np.zeros(6)
        expected[1] = SQRT_2_OVER_PI
        np.testing.assert_allclose(chow.values, expected, atol=1e-12)

    def test_constant_positive_ptf(self):
        # q = He2 + 3: x^2/sqrt(2) + (3 - 1/sqrt(2)) > 0 everywhere
        f = SparsePTF.from_multi_indices(3, 2, {(2, 0, 0): 1.0, (0, 0, 0): 3.0})
        chow = chow_oracle(f, method="quadrature")
        expected = np.zeros(f.basis.size)
        expected[0] = 1.0
        np.testing.assert_allclose(chow.values, expected, atol=1e-12)

    def test_sign_of_he2_frozen_values(self):
        f = SparsePTF.from_multi_indices(1, 2, {(2,): 1.0})
        chow = chow_oracle(f, method="quadrature")
        basis = f.basis
        assert chow.values[basis.index_of((0,))] == pytest.approx(
            -0.3653789842741718, abs=1e-12
        )
        assert chow.values[basis.index_of((1,))] == pytest.approx(0.0, abs=1e-12)
        assert chow.values[basis.index_of((2,))] == pytest.approx(
            0.6843965606244331, abs=1e-12
        )

    def test_off_support_entries_exactly_zero(self):
        f = sign_x1(4, d=2)
        chow = chow_oracle(f, method="quadrature")
        basis = f.basis
        for j, mi in enumerate(basis.indices):
            if any(e and c != 0 for c, e in enumerate(mi)):
                assert chow.values[j] == 0.0

    def test_montecarlo_agrees_with_quadrature(self):
        f = random_concept(5, 2, 2, seed=11)
        quad = chow_oracle(f, method="quadrature")
        mc = chow_oracle(f, method="montecarlo", budget=10**6, seed=5)
        assert mc.provenance == "oracle-montecarlo"
        assert mc.stderr is not None
        assert np.max(np.abs(quad.values - mc.values)) <= 5e-3

    def test_montecarlo_budget_guard(self):
        with pytest.raises(ConfigError):
            chow_oracle(sign_x1(2), method="montecarlo", budget=100)

    def test_quadrature_support_guard(self):
        f = random_concept(8, 1, 7, seed=0, balance=(0.01, 0.99))
        with pytest.raises(ConfigError):
            chow_oracle(f, method="quadrature")


class TestLemmaSparsity:
    def test_off_support_zero_and_mc_consistent(self):
        # 50 random concepts; exact zeros off support, MC within 4 stderr of 0
        budget = 20_000
        for s in range(50):
            f = random_concept(10, 2, 2, seed=1000 + s)
            quad = chow_oracle(f, method="quadrature")
            mc = chow_oracle(f, method="montecarlo", budget=budget, seed=s)
            off = [
                j
                for j, mi in enumerate(f.basis.indices)
                if any(e and c not in f.support for c, e in enumerate(mi))
            ]
            assert np.all(quad.values[off] == 0.0)
            z = np.abs(mc.values[off]) / np.maximum(mc.stderr[off], 1e-12)
            assert np.max(z) <= 4.0


class TestSampleClean:
    def test_rejects_empty(self):
        with pytest.raises(ConfigError):
            sample_clean(sign_x1(2), 0, seed=1)

    def test_deterministic(self):
        f = sign_x1(3)
        a = sample_clean(f, 100, seed=7)
        b = sample_clean(f, 100, seed=7)
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.y, b.y)

    def test_labels_match_concept(self):
        f = random_concept(6, 2, 2, seed=9)
        s = sample_clean(f, 5000, seed=3)
        np.testing.assert_array_equal(s.y, f.labels(s.X))
        assert not s.corrupted.any()


class TestMisclassification:
    def test_identical(self):
        f = random_concept(5, 2, 2, seed=21)
        p, se = misclassification_rate(f, f, budget=2000, seed=0)
        assert p == 0.0

    def test_negated(self):
        f = random_concept(5, 2, 2, seed=22)
        g = SparsePTF(f.n, f.d, f.support, {j: -v for j, v in f.coeffs.items()})
        p, _ = misclassification_rate(g, f, budget=2000, seed=0)
        assert p == 1.0

    def test_orthogonal_halfspaces(self):
        basis = enumerate_basis(2, 1)
        f1 = SparsePTF(2, 1, [0], {basis.index_of((1, 0)): 1.0})
        f2 = SparsePTF(2, 1, [1], {basis.index_of((0, 1)): 1.0})
        p, se = misclassification_rate(f1, f2, budget=100_000, seed=4)
        assert abs(p - 0.5) <= 3 * se


class TestRandomConcept:
    def test_balance_and_support_size(self):
        for s in range(10):
            f = random_concept(8, 2, 3, seed=s)
            assert f.K == 3
            samp = sample_clean(f, 20_000, seed=100 + s)
            p_plus = float(np.mean(samp.y == 1))
            assert 0.03 <= p_plus <= 0.97

    def test_deterministic(self):
        a = random_concept(7, 2, 2, seed=5)
        b = random_concept(7, 2, 2, seed=5)
        assert a.coeffs == b.coeffs and a.support == b.support
