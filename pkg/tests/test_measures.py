import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vecint import (Fibre, PairMeasure, ProductMeasure, VectorArray, array_value, boundedness, density,
                    entropy, expected_array_value, marginal, r_norm)
from vecint.measures import ShapeError, all_words, parse_word, word_to_str


class TestVectorArray:
    def test_kalai_entries(self):
        V = VectorArray.kalai(5)
        assert V.n == 5 and V.D == 2 and V.J == 2
        assert V.is_kalai() and V.is_binary
        assert V.binary_vectors[:, 1].tolist() == [1, 2, 3, 4, 5]
        assert V.is_r_bounded()

    def test_value_of_word(self):
        V = VectorArray.kalai(4)
        assert array_value(V, (0, 1, 1, 0)).tolist() == [2, 5]
        assert Fibre(V, (2, 5)).contains((1, 0, 0, 1))
        assert not Fibre(V, (2, 5)).contains((1, 1, 0, 0))

    def test_bad_word(self):
        V = VectorArray.kalai(3)
        with pytest.raises(ShapeError):
            V.check_word((0, 1))
        with pytest.raises(ValueError):
            V.check_word((0, 1, 2))

    def test_bad_shapes(self):
        with pytest.raises(ShapeError):
            VectorArray(np.zeros((3, 2)), [1.0])
        with pytest.raises(ValueError):
            VectorArray(np.zeros((3, 2, 1)), [0.0])
        with pytest.raises(ValueError):
            VectorArray(np.full((3, 2, 1), 0.5), [1.0])

    def test_restrict(self):
        V = VectorArray.kalai(6).restrict([1, 3])
        assert V.binary_vectors[:, 1].tolist() == [2, 4]

    def test_word_strings(self):
        assert parse_word("0110") == (0, 1, 1, 0)
        assert word_to_str((1, 0, 1)) == "101"


class TestNorms:
    def test_r_norm(self):
        assert r_norm([3, -10], [3, 20]) == 1.0
        assert r_norm([0, 0], [1, 1]) == 0.0

    @given(st.lists(st.integers(-50, 50), min_size=2, max_size=2),
           st.lists(st.integers(-50, 50), min_size=2, max_size=2))
    def test_triangle(self, a, b):
        R = [7.0, 11.0]
        assert r_norm(np.add(a, b), R) <= r_norm(a, R) + r_norm(b, R) + 1e-12


class TestProductMeasure:
    def test_rows_must_sum_to_one(self):
        with pytest.raises(ValueError):
            ProductMeasure(np.array([[0.5, 0.6]]))

    def test_uniform_entropy(self):
        assert entropy(ProductMeasure.uniform(7)) == pytest.approx(7.0)
        assert entropy(ProductMeasure.uniform(3, J=4)) == pytest.approx(6.0)

    def test_point_mass(self):
        mu = ProductMeasure.point_mass((0, 1, 1))
        assert entropy(mu) == 0.0
        assert mu.log2_prob((0, 1, 1)) == 0.0
        assert mu.log2_prob((1, 1, 1)) == -np.inf

    def test_expectation_matches_enumeration(self):
        V = VectorArray.kalai(5)
        mu = ProductMeasure.bernoulli([0.1, 0.3, 0.5, 0.7, 0.9])
        W = all_words(5)
        probs = np.exp2(mu.log2_probs(W))
        vals = V.vectors[np.arange(5)[None, :], W].sum(axis=1)
        assert np.allclose(probs @ vals, expected_array_value(V, mu))
        assert probs.sum() == pytest.approx(1.0)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            expected_array_value(VectorArray.kalai(3), ProductMeasure.uniform(4))

    def test_bounded_and_dense(self):
        mu = ProductMeasure.bernoulli([0.5, 0.5, 0.01, 0.99])
        assert not boundedness(mu, 0.1)
        ok, count = density(mu, 0.1)
        assert count == 2 and ok
        assert ProductMeasure.uniform(4).is_bounded(0.5)


class TestPairMeasure:
    def test_independent_marginals(self):
        p = ProductMeasure.bernoulli([0.2, 0.6])
        r = ProductMeasure.bernoulli([0.7, 0.4])
        q = PairMeasure.independent(p, r)
        assert np.allclose(marginal(q, 1).p, p.p)
        assert np.allclose(q.marginal(2).p, r.p)
        assert q.entropy() == pytest.approx(entropy(p) + entropy(r))

    def test_frankl_rodl(self):
        q = PairMeasure.frankl_rodl(9, 6, 3)
        assert np.allclose(q.q[:, 1, 1], 1 / 3)
        assert np.allclose(q.q[:, 0, 0], 0.0)
        assert not q.is_bounded(0.01)

    def test_round_trip_product(self):
        q = PairMeasure.binary([0.1, 0.2], [0.3, 0.5])
        assert np.allclose(PairMeasure.from_product(q.to_product()).q, q.q)

    def test_bad_side(self):
        with pytest.raises(ValueError):
            marginal(PairMeasure.frankl_rodl(3, 1, 0), 3)

    @settings(max_examples=50)
    @given(st.lists(st.floats(0.05, 0.95), min_size=1, max_size=6), st.floats(0, 1))
    def test_binary_coupling_is_valid(self, p, frac):
        p = np.array(p)
        lo, hi = np.maximum(0, 2 * p - 1), p
        x = lo + frac * (hi - lo)
        q = PairMeasure.binary(x, p)
        assert np.allclose(q.marginal(1).p1, p)
        assert np.allclose(q.marginal(2).p1, p)
        # entropy of a coupling never exceeds the sum of its marginals
        assert q.entropy() <= 2 * entropy(ProductMeasure.bernoulli(p)) + 1e-9
