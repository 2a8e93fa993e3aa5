import itertools

import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from sparsebvar.errors import IndexOutOfRange, NotPositiveDefinite, ShapeMismatch, TooFewObservations
from sparsebvar.model.var_core import (
    CovMatrix,
    TimeSeriesPanel,
    VarCoefficients,
    build_lag_design,
    companion_spectral_radius,
    intercept_index,
    vec_index,
    vec_unindex,
)


def panel_of(values):
    values = np.asarray(values, dtype=float).reshape(len(values), -1)
    return TimeSeriesPanel(values, tuple(f"y{i}" for i in range(values.shape[1])),
                           tuple(str(t) for t in range(values.shape[0])))


class TestLagDesign:
    def test_single_variable_by_hand(self):
        design = build_lag_design(panel_of([1.0, 2.0, 3.0]), p=1)
        np.testing.assert_array_equal(design.Y, [[2.0], [3.0]])
        np.testing.assert_array_equal(design.X, [[1.0, 1.0], [2.0, 1.0]])

    def test_minimal_sample(self, rng):
        design = build_lag_design(panel_of(rng.normal(size=(6, 2))), p=5)
        assert design.Y.shape == (1, 2)
        assert design.X.shape == (1, 11)
        assert design.X[0, -1] == 1.0

    def test_rows_reproduce_preceding_observations(self, small_panel):
        p = 3
        design = build_lag_design(small_panel, p)
        data = small_panel.values
        for t in (0, 10, design.T - 1):
            np.testing.assert_array_equal(design.Y[t], data[t + p])
            for lag in range(1, p + 1):
                block = design.X[t, (lag - 1) * small_panel.m: lag * small_panel.m]
                np.testing.assert_array_equal(block, data[t + p - lag])

    def test_too_few_observations(self):
        with pytest.raises(TooFewObservations) as info:
            build_lag_design(panel_of([1.0, 2.0]), p=2)
        assert info.value.operation == "var_core.build_lag_design"

    def test_large_system_dimensions(self):
        m, p = 165, 5
        assert m * p + 1 == 826
        assert m * (m * p + 1) == 136290


class TestIndexing:
    def test_first_element(self):
        assert vec_index(1, 1, 1, m=3, p=5) == 0

    def test_round_trip_exhaustive(self):
        m, p = 3, 2
        seen = set()
        for l, i, j in itertools.product(range(1, p + 1), range(1, m + 1), range(1, m + 1)):
            index = vec_index(l, i, j, m, p)
            assert vec_unindex(index, m, p) == (l, i, j)
            seen.add(index)
        intercepts = {intercept_index(j, m, p) for j in range(1, m + 1)}
        assert seen.isdisjoint(intercepts)
        assert seen | intercepts == set(range(m * (m * p + 1)))

    def test_intercept_sits_in_last_row(self, stable_coeffs):
        a = stable_coeffs.vectorize()
        for j in range(1, 4):
            assert a[intercept_index(j, 3, 2)] == stable_coeffs.intercept[j - 1]

    def test_entry_matches_vectorized_position(self, stable_coeffs):
        a = stable_coeffs.vectorize()
        assert a[vec_index(2, 1, 3, 3, 2)] == stable_coeffs.get(2, 1, 3)
        assert stable_coeffs.get(1, 2, 1) == stable_coeffs.lag_matrix(1)[0, 1]

    @pytest.mark.parametrize("args", [(0, 1, 1), (3, 1, 1), (1, 4, 1), (1, 1, 0)])
    def test_out_of_range(self, args):
        with pytest.raises(IndexOutOfRange):
            vec_index(*args, m=3, p=2)

    def test_unindex_rejects_intercept(self):
        with pytest.raises(IndexOutOfRange):
            vec_unindex(intercept_index(2, 3, 2), 3, 2)

    def test_devectorize_inverts_vectorize(self, rng):
        for m, p in itertools.product(range(1, 5), range(1, 5)):
            coeffs = VarCoefficients(rng.normal(size=(m * p + 1, m)), m, p)
            again = VarCoefficients.devectorize(coeffs.vectorize(), m, p)
            np.testing.assert_array_equal(again.A, coeffs.A)


class TestSpectralRadius:
    def test_zero_coefficients(self):
        assert companion_spectral_radius(VarCoefficients(np.zeros((7, 3)), 3, 2)) == 0.0

    def test_scalar_ar1(self):
        assert companion_spectral_radius(VarCoefficients(np.array([[0.5], [0.0]]), 1, 1)) == pytest.approx(0.5)

    def test_diagonal_first_lag(self):
        coeffs = VarCoefficients.from_lags([np.diag([0.3, -0.8, 0.1])])
        assert companion_spectral_radius(coeffs) == pytest.approx(0.8)

    def test_matches_lag_polynomial_roots(self, rng):
        A1, A2 = rng.normal(scale=0.4, size=(2, 2, 2))
        coeffs = VarCoefficients.from_lags([A1, A2])

        # entries of I - A1 z - A2 z^2 as polynomials in z
        entry = [[np.array([float(r == c), -A1[r, c], -A2[r, c]]) for c in range(2)] for r in range(2)]
        det = P.polysub(P.polymul(entry[0][0], entry[1][1]), P.polymul(entry[0][1], entry[1][0]))
        roots = P.polyroots(det)
        assert companion_spectral_radius(coeffs) == pytest.approx(float(np.max(1.0 / np.abs(roots))), rel=1e-8)


class TestCovMatrix:
    def test_free_parameters(self):
        assert CovMatrix(np.eye(3)).free_parameters == 6

    def test_rejects_asymmetric(self):
        with pytest.raises(NotPositiveDefinite):
            CovMatrix(np.array([[1.0, 0.2], [0.3, 1.0]]))

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            CovMatrix(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_precision_round_trip(self):
        sigma = np.array([[2.0, 0.3], [0.3, 1.0]])
        cov = CovMatrix.from_precision(CovMatrix(sigma).precision())
        np.testing.assert_allclose(cov.sigma, sigma, atol=1e-12)
        np.testing.assert_allclose(cov.chol @ cov.chol.T, sigma, atol=1e-12)


class TestPanel:
    def test_rejects_missing_values(self):
        with pytest.raises(ShapeMismatch):
            panel_of([1.0, np.nan, 2.0])

    def test_head_and_index(self, small_panel):
        head = small_panel.head(10)
        assert head.T == 10
        assert small_panel.index_of(small_panel.dates[7]) == 7
        with pytest.raises(IndexOutOfRange):
            small_panel.index_of("2999Q1")

    def test_values_are_read_only(self, small_panel):
        with pytest.raises(ValueError):
            small_panel.values[0, 0] = 1.0
