import numpy as np
import pytest

from sparsebvar.errors import ShapeMismatch
from sparsebvar.model.minnesota import MinnesotaHyper
from sparsebvar.model.posterior import fit_conjugate, sample_posterior
from sparsebvar.model.var_core import VarCoefficients, build_lag_design
from sparsebvar.sparsify.savs import (
    ColumnNorms,
    SavsConfig,
    SavsScheme,
    adaptive_kappa,
    coefficient_objective,
    column_norms,
    coordinate_descent,
    gram_matrix,
    passthrough_mask,
    penalty_lambda,
    penalty_matrix,
    savs_draw,
    savs_point,
    sparsify_chain,
)


def random_coeffs(rng, m=3, p=2):
    return VarCoefficients(rng.normal(scale=0.3, size=(m * p + 1, m)), m, p)


def penalized(m, p, cfg):
    return (penalty_matrix(m, p, cfg) > 0.0) & ~passthrough_mask(m, p, cfg)


class TestThresholdByHand:
    norms = ColumnNorms(np.array([10.0, 10.0, 10.0]))

    def sparsify(self, value):
        A = np.array([[0.9], [value], [0.3]])
        return savs_draw(VarCoefficients(A, 1, 2), self.norms, SavsConfig(lam=1.0)).coeffs_sparse.A

    def test_large_coefficient_is_shrunk(self):
        assert self.sparsify(0.5)[1, 0] == pytest.approx(0.1)

    def test_small_coefficient_is_zeroed(self):
        assert self.sparsify(0.1)[1, 0] == 0.0

    def test_first_own_lag_and_intercept_pass_through(self):
        A = self.sparsify(0.5)
        assert A[0, 0] == 0.9
        assert A[2, 0] == 0.3


class TestPenalties:
    def test_lag_wise_values(self):
        cfg = SavsConfig(lam=2.0)
        assert penalty_lambda(1, 1, 1, cfg) == 0.0
        assert penalty_lambda(1, 2, 1, cfg) == 2.0
        assert penalty_lambda(2, 1, 1, cfg) == 2.0
        assert penalty_lambda(2, 1, 3, cfg) == 8.0
        assert penalty_lambda(3, 2, 2, cfg) == 8.0

    def test_plain_scheme(self):
        cfg = SavsConfig(lam=0.7, scheme=SavsScheme.PLAIN)
        assert penalty_lambda(3, 1, 2, cfg) == 0.7
        assert penalty_lambda(1, 2, 2, cfg) == 0.0
        assert penalty_lambda(1, 2, 2, SavsConfig(lam=0.7, scheme="plain", sparsify_first_own_lag=True)) == 0.7

    def test_matrix_agrees_with_scalar_rule(self):
        m, p = 3, 3
        cfg = SavsConfig(lam=1.5)
        matrix = penalty_matrix(m, p, cfg)
        for l in range(1, p + 1):
            for i in range(1, m + 1):
                for j in range(1, m + 1):
                    assert matrix[(l - 1) * m + i - 1, j - 1] == penalty_lambda(l, i, j, cfg)
        np.testing.assert_array_equal(matrix[-1], 0.0)

    @pytest.mark.parametrize("kwargs", [{"lam": -1.0}, {"zeta": 0.5}])
    def test_invalid_config(self, kwargs):
        with pytest.raises(ValueError):
            SavsConfig(**kwargs)

    def test_kappa_for_zero_entries(self):
        kappa = adaptive_kappa(np.array([[0.0, 0.0, 0.5]]), np.array([[1.0, 0.0, 1.0]]), 2.0)
        np.testing.assert_array_equal(kappa, [[np.inf, 0.0, 4.0]])


class TestSavsDraw:
    def test_zero_lambda_is_identity(self, rng):
        coeffs = random_coeffs(rng)
        norms = ColumnNorms(rng.uniform(1, 50, size=coeffs.n))
        result = savs_draw(coeffs, norms, SavsConfig(lam=0.0))
        np.testing.assert_array_equal(result.coeffs_sparse.A, coeffs.A)

    def test_shrinks_toward_zero_and_keeps_sign(self, rng):
        for _ in range(20):
            coeffs = random_coeffs(rng)
            norms = ColumnNorms(rng.uniform(1, 50, size=coeffs.n))
            sparse = savs_draw(coeffs, norms, SavsConfig(lam=0.5)).coeffs_sparse.A
            assert np.all(np.abs(sparse) <= np.abs(coeffs.A))
            nonzero = sparse != 0.0
            np.testing.assert_array_equal(np.sign(sparse[nonzero]), np.sign(coeffs.A[nonzero]))

    def test_sparsity_grows_with_lambda(self, rng):
        coeffs = random_coeffs(rng, m=4, p=3)
        norms = ColumnNorms(rng.uniform(1, 50, size=coeffs.n))
        previous = np.zeros_like(coeffs.A, dtype=bool)
        for lam in (0.0, 0.01, 0.1, 1.0, 10.0):
            mask = savs_draw(coeffs, norms, SavsConfig(lam=lam)).zero_mask
            assert np.all(mask >= previous)
            previous = mask

    def test_huge_lambda_zeroes_every_penalized_entry(self, rng):
        coeffs = random_coeffs(rng)
        norms = ColumnNorms(rng.uniform(1, 50, size=coeffs.n))
        cfg = SavsConfig(lam=1e9)
        result = savs_draw(coeffs, norms, cfg)
        mask = penalized(3, 2, cfg)
        np.testing.assert_array_equal(result.coeffs_sparse.A[mask], 0.0)
        np.testing.assert_array_equal(result.coeffs_sparse.A[~mask], coeffs.A[~mask])

    def test_excluded_positions_untouched(self, rng):
        coeffs = random_coeffs(rng)
        norms = ColumnNorms(rng.uniform(1, 50, size=coeffs.n))
        cfg = SavsConfig(lam=5.0)
        keep = passthrough_mask(3, 2, cfg)
        sparse = savs_draw(coeffs, norms, cfg).coeffs_sparse.A
        np.testing.assert_array_equal(sparse[keep], coeffs.A[keep])
        assert keep.sum() == 3 + 3

    def test_sparsified_intercept(self, rng):
        coeffs = random_coeffs(rng)
        norms = ColumnNorms(np.full(coeffs.n, 10.0))
        sparse = savs_draw(coeffs, norms, SavsConfig(lam=1e9, sparsify_intercept=True)).coeffs_sparse.A
        np.testing.assert_array_equal(sparse[-1], 0.0)

    def test_zero_column_norm_gives_zero(self, rng):
        coeffs = random_coeffs(rng)
        norms_sq = np.full(coeffs.n, 10.0)
        norms_sq[4] = 0.0
        sparse = savs_draw(coeffs, ColumnNorms(norms_sq), SavsConfig(lam=0.1)).coeffs_sparse.A
        mask = penalized(3, 2, SavsConfig(lam=0.1))
        np.testing.assert_array_equal(sparse[4][mask[4]], 0.0)

    def test_norm_count_mismatch(self, rng):
        with pytest.raises(ShapeMismatch):
            savs_draw(random_coeffs(rng), ColumnNorms(np.ones(3)), SavsConfig())


class TestSavsPoint:
    def test_matches_the_draw_rule(self, rng):
        coeffs, norms = random_coeffs(rng), ColumnNorms(rng.uniform(1.0, 20.0, size=7))
        point = savs_point(coeffs, norms, SavsConfig(lam=0.5))
        np.testing.assert_array_equal(point.coeffs_sparse.A, savs_draw(coeffs, norms, SavsConfig(lam=0.5)).coeffs_sparse.A)

    def test_zero_in_zero_out(self):
        zero = VarCoefficients(np.zeros((7, 3)), 3, 2)
        point = savs_point(zero, ColumnNorms(np.ones(7)), SavsConfig())
        np.testing.assert_array_equal(point.coeffs_sparse.A, 0.0)


def test_intercept_column_norm_is_sample_size(small_panel):
    design = build_lag_design(small_panel, 2)
    norms = column_norms(design)
    assert norms.norms_sq[-1] == design.T
    np.testing.assert_allclose(norms.norms_sq, np.diag(gram_matrix(design)))


def test_chain_frequencies(small_panel):
    fit = fit_conjugate(small_panel, 2, MinnesotaHyper(theta1=0.2))
    norms = column_norms(fit.design)
    draws = sample_posterior(fit.moments, 20, seed=4)

    _, single = sparsify_chain(draws[:1], norms, SavsConfig(lam=1.0))
    assert set(np.unique(single)) <= {0.0, 1.0}

    sparse, freq = sparsify_chain(draws, norms, SavsConfig(lam=1.0), workers=2)
    assert len(sparse) == 20
    assert np.all((freq >= 0.0) & (freq <= 1.0))
    expected = np.mean([~s.zero_mask for s in sparse], axis=0)
    np.testing.assert_allclose(freq, expected)

    with pytest.raises(ShapeMismatch):
        sparsify_chain([], norms, SavsConfig())


class TestCoordinateDescent:
    def test_diagonal_gram_reduces_to_one_sweep(self, rng):
        for _ in range(25):
            coeffs = random_coeffs(rng, m=int(rng.integers(1, 4)), p=int(rng.integers(1, 4)))
            norms_sq = rng.uniform(1, 50, size=coeffs.n)
            cfg = SavsConfig(lam=float(rng.uniform(0, 2)))
            one_sweep = savs_draw(coeffs, ColumnNorms(norms_sq), cfg).coeffs_sparse.A
            exact = coordinate_descent(coeffs, np.diag(norms_sq), cfg).coeffs_sparse.A
            np.testing.assert_allclose(exact, one_sweep, atol=1e-10)

    @pytest.mark.slow
    def test_diagonal_gram_oracle_over_many_instances(self):
        rng = np.random.default_rng(1000)
        for _ in range(1000):
            m, p = int(rng.integers(1, 6)), int(rng.integers(1, 6))
            coeffs = VarCoefficients(rng.normal(scale=rng.uniform(0.05, 1.0), size=(m * p + 1, m)), m, p)
            norms_sq = rng.uniform(0.5, 500, size=coeffs.n)
            cfg = SavsConfig(lam=float(rng.uniform(0, 5)), zeta=float(rng.uniform(1, 3)),
                             scheme=list(SavsScheme)[int(rng.integers(2))])
            one_sweep = savs_draw(coeffs, ColumnNorms(norms_sq), cfg).coeffs_sparse.A
            exact = coordinate_descent(coeffs, np.diag(norms_sq), cfg).coeffs_sparse.A
            np.testing.assert_allclose(exact, one_sweep, rtol=0, atol=1e-10)

    def test_full_gram_does_no_worse_than_one_sweep(self, small_panel):
        fit = fit_conjugate(small_panel, 2, MinnesotaHyper(theta1=0.2))
        gram = gram_matrix(fit.design)
        cfg = SavsConfig(lam=1.0)
        for draw in sample_posterior(fit.moments, 5, seed=8):
            a_hat = draw.coeffs.A
            kappa = adaptive_kappa(a_hat, penalty_matrix(3, 2, cfg), cfg.zeta)
            one_sweep = savs_draw(draw.coeffs, column_norms(fit.design), cfg).coeffs_sparse.A
            exact = coordinate_descent(draw.coeffs, gram, cfg).coeffs_sparse.A
            best = coefficient_objective(exact, a_hat, gram, kappa)
            assert best <= coefficient_objective(one_sweep, a_hat, gram, kappa) + 1e-8
            assert best <= coefficient_objective(a_hat, a_hat, gram, kappa) + 1e-8

    def test_gram_shape_mismatch(self, rng):
        with pytest.raises(ShapeMismatch):
            coordinate_descent(random_coeffs(rng), np.eye(3), SavsConfig())
