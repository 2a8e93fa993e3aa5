import numpy as np
import pytest

from sparsebvar.errors import NotPositiveDefinite
from sparsebvar.model.minnesota import MinnesotaHyper
from sparsebvar.model.posterior import fit_conjugate, sample_posterior
from sparsebvar.model.var_core import CovMatrix
from sparsebvar.sparsify.precision import (
    PdRepair,
    PrecisionConfig,
    PrecisionMode,
    ThresholdRule,
    _repair,
    edge_inclusion_frequencies,
    precision_objective,
    precision_penalties,
    resolve_varpi,
    sparse_covariances,
    sparsify_precision,
    sparsify_precision_chain,
)


def random_cov(rng, m, df=None):
    B = rng.normal(size=(m, df or 2 * m))
    return CovMatrix(B @ B.T / B.shape[1] + 0.05 * np.eye(m))


def objective_for(cov, omega, cfg):
    P = np.linalg.inv(cov.sigma)
    return precision_objective(omega, cov.sigma, precision_penalties(P, cfg.varpi, cfg.kappa_prec))


def test_zero_penalty_returns_the_precision(rng):
    cov = random_cov(rng, 4)
    result = sparsify_precision(cov, PrecisionConfig(varpi=0.0))
    np.testing.assert_allclose(result.omega, np.linalg.inv(cov.sigma), rtol=1e-10, atol=1e-12)
    np.testing.assert_array_equal(result.omega, result.omega.T)
    assert not result.zero_mask.any()


def test_diagonal_covariance_is_unchanged():
    cov = CovMatrix(np.diag([0.5, 2.0, 1.0]))
    result = sparsify_precision(cov, PrecisionConfig(varpi=0.3))
    np.testing.assert_allclose(result.omega, np.diag([2.0, 0.5, 1.0]))
    np.testing.assert_allclose(result.covariance().sigma, cov.sigma)
    assert not result.repaired


@pytest.mark.parametrize("threshold", list(ThresholdRule))
def test_weak_pair_is_removed(threshold):
    cov = CovMatrix(np.array([[1.0, 0.05], [0.05, 1.0]]))
    result = sparsify_precision(cov, PrecisionConfig(varpi=0.5, threshold=threshold))
    assert result.omega[0, 1] == 0.0
    assert result.zero_mask[0, 1] and result.zero_mask[1, 0]
    assert not result.zero_mask[0, 0]


class TestExactPairRule:
    def grid_minimizer(self, cov, cfg):
        P = np.linalg.inv(cov.sigma)
        rho = precision_penalties(P, cfg.varpi, cfg.kappa_prec)
        bound = np.sqrt(P[0, 0] * P[1, 1])
        best_w, best_value = 0.0, np.inf
        for w in np.arange(-bound + 1e-4, bound, 1e-4):
            omega = np.array([[P[0, 0], w], [w, P[1, 1]]])
            value = precision_objective(omega, cov.sigma, rho)
            if value < best_value:
                best_w, best_value = w, value
        return best_w

    def test_matches_grid_search(self, rng):
        for _ in range(8):
            cov = random_cov(rng, 2)
            cfg = PrecisionConfig(varpi=float(rng.uniform(0.01, 0.3)), threshold=ThresholdRule.EXACT)
            result = sparsify_precision(cov, cfg)
            assert result.omega[0, 1] == pytest.approx(self.grid_minimizer(cov, cfg), abs=2e-4)

    def test_never_increases_the_objective(self, rng):
        for _ in range(50):
            cov = random_cov(rng, 2)
            cfg = PrecisionConfig(varpi=float(rng.uniform(0.0, 1.0)), threshold=ThresholdRule.EXACT)
            result = sparsify_precision(cov, cfg)
            assert not result.repaired
            P = np.linalg.inv(cov.sigma)
            assert objective_for(cov, result.omega, cfg) <= objective_for(cov, 0.5 * (P + P.T), cfg) + 1e-10


def test_soft_rule_shrinks_off_diagonal(rng):
    for _ in range(20):
        cov = random_cov(rng, 5)
        P = np.linalg.inv(cov.sigma)
        omega = sparsify_precision(cov, PrecisionConfig(varpi=0.1)).omega
        off = ~np.eye(5, dtype=bool)
        assert np.all(np.abs(omega[off]) <= np.abs(P[off]) + 1e-12)


def test_edge_sparsity_grows_with_penalty(rng):
    cov = random_cov(rng, 6)
    previous = np.zeros((6, 6), dtype=bool)
    for varpi in (0.0, 0.01, 0.05, 0.2, 1.0, 1e6):
        mask = sparsify_precision(cov, PrecisionConfig(varpi=varpi)).zero_mask
        assert np.all(mask >= previous)
        previous = mask
    assert previous[~np.eye(6, dtype=bool)].all()


def test_result_is_always_positive_definite(rng):
    for _ in range(30):
        cov = random_cov(rng, 6, df=7)
        result = sparsify_precision(cov, PrecisionConfig(varpi=float(rng.uniform(0.01, 0.5))))
        assert np.all(np.linalg.eigvalsh(result.omega) > 0.0)
        np.linalg.cholesky(result.covariance().sigma)


class TestRepair:
    indefinite = np.array([[1.0, 2.0], [2.0, 1.0]])

    def test_reject_raises(self):
        with pytest.raises(NotPositiveDefinite):
            _repair(self.indefinite, PdRepair.REJECT)

    def test_diagonal_inflation(self):
        repaired, flag = _repair(self.indefinite, PdRepair.DIAG_INFLATE)
        assert flag
        assert np.all(np.linalg.eigvalsh(repaired) > 0.0)
        np.testing.assert_array_equal(repaired[0, 1], 2.0)

    def test_pd_input_untouched(self):
        omega = np.array([[2.0, 0.5], [0.5, 1.0]])
        repaired, flag = _repair(omega, PdRepair.REJECT)
        assert not flag
        assert repaired is omega


def test_iterating_to_tolerance_improves_on_one_sweep(rng):
    for _ in range(5):
        cov = random_cov(rng, 4)
        one = PrecisionConfig(varpi=0.05)
        iterated = PrecisionConfig(varpi=0.05, mode=PrecisionMode.ITERATE_TO_TOL)
        first = sparsify_precision(cov, one)
        final = sparsify_precision(cov, iterated)
        assert final.iterations >= 2
        assert objective_for(cov, final.omega, one) <= objective_for(cov, first.omega, one) + 1e-12


@pytest.mark.parametrize("kwargs", [{"varpi": -0.1}, {"kappa_prec": 0.5}, {"tol": 0.0}, {"max_iter": 0}])
def test_invalid_config(kwargs):
    with pytest.raises(ValueError):
        PrecisionConfig(**kwargs)


def test_enum_values_accepted_as_strings():
    cfg = PrecisionConfig(mode="iterate_to_tol", threshold="exact", pd_repair="reject")
    assert cfg.mode is PrecisionMode.ITERATE_TO_TOL
    assert cfg.threshold is ThresholdRule.EXACT
    assert cfg.pd_repair is PdRepair.REJECT


def test_chain_and_frequencies(small_panel):
    fit = fit_conjugate(small_panel, 2, MinnesotaHyper(theta1=0.2))
    draws = sample_posterior(fit.moments, 12, seed=6)
    sparse, freq = sparsify_precision_chain(draws, PrecisionConfig(varpi=0.1), workers=2)
    assert len(sparse) == 12
    np.testing.assert_allclose(np.diag(freq), 1.0)
    np.testing.assert_allclose(freq, freq.T)
    np.testing.assert_allclose(freq, edge_inclusion_frequencies(sparse))
    for cov, item in zip(sparse_covariances(sparse), sparse):
        np.testing.assert_allclose(cov.precision(), item.omega, atol=1e-8)


def test_resolve_varpi():
    assert resolve_varpi(None, 1.0) == pytest.approx(0.1)
    assert resolve_varpi(0.3, 1.0) == 0.3
    assert resolve_varpi(0, 5.0) == 0.0
