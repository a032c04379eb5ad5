import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import mixed_tensor_by_summation, unfold_by_enumeration
from tensormm.exceptions import GenerationError
from tensormm.linalg import tensor_kappa, tensor_lambda_min
from tensormm.model import (MixedModel, NoiseSpec, is_membership, lambda_bracket, make_rng,
                            pure_factor_identity, pure_node_indices, regularity_constants,
                            sample_blockmodel, sample_blockmodel_membership, sample_core,
                            sample_membership, sample_mixed_model, sample_noise,
                            signal_strength_rhs, synth_tensor)

# direct-SVD values of the (3, 3, 3) core drawn from make_rng(42) with delta=10
SEED42_KAPPA = 2.0874691406443153
SEED42_FIRST_ENTRY = -6.058613225894204


# -- rng --------------------------------------------------------------------

def test_make_rng_streams():
    a = make_rng(7, 1, 2).standard_normal(5)
    np.testing.assert_array_equal(a, make_rng(7, 1, 2).standard_normal(5))
    assert not np.array_equal(a, make_rng(7, 1, 3).standard_normal(5))
    assert not np.array_equal(a, make_rng(8, 1, 2).standard_normal(5))


# -- core -------------------------------------------------------------------

def test_core_scalar():
    core = sample_core((1, 1, 1), 4.0, make_rng(0))
    assert abs(core[0, 0, 0]) == pytest.approx(4.0)


@pytest.mark.parametrize("ranks", [(2, 2, 2), (3, 3, 3), (2, 3, 4)])
def test_core_lambda_equals_delta(ranks):
    core = sample_core(ranks, 7.5, make_rng(3))
    assert tensor_lambda_min(core, ranks) == pytest.approx(7.5, rel=1e-10)


def test_core_seed42_against_svd():
    core = sample_core((3, 3, 3), 10.0, make_rng(42))
    sv = [np.linalg.svd(unfold_by_enumeration(core, m), compute_uv=False) for m in (1, 2, 3)]
    assert min(s[-1] for s in sv) == pytest.approx(10.0, rel=1e-10)
    assert tensor_kappa(core, (3, 3, 3)) == pytest.approx(SEED42_KAPPA, rel=1e-10)
    assert core[0, 0, 0] == pytest.approx(SEED42_FIRST_ENTRY, rel=1e-12)


def test_core_rejects_bad_input():
    with pytest.raises(ValueError):
        sample_core((3, 3, 3), 0.0, make_rng(0))
    with pytest.raises(ValueError):
        sample_core((3, 3), 1.0, make_rng(0))


def test_core_infeasible_ranks():
    # r1 > r2 * r3 makes the mode-1 matricization rank-deficient on every draw
    with pytest.raises(ValueError):
        sample_core((5, 2, 2), 1.0, make_rng(0))


class _ZeroRng:
    def standard_normal(self, size):
        return np.zeros(size)


def test_core_gives_up():
    with pytest.raises(GenerationError):
        sample_core((2, 2, 2), 1.0, _ZeroRng(), max_tries=3)


# -- memberships ------------------------------------------------------------

def test_membership_identity_when_square():
    np.testing.assert_array_equal(sample_membership(4, 4, make_rng(0)), np.eye(4))


def test_membership_structure():
    pi = sample_membership(50, 3, make_rng(1))
    assert is_membership(pi)
    np.testing.assert_array_equal(pi[:3], np.eye(3))
    np.testing.assert_array_equal(pure_node_indices(pi), [0, 1, 2])


def test_membership_shuffle_keeps_pure_nodes():
    pi = sample_membership(30, 3, make_rng(1), shuffle=True)
    assert is_membership(pi)
    assert np.all(pure_node_indices(pi) >= 0)


def test_dirichlet_mean():
    n, r = 4000, 3
    rows = sample_membership(n + r, r, make_rng(11))[r:]
    # Dirichlet(1,1,1): mean 1/3, variance (1/3)(2/3)/4
    se = np.sqrt((1 / 3) * (2 / 3) / 4 / n)
    assert np.all(np.abs(rows.mean(axis=0) - 1 / 3) <= 3 * se)


@pytest.mark.parametrize("p, r", [(10, 3), (12, 4), (7, 7)])
def test_blockmodel_sizes(p, r):
    pi = sample_blockmodel_membership(p, r, make_rng(0))
    sizes = pi.sum(axis=0)
    assert set(np.unique(pi)) <= {0.0, 1.0}
    assert np.all(pi.sum(axis=1) == 1)
    assert sizes.min() >= p // r and sizes.max() <= -(-p // r)


def test_membership_bad_sizes():
    with pytest.raises(ValueError):
        sample_membership(2, 3, make_rng(0))
    with pytest.raises(ValueError):
        sample_blockmodel_membership(2, 3, make_rng(0))


# -- synthesis --------------------------------------------------------------

def test_synth_matches_quadruple_sum():
    rng = make_rng(5)
    model = sample_mixed_model((8, 9, 10), (2, 3, 2), 3.0, rng)
    expected = mixed_tensor_by_summation(model.core, *model.memberships)
    np.testing.assert_allclose(synth_tensor(model), expected, rtol=1e-12, atol=1e-12)


def test_model_validation():
    with pytest.raises(ValueError):
        MixedModel(np.ones((2, 2, 2)), (np.ones((3, 2)), np.ones((3, 3)), np.ones((3, 2))))
    with pytest.raises(ValueError):
        MixedModel(np.ones((2, 2, 2)), (np.ones((3, 2)),))


def test_model_summaries():
    model = sample_mixed_model((20, 20, 20), (3, 3, 3), 5.0, make_rng(9))
    assert model.delta == pytest.approx(5.0, rel=1e-10)
    assert model.dims == (20, 20, 20) and model.ranks == (3, 3, 3)
    assert model.lam >= model.delta  # pure rows contain the identity
    for u in model.factors:
        np.testing.assert_allclose(u.T @ u, np.eye(3), atol=1e-10)
    assert 1.0 <= model.mu0 <= np.sqrt(20 / 3)


# -- noise ------------------------------------------------------------------

def test_noise_zero():
    assert not np.any(sample_noise((3, 4, 5), NoiseSpec(0.0), make_rng(0)))


def test_noise_uniform_second_moment():
    sigma = 2.0
    z = sample_noise((40, 40, 40), NoiseSpec(sigma, alpha=1.0), make_rng(4)).ravel()
    # E[z^2] = sigma^2 E[B^2] = sigma^2 / 3 for B ~ Uniform(0, 1)
    z2 = z ** 2
    se = z2.std() / np.sqrt(z2.size)
    assert abs(z2.mean() - sigma ** 2 / 3) <= 3 * se
    assert abs(z.mean()) <= 3 * z.std() / np.sqrt(z.size)


def test_noise_deterministic():
    spec = NoiseSpec(3.0, alpha=0.5, seed=12)
    np.testing.assert_array_equal(sample_noise((4, 4, 4), spec), sample_noise((4, 4, 4), spec))
    np.testing.assert_array_equal(sample_noise((4, 4, 4), spec, make_rng(1, 2)),
                                  sample_noise((4, 4, 4), spec, make_rng(1, 2)))


@pytest.mark.parametrize("kwargs", [{"sigma_max": -1.0}, {"sigma_max": 1.0, "alpha": 0.0}])
def test_noise_spec_validation(kwargs):
    with pytest.raises(ValueError):
        NoiseSpec(**kwargs)


# -- structural identities --------------------------------------------------

@pytest.mark.parametrize("mode", [1, 2, 3])
def test_pure_factor_identity(mode):
    model = sample_mixed_model((40, 35, 30), (3, 3, 3), 8.0, make_rng(21))
    upure_gram, gram_inv, resid = pure_factor_identity(model, mode)
    np.testing.assert_allclose(upure_gram, gram_inv, atol=1e-10)
    assert resid <= 1e-10


@pytest.mark.parametrize("mode", [1, 2, 3])
def test_lambda_bracket(mode):
    model = sample_mixed_model((30, 30, 30), (3, 3, 3), 4.0, make_rng(22))
    lower, value, upper = lambda_bracket(model, mode)
    assert lower * (1 - 1e-10) <= value <= upper * (1 + 1e-10)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_blockmodel_invariants(seed):
    model = sample_blockmodel((12, 10, 9), (3, 2, 3), 2.0, make_rng(seed))
    for pi in model.memberships:
        assert is_membership(pi)
    lo, hi = regularity_constants(model.memberships[0])
    assert 0 < lo <= hi


def test_signal_strength_rhs():
    # kappa^2 p^2 log p r1 r2 r3 / (p1 p2 p3 sqrt(p_min)) for a cube
    assert signal_strength_rhs((100, 100, 100), (3, 3, 3)) == pytest.approx(
        100 ** 2 * np.log(100) * 27 / (100 ** 3 * 10))
