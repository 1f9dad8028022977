import math

import numpy as np
import pytest

from fglm.datagen import (
    Dataset,
    GroundTruth,
    make_ground_truth,
    rho_n,
    sample_dataset,
)
from fglm.expfam import get_family
from fglm.funcspace import FunctionRep

GAUSS = get_family("gaussian")


def test_canonical_truth_shape():
    gt = make_ground_truth(2.0, 3.0, GAUSS, k_trunc=50)
    k = np.arange(1.0, 51.0)
    assert np.array_equal(gt.eigvals, k**-2.0)
    assert np.allclose(np.abs(gt.slope_coeffs), k**-3.0)
    # alternating signs starting positive
    assert gt.slope_coeffs[0] > 0 > gt.slope_coeffs[1]
    assert gt.intercept == 0.5
    assert np.all(gt.mean.coeffs == 0.0)
    # radius max(2^3, 1 + 0.5 + 0) = 8 with plenty of slack over ||b|| ~ 1.01
    assert gt.radius == 8.0


def test_slope_norm_partial_sum():
    # sum of k^-6 over all k is pi^6 / 945; the K=200 truncation is within 1e-9
    gt = make_ground_truth(2.0, 3.0, GAUSS)
    assert np.dot(gt.slope_coeffs, gt.slope_coeffs) == pytest.approx(
        math.pi**6 / 945.0, abs=1e-9
    )


def test_bumps_mean_mode():
    gt = make_ground_truth(2.0, 3.0, GAUSS, mu_mode="bumps")
    assert np.allclose(gt.mean.coeffs[:4], np.arange(1.0, 5.0) ** -2.0)
    assert np.all(gt.mean.coeffs[4:] == 0.0)


@pytest.mark.parametrize(
    "alpha,beta_s",
    [(1.0, 5.0), (0.5, 5.0), (2.0, 2.5), (2.0, 2.0)],
)
def test_smoothness_index_constraints(alpha, beta_s):
    with pytest.raises(ValueError):
        make_ground_truth(alpha, beta_s, GAUSS)


@pytest.mark.parametrize(
    "edit,msg",
    [
        (lambda t: t.__setitem__(3, t[2]), "decreasing"),
        (lambda t: t.__setitem__(3, t[2] - 1e-12), "gap"),
        (lambda t: t.__setitem__(0, 10.0), "envelope"),
    ],
)
def test_membership_rejects_bad_eigenvalues(edit, msg):
    gt = make_ground_truth(2.0, 3.0, GAUSS, k_trunc=10)
    theta = gt.eigvals.copy()
    edit(theta)
    with pytest.raises(ValueError, match=msg):
        GroundTruth(
            alpha=gt.alpha,
            beta_s=gt.beta_s,
            radius=gt.radius,
            intercept=gt.intercept,
            mean=gt.mean,
            eigvals=theta,
            slope_coeffs=gt.slope_coeffs,
            family=GAUSS,
        )


def test_membership_rejects_oversized_slope():
    gt = make_ground_truth(2.0, 3.0, GAUSS, k_trunc=10)
    b = gt.slope_coeffs.copy()
    b[5] = 10.0
    with pytest.raises(ValueError, match="slope"):
        GroundTruth(
            alpha=gt.alpha,
            beta_s=gt.beta_s,
            radius=gt.radius,
            intercept=gt.intercept,
            mean=gt.mean,
            eigvals=gt.eigvals,
            slope_coeffs=b,
            family=GAUSS,
        )


def test_dataset_validation_and_views():
    ds = Dataset(
        mean_coeffs=[1.0, 0.0],
        scores=[[0.5, -0.5], [0.0, 2.0]],
        y=[1.0, 0.0],
        lambda_true=[0.2, 0.3],
    )
    assert ds.n == 2 and ds.k_trunc == 2
    assert np.array_equal(ds.x_coeffs(), [[1.5, -0.5], [1.0, 2.0]])
    assert isinstance(ds.x_func(1), FunctionRep)
    with pytest.raises(ValueError):
        Dataset(mean_coeffs=[0.0], scores=[[0.0, 1.0]], y=[1.0], lambda_true=[0.0])
    with pytest.raises(ValueError):
        Dataset(mean_coeffs=[0.0, 0.0], scores=[[0.0, 1.0]], y=[1.0, 2.0], lambda_true=[0.0])


def test_dataset_arrays_frozen():
    ds = sample_dataset(make_ground_truth(2.0, 3.0, GAUSS, k_trunc=8), 5, seed=0)
    with pytest.raises(ValueError):
        ds.y[0] = 99.0


def test_sampling_deterministic_and_seed_sensitive():
    gt = make_ground_truth(2.0, 3.0, GAUSS, k_trunc=20)
    a = sample_dataset(gt, 16, seed=7)
    b = sample_dataset(gt, 16, seed=7)
    c = sample_dataset(gt, 16, seed=8)
    assert np.array_equal(a.y, b.y) and np.array_equal(a.scores, b.scores)
    assert not np.array_equal(a.y, c.y)


def test_sampled_scores_match_spectrum():
    gt = make_ground_truth(2.0, 3.0, GAUSS, k_trunc=6)
    ds = sample_dataset(gt, 100_000, seed=1)
    emp = ds.scores.var(axis=0, ddof=1)
    assert np.allclose(emp, gt.eigvals, rtol=0.03)
    assert np.allclose(ds.scores.mean(axis=0), 0.0, atol=0.02)


def test_lambda_true_recomputes():
    gt = make_ground_truth(2.0, 3.0, GAUSS, k_trunc=30, mu_mode="bumps")
    ds = sample_dataset(gt, 50, seed=3)
    lam = gt.intercept + ds.x_coeffs() @ gt.slope_coeffs
    assert np.allclose(lam, ds.lambda_true, atol=1e-12)


def test_rho_n_values():
    assert rho_n(256, 2.0, 3.0) == pytest.approx(2.0**-5, abs=1e-15)
    assert rho_n(1, 2.0, 3.0) == 1.0
    with pytest.raises(ValueError):
        rho_n(0, 2.0, 3.0)


def test_rho_n_is_decreasing_in_n():
    vals = [rho_n(n, 1.5, 4.0) for n in (10, 100, 1000)]
    assert vals[0] > vals[1] > vals[2]
