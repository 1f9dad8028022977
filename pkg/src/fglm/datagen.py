"""Ground-truth construction and data generation for the regression model.

The predictor is a Gaussian process X = mu + sum_k z_k phi_k with
independent scores z_k ~ N(0, theta_k) in the fixed cosine basis, and
the response is drawn from the chosen exponential family at natural
parameter lam = a + <X, B>.  Truth objects carry the eigenvalue decay
exponent alpha (theta_k = k^-alpha) and the slope decay exponent beta_s
(|b_k| <= radius * k^-beta_s), with the class radius chosen so that all
membership conditions hold by construction and are re-verified at build
time.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expfam import ExpFamilySpec, sample_response
from .funcspace import FunctionRep

__all__ = [
    "GroundTruth",
    "Dataset",
    "make_ground_truth",
    "sample_dataset",
    "rho_n",
]

_MU_MODES = ("zero", "bumps")


@dataclass(frozen=True)
class GroundTruth:
    """Population quantities defining one simulation scenario."""

    alpha: float
    beta_s: float
    radius: float
    intercept: float
    mean: FunctionRep
    eigvals: np.ndarray
    slope_coeffs: np.ndarray
    family: ExpFamilySpec

    def __post_init__(self):
        for name in ("eigvals", "slope_coeffs"):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.slope_coeffs.shape != self.eigvals.shape:
            raise ValueError("slope_coeffs and eigvals must have the same length")
        _check_membership(self)

    @property
    def k_trunc(self) -> int:
        return self.eigvals.shape[0]

    @property
    def slope(self) -> FunctionRep:
        return FunctionRep(self.slope_coeffs)


def _check_membership(gt: GroundTruth) -> None:
    theta, b, r = gt.eigvals, gt.slope_coeffs, gt.radius
    k = np.arange(1, gt.k_trunc + 1)
    if np.any(theta <= 0) or np.any(np.diff(theta) >= 0):
        raise ValueError("eigenvalues must be positive and strictly decreasing")
    if np.any(theta > r * k ** -gt.alpha):
        raise ValueError("eigenvalues exceed the decay envelope")
    if np.any(theta[:-1] - theta[1:] < (gt.alpha / r) * k[:-1] ** (-gt.alpha - 1.0)):
        raise ValueError("adjacent eigenvalue gaps too small")
    # pairwise gap condition, all k < j
    pk = k[:, None] ** -gt.alpha
    diff_theta = theta[:, None] - theta[None, :]
    diff_pow = pk - pk.T
    upper = np.triu(np.ones((gt.k_trunc, gt.k_trunc), dtype=bool), k=1)
    if np.any(diff_theta[upper] < diff_pow[upper] / r - 1e-15):
        raise ValueError("pairwise eigenvalue gap condition violated")
    if np.any(np.abs(b) > r * k ** -gt.beta_s):
        raise ValueError("slope coefficients exceed the decay envelope")
    if abs(gt.intercept) > r:
        raise ValueError("intercept exceeds the class radius")
    if np.sqrt(np.dot(gt.mean.coeffs, gt.mean.coeffs)) > r:
        raise ValueError("mean function exceeds the class radius")


def make_ground_truth(
    alpha: float,
    beta_s: float,
    family: ExpFamilySpec,
    k_trunc: int = 200,
    intercept: float = 0.5,
    mu_mode: str = "zero",
) -> GroundTruth:
    """Build the canonical truth: theta_k = k^-alpha, b_k = (-1)^(k+1) k^-beta_s.

    The radius is max(2^(alpha+1), 1 + |intercept| + ||mu||), which makes
    every class-membership condition hold; the GroundTruth constructor
    still verifies them explicitly.
    """
    if not np.isfinite(alpha) or alpha <= 1.0:
        raise ValueError("alpha must be finite and > 1")
    if not np.isfinite(beta_s) or beta_s <= (alpha + 3.0) / 2.0:
        raise ValueError("beta_s must be finite and > (alpha + 3) / 2")
    if k_trunc < 4:
        raise ValueError("k_trunc must be at least 4")
    if mu_mode not in _MU_MODES:
        raise ValueError(f"mu_mode must be one of {_MU_MODES}")
    if not np.isfinite(intercept):
        raise ValueError("intercept must be finite")

    k = np.arange(1, k_trunc + 1, dtype=float)
    theta = k ** -alpha
    b = np.where(np.arange(k_trunc) % 2 == 0, 1.0, -1.0) * k ** -beta_s
    mu = np.zeros(k_trunc)
    if mu_mode == "bumps":
        mu[:4] = np.arange(1.0, 5.0) ** -2.0
    radius = max(2.0 ** (alpha + 1.0), 1.0 + abs(intercept) + float(np.linalg.norm(mu)))
    gt = GroundTruth(
        alpha=alpha,
        beta_s=beta_s,
        radius=radius,
        intercept=intercept,
        mean=FunctionRep(mu),
        eigvals=theta,
        slope_coeffs=b,
        family=family,
    )
    return gt


@dataclass(frozen=True)
class Dataset:
    """One simulated sample: scores of X - mu, responses, true parameters."""

    mean_coeffs: np.ndarray
    scores: np.ndarray
    y: np.ndarray
    lambda_true: np.ndarray

    def __post_init__(self):
        for name in ("mean_coeffs", "scores", "y", "lambda_true"):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.scores.ndim != 2:
            raise ValueError("scores must be an n x K matrix")
        n = self.scores.shape[0]
        if self.y.shape != (n,) or self.lambda_true.shape != (n,):
            raise ValueError("y and lambda_true must have one entry per row of scores")
        if self.mean_coeffs.shape != (self.scores.shape[1],):
            raise ValueError("mean_coeffs length must match the score dimension")

    @property
    def n(self) -> int:
        return self.scores.shape[0]

    @property
    def k_trunc(self) -> int:
        return self.scores.shape[1]

    def x_coeffs(self) -> np.ndarray:
        """Coefficient matrix of the predictors X_i, shape n x K."""
        return self.mean_coeffs[None, :] + self.scores

    def x_func(self, i: int) -> FunctionRep:
        return FunctionRep(self.mean_coeffs + self.scores[i])


def sample_dataset(gt: GroundTruth, n: int, seed: int) -> Dataset:
    """Draw n observations from the truth, deterministically in `seed`."""
    if n < 2:
        raise ValueError("need at least 2 observations")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, gt.k_trunc)) * np.sqrt(gt.eigvals)
    lam = gt.intercept + float(np.dot(gt.mean.coeffs, gt.slope_coeffs)) + z @ gt.slope_coeffs
    y = sample_response(gt.family, lam, rng)
    return Dataset(mean_coeffs=gt.mean.coeffs, scores=z, y=y, lambda_true=lam)


def rho_n(n: int, alpha: float, beta_s: float) -> float:
    """Benchmark squared-error rate n^((1 - 2 beta_s) / (alpha + 2 beta_s))."""
    if n < 1:
        raise ValueError("n must be positive")
    return float(n) ** ((1.0 - 2.0 * beta_s) / (alpha + 2.0 * beta_s))
