"""Truncated maximum-likelihood slope estimation.

The estimator projects each predictor onto the leading estimated
principal components, fits a GLM by damped Newton iteration on the
concave log likelihood

    L(g) = sum_i [ y_i eta_i - psi(eta_i) ],   eta_i = g_0 + <g, scores_i>,

over N + 1 coefficients, then keeps only the first m score coefficients
to rebuild the slope function.  The truncation levels follow the rate
calculation: m grows like n^(1 / (alpha + 2 beta_s)) while N grows a
little faster, its exponent chosen strictly inside the admissible
interval ((alpha + 2 beta_s - 1)^-1, (2 + 2 alpha)^-1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .datagen import Dataset, GroundTruth
from .expfam import ExpFamilySpec
from .fpca import spectral_estimate
from .funcspace import FunctionRep, norm_sq

__all__ = [
    "TuningRule",
    "NewtonConfig",
    "MLEFit",
    "FitResult",
    "zeta_interval",
    "tuning",
    "fit_mle",
    "estimate_slope",
    "loss",
]

MIN_OBSERVATIONS = 8


@dataclass(frozen=True)
class TuningRule:
    """Constants for the truncation levels; zeta=None takes the midpoint."""

    c_m: float = 1.0
    c_N: float = 2.0
    zeta: float | None = None

    def __post_init__(self):
        if self.c_m <= 0 or self.c_N <= 0:
            raise ValueError("tuning constants must be positive")


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-10
    max_iter: int = 100
    separation_threshold: float = 1e3

    def __post_init__(self):
        if self.tol <= 0 or self.max_iter < 1 or self.separation_threshold <= 0:
            raise ValueError("invalid Newton configuration")


@dataclass(frozen=True)
class MLEFit:
    """Raw GLM fit: coefficient vector (intercept first) plus solver state."""

    coefs: np.ndarray
    iterations: int
    grad_norm: float
    converged: bool
    separated: bool
    objective: float


@dataclass(frozen=True)
class FitResult:
    """Slope estimate with the tuning and solver metadata that produced it."""

    coefs: np.ndarray
    slope: FunctionRep
    m: int
    n_components: int
    iterations: int
    grad_norm: float
    converged: bool
    separated: bool


def zeta_interval(alpha: float, beta_s: float) -> tuple[float, float]:
    """Open interval of admissible exponents for the fitting dimension N."""
    lo = 1.0 / (alpha + 2.0 * beta_s - 1.0)
    hi = 1.0 / (2.0 + 2.0 * alpha)
    if not lo < hi:
        raise ValueError("empty exponent interval; needs beta_s > (alpha + 3) / 2")
    return lo, hi


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def tuning(n: int, alpha: float, beta_s: float, rule: TuningRule | None = None) -> tuple[int, int]:
    """Truncation levels (m, N) for sample size n."""
    rule = rule or TuningRule()
    if n < MIN_OBSERVATIONS:
        raise ValueError(f"tuning needs n >= {MIN_OBSERVATIONS}")
    lo, hi = zeta_interval(alpha, beta_s)
    zeta = 0.5 * (lo + hi) if rule.zeta is None else rule.zeta
    if not lo < zeta < hi:
        raise ValueError(f"zeta must lie strictly inside ({lo:.6g}, {hi:.6g})")
    m = max(1, _round_half_up(rule.c_m * n ** (1.0 / (alpha + 2.0 * beta_s))))
    if m > n - 2:
        raise ValueError("sample too small for the requested truncation level")
    n_comp = _round_half_up(rule.c_N * n**zeta)
    n_comp = min(max(n_comp, m), n - 2)
    return m, n_comp


def _newton_direction(hess: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Solve hess @ d = grad, escalating a Levenberg shift if needed.

    The shift only safeguards the linear solve; convergence is judged on
    the gradient alone.
    """
    p = hess.shape[0]
    tau = 0.0
    base = 1e-8 * np.trace(hess) / p
    if base <= 0 or not np.isfinite(base):
        base = 1e-8
    eye = np.eye(p)
    for _ in range(64):
        try:
            chol = np.linalg.cholesky(hess + tau * eye if tau else hess)
        except np.linalg.LinAlgError:
            tau = base if tau == 0.0 else 2.0 * tau
            continue
        half = np.linalg.solve(chol, grad)
        return np.linalg.solve(chol.T, half)
    raise RuntimeError("hessian could not be factored even with shift")


def fit_mle(
    y: np.ndarray,
    scores: np.ndarray,
    family: ExpFamilySpec,
    config: NewtonConfig | None = None,
    init: np.ndarray | None = None,
) -> MLEFit:
    """Maximize the exponential-family log likelihood by damped Newton.

    `scores` is the n x N design without the intercept column; the fit
    always includes an intercept as coefficient 0.  Steps are halved
    until the objective does not decrease, so the objective is
    nondecreasing along accepted iterates up to float evaluation noise
    (near the maximum the predicted gain is far below one ulp of the
    objective, so exact monotone acceptance would stall the quadratic
    phase).  A coefficient escaping beyond the separation threshold
    stops the solver with converged=False (relevant for separable
    Bernoulli samples); a non-finite objective is a hard error.
    """
    cfg = config or NewtonConfig()
    y = np.asarray(y, dtype=float)
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 2 or scores.shape[0] != y.shape[0]:
        raise ValueError("scores must be n x N with one row per response")
    n, n_comp = scores.shape
    if n < n_comp + 2:
        raise ValueError("need n >= N + 2 observations")
    design = np.column_stack([np.ones(n), scores])
    p = n_comp + 1

    if init is None:
        g = np.zeros(p)
        g[0] = family.init_natural(float(y.mean()), n)
    else:
        g = np.array(init, dtype=float)
        if g.shape != (p,):
            raise ValueError("init must have length N + 1")

    def objective(eta):
        return float(y @ eta - np.sum(family.psi(eta)))

    eta = design @ g
    obj = objective(eta)
    if not np.isfinite(obj):
        raise RuntimeError("log likelihood not finite at the initial point")

    tol = cfg.tol * n
    iterations = 0
    converged = False
    separated = False
    grad = design.T @ (y - family.dpsi(eta))
    grad_norm = float(np.max(np.abs(grad)))

    for _ in range(cfg.max_iter):
        if grad_norm <= tol:
            converged = True
            break
        weights = family.d2psi(eta)
        hess = (design * weights[:, None]).T @ design
        direction = _newton_direction(hess, grad)

        step = 1.0
        accepted = False
        flat = 16.0 * np.finfo(float).eps * (1.0 + abs(obj))  # objective ulp scale
        for _ in range(60):
            g_try = g + step * direction
            eta_try = design @ g_try
            obj_try = objective(eta_try)
            if np.isfinite(obj_try) and obj_try >= obj - flat:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            # no ascent direction survives damping: numerically stationary
            break
        assert obj_try >= obj - flat  # concavity guard: no real decrease
        g, eta, obj = g_try, eta_try, obj_try
        iterations += 1
        grad = design.T @ (y - family.dpsi(eta))
        grad_norm = float(np.max(np.abs(grad)))
        if np.max(np.abs(g)) > cfg.separation_threshold:
            separated = True
            break
    else:
        pass

    if grad_norm <= tol and not separated:
        converged = True
    if not np.isfinite(obj):
        raise RuntimeError("log likelihood diverged")
    return MLEFit(
        coefs=g,
        iterations=iterations,
        grad_norm=grad_norm,
        converged=converged,
        separated=separated,
        objective=obj,
    )


def estimate_slope(
    ds: Dataset,
    family: ExpFamilySpec,
    alpha: float,
    beta_s: float,
    rule: TuningRule | None = None,
    config: NewtonConfig | None = None,
) -> FitResult:
    """Full pipeline: spectral estimate, tuning, GLM fit, slope rebuild."""
    if ds.n < MIN_OBSERVATIONS:
        raise ValueError(f"estimation needs at least {MIN_OBSERVATIONS} observations")
    est = spectral_estimate(ds)
    m, n_comp = tuning(ds.n, alpha, beta_s, rule)
    # the truncated basis cannot supply more components than it has
    m = min(m, ds.k_trunc)
    n_comp = min(n_comp, ds.k_trunc)
    fit = fit_mle(ds.y, est.scores[:, :n_comp], family, config)
    slope_coeffs = est.phi_tilde[:, :m] @ fit.coefs[1 : m + 1]
    return FitResult(
        coefs=fit.coefs,
        slope=FunctionRep(slope_coeffs),
        m=m,
        n_components=n_comp,
        iterations=fit.iterations,
        grad_norm=fit.grad_norm,
        converged=fit.converged,
        separated=fit.separated,
    )


def loss(slope_hat: FunctionRep, gt: GroundTruth) -> float:
    """Squared L2 distance between estimated and true slope."""
    return norm_sq(slope_hat - gt.slope)
