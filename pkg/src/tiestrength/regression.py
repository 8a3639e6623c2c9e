"""Ordinary least squares with standard errors and t-values."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PerfectFitError, SingularDesignError

# Ordinal target encoding for the three retained subgroups.
SUBGROUP_TARGET = {"acquaintance": 1.0, "friend": 2.0, "best_friend": 3.0}


@dataclass(frozen=True)
class OLSFit:
    coefficients: np.ndarray  # intercept first
    standard_errors: np.ndarray
    t_values: np.ndarray
    residual_variance: float
    n_observations: int
    n_predictors: int

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return self.coefficients[0] + X @ self.coefficients[1:]


def fit_ols(X, y, *, allow_perfect_fit: bool = False) -> OLSFit:
    """Least squares with an intercept, solved through a QR factorization.

    Standard errors use the unbiased residual variance ``RSS / (n - p - 1)``.
    A zero residual variance makes the t-values undefined and raises
    ``PerfectFitError``, unless ``allow_perfect_fit`` is set, in which case
    standard errors are 0 and t-values NaN.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, p = X.shape
    if y.shape != (n,):
        raise ValueError(f"X has {n} rows but y has shape {y.shape}")
    if n <= p + 1:
        raise ValueError(f"need more than {p + 1} observations for {p} predictors, got {n}")

    A = np.column_stack([np.ones(n), X])
    Q, R = np.linalg.qr(A, mode="reduced")
    diag = np.abs(np.diag(R))
    col_scale = np.linalg.norm(A, axis=0)
    if np.any(diag <= 1e-10 * np.maximum(col_scale, 1.0)) or np.linalg.matrix_rank(A) < p + 1:
        raise SingularDesignError(f"design matrix (with intercept) is rank deficient: {n}x{p + 1}")

    beta = np.linalg.solve(R, Q.T @ y)
    resid = y - A @ beta
    dof = n - p - 1
    rss = float(resid @ resid)
    sigma2 = rss / dof

    scale = max(float(np.max(np.abs(y))), 1.0)
    if sigma2 <= (1e-12 * scale) ** 2:
        if not allow_perfect_fit:
            raise PerfectFitError("residual variance is zero; t-values are undefined")
        k = p + 1
        return OLSFit(beta, np.zeros(k), np.full(k, np.nan), 0.0, n, p)

    # (A'A)^-1 = R^-1 R^-T
    Rinv = np.linalg.solve(R, np.eye(p + 1))
    cov_diag = np.sum(Rinv * Rinv, axis=1)
    se = np.sqrt(sigma2 * cov_diag)
    return OLSFit(beta, se, beta / se, sigma2, n, p)


def lr_importances(fit: OLSFit) -> np.ndarray:
    """Absolute t-values of the slopes (intercept dropped)."""
    return np.abs(np.asarray(fit.t_values[1:], dtype=float))


def subgroup_targets(subgroups) -> np.ndarray:
    try:
        return np.array([SUBGROUP_TARGET[s] for s in subgroups], dtype=float)
    except KeyError as exc:
        raise ValueError(f"subgroup {exc.args[0]!r} has no regression target") from None
