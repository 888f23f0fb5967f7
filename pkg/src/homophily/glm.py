"""Binary logistic regression fit by iteratively reweighted least squares.

This is the single model family used by every estimation strategy.  The
default fit is unpenalized maximum likelihood, because the unbiasedness
argument for the dyadic estimator needs exact score-equation orthogonality
(sum of design-weighted residuals equal to zero).  A small ridge penalty is
applied only as a flagged fallback when the unpenalized fit separates or
fails to converge.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .errors import (DegenerateLabelsError, EmptyTrainingSetError,
                     InvalidParameterError, NumericalError)

__all__ = ["DesignMatrix", "FittedModel", "fit_logistic", "predict"]

MAX_ITER = 100
BETA_TOL = 1e-8
MAX_HALVINGS = 20
SEPARATION_BETA_MAX = 30.0
RIDGE_LAMBDA = 1e-4
_FIT_EPS = 1e-12


@dataclass(frozen=True)
class DesignMatrix:
    """Feature matrix with a leading intercept column.

    row_keys optionally carries a node id or (ego, alter) pair per row for
    bookkeeping; it plays no role in fitting.
    """

    rows: np.ndarray
    col_names: tuple[str, ...]
    row_keys: np.ndarray | None = None

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "col_names", tuple(self.col_names))
        if rows.ndim != 2 or rows.shape[1] != len(self.col_names):
            raise InvalidParameterError("design shape does not match col_names")
        if not np.all(np.isfinite(rows)):
            raise InvalidParameterError("design matrix has non-finite entries")

    def select(self, row_mask) -> "DesignMatrix":
        keys = None if self.row_keys is None else self.row_keys[row_mask]
        return DesignMatrix(self.rows[row_mask], self.col_names, keys)


@dataclass(frozen=True)
class FittedModel:
    beta: np.ndarray
    col_names: tuple[str, ...]
    converged: bool
    iterations: int
    ridge_used: bool
    ridge_lambda: float
    fitted: np.ndarray    # training-row probabilities, in (0, 1)
    residual: np.ndarray  # label - fitted on training rows


def _log_likelihood(eta, y, beta=None, lam=0.0):
    ll = float(np.sum(y * eta - np.logaddexp(0.0, eta)))
    if lam > 0.0 and beta is not None:
        ll -= 0.5 * lam * float(np.sum(beta[1:] ** 2))  # intercept unpenalized
    return ll


def _irls(X, y, lam):
    """One Newton/IRLS run with step-halving.  Returns (beta, converged, iters)."""
    n_rows, n_cols = X.shape
    beta = np.zeros(n_cols)
    eta = X @ beta
    ll = _log_likelihood(eta, y, beta, lam)
    pen = np.zeros(n_cols)
    if lam > 0.0:
        pen[1:] = lam
    converged = False
    it = 0
    for it in range(1, MAX_ITER + 1):
        mu = expit(eta)
        w = np.clip(mu * (1.0 - mu), _FIT_EPS, None)
        grad = X.T @ (y - mu) - pen * beta
        hess = (X * w[:, None]).T @ X + np.diag(pen)
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            if lam > 0.0:
                raise NumericalError("singular weighted normal equations")
            return beta, False, it  # let caller fall back to ridge
        # step-halving keeps the penalized log-likelihood nondecreasing
        scale = 1.0
        for _ in range(MAX_HALVINGS + 1):
            beta_new = beta + scale * step
            eta_new = X @ beta_new
            ll_new = _log_likelihood(eta_new, y, beta_new, lam)
            if ll_new >= ll - 1e-12:
                break
            scale *= 0.5
        delta = np.max(np.abs(beta_new - beta))
        beta, eta, ll = beta_new, eta_new, ll_new
        if delta < BETA_TOL:
            converged = True
            break
    return beta, converged, it


def fit_logistic(X: DesignMatrix, y) -> FittedModel:
    """Maximum-likelihood logistic fit via IRLS.

    Converges when the max coefficient change drops below 1e-8 (at most
    100 iterations).  On separation or non-convergence the model is refit
    with ridge penalty lambda=1e-4 and flagged via ``ridge_used``.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.size != X.rows.shape[0]:
        raise InvalidParameterError("label length does not match design rows")
    if y.size == 0:
        raise EmptyTrainingSetError("no training rows")
    if np.all(y == y[0]):
        raise DegenerateLabelsError("training labels contain a single class")
    if y.size < X.rows.shape[1]:
        raise InvalidParameterError("fewer rows than columns")

    beta, converged, iters = _irls(X.rows, y, lam=0.0)
    ridge_used = False
    if not converged or np.max(np.abs(beta)) > SEPARATION_BETA_MAX:
        beta, converged, iters = _irls(X.rows, y, lam=RIDGE_LAMBDA)
        ridge_used = True
    fitted = np.clip(expit(X.rows @ beta), _FIT_EPS, 1.0 - _FIT_EPS)
    return FittedModel(beta=beta, col_names=X.col_names, converged=converged,
                       iterations=iters, ridge_used=ridge_used,
                       ridge_lambda=RIDGE_LAMBDA if ridge_used else 0.0,
                       fitted=fitted, residual=y - fitted)


def predict(model: FittedModel, X: DesignMatrix) -> np.ndarray:
    """Inverse-logit of the linear predictor; values strictly inside (0, 1)."""
    if X.col_names != model.col_names:
        raise InvalidParameterError(
            f"column mismatch: {X.col_names} vs {model.col_names}")
    return np.clip(expit(X.rows @ model.beta), _FIT_EPS, 1.0 - _FIT_EPS)
