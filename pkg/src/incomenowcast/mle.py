"""Weighted maximum likelihood for binary-response models.

Both links share one damped Newton (Fisher scoring) loop. Convergence is
declared when every component of the score of the average log-likelihood
(the raw score divided by the total weight) falls below ``tol``, so the
criterion does not depend on the scale of the frequency weights.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.special import expit, log_expit, log_ndtr, ndtr

from .errors import SeparationError, SingularModelError

MAX_ITER = 100
SCORE_TOL = 1e-8
SEPARATION_BOUND = 30.0
_NORM_LOGPDF_C = -0.5 * np.log(2.0 * np.pi)


@dataclass
class FitResult:
    coefficients: np.ndarray  # intercept first, matching the design columns
    loglik: float
    iterations: int
    converged: bool
    cov: np.ndarray  # inverse Fisher information at the optimum


def _logit_parts(eta, y, w):
    p = expit(eta)
    ll = float(np.sum(w * (y * log_expit(eta) + (1.0 - y) * log_expit(-eta))))
    resid = w * (y - p)
    info_w = w * p * (1.0 - p)
    return ll, resid, info_w


def _probit_parts(eta, y, w):
    log_pdf = _NORM_LOGPDF_C - 0.5 * eta * eta
    log_cdf = log_ndtr(eta)
    log_sf = log_ndtr(-eta)
    ll = float(np.sum(w * (y * log_cdf + (1.0 - y) * log_sf)))
    # d loglik / d eta: y*phi/Phi - (1-y)*phi/(1-Phi), computed in log space
    resid = w * (y * np.exp(log_pdf - log_cdf) - (1.0 - y) * np.exp(log_pdf - log_sf))
    info_w = w * np.exp(2.0 * log_pdf - log_cdf - log_sf)
    return ll, resid, info_w


_LINKS = {"logit": _logit_parts, "probit": _probit_parts}


def _diagnose_collinear(X: np.ndarray, w: np.ndarray, columns) -> list[str]:
    """Columns participating in a rank deficiency of sqrt(w)X.

    Columns are normalised first so the report is not driven by scale; every
    column with appreciable loading on a null-space direction is named.
    """
    A = X * np.sqrt(np.maximum(w, 0.0))[:, None]
    norms = np.linalg.norm(A, axis=0)
    norms[norms == 0] = 1.0
    A = A / norms
    _, s, vt = np.linalg.svd(A, full_matrices=False)
    tol = s.max() * max(A.shape) * np.finfo(float).eps if s.size else 0.0
    null = vt[s <= tol]
    if null.size == 0:
        null = vt[-1:]
    loading = np.max(np.abs(null), axis=0)
    involved = loading > 1e-6 * loading.max()
    return [columns[j] for j in np.flatnonzero(involved)]


def fit_binary_mle(
    X: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    link: str = "logit",
    columns=None,
    tol: float = SCORE_TOL,
    max_iter: int = MAX_ITER,
    separation_bound: float = SEPARATION_BOUND,
) -> FitResult:
    """Fit Pr(y=1 | x) = link(x'b) by weighted ML with damped Newton steps.

    Raises SeparationError when any coefficient diverges past
    ``separation_bound`` on the linear-predictor scale, and
    SingularModelError (naming the collinear columns) when the information
    matrix cannot be factorised.
    """
    if link not in _LINKS:
        raise ValueError(f"unknown link {link!r}")
    parts = _LINKS[link]
    n, k = X.shape
    if columns is None:
        columns = [f"x{j}" for j in range(k)]
    w_total = float(np.sum(w))
    if w_total <= 0:
        raise ValueError("non-positive total weight")

    beta = np.zeros(k)
    ll, resid, info_w = parts(X @ beta, y, w)
    converged = False
    iterations = 0
    info = None
    for iterations in range(1, max_iter + 1):
        score = X.T @ resid
        if np.max(np.abs(score)) / w_total < tol:
            converged = True
            iterations -= 1
            break
        info = (X * info_w[:, None]).T @ X
        try:
            c, low = linalg.cho_factor(info)
            step = linalg.cho_solve((c, low), score)
        except linalg.LinAlgError:
            raise SingularModelError(_diagnose_collinear(X, info_w, columns))
        # Halve the step until the log-likelihood stops getting worse.
        scale = 1.0
        for _ in range(40):
            candidate = beta + scale * step
            ll_new, resid_new, info_w_new = parts(X @ candidate, y, w)
            if ll_new >= ll - 1e-12 * (abs(ll) + 1.0):
                break
            scale *= 0.5
        beta, ll, resid, info_w = candidate, ll_new, resid_new, info_w_new
        if np.max(np.abs(beta)) > separation_bound:
            raise SeparationError("separation")

    info = (X * info_w[:, None]).T @ X
    try:
        c, low = linalg.cho_factor(info)
        cov = linalg.cho_solve((c, low), np.eye(k))
    except linalg.LinAlgError:
        raise SingularModelError(_diagnose_collinear(X, info_w, columns))
    return FitResult(beta, ll, iterations, converged, cov)
