"""Dense Gaussian and low-rank linear algebra shared by the model code.

Covariance conventions used throughout the package:

* a diagonal covariance is stored as a 1-D array of variances;
* a factor (loading) matrix is a ``(d, N)`` array, ``N`` may be 0;
* every density is returned in the log domain.
"""

import numpy as np
from scipy import linalg
from scipy.special import logsumexp

from .errors import DimensionMismatch, InvalidPriors, NotPositiveDefinite

LOG_2PI = np.log(2.0 * np.pi)

#: Lower bound applied to every diagonal variance.
VARIANCE_FLOOR = 1e-6


def floor_variance(sigma, floor=VARIANCE_FLOOR):
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 1 or sigma.size == 0:
        raise DimensionMismatch("diagonal covariance must be a non-empty 1-D array")
    if not np.all(np.isfinite(sigma)):
        raise ValueError("diagonal covariance has non-finite entries")
    return np.maximum(sigma, floor)


def check_symmetric(m, rtol=1e-12):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {m.shape}")
    scale = max(np.max(np.abs(m)), 1.0)
    if np.max(np.abs(m - m.T)) > rtol * scale:
        raise ValueError("matrix is not symmetric")
    return m


def chol_logdet(m):
    """Cholesky factor and log-determinant of a symmetric positive definite matrix.

    Returns
    -------
    logdet : float
    factor : ndarray
        Lower triangular ``L`` with ``L @ L.T == m``.

    Raises
    ------
    NotPositiveDefinite
        If any pivot of the factorization is not strictly positive.
    """
    m = check_symmetric(m)
    try:
        factor = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    diag = np.diag(factor)
    if not np.all(diag > 0):
        raise NotPositiveDefinite("non-positive pivot")
    return 2.0 * np.sum(np.log(diag)), factor


def _chol(m):
    # Internal variant without the symmetry check; m is built symmetric by construction.
    if m.shape[0] == 0:
        return 0.0, np.zeros((0, 0))
    try:
        factor = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    return 2.0 * np.sum(np.log(np.diag(factor))), factor


def _check_factor(sigma, b):
    sigma = np.asarray(sigma, dtype=float)
    b = np.asarray(b, dtype=float)
    if b.ndim != 2 or b.shape[0] != sigma.shape[0]:
        raise DimensionMismatch(f"factor shape {b.shape} does not match dimension {sigma.shape[0]}")
    if np.any(sigma <= 0):
        raise NotPositiveDefinite("diagonal covariance must be strictly positive")
    return sigma, b


def lowrank_inverse(sigma, b):
    """Return ``(diag(sigma) + b b^T)^{-1}`` using the Woodbury identity.

    Only the ``N x N`` matrix ``I + b^T diag(sigma)^{-1} b`` is factorized.
    """
    sigma, b = _check_factor(sigma, b)
    inv_sigma = 1.0 / sigma
    out = np.diag(inv_sigma)
    if b.shape[1] == 0:
        return out
    sb = b * inv_sigma[:, None]
    inner = np.eye(b.shape[1]) + b.T @ sb
    _, factor = _chol(inner)
    w = linalg.solve_triangular(factor, sb.T, lower=True)
    out -= w.T @ w
    return 0.5 * (out + out.T)


def lowrank_logdet(sigma, b):
    """``log|diag(sigma) + b b^T|`` by the matrix determinant lemma."""
    sigma, b = _check_factor(sigma, b)
    logdet = np.sum(np.log(sigma))
    if b.shape[1] == 0:
        return logdet
    inner = np.eye(b.shape[1]) + b.T @ (b / sigma[:, None])
    return logdet + _chol(inner)[0]


def _logpdf_centered(r, factor, logdet):
    # r: (..., d) residuals; factor: lower Cholesky of the covariance
    d = factor.shape[0]
    flat = r.reshape(-1, d)
    w = linalg.solve_triangular(factor, flat.T, lower=True)
    quad = np.einsum("ij,ij->j", w, w)
    out = -0.5 * (d * LOG_2PI + logdet + quad)
    return out.reshape(r.shape[:-1])


def mvn_logpdf(x, mean, cov):
    """Log density of ``x`` (``(d,)`` or ``(n, d)``) under ``N(mean, cov)``."""
    x = np.asarray(x, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if x.shape[-1] != cov.shape[0]:
        raise DimensionMismatch("vector and covariance dimensions differ")
    logdet, factor = _chol(cov)
    out = _logpdf_centered(x - mean, factor, logdet)
    return float(out) if out.ndim == 0 else out


def pair_gauss_logpdf(xt, xs, mu, diag_block, off_block):
    """Log density of the stacked pair ``[xt; xs]``.

    The pair is Gaussian with mean ``[mu; mu]`` and covariance
    ``[[D, O], [O, D]]``. The density is evaluated in the rotated
    coordinates ``(xt + xs)/sqrt(2)`` and ``(xt - xs)/sqrt(2)``, whose
    covariances ``D + O`` and ``D - O`` are independent, so only two
    ``d x d`` factorizations are needed and the result is exactly
    symmetric in ``xt`` and ``xs``.

    ``xt`` and ``xs`` may be ``(d,)`` vectors or ``(n, d)`` batches.
    """
    xt = np.asarray(xt, dtype=float)
    xs = np.asarray(xs, dtype=float)
    mu = np.asarray(mu, dtype=float)
    diag_block = np.asarray(diag_block, dtype=float)
    off_block = np.asarray(off_block, dtype=float)
    d = mu.shape[0]
    if xt.shape != xs.shape or xt.shape[-1] != d or diag_block.shape != (d, d) or off_block.shape != (d, d):
        raise DimensionMismatch("pair, mean and covariance blocks must share dimension d")
    logdet_p, fac_p = _chol(diag_block + off_block)
    logdet_m, fac_m = _chol(diag_block - off_block)
    root2 = np.sqrt(2.0)
    y_plus = (xt + xs) / root2 - root2 * mu
    y_minus = (xt - xs) / root2
    out = _logpdf_centered(y_plus, fac_p, logdet_p) + _logpdf_centered(y_minus, fac_m, logdet_m)
    return float(out) if out.ndim == 0 else out


def log_mixture(logliks, priors):
    """``log sum_k priors[k] * exp(logliks[k])`` along the first axis.

    Components with zero prior are dropped, so a prior concentrated on one
    component returns that component's log likelihood exactly.
    """
    priors = np.asarray(priors, dtype=float)
    if np.any(priors < 0) or not np.all(np.isfinite(priors)):
        raise InvalidPriors(f"priors must be finite and non-negative: {priors}")
    keep = np.flatnonzero(priors > 0)
    if keep.size == 0:
        raise InvalidPriors("all priors are zero")
    logliks = [np.asarray(logliks[k], dtype=float) for k in keep]
    if len(keep) == 1:
        p = priors[keep[0]]
        return logliks[0] if p == 1.0 else logliks[0] + np.log(p)
    return logsumexp(np.stack(logliks), axis=0, b=priors[keep].reshape((-1,) + (1,) * logliks[0].ndim))


def grouped_loglik(sigma, b, counts, sums, sumsq):
    """Log likelihood of grouped data whose groups share one latent vector.

    Each group ``g`` holds ``counts[g]`` centred samples that share a latent
    ``z ~ N(0, I)``; sample ``k`` is ``b z + eps_k`` with
    ``eps_k ~ N(0, diag(sigma))``. The stacked group covariance is inverted
    with the matrix-inversion lemma, so the cost is one ``N x N``
    factorization per distinct group size.

    Parameters
    ----------
    sigma : (d,) array
    b : (d, N) array
    counts : (G,) int array
    sums : (G, d) array
        Per-group sums of centred samples.
    sumsq : (d,) array
        Per-coordinate sum of squared centred samples over all groups.
    """
    sigma, b = _check_factor(sigma, b)
    counts = np.asarray(counts)
    sums = np.asarray(sums, dtype=float)
    n = counts.sum()
    d = sigma.shape[0]
    total = n * (d * LOG_2PI + np.sum(np.log(sigma))) + np.sum(sumsq / sigma)
    if b.shape[1] > 0:
        sb = b / sigma[:, None]
        k = b.T @ sb
        proj = sums @ sb
        eye = np.eye(b.shape[1])
        for h in np.unique(counts):
            rows = counts == h
            logdet_m, factor = _chol(eye + h * k)
            w = linalg.solve_triangular(factor, proj[rows].T, lower=True)
            total += rows.sum() * logdet_m - np.sum(w * w)
    return -0.5 * total
