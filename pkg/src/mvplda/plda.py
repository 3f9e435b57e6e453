"""Classical PLDA: EM training and verification scoring.

The model is ``x = mu + B z + eps`` with ``z ~ N(0, I)`` shared by every
vector of a class and ``eps ~ N(0, diag(sigma))``. The mean is fixed to
the global sample mean; EM then updates ``B`` and ``sigma``.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .data import Dataset, GroupedData, group_data
from .errors import DimensionMismatch, EmptyDataset, NotPositiveDefinite, SingularAccumulator
from .gaussmath import (
    _chol,
    floor_variance,
    grouped_loglik,
    lowrank_inverse,
    mvn_logpdf,
    pair_gauss_logpdf,
)

DEFAULT_ITERATIONS = 10
DEFAULT_RANK = 40


@dataclass(frozen=True, eq=False)
class PldaModel:
    mu: np.ndarray
    b: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        b = np.asarray(self.b, dtype=float)
        sigma = floor_variance(self.sigma)
        if mu.shape != sigma.shape or b.ndim != 2 or b.shape[0] != mu.shape[0]:
            raise DimensionMismatch(f"inconsistent shapes mu={mu.shape} b={b.shape} sigma={sigma.shape}")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(b))):
            raise ValueError("model parameters must be finite")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "sigma", sigma)

    @property
    def dim(self):
        return self.mu.shape[0]

    @property
    def rank(self):
        return self.b.shape[1]

    def between_cov(self):
        return self.b @ self.b.T

    def total_cov(self):
        return self.between_cov() + np.diag(self.sigma)


@dataclass(frozen=True)
class ClassStats:
    """Posterior moments of the latent vector of every class.

    Row ``g`` of ``mean`` is ``E[z_g]`` and ``second[g]`` is ``E[z_g z_g^T]``.
    """

    counts: np.ndarray
    mean: np.ndarray
    second: np.ndarray

    def __len__(self):
        return self.counts.shape[0]

    def covariance(self):
        return self.second - np.einsum("gi,gj->gij", self.mean, self.mean)


def posterior_moments(sigma, b, counts, sums):
    """Posterior mean and second moment of ``z`` given group sums.

    For a group of ``H`` centred vectors with sum ``s`` the posterior is
    ``N(P b^T Sigma^{-1} s, P)`` with ``P = (I + H b^T Sigma^{-1} b)^{-1}``.
    """
    sb = b / sigma[:, None]
    rank = b.shape[1]
    k = b.T @ sb
    proj = sums @ sb
    mean = np.empty((counts.shape[0], rank))
    cov = np.empty((counts.shape[0], rank, rank))
    eye = np.eye(rank)
    for h in np.unique(counts):
        rows = counts == h
        _, factor = _chol(eye + h * k)
        p = linalg.cho_solve((factor, True), eye) if rank else eye
        p = 0.5 * (p + p.T)
        mean[rows] = proj[rows] @ p
        cov[rows] = p
    second = cov + np.einsum("gi,gj->gij", mean, mean)
    return mean, second


def _shifted_sums(grouped, mu):
    shift = grouped.mu - mu
    if not np.any(shift):
        return grouped.sums
    return grouped.sums + grouped.counts[:, None] * shift


def plda_estep(model, grouped):
    """E-step: posterior moments of every class latent.

    Parameters
    ----------
    model : PldaModel
    grouped : GroupedData
        Class-grouped statistics, see :func:`mvplda.data.group_data`.
    """
    if grouped.sums.shape[1] != model.dim:
        raise DimensionMismatch("data and model dimensions differ")
    sums = _shifted_sums(grouped, model.mu)
    mean, second = posterior_moments(model.sigma, model.b, grouped.counts, sums)
    return ClassStats(counts=grouped.counts, mean=mean, second=second)


def _solve_accumulator(acc_zz, acc_xz):
    try:
        factor = np.linalg.cholesky(acc_zz)
    except np.linalg.LinAlgError:
        raise SingularAccumulator("second-moment accumulator is not invertible") from None
    return linalg.cho_solve((factor, True), acc_xz.T).T


def plda_mstep(stats, grouped):
    """M-step: closed-form update of ``B`` and ``sigma`` with the mean fixed.

    ``B = [sum_g s_g E[z_g]^T] [sum_g H_g E[z_g z_g^T]]^{-1}`` and
    ``sigma = diag(sum (x-mu)(x-mu)^T - sum s_g E[z_g]^T B^T) / n``.
    """
    if len(stats) != grouped.counts.shape[0]:
        raise DimensionMismatch("statistics do not cover every class")
    acc_xz = grouped.sums.T @ stats.mean
    acc_zz = np.einsum("g,gij->ij", grouped.counts.astype(float), stats.second)
    if stats.mean.shape[1]:
        b = _solve_accumulator(acc_zz, acc_xz)
    else:
        b = np.zeros((grouped.sums.shape[1], 0))
    sigma = (grouped.sumsq - np.sum(acc_xz * b, axis=1)) / grouped.n
    return PldaModel(mu=grouped.mu, b=b, sigma=sigma)


def plda_loglik(model, grouped):
    """Class-factorized log likelihood of the grouped data."""
    return grouped_loglik(
        model.sigma, model.b, grouped.counts, _shifted_sums(grouped, model.mu), _shifted_sumsq(grouped, model.mu)
    )


def _shifted_sumsq(grouped, mu):
    shift = grouped.mu - mu
    if not np.any(shift):
        return grouped.sumsq
    # sum (r + c)^2 = sum r^2 + 2 c sum r + n c^2
    return grouped.sumsq + 2 * shift * grouped.sums.sum(axis=0) + grouped.n * shift**2


def _class_groups(data, labels):
    if isinstance(data, Dataset):
        x = data.x
        if labels is None:
            labels = data.cells()[0]
    else:
        x = np.asarray(data, dtype=float)
        if labels is None:
            raise ValueError("labels are required when training from a bare array")
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyDataset("no training vectors")
    labels = np.unique(np.asarray(labels), return_inverse=True)[1]
    return x, labels


def init_plda(x, rank, seed):
    """Seeded starting point: small random ``B``, empirical diagonal ``sigma``."""
    rng = np.random.default_rng(seed)
    std = x.std(axis=0)
    b = 0.1 * std[:, None] * rng.standard_normal((x.shape[1], rank))
    return PldaModel(mu=x.mean(axis=0), b=b, sigma=x.var(axis=0))


def plda_train(data, labels=None, iterations=DEFAULT_ITERATIONS, rank=DEFAULT_RANK, seed=0, init=None):
    """Train PLDA by EM.

    Parameters
    ----------
    data : Dataset or (n, d) array
        With a :class:`Dataset` and no ``labels`` the class of a vector is its
        ``(label_a, label_b)`` cell.
    labels : array of class ids, optional
    iterations : int
        Fixed number of EM iterations; there is no early stop.
    rank : int
        Subspace dimension ``N``.
    seed : int
    init : PldaModel, optional
        Starting model; its mean is replaced by the global sample mean.

    Returns
    -------
    model : PldaModel
    trace : list of float
        Log likelihood after every M-step.
    """
    x, labels = _class_groups(data, labels)
    if labels.max() < 1:
        raise ValueError("at least two classes are required")
    if rank < 1:
        raise ValueError("rank must be at least 1")
    grouped = group_data(x, labels)
    if init is None:
        model = init_plda(x, rank, seed)
    else:
        model = PldaModel(mu=grouped.mu, b=init.b, sigma=init.sigma)
    trace = []
    for _ in range(iterations):
        model = plda_mstep(plda_estep(model, grouped), grouped)
        trace.append(float(plda_loglik(model, grouped)))
    return model, trace


def plda_llr_naive(model, xt, xs):
    """Same-class versus different-class log likelihood ratio by dense Gaussians."""
    between = model.between_cov()
    total = between + np.diag(model.sigma)
    num = pair_gauss_logpdf(xt, xs, model.mu, total, between)
    # grouping the marginals keeps the score exactly symmetric in the pair
    return num - (mvn_logpdf(xt, model.mu, total) + mvn_logpdf(xs, model.mu, total))


@dataclass(frozen=True, eq=False)
class FastScorer:
    """Precomputed quadratic-form scorer ``0.5 (a'Qa + 2 a'Pb + b'Qb) + constant``."""

    q: np.ndarray
    p: np.ndarray
    constant: float
    mu: np.ndarray


def plda_scorer_precompute(model):
    """Build the fast scorer of ``model`` factorizing only ``N x N`` matrices.

    With ``S1 = BB^T + Sigma`` and ``S2 = BB^T``,
    ``Q = S1^{-1} - Y`` and ``P = S1^{-1} S2 Y`` where
    ``Y = (S1 - S2 S1^{-1} S2)^{-1} = (Sigma + B X B^T)^{-1}`` and
    ``X = I - B^T S1^{-1} B = (I + B^T Sigma^{-1} B)^{-1}``.
    """
    b, sigma = model.b, model.sigma
    rank = b.shape[1]
    k = b.T @ (b / sigma[:, None])
    eye = np.eye(rank)
    logdet_1, fac_1 = _chol(eye + k)
    logdet_2, _ = _chol(eye + 2 * k)
    s1_inv = lowrank_inverse(sigma, b)
    if rank:
        x_mat = linalg.cho_solve((fac_1, True), eye)
        try:
            x_root = np.linalg.cholesky(0.5 * (x_mat + x_mat.T))
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite("(I + B^T Sigma^-1 B)^-1 lost definiteness") from None
        y = lowrank_inverse(sigma, b @ x_root)
    else:
        y = s1_inv.copy()
    q = s1_inv - y
    p = (s1_inv @ b) @ (b.T @ y)
    # log N(0|0,[[S1,S2],[S2,S1]]) - 2 log N(0|0,S1) with determinant-lemma log-dets
    constant = logdet_1 - 0.5 * logdet_2
    return FastScorer(q=0.5 * (q + q.T), p=0.5 * (p + p.T), constant=float(constant), mu=model.mu.copy())


def plda_llr_fast(scorer, xt, xs):
    xt = np.asarray(xt, dtype=float)
    xs = np.asarray(xs, dtype=float)
    if xt.shape != xs.shape or xt.shape[-1] != scorer.mu.shape[0]:
        raise DimensionMismatch("pair dimensions do not match the scorer")
    # a'Qa + 2a'Pc + c'Qc in the rotated coordinates (a+c), (a-c), which
    # makes the score exactly symmetric in the pair
    plus = xt + xs - 2.0 * scorer.mu
    minus = xt - xs
    quad = np.einsum("...i,ij,...j->...", plus, scorer.q + scorer.p, plus) + np.einsum(
        "...i,ij,...j->...", minus, scorer.q - scorer.p, minus
    )
    out = 0.25 * quad + scorer.constant
    return float(out) if out.ndim == 0 else out
