"""Multi-view (joint) PLDA.

Every vector carries two labels and is modelled as::

    x_ijk = mu + S u_i + T v_j + eps_ijk

with ``u_i ~ N(0, I)`` tied to the view-A label ``i`` (speaker),
``v_j ~ N(0, I)`` tied to the view-B label ``j`` (phrase) and
``eps ~ N(0, diag(sigma))``.

Training follows the per-cell EM: the posterior of ``z_ij = [u_i; v_j]``
conditions on the vectors of cell ``(i, j)`` only. Verification compares
the hypothesis that a pair shares both latents against a prior-weighted
mixture of the alternatives.
"""

from dataclasses import dataclass

import numpy as np

from .data import Dataset, group_data
from .errors import DimensionMismatch, EmptyDataset, InvalidPriors
from .gaussmath import floor_variance, grouped_loglik, log_mixture, pair_gauss_logpdf
from .plda import _shifted_sums, _shifted_sumsq, _solve_accumulator, posterior_moments

DEFAULT_ITERATIONS = 10
DEFAULT_RANK_U = 20
DEFAULT_RANK_V = 20


@dataclass(frozen=True, eq=False)
class JointPldaModel:
    mu: np.ndarray
    s: np.ndarray
    t: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        sigma = floor_variance(self.sigma)
        d = mu.shape[0] if mu.ndim == 1 else -1
        s = np.asarray(self.s, dtype=float)
        t = np.asarray(self.t, dtype=float)
        # zero-column factors may arrive as empty arrays of any shape
        s = s.reshape(d, 0) if s.size == 0 else s
        t = t.reshape(d, 0) if t.size == 0 else t
        if mu.ndim != 1 or sigma.shape != mu.shape or s.ndim != 2 or t.ndim != 2 or s.shape[0] != d or t.shape[0] != d:
            raise DimensionMismatch(f"inconsistent shapes mu={mu.shape} s={s.shape} t={t.shape} sigma={sigma.shape}")
        if s.shape[1] + t.shape[1] < 1:
            raise ValueError("at least one latent dimension is required")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(s)) and np.all(np.isfinite(t))):
            raise ValueError("model parameters must be finite")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "sigma", sigma)

    @property
    def dim(self):
        return self.mu.shape[0]

    @property
    def n_u(self):
        return self.s.shape[1]

    @property
    def n_v(self):
        return self.t.shape[1]

    @property
    def b(self):
        """Stacked loading matrix ``[S T]``."""
        return np.hstack([self.s, self.t])

    def total_cov(self):
        return self.s @ self.s.T + self.t @ self.t.T + np.diag(self.sigma)


@dataclass(frozen=True)
class CellStats:
    """Posterior moments of ``z = [u; v]`` for every cell.

    ``pairs[g]`` is the ``(label_a, label_b)`` pair of cell ``g`` when known.
    The ``u``/``v`` accessors are views into ``mean`` and ``second``.
    """

    counts: np.ndarray
    mean: np.ndarray
    second: np.ndarray
    n_u: int
    pairs: np.ndarray = None

    def __len__(self):
        return self.counts.shape[0]

    @property
    def u(self):
        return self.mean[:, : self.n_u]

    @property
    def v(self):
        return self.mean[:, self.n_u :]

    @property
    def uu(self):
        return self.second[:, : self.n_u, : self.n_u]

    @property
    def vv(self):
        return self.second[:, self.n_u :, self.n_u :]

    @property
    def uv(self):
        return self.second[:, : self.n_u, self.n_u :]

    def covariance(self):
        return self.second - np.einsum("gi,gj->gij", self.mean, self.mean)


@dataclass(frozen=True)
class ShareSpec:
    """Which latent variables a pair of vectors has in common."""

    share_u: bool
    share_v: bool


SAME_BOTH = ShareSpec(True, True)
DIFF_U_SAME_V = ShareSpec(False, True)
SAME_U_DIFF_V = ShareSpec(True, False)
DIFF_BOTH = ShareSpec(False, False)


def _check_sum(values, what):
    values = np.asarray(values, dtype=float)
    if np.any(values < 0) or np.any(values > 1) or not np.all(np.isfinite(values)):
        raise InvalidPriors(f"{what} priors must lie in [0, 1]: {values}")
    if abs(values.sum() - 1.0) > 1e-12:
        raise InvalidPriors(f"{what} priors must sum to 1, got {values.sum()!r}")


@dataclass(frozen=True)
class HypothesisPriors:
    """Priors of the alternative models in the joint test.

    ``p1``: different u, same v; ``p2``: same u, different v;
    ``p3``: different u and v.
    """

    p1: float = 1 / 3
    p2: float = 1 / 3
    p3: float = 1 / 3

    def __post_init__(self):
        _check_sum([self.p1, self.p2, self.p3], "joint-test")


@dataclass(frozen=True)
class ViewPriors:
    """Priors of the single-view test.

    For view A, ``p0``/``p1`` weight same-u models (same v / different v)
    in the numerator and ``p2``/``p3`` weight different-u models (same v /
    different v) in the denominator. View B swaps the roles of u and v.
    """

    p0: float = 0.5
    p1: float = 0.5
    p2: float = 0.5
    p3: float = 0.5

    def __post_init__(self):
        _check_sum([self.p0, self.p1], "numerator")
        _check_sum([self.p2, self.p3], "denominator")


def jplda_estep(model, grouped, pairs=None):
    """Per-cell posterior moments of ``[u_i; v_j]``.

    ``grouped`` holds the cell-grouped statistics (one group per cell).
    """
    if grouped.sums.shape[1] != model.dim:
        raise DimensionMismatch("data and model dimensions differ")
    sums = _shifted_sums(grouped, model.mu)
    mean, second = posterior_moments(model.sigma, model.b, grouped.counts, sums)
    return CellStats(counts=grouped.counts, mean=mean, second=second, n_u=model.n_u, pairs=pairs)


def jplda_mstep(stats, grouped, model):
    """Closed-form parameter update.

    ``S`` is re-estimated with the current ``T``, then ``T`` with the new
    ``S``, then ``sigma`` with both new loadings. The mean stays at the
    global sample mean.
    """
    if len(stats) != grouped.counts.shape[0]:
        raise DimensionMismatch("statistics do not cover every cell")
    h = grouped.counts.astype(float)
    sums = grouped.sums
    acc_xu = sums.T @ stats.u
    acc_xv = sums.T @ stats.v
    s, t = model.s, model.t
    if stats.n_u:
        acc_uu = np.einsum("g,gij->ij", h, stats.uu)
        acc_vu = np.einsum("g,gij->ji", h, stats.uv)
        s = _solve_accumulator(acc_uu, acc_xu - t @ acc_vu)
    if t.shape[1]:
        acc_vv = np.einsum("g,gij->ij", h, stats.vv)
        acc_uv = np.einsum("g,gij->ij", h, stats.uv)
        t = _solve_accumulator(acc_vv, acc_xv - s @ acc_uv)
    sigma = (grouped.sumsq - np.sum(acc_xu * s, axis=1) - np.sum(acc_xv * t, axis=1)) / grouped.n
    return JointPldaModel(mu=grouped.mu, s=s, t=t, sigma=sigma)


def loglik_dataset(model, grouped):
    """Cell-factorized log likelihood.

    The vectors of each cell share ``(u_i, v_j)``; distinct cells are
    independent. Returns the sum over cells of the stacked-Gaussian log
    density.
    """
    return grouped_loglik(
        model.sigma, model.b, grouped.counts, _shifted_sums(grouped, model.mu), _shifted_sumsq(grouped, model.mu)
    )


def _label_means(r, labels):
    n = labels.max() + 1
    sums = np.zeros((n, r.shape[1]))
    np.add.at(sums, labels, r)
    return sums / np.bincount(labels, minlength=n)[:, None]


def _scatter_basis(means, rank):
    cov = means.T @ means / means.shape[0]
    w, vecs = np.linalg.eigh(cov)
    order = np.argsort(w)[::-1][:rank]
    return vecs[:, order] * np.sqrt(np.maximum(w[order], 0.0))


def init_jplda(dataset, n_u, n_v, seed=0, method="scatter"):
    """Starting model for EM.

    ``method="random"`` draws ``[S T]`` exactly like :func:`mvplda.plda.init_plda`
    (same seed, same draws), so a model with ``n_v = 0`` starts where PLDA
    with ``rank = n_u`` starts.

    ``method="scatter"`` takes ``S`` from the leading eigenvectors of the
    scatter of the view-A label means and ``T`` from that of the view-B
    label means, plus a small seeded perturbation so that no column is
    exactly zero. This assigns each subspace to its own label view from
    the start.
    """
    x = dataset.x
    rng = np.random.default_rng(seed)
    std = x.std(axis=0)
    jitter = 0.1 * std[:, None] * rng.standard_normal((x.shape[1], n_u + n_v))
    mu = x.mean(axis=0)
    if method == "random":
        b = jitter
    elif method == "scatter":
        r = x - mu
        b = 0.1 * jitter
        b[:, :n_u] += _pad(_scatter_basis(_label_means(r, dataset.label_a), n_u), n_u)
        b[:, n_u:] += _pad(_scatter_basis(_label_means(r, dataset.label_b), n_v), n_v)
    else:
        raise ValueError(f"unknown init method {method!r}")
    return JointPldaModel(mu=mu, s=b[:, :n_u], t=b[:, n_u:], sigma=x.var(axis=0))


def _pad(basis, rank):
    if basis.shape[1] < rank:
        basis = np.hstack([basis, np.zeros((basis.shape[0], rank - basis.shape[1]))])
    return basis


def jplda_train(
    dataset,
    iterations=DEFAULT_ITERATIONS,
    n_u=DEFAULT_RANK_U,
    n_v=DEFAULT_RANK_V,
    seed=0,
    init=None,
    init_method="scatter",
):
    """Train a joint PLDA model by EM.

    Returns the trained model and the log likelihood after every M-step.
    ``init`` overrides the seeded starting model (its mean is replaced by
    the global sample mean).
    """
    if not isinstance(dataset, Dataset):
        raise TypeError("jplda_train needs a Dataset with both label views")
    if len(dataset) == 0:
        raise EmptyDataset("no training vectors")
    if dataset.n_a < 2 or dataset.n_b < 2:
        raise ValueError("at least two labels per view are required")
    if n_u < 0 or n_v < 0 or n_u + n_v < 1:
        raise ValueError("subspace dimensions must be non-negative and not both zero")
    cell_index, pairs = dataset.cells()
    grouped = group_data(dataset.x, cell_index)
    if init is None:
        model = init_jplda(dataset, n_u, n_v, seed=seed, method=init_method)
    else:
        model = JointPldaModel(mu=grouped.mu, s=init.s, t=init.t, sigma=init.sigma)
    trace = []
    for _ in range(iterations):
        stats = jplda_estep(model, grouped, pairs)
        model = jplda_mstep(stats, grouped, model)
        trace.append(float(loglik_dataset(model, grouped)))
    return model, trace


def pair_covariances(model, share):
    """Diagonal and off-diagonal blocks of the pair covariance under ``share``."""
    ss = model.s @ model.s.T
    tt = model.t @ model.t.T
    diag = ss + tt + np.diag(model.sigma)
    off = np.zeros_like(diag)
    if share.share_u:
        off = off + ss
    if share.share_v:
        off = off + tt
    return diag, off


def pair_loglik(model, xt, xs, share):
    """Log density of the pair under the given sharing of ``u`` and ``v``."""
    diag, off = pair_covariances(model, share)
    return pair_gauss_logpdf(xt, xs, model.mu, diag, off)


def _all_pair_logliks(model, xt, xs):
    return {spec: pair_loglik(model, xt, xs, spec) for spec in (SAME_BOTH, DIFF_U_SAME_V, SAME_U_DIFF_V, DIFF_BOTH)}


def jplda_llr(model, xt, xs, priors=None):
    """Joint verification score.

    ``log P(pair | same u and v) - log P(pair | H1)`` where H1 mixes
    (different u, same v), (same u, different v) and (different u and v)
    with weights ``p1, p2, p3``.
    """
    priors = HypothesisPriors() if priors is None else priors
    ll = _all_pair_logliks(model, xt, xs)
    den = log_mixture([ll[DIFF_U_SAME_V], ll[SAME_U_DIFF_V], ll[DIFF_BOTH]], [priors.p1, priors.p2, priors.p3])
    return ll[SAME_BOTH] - den


def jplda_llr_view(model, xt, xs, view="a", priors=None):
    """Single-view score: do the two vectors share ``u`` (view A) or ``v`` (view B)?

    The other latent variable is marginalized as a two-component mixture
    in both numerator and denominator.
    """
    priors = ViewPriors() if priors is None else priors
    ll = _all_pair_logliks(model, xt, xs)
    if view in ("a", "A"):
        num = [ll[SAME_BOTH], ll[SAME_U_DIFF_V]]
        den = [ll[DIFF_U_SAME_V], ll[DIFF_BOTH]]
    elif view in ("b", "B"):
        num = [ll[SAME_BOTH], ll[DIFF_U_SAME_V]]
        den = [ll[SAME_U_DIFF_V], ll[DIFF_BOTH]]
    else:
        raise ValueError(f"view must be 'a' or 'b', got {view!r}")
    return log_mixture(num, [priors.p0, priors.p1]) - log_mixture(den, [priors.p2, priors.p3])
