"""Ground-truth models and datasets drawn from the joint PLDA generative model.

Random streams
--------------
All draws use numpy's PCG64 generator seeded through
``numpy.random.SeedSequence``. For a config seed ``s`` the streams are::

    truth           SeedSequence(s, spawn_key=(0,))
    split k, u_i    SeedSequence(s, spawn_key=(1 + k, 0))
    split k, v_j    SeedSequence(s, spawn_key=(1 + k, 1))
    split k, noise  SeedSequence(s, spawn_key=(1 + k, 2))

with split ``k = 0`` for training data and ``k = 1`` for held-out data.
Because each draw category has its own stream, changing e.g. the number of
samples per cell does not alter the latent draws.
"""

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import DimensionMismatch
from .jplda import JointPldaModel

SPLITS = {"train": 0, "eval": 1}


@dataclass(frozen=True)
class SynthConfig:
    """Shape of a synthetic multi-view dataset.

    ``per_cell`` is either one count for every ``(i, j)`` cell or an
    ``(n_a, n_b)`` table of counts (zero leaves the cell empty).
    """

    d: int
    n_u: int
    n_v: int
    n_a: int
    n_b: int
    per_cell: object = 5
    noise: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.d < 1 or self.n_a < 1 or self.n_b < 1:
            raise ValueError("d, n_a and n_b must be at least 1")
        if self.n_u < 0 or self.n_v < 0:
            raise ValueError("subspace dimensions must be non-negative")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned value")
        counts = self.cell_counts()
        if np.any(counts < 0) or counts.sum() < 1:
            raise ValueError("per-cell counts must be non-negative with at least one sample")

    def cell_counts(self):
        counts = np.asarray(self.per_cell, dtype=np.int64)
        if counts.ndim == 0:
            return np.full((self.n_a, self.n_b), int(counts), dtype=np.int64)
        if counts.shape != (self.n_a, self.n_b):
            raise DimensionMismatch(f"per-cell table must have shape {(self.n_a, self.n_b)}")
        return counts


def _stream(seed, *key):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=key)))


def make_truth(config):
    """Random ground-truth model: standard normal ``mu``, ``S``, ``T``; ``sigma = noise**2``."""
    rng = _stream(config.seed, 0)
    mu = rng.standard_normal(config.d)
    s = rng.standard_normal((config.d, config.n_u))
    t = rng.standard_normal((config.d, config.n_v))
    return JointPldaModel(mu=mu, s=s, t=t, sigma=np.full(config.d, config.noise**2))


def sample_dataset(truth, config, split="train"):
    """Draw ``x_ijk = mu + S u_i + T v_j + eps_ijk`` for every cell of ``config``.

    Held-out splits draw fresh latents and carry label ids offset by
    ``n_a`` / ``n_b`` per split, so they never collide with training ids.
    Rows are ordered by ``i``, then ``j``, then ``k``.
    """
    if truth.dim != config.d or truth.n_u != config.n_u or truth.n_v != config.n_v:
        raise DimensionMismatch("truth model does not match the config")
    k = SPLITS[split] if isinstance(split, str) else int(split)
    u = _stream(config.seed, 1 + k, 0).standard_normal((config.n_a, truth.n_u))
    v = _stream(config.seed, 1 + k, 1).standard_normal((config.n_b, truth.n_v))
    counts = config.cell_counts()
    label_a = np.repeat(np.arange(config.n_a), counts.sum(axis=1))
    label_b = np.concatenate([np.repeat(np.arange(config.n_b), row) for row in counts])
    signal = truth.mu + u[label_a] @ truth.s.T + v[label_b] @ truth.t.T
    noise = _stream(config.seed, 1 + k, 2).standard_normal(signal.shape) * np.sqrt(truth.sigma)
    a, ia = np.unique(label_a, return_inverse=True)
    b, ib = np.unique(label_b, return_inverse=True)
    return Dataset(signal + noise, ia, ib, ids_a=a + k * config.n_a, ids_b=b + k * config.n_b)


def subspace_error(truth, estimate):
    """Relative Frobenius errors of ``SS^T``, ``TT^T`` and the diagonal ``sigma``.

    Only the outer products are compared, so the errors are invariant to
    right-multiplying ``S`` or ``T`` by an orthogonal matrix. A reference
    with an empty factor yields the absolute error for that factor.
    """
    if truth.dim != estimate.dim:
        raise DimensionMismatch("models have different feature dimensions")

    def rel(ref, est):
        scale = np.linalg.norm(ref)
        err = np.linalg.norm(ref - est)
        return err / scale if scale > 0 else err

    return {
        "err_s": rel(truth.s @ truth.s.T, estimate.s @ estimate.s.T),
        "err_t": rel(truth.t @ truth.t.T, estimate.t @ estimate.t.T),
        "err_sigma": rel(truth.sigma, estimate.sigma),
    }
