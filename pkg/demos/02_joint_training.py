"""
Joint PLDA on two-label data
============================

Every vector carries a speaker label (view A) and a phrase label
(view B). Joint PLDA models them with separate subspaces ``S`` and
``T``.
"""

import numpy as np

from mvplda import SynthConfig, jplda_train, make_truth, sample_dataset, subspace_error

###############################################################################
# Sample a training set: 40 speakers x 10 phrases, 5 vectors per cell.
config = SynthConfig(d=20, n_u=3, n_v=3, n_a=40, n_b=10, per_cell=5, seed=1)
truth = make_truth(config)
train = sample_dataset(truth, config)
print("training vectors:", len(train), "dimension:", train.dim)

###############################################################################
# Default start: S and T seeded from the scatter of the speaker means and
# the phrase means. A purely random start also climbs the likelihood but
# tends to mix the two subspaces.
for method in ("scatter", "random"):
    model, trace = jplda_train(train, iterations=25, n_u=3, n_v=3, seed=1, init_method=method)
    errs = subspace_error(truth, model)
    print(
        f"{method:8s} final LL {trace[-1]:10.1f}  "
        f"err_s {errs['err_s']:.2f}  err_t {errs['err_t']:.2f}  err_sigma {errs['err_sigma']:.3f}"
    )

###############################################################################
# The sample covariance of only 10 phrase latents is itself far from the
# identity, which bounds how well T T^T can be recovered from this data.
v = np.random.default_rng(0).standard_normal((10, 3))
gap = truth.t @ (v.T @ v / 10 - np.eye(3)) @ truth.t.T
print("typical sampling error of T T^T with 10 phrases: %.2f" % (np.linalg.norm(gap) / np.linalg.norm(truth.t @ truth.t.T)))
