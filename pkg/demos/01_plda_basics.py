"""
PLDA on single-label data
=========================

Fit a PLDA model to vectors drawn from known classes, then score pairs
with both the dense and the precomputed scorer.
"""

import numpy as np

from mvplda import PldaModel, plda_llr_fast, plda_llr_naive, plda_scorer_precompute, plda_train

rng = np.random.default_rng(0)

###############################################################################
# A ground-truth model with a 2-dimensional class subspace in 6 dimensions.
truth = PldaModel(mu=rng.standard_normal(6), b=2 * rng.standard_normal((6, 2)), sigma=np.full(6, 0.5))

n_classes, per_class = 300, 8
z = rng.standard_normal((n_classes, 2))
labels = np.repeat(np.arange(n_classes), per_class)
x = truth.mu + z[labels] @ truth.b.T + np.sqrt(truth.sigma) * rng.standard_normal((labels.size, 6))

###############################################################################
# EM with a fixed number of iterations. The trace is the data log
# likelihood after every M-step and never decreases. Starting from a small
# random B, the scale of B grows only slowly when classes are well
# separated, so this run uses many iterations.
model, trace = plda_train(x, labels, iterations=1000, rank=2, seed=0)
print("log likelihood after 1, 10, 1000 iterations:", [round(trace[k], 1) for k in (0, 9, -1)])
print("non-decreasing:", bool(np.all(np.diff(trace) >= -1e-9)))

# B itself is only defined up to rotation, so compare B B^T.
ref = truth.between_cov()
print("relative error of B B^T: %.3f" % (np.linalg.norm(model.between_cov() - ref) / np.linalg.norm(ref)))

###############################################################################
# Scoring: a same-class pair against a different-class pair.
same = x[0], x[1]
diff = x[0], x[per_class]
print("same-class LLR:      %.3f" % plda_llr_naive(model, *same))
print("different-class LLR: %.3f" % plda_llr_naive(model, *diff))

# The fast scorer only factorizes rank x rank matrices and agrees with
# the dense route to rounding error.
scorer = plda_scorer_precompute(model)
xt, xs = x[rng.integers(len(x), size=(2, 1000))]
print("max |fast - naive|: %.1e" % np.abs(plda_llr_fast(scorer, xt, xs) - plda_llr_naive(model, xt, xs)).max())
