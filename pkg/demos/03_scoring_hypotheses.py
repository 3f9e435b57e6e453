"""
Joint and single-view hypothesis tests
======================================

A pair of vectors can share the speaker, the phrase, both or neither.
The joint score tests "both" against a mixture of the rest; the view
scores test one label at a time.
"""

import numpy as np

from mvplda import HypothesisPriors, JointPldaModel, ViewPriors, jplda_llr, jplda_llr_view
from mvplda.jplda import DIFF_BOTH, DIFF_U_SAME_V, SAME_BOTH, SAME_U_DIFF_V, pair_loglik

rng = np.random.default_rng(3)
d = 8
model = JointPldaModel(mu=np.zeros(d), s=1.5 * rng.standard_normal((d, 2)), t=rng.standard_normal((d, 2)), sigma=np.full(d, 0.3))

###############################################################################
# Draw one pair per sharing pattern straight from the generative model.
def draw_pair(share_u, share_v):
    u = rng.standard_normal((2, 2))
    v = rng.standard_normal((2, 2))
    if share_u:
        u[1] = u[0]
    if share_v:
        v[1] = v[0]
    noise = np.sqrt(model.sigma) * rng.standard_normal((2, d))
    x = u @ model.s.T + v @ model.t.T + noise
    return x[0], x[1]


specs = {"TGT": SAME_BOTH, "TW": SAME_U_DIFF_V, "IC": DIFF_U_SAME_V, "IW": DIFF_BOTH}
print("pair  joint   view-A  view-B")
for name, spec in specs.items():
    xt, xs = draw_pair(spec.share_u, spec.share_v)
    print(f"{name:4s} {jplda_llr(model, xt, xs):7.2f} {jplda_llr_view(model, xt, xs, 'a'):7.2f} {jplda_llr_view(model, xt, xs, 'b'):7.2f}")

###############################################################################
# Priors select which alternatives the joint test guards against. With all
# weight on "different speaker, same phrase" the score becomes a plain
# likelihood ratio of two pair densities.
xt, xs = draw_pair(True, True)
focused = jplda_llr(model, xt, xs, HypothesisPriors(1.0, 0.0, 0.0))
direct = pair_loglik(model, xt, xs, SAME_BOTH) - pair_loglik(model, xt, xs, DIFF_U_SAME_V)
print("focused prior score %.4f, direct ratio %.4f" % (focused, direct))

# Swapping the arguments never changes a score.
print("symmetric:", jplda_llr(model, xt, xs) == jplda_llr(model, xs, xt))
print("view-A with custom priors: %.3f" % jplda_llr_view(model, xt, xs, "a", ViewPriors(0.7, 0.3, 0.5, 0.5)))
