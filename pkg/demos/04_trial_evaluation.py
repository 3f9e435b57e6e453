"""
Verification trials and equal error rates
=========================================

Train on one set of speakers and phrases, evaluate on held-out ones, and
compare joint PLDA, PLDA and cosine scoring per trial type.
"""

from mvplda import (
    SynthConfig,
    cosine_score,
    evaluate_trials,
    jplda_llr,
    jplda_train,
    make_trials,
    make_truth,
    plda_llr_naive,
    plda_train,
    sample_dataset,
)

###############################################################################
# Training and held-out data share the generative model but not the labels.
config = SynthConfig(d=20, n_u=3, n_v=3, n_a=40, n_b=10, per_cell=5, seed=0)
truth = make_truth(config)
train = sample_dataset(truth, config)
held_config = SynthConfig(d=20, n_u=3, n_v=3, n_a=30, n_b=10, per_cell=5, seed=0)
held = sample_dataset(truth, held_config, split="eval")

# Each trial enrolls the average of 3 vectors of one cell and tests one
# vector: TGT same speaker and phrase, TW same speaker only, IC same
# phrase only, IW neither.
trials = make_trials(held, per_type=2000, enroll_size=3, seed=0)

###############################################################################
joint, _ = jplda_train(train, n_u=3, n_v=3, seed=0)
plain, _ = plda_train(train, rank=6, seed=0)
mu = train.mean()

systems = {
    "jPLDA": lambda a, b: jplda_llr(joint, a, b),
    "PLDA": lambda a, b: plda_llr_naive(plain, a, b),
    "cosine": lambda a, b: cosine_score(a - mu, b - mu),
}

print("system     IW      IC      TW   Total   (EER %)")
for name, scorer in systems.items():
    report = evaluate_trials(scorer, held, trials)
    cells = " ".join(f"{100 * report.eer[k]:6.2f}" for k in ("IW", "IC", "TW"))
    print(f"{name:7s} {cells} {100 * report.overall_eer:6.2f}")

###############################################################################
# The report serializes to a small text table.
print()
print(evaluate_trials(systems["jPLDA"], held, trials).to_text())
