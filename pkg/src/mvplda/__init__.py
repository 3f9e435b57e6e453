"""Multi-view (joint) PLDA back end for verification tasks."""

from .data import Dataset, GroupedData, LabeledVector, group_data
from .evaluation import (
    EvalReport,
    Trial,
    average_enroll,
    cosine_score,
    evaluate_trials,
    make_trials,
    sweep_eer,
)
from .gaussmath import chol_logdet, lowrank_inverse, pair_gauss_logpdf
from .jplda import (
    CellStats,
    HypothesisPriors,
    JointPldaModel,
    ShareSpec,
    ViewPriors,
    jplda_estep,
    jplda_llr,
    jplda_llr_view,
    jplda_mstep,
    jplda_train,
    loglik_dataset,
    pair_loglik,
)
from .plda import (
    ClassStats,
    FastScorer,
    PldaModel,
    plda_estep,
    plda_llr_fast,
    plda_llr_naive,
    plda_mstep,
    plda_scorer_precompute,
    plda_train,
)
from .synth import SynthConfig, make_truth, sample_dataset, subspace_error

__version__ = "0.1.0"
