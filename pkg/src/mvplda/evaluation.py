"""Verification trials, enrollment averaging and EER reporting.

Trial types:

* ``TGT``: same speaker (view A), same phrase (view B)
* ``IW``: impostor, wrong phrase
* ``TW``: target speaker, wrong phrase
* ``IC``: impostor, correct phrase
"""

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import DegenerateTrialSet, EmptyEnrollment, FormatError, MvpldaError, NonFiniteScore, ZeroVector

TRIAL_TYPES = ("TGT", "IW", "TW", "IC")
NONTARGET_TYPES = ("IW", "IC", "TW")
REPORT_TAG = "MVPLDA-REPORT"
REPORT_VERSION = 1


class ScoringError(MvpldaError):
    def __init__(self, index, cause):
        super().__init__(f"trial {index}: {cause}")
        self.index = index


@dataclass(frozen=True)
class Trial:
    enroll: tuple
    test: int
    kind: str

    def __post_init__(self):
        if self.kind not in TRIAL_TYPES:
            raise ValueError(f"unknown trial type {self.kind!r}")
        if len(self.enroll) == 0:
            raise EmptyEnrollment("trial has no enrollment vectors")
        object.__setattr__(self, "enroll", tuple(int(k) for k in self.enroll))
        object.__setattr__(self, "test", int(self.test))

    @property
    def is_target(self):
        return self.kind == "TGT"


def average_enroll(vectors):
    """Enrollment model: the coordinate-wise mean of the enrollment vectors."""
    vectors = np.asarray(vectors, dtype=float)
    if vectors.size == 0 or vectors.shape[0] == 0:
        raise EmptyEnrollment("no enrollment vectors")
    if vectors.ndim != 2:
        raise ValueError("enrollment vectors must form a 2-D array")
    return vectors.mean(axis=0)


def cosine_score(xt, xs):
    xt = np.asarray(xt, dtype=float)
    xs = np.asarray(xs, dtype=float)
    nt = np.linalg.norm(xt, axis=-1)
    ns = np.linalg.norm(xs, axis=-1)
    if np.any(nt == 0) or np.any(ns == 0):
        raise ZeroVector("cosine similarity of a zero vector")
    out = np.sum(xt * xs, axis=-1) / (nt * ns)
    return float(out) if out.ndim == 0 else out


def det_points(scores, is_target):
    """Operating points ``(threshold, far, frr)`` for every distinct threshold.

    A trial is accepted when ``score >= threshold``. The first point has
    ``frr = 0, far = 1``; a final point at ``+inf`` has ``frr = 1, far = 0``.
    """
    scores = np.asarray(scores, dtype=float)
    is_target = np.asarray(is_target, dtype=bool)
    n_tar = is_target.sum()
    n_non = is_target.size - n_tar
    if n_tar == 0 or n_non == 0:
        raise DegenerateTrialSet("need at least one target and one nontarget score")
    order = np.argsort(scores, kind="stable")
    s = scores[order]
    tar = is_target[order]
    thresholds, first = np.unique(s, return_index=True)
    # counts strictly below each distinct threshold
    tar_below = np.concatenate([[0], np.cumsum(tar)])[first]
    non_below = np.concatenate([[0], np.cumsum(~tar)])[first]
    frr = np.append(tar_below / n_tar, 1.0)
    far = np.append((n_non - non_below) / n_non, 0.0)
    return np.append(thresholds, np.inf), far, frr


def sweep_eer(scores, is_target):
    """Equal error rate with linear interpolation at the FAR/FRR crossing.

    Returns
    -------
    eer : float
    threshold : float
        Interpolated threshold at the crossing (the largest score when the
        crossing lies beyond it).
    """
    thr, far, frr = det_points(scores, is_target)
    diff = far - frr
    k = int(np.flatnonzero(diff <= 0)[0])
    if diff[k] == 0:
        return float(frr[k]), float(thr[k] if np.isfinite(thr[k]) else thr[k - 1])
    alpha = diff[k - 1] / (diff[k - 1] - diff[k])
    eer = frr[k - 1] + alpha * (frr[k] - frr[k - 1])
    hi = thr[k] if np.isfinite(thr[k]) else thr[k - 1]
    return float(eer), float(thr[k - 1] + alpha * (hi - thr[k - 1]))


@dataclass
class EvalReport:
    """Per-type and pooled EERs, with the raw scores they came from."""

    eer: dict
    counts: dict
    thresholds: dict
    overall_eer: float
    overall_threshold: float
    scores: np.ndarray = field(default=None, repr=False)
    kinds: np.ndarray = field(default=None, repr=False)

    def rows(self):
        for kind in NONTARGET_TYPES:
            if kind in self.eer:
                yield kind, self.counts[kind], self.eer[kind], self.thresholds[kind]
        yield "Total", sum(self.counts[k] for k in NONTARGET_TYPES if k in self.counts), self.overall_eer, self.overall_threshold

    def to_text(self):
        lines = [f"{REPORT_TAG} {REPORT_VERSION}", f"TGT trials {self.counts['TGT']}", "type trials eer_percent threshold"]
        for kind, n, eer, thr in self.rows():
            lines.append(f"{kind} {n} {100.0 * eer:.17g} {thr:.17g}")
        return "\n".join(lines) + "\n"


def parse_report(text):
    """Inverse of :meth:`EvalReport.to_text` (raw scores are not stored)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].split() != [REPORT_TAG, str(REPORT_VERSION)]:
        raise FormatError("not an evaluation report", line=1)
    head = lines[1].split()
    if len(head) != 3 or head[:2] != ["TGT", "trials"]:
        raise FormatError("missing target count", line=2)
    counts = {"TGT": int(head[2])}
    eer, thresholds = {}, {}
    total = None
    for lineno, line in enumerate(lines[3:], start=4):
        parts = line.split()
        if len(parts) != 4:
            raise FormatError("expected 'type trials eer_percent threshold'", line=lineno)
        kind, n, pct, thr = parts[0], int(parts[1]), float(parts[2]) / 100.0, float(parts[3])
        if kind == "Total":
            total = (pct, thr)
        elif kind in NONTARGET_TYPES:
            counts[kind], eer[kind], thresholds[kind] = n, pct, thr
        else:
            raise FormatError(f"unknown row {kind!r}", line=lineno)
    if total is None:
        raise FormatError("missing Total row")
    return EvalReport(eer=eer, counts=counts, thresholds=thresholds, overall_eer=total[0], overall_threshold=total[1])


def _features(features):
    return features.x if isinstance(features, Dataset) else np.asarray(features, dtype=float)


def trial_pairs(features, trials):
    """Averaged enrollment vectors and test vectors of every trial."""
    x = _features(features)
    n = x.shape[0]
    for k, trial in enumerate(trials):
        if max(trial.enroll + (trial.test,)) >= n or min(trial.enroll + (trial.test,)) < 0:
            raise IndexError(f"trial {k} refers to a vector outside the feature set")
    enroll = np.stack([average_enroll(x[list(t.enroll)]) for t in trials])
    test = x[[t.test for t in trials]]
    return enroll, test


def score_trials(scorer, features, trials):
    """Scores of every trial; ``scorer(enroll, test)`` must accept ``(n, d)`` batches."""
    trials = list(trials)
    enroll, test = trial_pairs(features, trials)
    try:
        out = np.asarray(scorer(enroll, test), dtype=float).reshape(len(trials))
    except Exception:
        # rescore one by one to locate the failing trial
        out = np.empty(len(trials))
        for k in range(len(trials)):
            try:
                out[k] = scorer(enroll[k : k + 1], test[k : k + 1])[0]
            except Exception as exc:
                raise ScoringError(k, exc) from exc
    bad = np.flatnonzero(~np.isfinite(out))
    if bad.size:
        raise NonFiniteScore(f"trial {bad[0]}: non-finite score {out[bad[0]]}")
    return out


def report_from_scores(scores, kinds):
    """Per-type EER (each nontarget type against all targets) plus pooled EER."""
    scores = np.asarray(scores, dtype=float)
    kinds = np.asarray(kinds)
    target = kinds == "TGT"
    if not target.any():
        raise DegenerateTrialSet("no target trials")
    eer, counts, thresholds = {}, {"TGT": int(target.sum())}, {}
    for kind in NONTARGET_TYPES:
        mask = kinds == kind
        if mask.any():
            sel = target | mask
            eer[kind], thresholds[kind] = sweep_eer(scores[sel], target[sel])
            counts[kind] = int(mask.sum())
    if not eer:
        raise DegenerateTrialSet("no nontarget trials")
    overall, overall_thr = sweep_eer(scores, target)
    return EvalReport(eer, counts, thresholds, overall, overall_thr, scores=scores, kinds=kinds)


def evaluate_trials(scorer, features, trials):
    trials = list(trials)
    scores = score_trials(scorer, features, trials)
    return report_from_scores(scores, np.array([t.kind for t in trials]))


def make_trials(dataset, per_type, enroll_size=3, seed=0):
    """Random TGT/IW/TW/IC trials drawn from a labelled dataset.

    The enrollment side averages ``enroll_size`` vectors of one cell; the
    test vector is another vector of the same cell (TGT), or a vector of
    a cell differing in speaker (IC), phrase (TW) or both (IW). Types that
    cannot be formed from the dataset are skipped.
    """
    rng = np.random.default_rng(seed)
    cell_index, pairs = dataset.cells()
    members = [np.flatnonzero(cell_index == c) for c in range(pairs.shape[0])]
    sizes = np.array([m.size for m in members])
    by_a = {a: np.flatnonzero(pairs[:, 0] == a) for a in np.unique(pairs[:, 0])}
    by_b = {b: np.flatnonzero(pairs[:, 1] == b) for b in np.unique(pairs[:, 1])}
    everything = np.arange(pairs.shape[0])

    def partners(c, kind):
        a, b = pairs[c]
        if kind == "IC":
            pool = by_b[b]
            ok = pairs[pool, 0] != a
        elif kind == "TW":
            pool = by_a[a]
            ok = pairs[pool, 1] != b
        else:
            pool = everything
            ok = (pairs[pool, 0] != a) & (pairs[pool, 1] != b)
        return pool[ok]

    trials = []
    for kind in TRIAL_TYPES:
        need = enroll_size + 1 if kind == "TGT" else enroll_size
        enrollable = np.flatnonzero(sizes >= need)
        if kind != "TGT":
            enrollable = np.array([c for c in enrollable if partners(c, kind).size], dtype=np.int64)
        if enrollable.size == 0:
            continue
        for _ in range(per_type):
            c = enrollable[rng.integers(enrollable.size)]
            chosen = rng.permutation(members[c])
            enroll = tuple(chosen[:enroll_size])
            if kind == "TGT":
                test = chosen[enroll_size]
            else:
                pool = partners(c, kind)
                other = pool[rng.integers(pool.size)]
                test = members[other][rng.integers(sizes[other])]
            trials.append(Trial(enroll, int(test), kind))
    return trials
