"""Command-line front end: ``mvplda synth|train|score|eval``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

import argparse
import sys

import numpy as np

from . import fileio
from .errors import FormatError, MvpldaError
from .evaluation import cosine_score, evaluate_trials, make_trials, parse_report, report_from_scores, score_trials
from .jplda import (
    DEFAULT_RANK_U,
    DEFAULT_RANK_V,
    HypothesisPriors,
    JointPldaModel,
    ViewPriors,
    jplda_llr,
    jplda_llr_view,
    jplda_train,
)
from .plda import DEFAULT_ITERATIONS, DEFAULT_RANK, plda_llr_fast, plda_llr_naive, plda_scorer_precompute, plda_train
from .synth import SynthConfig, make_truth, sample_dataset

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read(path):
    with open(path) as fh:
        return fh.read()


def _write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


def _priors(text, count):
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"priors must be a comma-separated list of numbers: {text!r}") from None
    if len(values) != count:
        raise UsageError(f"expected {count} priors, got {len(values)}")
    return values


def cmd_synth(args):
    config = SynthConfig(
        d=args.d,
        n_u=args.nu,
        n_v=args.nv,
        n_a=args.speakers,
        n_b=args.phrases,
        per_cell=args.per_cell,
        noise=args.noise,
        seed=args.seed,
    )
    truth = make_truth(config)
    dataset = sample_dataset(truth, config, split=args.split)
    _write(args.out, fileio.write_features(dataset))
    if args.truth_out:
        _write(args.truth_out, fileio.serialize_model(truth))
    if args.trials_out:
        trials = make_trials(dataset, args.trials_per_type, enroll_size=args.enroll_size, seed=args.seed)
        _write(args.trials_out, fileio.write_trials(trials))


def cmd_train(args):
    dataset = fileio.parse_features(_read(args.input))
    if args.kind == "plda":
        model, trace = plda_train(dataset, iterations=args.iters, rank=args.rank, seed=args.seed)
    else:
        model, trace = jplda_train(
            dataset, iterations=args.iters, n_u=args.nu, n_v=args.nv, seed=args.seed, init_method=args.init
        )
    _write(args.out, fileio.serialize_model(model))
    _write(args.out + ".ll", "".join(f"{v:.17g}\n" for v in trace))


def _scorer(args):
    if args.cosine:
        return cosine_score
    model = fileio.parse_model(_read(args.model))
    if isinstance(model, JointPldaModel):
        if args.hypothesis == "joint":
            priors = HypothesisPriors(*_priors(args.priors, 3)) if args.priors else HypothesisPriors()
            return lambda a, b: jplda_llr(model, a, b, priors)
        priors = ViewPriors(*_priors(args.priors, 4)) if args.priors else ViewPriors()
        view = args.hypothesis[-1]
        return lambda a, b: jplda_llr_view(model, a, b, view, priors)
    if args.hypothesis != "joint":
        raise UsageError("single-view hypotheses need a jplda model")
    if args.mode == "fast":
        scorer = plda_scorer_precompute(model)
        return lambda a, b: plda_llr_fast(scorer, a, b)
    return lambda a, b: plda_llr_naive(model, a, b)


def _load_trials(args, dataset):
    return fileio.parse_trials(_read(args.trials), n_rows=len(dataset))


def cmd_score(args):
    dataset = fileio.parse_features(_read(args.features))
    trials = _load_trials(args, dataset)
    scores = score_trials(_scorer(args), dataset, trials)
    _write(args.out, fileio.write_scores(trials, scores))


def cmd_eval(args):
    if args.check:
        text = _read(args.check)
        if parse_report(text).to_text() != text:
            raise FormatError(f"{args.check} does not round-trip")
        return
    if args.scores:
        trials, scores = fileio.parse_scores(_read(args.scores))
        report = report_from_scores(scores, [t.kind for t in trials])
    else:
        if not args.features or not args.trials or not (args.model or args.cosine):
            raise UsageError("eval needs --features, --trials and --model (or --cosine), or --scores")
        dataset = fileio.parse_features(_read(args.features))
        report = evaluate_trials(_scorer(args), dataset, _load_trials(args, dataset))
    text = report.to_text()
    if args.report:
        _write(args.report, text)
    else:
        sys.stdout.write(text)


def _add_scoring_flags(p):
    p.add_argument("--model")
    p.add_argument("--cosine", action="store_true", help="score with cosine similarity instead of a model")
    p.add_argument("--features")
    p.add_argument("--trials")
    p.add_argument("--hypothesis", choices=["joint", "view-a", "view-b"], default="joint")
    p.add_argument("--mode", choices=["naive", "fast"], default="naive", help="PLDA scoring route")
    p.add_argument("--priors", help="comma list: p1,p2,p3 (joint) or p0,p1,p2,p3 (view)")


def build_parser():
    parser = _Parser(prog="mvplda", description="Joint PLDA training, scoring and evaluation")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="sample a synthetic multi-view feature file")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--nu", type=int, required=True)
    p.add_argument("--nv", type=int, required=True)
    p.add_argument("--speakers", type=int, required=True)
    p.add_argument("--phrases", type=int, required=True)
    p.add_argument("--per-cell", type=int, default=5)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", choices=["train", "eval"], default="train")
    p.add_argument("--out", required=True)
    p.add_argument("--truth-out")
    p.add_argument("--trials-out")
    p.add_argument("--trials-per-type", type=int, default=500)
    p.add_argument("--enroll-size", type=int, default=3)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a plda or jplda model")
    p.add_argument("--kind", choices=["plda", "jplda"], required=True)
    p.add_argument("--iters", type=int, default=DEFAULT_ITERATIONS)
    p.add_argument("--rank", type=int, default=DEFAULT_RANK, help="PLDA subspace dimension")
    p.add_argument("--nu", type=int, default=DEFAULT_RANK_U)
    p.add_argument("--nv", type=int, default=DEFAULT_RANK_V)
    p.add_argument("--init", choices=["scatter", "random"], default="scatter")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("score", help="score a trial list")
    _add_scoring_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("eval", help="score trials and report EER per trial type")
    _add_scoring_flags(p)
    p.add_argument("--scores", help="evaluate an existing score file instead of scoring")
    p.add_argument("--report")
    p.add_argument("--check", metavar="REPORT", help="verify that a report file round-trips")
    p.set_defaults(func=cmd_eval)
    return parser


def run(argv=None):
    """Run one subcommand and return its exit status."""
    try:
        args = build_parser().parse_args(argv)
        if args.command == "score" and not (args.cosine or args.model):
            raise UsageError("score needs --model or --cosine")
        if args.command == "score" and not (args.features and args.trials):
            raise UsageError("score needs --features and --trials")
        args.func(args)
    except UsageError as exc:
        print(f"mvplda: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"mvplda: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (MvpldaError, ValueError, IndexError, OSError) as exc:
        print(f"mvplda: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


def main():
    sys.exit(run())
