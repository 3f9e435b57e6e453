import numpy as np
import pytest

from mvplda.cli import EXIT_DATA, EXIT_NUMERIC, EXIT_USAGE, run
from mvplda.evaluation import parse_report
from mvplda.fileio import parse_model, parse_scores

SYNTH = ["synth", "--d", "6", "--nu", "2", "--nv", "2", "--speakers", "8", "--phrases", "4", "--per-cell", "5"]


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    assert run(SYNTH + ["--seed", "7", "--out", str(root / "train.fv"), "--truth-out", str(root / "truth.mvp")]) == 0
    assert (
        run(
            SYNTH
            + ["--seed", "7", "--split", "eval", "--out", str(root / "eval.fv")]
            + ["--trials-out", str(root / "trials.txt"), "--trials-per-type", "60"]
        )
        == 0
    )
    return root


def train(root, kind, name, *extra):
    out = str(root / name)
    args = ["train", "--kind", kind, "--iters", "5", "--in", str(root / "train.fv"), "--out", out, *extra]
    assert run(args) == 0
    return out


class TestSynth:
    def test_reproducible(self, workdir, tmp_path):
        again = tmp_path / "again.fv"
        assert run(SYNTH + ["--seed", "7", "--out", str(again)]) == 0
        assert again.read_bytes() == (workdir / "train.fv").read_bytes()

    def test_truth_file(self, workdir):
        truth = parse_model((workdir / "truth.mvp").read_text())
        assert (truth.n_u, truth.n_v, truth.dim) == (2, 2, 6)


class TestTrain:
    def test_jplda_trace_non_decreasing(self, workdir):
        out = train(workdir, "jplda", "j.mvp", "--nu", "2", "--nv", "2")
        trace = np.loadtxt(out + ".ll")
        assert trace.shape == (5,)
        assert np.all(np.diff(trace) >= -1e-9)
        assert parse_model(open(out).read()).n_u == 2

    def test_default_ranks(self, workdir):
        out = train(workdir, "jplda", "j20.mvp")
        model = parse_model(open(out).read())
        assert (model.n_u, model.n_v) == (20, 20)

    def test_reproducible(self, workdir):
        a = train(workdir, "plda", "p1.mvp", "--rank", "3")
        b = train(workdir, "plda", "p2.mvp", "--rank", "3")
        assert open(a).read() == open(b).read()


class TestScoreEval:
    def test_fast_and_naive_agree(self, workdir):
        model = train(workdir, "plda", "p.mvp", "--rank", "3")
        common = ["score", "--model", model, "--features", str(workdir / "eval.fv"), "--trials", str(workdir / "trials.txt")]
        assert run(common + ["--mode", "naive", "--out", str(workdir / "naive.txt")]) == 0
        assert run(common + ["--mode", "fast", "--out", str(workdir / "fast.txt")]) == 0
        t1, s1 = parse_scores((workdir / "naive.txt").read_text())
        t2, s2 = parse_scores((workdir / "fast.txt").read_text())
        assert t1 == t2
        np.testing.assert_allclose(s1, s2, rtol=0, atol=1e-8)

    def test_eval_report_and_check(self, workdir):
        model = train(workdir, "jplda", "je.mvp", "--nu", "2", "--nv", "2")
        report = workdir / "report.txt"
        args = ["eval", "--model", model, "--features", str(workdir / "eval.fv"), "--trials", str(workdir / "trials.txt")]
        assert run(args + ["--priors", "0.333,0.333,0.334", "--report", str(report)]) == 0
        parsed = parse_report(report.read_text())
        assert set(parsed.eer) == {"IW", "IC", "TW"}
        assert [line.split()[0] for line in report.read_text().splitlines()[3:]] == ["IW", "IC", "TW", "Total"]
        assert run(["eval", "--check", str(report)]) == 0

    def test_eval_from_scores_matches(self, workdir):
        model = train(workdir, "jplda", "jv.mvp", "--nu", "2", "--nv", "2")
        base = ["--model", model, "--features", str(workdir / "eval.fv"), "--trials", str(workdir / "trials.txt")]
        scores = workdir / "view.txt"
        assert run(["score", *base, "--hypothesis", "view-a", "--out", str(scores)]) == 0
        direct = workdir / "r1.txt"
        via_scores = workdir / "r2.txt"
        assert run(["eval", *base, "--hypothesis", "view-a", "--report", str(direct)]) == 0
        assert run(["eval", "--scores", str(scores), "--report", str(via_scores)]) == 0
        assert direct.read_text() == via_scores.read_text()

    def test_cosine(self, workdir, capsys):
        args = ["eval", "--cosine", "--features", str(workdir / "eval.fv"), "--trials", str(workdir / "trials.txt")]
        assert run(args) == 0
        assert capsys.readouterr().out.startswith("MVPLDA-REPORT 1\n")


class TestErrors:
    def test_unknown_command(self, capsys):
        assert run(["frobnicate"]) == EXIT_USAGE
        assert "usage error" in capsys.readouterr().err

    def test_missing_flag(self):
        assert run(["synth", "--d", "3"]) == EXIT_USAGE

    def test_bad_priors(self, workdir):
        model = train(workdir, "jplda", "jp.mvp", "--nu", "1", "--nv", "1")
        args = ["score", "--model", model, "--features", str(workdir / "eval.fv"), "--trials", str(workdir / "trials.txt")]
        assert run(args + ["--priors", "0.5,0.5", "--out", str(workdir / "x.txt")]) == EXIT_USAGE
        assert run(args + ["--priors", "0.5,0.5,0.5", "--out", str(workdir / "x.txt")]) == EXIT_DATA

    def test_view_needs_jplda(self, workdir):
        model = train(workdir, "plda", "pv.mvp", "--rank", "2")
        args = ["score", "--model", model, "--features", str(workdir / "eval.fv"), "--trials", str(workdir / "trials.txt")]
        assert run(args + ["--hypothesis", "view-b", "--out", str(workdir / "x.txt")]) == EXIT_USAGE

    def test_missing_file(self, tmp_path, capsys):
        assert run(["train", "--kind", "plda", "--in", str(tmp_path / "nope.fv"), "--out", str(tmp_path / "m")]) == EXIT_DATA
        err = capsys.readouterr().err
        assert err.count("\n") == 1

    def test_malformed_features(self, tmp_path, capsys):
        bad = tmp_path / "bad.fv"
        bad.write_text("MVPLDA-FEATURES 1 2\n0 0 1\n")
        assert run(["train", "--kind", "plda", "--in", str(bad), "--out", str(tmp_path / "m")]) == EXIT_DATA
        assert "line 2" in capsys.readouterr().err

    def test_numeric_failure(self, tmp_path):
        model = tmp_path / "m.mvp"
        model.write_text("MVPLDA-MODEL 1 plda 1\nMU 1\n0\nB 1 1\n1\nSIGMA 1\n1\n")
        feats = tmp_path / "f.fv"
        feats.write_text("MVPLDA-FEATURES 1 1\n0 0 1e300\n0 0 1\n")
        trials = tmp_path / "t.txt"
        trials.write_text("0 1 TGT\n1 0 IC\n")
        # squaring 1e300 overflows to a NaN score
        with np.errstate(all="ignore"):
            status = run(["eval", "--model", str(model), "--features", str(feats), "--trials", str(trials)])
        assert status == EXIT_NUMERIC

    def test_check_rejects_garbage(self, tmp_path):
        bad = tmp_path / "r.txt"
        bad.write_text("not a report\n")
        assert run(["eval", "--check", str(bad)]) == EXIT_DATA
