import json

import pytest

from markmt import evalharness
from markmt.cli import main
from markmt.evalharness import EvalItem, SystemRun


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# --- translate


def test_translate_identity_round_trip(tmp_path, capsys):
    src = tmp_path / "in.xml"
    out = tmp_path / "out.xml"
    src.write_text("<p>Ahoj <b>světe</b>.</p>", encoding="utf-8")
    code, _, _ = run_cli(
        capsys, "translate", "--in", str(src), "--out", str(out),
        "--format", "xml", "--backend", "identity",
    )
    assert code == 0
    assert out.read_text(encoding="utf-8") == "<p>Ahoj <b>světe</b>.</p>"


def test_translate_missing_file_exit_1(tmp_path, capsys):
    code, _, err = run_cli(
        capsys, "translate", "--in", str(tmp_path / "missing.xml"),
        "--out", str(tmp_path / "o.xml"),
    )
    assert code == 1
    assert "error" in err


def test_bad_flag_exit_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["translate", "--nonsense"])
    assert exc.value.code == 2


def test_help_available():
    for command in ["translate", "chrf", "train-align", "align", "evaluate", "annotate", "serve"]:
        with pytest.raises(SystemExit) as exc:
            main([command, "--help"])
        assert exc.value.code == 0


# --- chrf


def test_chrf_identical_files(tmp_path, capsys):
    hyp = tmp_path / "hyp.txt"
    ref = tmp_path / "ref.txt"
    hyp.write_text("jedna věta\ndruhá věta\n", encoding="utf-8")
    ref.write_text("jedna věta\ndruhá věta\n", encoding="utf-8")
    code, out, _ = run_cli(capsys, "chrf", "--hyp", str(hyp), "--ref", str(ref))
    assert code == 0
    assert out.splitlines()[0] == "100.0 ± 0.0"
    report = json.loads(out.splitlines()[1])
    assert report["score"] == pytest.approx(100.0)


def test_chrf_length_mismatch_exit_1(tmp_path, capsys):
    hyp = tmp_path / "hyp.txt"
    ref = tmp_path / "ref.txt"
    hyp.write_text("a\nb\n")
    ref.write_text("a\n")
    code, _, err = run_cli(capsys, "chrf", "--hyp", str(hyp), "--ref", str(ref))
    assert code == 1


def test_chrf_seed_reproducible(tmp_path, capsys):
    hyp = tmp_path / "hyp.txt"
    ref = tmp_path / "ref.txt"
    hyp.write_text("kočka\npes\nmyš\n", encoding="utf-8")
    ref.write_text("kočky\npes\nmyši\n", encoding="utf-8")
    _, out1, _ = run_cli(capsys, "chrf", "--hyp", str(hyp), "--ref", str(ref),
                         "--resamples", "100", "--seed", "7")
    _, out2, _ = run_cli(capsys, "chrf", "--hyp", str(hyp), "--ref", str(ref),
                         "--resamples", "100", "--seed", "7")
    assert out1 == out2


# --- train-align / align


def test_train_and_align(tmp_path, capsys):
    corpus = tmp_path / "corpus.tsv"
    corpus.write_text("a b\tx y\na\tx\n")
    lexicon = tmp_path / "lexicon.tsv"
    code, _, _ = run_cli(
        capsys, "train-align", "--corpus", str(corpus), "--iters", "10",
        "--out", str(lexicon),
    )
    assert code == 0
    rows = {
        (cols[0], cols[1]): float(cols[2])
        for cols in (line.split("\t") for line in lexicon.read_text().splitlines())
    }
    assert rows[("a", "x")] > 0.9

    src = tmp_path / "src.txt"
    tgt = tmp_path / "tgt.txt"
    src.write_text("a b\n")
    tgt.write_text("x y\n")
    code, out, _ = run_cli(
        capsys, "align", "--lexicon", str(lexicon), "--src", str(src), "--tgt", str(tgt)
    )
    assert code == 0
    assert out.strip() == "0-0 1-1"


def test_train_align_empty_corpus_exit_1(tmp_path, capsys):
    corpus = tmp_path / "corpus.tsv"
    corpus.write_text("")
    code, _, _ = run_cli(
        capsys, "train-align", "--corpus", str(corpus), "--out", str(tmp_path / "l.tsv")
    )
    assert code == 1


# --- evaluate / annotate


@pytest.fixture()
def evalset_and_run(tmp_path):
    items = [
        EvalItem(
            item_id=f"ex{k}",
            subject="biology",
            exercise_type="mc",
            source_segments=(f"zdroj {k}",),
            reference_segments=(f"referenční věta číslo {k}",),
            split="dev",
        )
        for k in range(4)
    ]
    evalset = tmp_path / "evalset.jsonl"
    evalharness.save_evalset(items, evalset)
    run_path = tmp_path / "run.jsonl"
    with open(run_path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"system_id": "refs"}) + "\n")
        for it in items:
            fh.write(
                json.dumps(
                    {"item_id": it.item_id, "hypotheses": list(it.reference_segments)},
                    ensure_ascii=False,
                )
                + "\n"
            )
    return evalset, run_path, items


def test_evaluate_references_scores_100(evalset_and_run, capsys):
    evalset, run_path, _ = evalset_and_run
    code, out, _ = run_cli(
        capsys, "evaluate", "--evalset", str(evalset), "--run", str(run_path),
        "--resamples", "50",
    )
    assert code == 0
    assert "100.0" in out
    report = json.loads(out.splitlines()[-1])
    assert report["chrf_score"] == pytest.approx(100.0)


def test_annotate_make_batch_and_aggregate(evalset_and_run, tmp_path, capsys):
    evalset, run_path, items = evalset_and_run
    run2 = tmp_path / "run2.jsonl"
    with open(run2, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"system_id": "other"}) + "\n")
        for it in items:
            fh.write(json.dumps({"item_id": it.item_id, "hypotheses": ["jiná věta"]}) + "\n")
    tasks = tmp_path / "tasks.jsonl"
    key = tmp_path / "key.jsonl"
    code, _, err = run_cli(
        capsys, "annotate", "--make-batch",
        "--evalset", str(evalset), "--run", str(run_path), "--run", str(run2),
        "--annotators", "a1,a2", "--tasks", str(tasks), "--key", str(key),
    )
    assert code == 0
    loaded = evalharness.load_tasks(tasks)
    assert len(loaded) == 4

    scores = tmp_path / "scores.jsonl"
    with open(scores, "w") as fh:
        for t in loaded:
            for label, _ in t.candidates:
                fh.write(
                    json.dumps(
                        {
                            "task_id": t.task_id,
                            "blind_label": label,
                            "score": 8,
                            "annotator_id": t.annotator_id,
                        }
                    )
                    + "\n"
                )
    code, out, _ = run_cli(
        capsys, "annotate", "--aggregate", "--scores", str(scores), "--key", str(key)
    )
    assert code == 0
    assert "8.00 ± 0.00" in out


def test_evaluate_missing_hypotheses_exit_1(evalset_and_run, tmp_path, capsys):
    evalset, _, _ = evalset_and_run
    partial = tmp_path / "partial.jsonl"
    partial.write_text(json.dumps({"item_id": "ex0", "hypotheses": ["x"]}) + "\n")
    code, _, err = run_cli(
        capsys, "evaluate", "--evalset", str(evalset), "--run", str(partial)
    )
    assert code == 1
    assert "ex1" in err
