"""Command-line interface (`markmt`).

stdout carries data, stderr carries diagnostics; exit codes: 0 success,
1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import evalharness, metrics
from .aligner import LexiconTable, ParallelCorpus, train_model1, viterbi_align
from .backends import Glossary
from .pipeline import translate_document
from .segmenter import ExtractionPolicy, default_abbreviations
from .service import ServiceConfig, make_backend, run_server


def _cmd_translate(args) -> int:
    policy = (
        ExtractionPolicy.from_config(args.policy)
        if args.policy
        else ExtractionPolicy(abbreviations=default_abbreviations())
    )
    backend = make_backend(args.backend, dictionary_path=args.dictionary)
    glossary = Glossary.from_tsv(args.glossary) if args.glossary else None
    lexicon = LexiconTable.load_tsv(args.lexicon) if args.lexicon else None
    content = Path(args.infile).read_bytes()
    result = translate_document(
        content, args.format, backend, args.src, args.tgt,
        policy=policy, lexicon=lexicon, glossary=glossary, domain=args.domain,
    )
    Path(args.outfile).write_text(result.content, encoding="utf-8")
    for seg in result.segments:
        for w in seg.warnings:
            print(
                json.dumps(
                    {"segment_id": seg.segment_id, "marker_id": w.marker_id, "kind": w.kind}
                ),
                file=sys.stderr,
            )
    for f in result.term_findings:
        if f.status != "ok":
            print(
                json.dumps(
                    {
                        "segment_id": f.segment_id,
                        "source_term": f.source_term,
                        "expected_target": f.expected_target,
                        "status": f.status,
                    },
                    ensure_ascii=False,
                ),
                file=sys.stderr,
            )
    return 0


def _cmd_chrf(args) -> int:
    hyps = Path(args.hyp).read_text(encoding="utf-8").splitlines()
    refs = Path(args.ref).read_text(encoding="utf-8").splitlines()
    if len(hyps) != len(refs):
        raise RuntimeError(f"line count mismatch: {len(hyps)} vs {len(refs)}")
    pairs = list(zip(hyps, refs))
    if len(pairs) >= 2 and args.resamples > 0:
        summary = metrics.bootstrap_ci(pairs, resamples=args.resamples, seed=args.seed)
        rendered = summary.render()
    else:
        score = metrics.chrf_corpus(pairs).score
        rendered = f"{score:.1f} ± 0.0"
    report = metrics.chrf_corpus(pairs)
    print(rendered)
    print(json.dumps(report.to_json(), ensure_ascii=False))
    return 0


def _cmd_train_align(args) -> int:
    corpus = ParallelCorpus.from_tsv(args.corpus)
    table = train_model1(corpus, iterations=args.iters)
    table.save_tsv(args.out)
    print(f"{len(corpus.pairs)} pairs, {args.iters} iterations", file=sys.stderr)
    return 0


def _cmd_align(args) -> int:
    lexicon = LexiconTable.load_tsv(args.lexicon)
    src_lines = Path(args.src).read_text(encoding="utf-8").splitlines()
    tgt_lines = Path(args.tgt).read_text(encoding="utf-8").splitlines()
    if len(src_lines) != len(tgt_lines):
        raise RuntimeError("line count mismatch")
    for s, t in zip(src_lines, tgt_lines):
        links = viterbi_align(s.split(), t.split(), lexicon)
        print(links.to_pharaoh())
    return 0


def _cmd_evaluate(args) -> int:
    items = evalharness.load_evalset(args.evalset)
    run = evalharness.load_run(args.run)
    report = evalharness.evaluate_run(
        run, items, split=args.split, seed=args.seed, resamples=args.resamples
    )
    print(f"{'System':<24}{'chrF':<16}{'Segments':<10}")
    print(f"{report.system_id:<24}{report.chrf.render():<16}{report.segment_count:<10}")
    print(json.dumps(report.to_json(), ensure_ascii=False))
    return 0


def _cmd_annotate(args) -> int:
    if args.make_batch:
        items = evalharness.load_evalset(args.evalset)
        runs = [evalharness.load_run(p) for p in args.run]
        annotators = args.annotators.split(",")
        tasks, key = evalharness.make_annotation_batch(
            runs, items, annotators, seed=args.seed, limit=args.limit
        )
        evalharness.save_tasks(tasks, args.tasks)
        evalharness.save_key(key, args.key)
        print(f"{len(tasks)} tasks for {len(annotators)} annotators", file=sys.stderr)
        return 0
    if args.aggregate:
        scores = evalharness.load_scores(args.scores)
        key = evalharness.load_key(args.key)
        summaries, annotator_means = evalharness.aggregate_annotations(scores, key)
        print(f"{'System':<24}{'Human (0-10)':<16}{'n':<8}")
        for sysid, s in summaries.items():
            print(f"{sysid:<24}{s.render():<16}{s.n:<8}")
        print(
            json.dumps(
                {
                    "systems": {k: {"mean": v.mean, "sd": v.sd, "n": v.n} for k, v in summaries.items()},
                    "per_annotator": annotator_means,
                },
                ensure_ascii=False,
            )
        )
        return 0
    raise RuntimeError("use --make-batch or --aggregate")


def _cmd_serve(args) -> int:
    config = ServiceConfig.from_file(args.config) if args.config else ServiceConfig()
    if args.backend:
        config.backend = make_backend(args.backend, dictionary_path=args.dictionary)
    run_server(config, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="markmt")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("translate", help="translate a document preserving markup")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)
    p.add_argument("--format", choices=["html", "xml", "text"], default="xml")
    p.add_argument("--src", default="cs")
    p.add_argument("--tgt", default="uk")
    p.add_argument("--backend", default="identity")
    p.add_argument("--dictionary", help="TSV for the dictionary backend")
    p.add_argument("--glossary", help="glossary TSV for terminology checking")
    p.add_argument("--domain", default="")
    p.add_argument("--lexicon", help="lexicon TSV for alignment fallback")
    p.add_argument("--policy", help="extraction policy config file")
    p.set_defaults(func=_cmd_translate)

    p = sub.add_parser("chrf", help="corpus chrF with bootstrap CI")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--resamples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(func=_cmd_chrf)

    p = sub.add_parser("train-align", help="train an IBM Model 1 lexicon")
    p.add_argument("--corpus", required=True, help="TSV src<TAB>tgt per line")
    p.add_argument("--iters", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_train_align)

    p = sub.add_parser("align", help="Viterbi-align sentence pairs (Pharaoh output)")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.set_defaults(func=_cmd_align)

    p = sub.add_parser("evaluate", help="evaluate a system run against an evalset")
    p.add_argument("--evalset", required=True)
    p.add_argument("--run", required=True)
    p.add_argument("--split", choices=["dev", "test"], default="dev")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--resamples", type=int, default=1000)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("annotate", help="build annotation batches / aggregate scores")
    p.add_argument("--make-batch", action="store_true")
    p.add_argument("--aggregate", action="store_true")
    p.add_argument("--evalset")
    p.add_argument("--run", action="append", default=[])
    p.add_argument("--annotators", default="")
    p.add_argument("--tasks", help="output/input tasks JSONL")
    p.add_argument("--key", help="blind-label key JSONL")
    p.add_argument("--scores", help="scores JSONL")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--limit", type=int)
    p.set_defaults(func=_cmd_annotate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--backend", choices=["identity", "dictionary", "remote"])
    p.add_argument("--dictionary")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (RuntimeError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
