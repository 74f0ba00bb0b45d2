"""Evaluation datasets, system runs, annotation batches and aggregation.

All datasets are JSONL, one record per line.  Annotation tasks are blind:
candidate translations carry labels A/B/C... in a seeded per-task
permutation, and the label -> system mapping lives only in a separate key
file.
"""

from __future__ import annotations

import json
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from . import metrics
from .metrics import ScoreSummary

SUBJECTS = ("biology", "chemistry", "geography", "other")
SPLITS = ("dev", "test")
ERROR_LEVELS = ("lexical", "morphological", "syntactic")
TERMINOLOGY_CAUSES = ("context_mistranslation", "unseen_term", "no_equivalent")


class SchemaError(ValueError):
    def __init__(self, line: int, field: str, message: str = ""):
        super().__init__(f"line {line}, field {field!r}: {message}")
        self.line = line
        self.field = field


class MissingHypotheses(ValueError):
    def __init__(self, item_ids: Sequence[str]):
        super().__init__(f"run lacks hypotheses for items: {sorted(item_ids)}")
        self.item_ids = tuple(sorted(item_ids))


class InsufficientSystems(ValueError):
    pass


class UnknownTask(KeyError):
    pass


class UnknownLabel(KeyError):
    pass


@dataclass(frozen=True)
class EvalItem:
    item_id: str
    subject: str
    exercise_type: str
    source_segments: tuple[str, ...]
    reference_segments: tuple[str, ...]
    split: str


@dataclass(frozen=True)
class SystemRun:
    system_id: str
    hypotheses: dict[str, tuple[str, ...]]  # item_id -> segments


@dataclass(frozen=True)
class AnnotationTask:
    task_id: str
    annotator_id: str
    item_id: str
    segment_index: int
    source_text: str
    reference_text: str
    candidates: tuple[tuple[str, str], ...]  # (blind_label, hypothesis)
    permutation_seed: int

    def to_json(self) -> dict:
        return {
            "task_id": self.task_id,
            "annotator_id": self.annotator_id,
            "item_id": self.item_id,
            "segment_index": self.segment_index,
            "source_text": self.source_text,
            "reference_text": self.reference_text,
            "candidates": [[label, text] for label, text in self.candidates],
            "permutation_seed": self.permutation_seed,
        }

    @classmethod
    def from_json(cls, rec: dict) -> "AnnotationTask":
        return cls(
            task_id=rec["task_id"],
            annotator_id=rec["annotator_id"],
            item_id=rec["item_id"],
            segment_index=rec["segment_index"],
            source_text=rec["source_text"],
            reference_text=rec["reference_text"],
            candidates=tuple((l, t) for l, t in rec["candidates"]),
            permutation_seed=rec["permutation_seed"],
        )


@dataclass(frozen=True)
class HumanScore:
    task_id: str
    blind_label: str
    score: int
    annotator_id: str
    timestamp: str

    def __post_init__(self):
        if not isinstance(self.score, int) or not 0 <= self.score <= 10:
            raise ValueError(f"score must be an integer in [0, 10], got {self.score!r}")

    def to_json(self) -> dict:
        return {
            "task_id": self.task_id,
            "blind_label": self.blind_label,
            "score": self.score,
            "annotator_id": self.annotator_id,
            "timestamp": self.timestamp,
        }


@dataclass(frozen=True)
class ErrorAnnotation:
    task_id: str
    level: str
    terminology_cause: Optional[str] = None
    note: str = ""

    def __post_init__(self):
        if self.level not in ERROR_LEVELS:
            raise ValueError(f"unknown error level {self.level!r}")
        if self.terminology_cause is not None:
            if self.level != "lexical":
                raise ValueError("terminology_cause only applies to lexical errors")
            if self.terminology_cause not in TERMINOLOGY_CAUSES:
                raise ValueError(f"unknown cause {self.terminology_cause!r}")


@dataclass(frozen=True)
class EvalReport:
    system_id: str
    split: str
    segment_count: int
    chrf: ScoreSummary
    per_subject: dict[str, float]  # subject -> corpus chrF score

    def to_json(self) -> dict:
        return {
            "system_id": self.system_id,
            "split": self.split,
            "segment_count": self.segment_count,
            "chrf_score": self.chrf.mean,
            "chrf_ci": [self.chrf.ci_low, self.chrf.ci_high],
            "rendered": self.chrf.render(),
            "per_subject": self.per_subject,
        }


# ---------------------------------------------------------------------------
# dataset IO


def load_evalset(path: str | Path) -> list[EvalItem]:
    items = []
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not any(line.strip() for line in lines):
        raise SchemaError(0, "", "empty evalset file")
    seen_ids = set()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(lineno, "", f"invalid JSON: {exc}") from exc
        for key in ("item_id", "subject", "exercise_type", "source_segments",
                    "reference_segments", "split"):
            if key not in rec:
                raise SchemaError(lineno, key, "missing")
        if rec["subject"] not in SUBJECTS:
            raise SchemaError(lineno, "subject", f"unknown subject {rec['subject']!r}")
        if rec["split"] not in SPLITS:
            raise SchemaError(lineno, "split", f"unknown split {rec['split']!r}")
        src = tuple(rec["source_segments"])
        ref = tuple(rec["reference_segments"])
        if len(src) != len(ref) or not src:
            raise SchemaError(
                lineno, "reference_segments", "source/reference lengths differ or empty"
            )
        if rec["item_id"] in seen_ids:
            raise SchemaError(lineno, "item_id", f"duplicate {rec['item_id']!r}")
        seen_ids.add(rec["item_id"])
        items.append(
            EvalItem(rec["item_id"], rec["subject"], rec["exercise_type"], src, ref, rec["split"])
        )
    return items


def save_evalset(items: Sequence[EvalItem], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for it in items:
            fh.write(
                json.dumps(
                    {
                        "item_id": it.item_id,
                        "subject": it.subject,
                        "exercise_type": it.exercise_type,
                        "source_segments": list(it.source_segments),
                        "reference_segments": list(it.reference_segments),
                        "split": it.split,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def split_counts(items: Sequence[EvalItem]) -> dict[str, int]:
    counts = Counter(it.split for it in items)
    return {split: counts.get(split, 0) for split in SPLITS}


def load_run(path: str | Path, system_id: Optional[str] = None) -> SystemRun:
    """Run file: JSONL {"item_id": ..., "hypotheses": [...]}, optional
    {"system_id": ...} in any record."""
    hypotheses: dict[str, tuple[str, ...]] = {}
    sid = system_id
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(lineno, "", f"invalid JSON: {exc}") from exc
        if "system_id" in rec and sid is None:
            sid = rec["system_id"]
        if "item_id" in rec:
            if "hypotheses" not in rec:
                raise SchemaError(lineno, "hypotheses", "missing")
            hypotheses[rec["item_id"]] = tuple(rec["hypotheses"])
    return SystemRun(sid or "system", hypotheses)


# ---------------------------------------------------------------------------
# evaluation


def evaluate_run(
    run: SystemRun,
    items: Sequence[EvalItem],
    split: str = "dev",
    seed: int = 1,
    resamples: int = 1000,
) -> EvalReport:
    selected = [it for it in items if it.split == split]
    missing = [
        it.item_id
        for it in selected
        if it.item_id not in run.hypotheses
        or len(run.hypotheses[it.item_id]) != len(it.reference_segments)
    ]
    if missing:
        raise MissingHypotheses(missing)
    pairs = []
    by_subject: dict[str, list[tuple[str, str]]] = defaultdict(list)
    for it in selected:
        hyps = run.hypotheses[it.item_id]
        for hyp, ref in zip(hyps, it.reference_segments):
            pairs.append((hyp, ref))
            by_subject[it.subject].append((hyp, ref))
    summary = metrics.bootstrap_ci(pairs, resamples=resamples, seed=seed)
    per_subject = {
        subject: metrics.chrf_corpus(ps).score for subject, ps in sorted(by_subject.items())
    }
    return EvalReport(
        system_id=run.system_id,
        split=split,
        segment_count=len(pairs),
        chrf=summary,
        per_subject=per_subject,
    )


# ---------------------------------------------------------------------------
# human annotation workflow

BLIND_LABELS = "ABCDEFGH"


def make_annotation_batch(
    runs: Sequence[SystemRun],
    items: Sequence[EvalItem],
    annotators: Sequence[str],
    seed: int = 1,
    limit: Optional[int] = None,
) -> tuple[list[AnnotationTask], dict[str, dict[str, str]]]:
    """Blind annotation tasks plus the label -> system key.

    Segments are distributed round-robin across annotators (loads within
    ±1); per-task candidate order is a seeded permutation.  Returns
    (tasks, key) where key maps task_id -> {blind_label: system_id}.
    """
    if len(runs) < 2:
        raise InsufficientSystems("need at least 2 systems")
    if len(runs) > len(BLIND_LABELS):
        raise InsufficientSystems(f"at most {len(BLIND_LABELS)} systems supported")
    segments = []
    for it in items:
        for run in runs:
            if it.item_id not in run.hypotheses or len(
                run.hypotheses[it.item_id]
            ) != len(it.source_segments):
                raise MissingHypotheses([it.item_id])
        for s_idx in range(len(it.source_segments)):
            segments.append((it, s_idx))
    if limit is not None:
        segments = segments[:limit]
    rng = random.Random(seed)
    tasks: list[AnnotationTask] = []
    key: dict[str, dict[str, str]] = {}
    for n, (it, s_idx) in enumerate(segments):
        annotator = annotators[n % len(annotators)]
        task_id = f"t{n:06d}"
        task_seed = rng.randrange(2**31)
        order = list(range(len(runs)))
        random.Random(task_seed).shuffle(order)
        labels = BLIND_LABELS[: len(runs)]
        candidates = tuple(
            (labels[k], runs[order[k]].hypotheses[it.item_id][s_idx])
            for k in range(len(runs))
        )
        key[task_id] = {labels[k]: runs[order[k]].system_id for k in range(len(runs))}
        tasks.append(
            AnnotationTask(
                task_id=task_id,
                annotator_id=annotator,
                item_id=it.item_id,
                segment_index=s_idx,
                source_text=it.source_segments[s_idx],
                reference_text=it.reference_segments[s_idx],
                candidates=candidates,
                permutation_seed=task_seed,
            )
        )
    return tasks, key


def save_tasks(tasks: Sequence[AnnotationTask], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for t in tasks:
            fh.write(json.dumps(t.to_json(), ensure_ascii=False) + "\n")


def load_tasks(path: str | Path) -> list[AnnotationTask]:
    return [
        AnnotationTask.from_json(json.loads(line))
        for line in Path(path).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]


def save_key(key: dict[str, dict[str, str]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for task_id, mapping in key.items():
            fh.write(json.dumps({"task_id": task_id, **mapping}) + "\n")


def load_key(path: str | Path) -> dict[str, dict[str, str]]:
    key = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        task_id = rec.pop("task_id")
        key[task_id] = rec
    return key


def load_scores(path: str | Path) -> list[HumanScore]:
    scores = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        rec = json.loads(line)
        try:
            scores.append(
                HumanScore(
                    rec["task_id"], rec["blind_label"], rec["score"],
                    rec["annotator_id"], rec.get("timestamp", ""),
                )
            )
        except (KeyError, ValueError) as exc:
            raise SchemaError(lineno, "score", str(exc)) from exc
    return scores


def aggregate_annotations(
    scores: Sequence[HumanScore], key: dict[str, dict[str, str]]
) -> tuple[dict[str, ScoreSummary], dict[str, float]]:
    """De-anonymize scores; return per-system summaries and per-annotator means."""
    by_system: dict[str, list[int]] = defaultdict(list)
    by_annotator: dict[str, list[int]] = defaultdict(list)
    for s in scores:
        if s.task_id not in key:
            raise UnknownTask(s.task_id)
        mapping = key[s.task_id]
        if s.blind_label not in mapping:
            raise UnknownLabel(f"{s.task_id}: {s.blind_label}")
        by_system[mapping[s.blind_label]].append(s.score)
        by_annotator[s.annotator_id].append(s.score)
    summaries = {
        sysid: metrics.summarize_scores(vals) for sysid, vals in sorted(by_system.items())
    }
    annotator_means = {
        a: sum(vals) / len(vals) for a, vals in sorted(by_annotator.items())
    }
    return summaries, annotator_means


def error_summary(annotations: Sequence[ErrorAnnotation]) -> dict:
    levels = Counter(a.level for a in annotations)
    causes = Counter(
        a.terminology_cause for a in annotations if a.terminology_cause is not None
    )
    return {
        "levels": {level: levels.get(level, 0) for level in ERROR_LEVELS},
        "terminology_causes": {c: causes.get(c, 0) for c in TERMINOLOGY_CAUSES},
        "total": len(annotations),
    }
