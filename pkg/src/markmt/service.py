"""HTTP service: document translation, word tooltips, annotation workflow.

State shared across requests is read-only after startup except for the
score store (single-writer, append-only JSONL; replaying the file
reconstructs the in-memory state) and the bounded TTL session map used by
tooltips.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import evalharness
from .aligner import NULL_INDEX, LexiconTable
from .backends import (
    AuthError,
    Backend,
    BackendUnavailable,
    DictionaryBackend,
    Glossary,
    IdentityBackend,
    ProtocolError,
    RemoteBackend,
    RemoteConfig,
    UnsupportedPair,
)
from .docmodel import DecodeError, MalformedMarkup
from .evalharness import HumanScore
from .pipeline import SegmentResult, translate_document
from .segmenter import ExtractionPolicy, default_abbreviations

SESSION_TTL_SECONDS = 30 * 60
SESSION_CAPACITY = 256


@dataclass
class ServiceConfig:
    backend: Backend = field(default_factory=IdentityBackend)
    glossaries: dict[str, Glossary] = field(default_factory=dict)
    tasks_path: Optional[str] = None
    key_path: Optional[str] = None
    scores_path: Optional[str] = None
    lexicon: Optional[LexiconTable] = None
    policy: Optional[ExtractionPolicy] = None
    max_request_bytes: int = 1024 * 1024

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        base = Path(path).parent

        def resolve(p):
            return str(base / p) if p and not Path(p).is_absolute() else p

        backend = make_backend(
            raw.get("backend", "identity"),
            dictionary_path=resolve(raw.get("dictionary_path")),
            remote=raw.get("remote"),
        )
        glossaries = {
            domain: Glossary.from_tsv(resolve(p))
            for domain, p in raw.get("glossaries", {}).items()
        }
        lexicon = None
        if raw.get("lexicon_path"):
            lexicon = LexiconTable.load_tsv(resolve(raw["lexicon_path"]))
        return cls(
            backend=backend,
            glossaries=glossaries,
            tasks_path=resolve(raw.get("tasks_path")),
            key_path=resolve(raw.get("key_path")),
            scores_path=resolve(raw.get("scores_path")),
            lexicon=lexicon,
            max_request_bytes=raw.get("max_request_bytes", 1024 * 1024),
        )


def make_backend(
    name: str,
    dictionary_path: Optional[str] = None,
    remote: Optional[dict] = None,
) -> Backend:
    if name == "identity":
        return IdentityBackend()
    if name == "dictionary":
        if not dictionary_path:
            raise ValueError("dictionary backend needs dictionary_path")
        return DictionaryBackend.from_tsv(dictionary_path)
    if name == "remote":
        if not remote or "endpoint_url" not in remote:
            raise ValueError("remote backend needs remote.endpoint_url")
        return RemoteBackend(RemoteConfig(**remote))
    raise ValueError(f"unknown backend {name!r}")


class ScoreStore:
    """Append-only JSONL store; last write wins per (task, label, annotator)."""

    def __init__(self, path: Optional[str]):
        self.path = path
        self._lock = threading.Lock()
        self._scores: dict[tuple[str, str, str], HumanScore] = {}
        if path and Path(path).exists():
            for score in evalharness.load_scores(path):
                self._scores[(score.task_id, score.blind_label, score.annotator_id)] = score

    def submit(self, score: HumanScore) -> None:
        with self._lock:
            self._scores[(score.task_id, score.blind_label, score.annotator_id)] = score
            if self.path:
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(score.to_json(), ensure_ascii=False) + "\n")
                    fh.flush()

    def all_scores(self) -> list[HumanScore]:
        with self._lock:
            return list(self._scores.values())

    def scored_labels(self, task_id: str, annotator_id: str) -> set[str]:
        with self._lock:
            return {
                label
                for (tid, label, aid) in self._scores
                if tid == task_id and aid == annotator_id
            }


class SessionStore:
    """TTL + LRU bounded map of tooltip sessions."""

    def __init__(self, ttl: float = SESSION_TTL_SECONDS, capacity: int = SESSION_CAPACITY):
        self.ttl = ttl
        self.capacity = capacity
        self._lock = threading.Lock()
        self._sessions: OrderedDict[str, tuple[float, dict[str, SegmentResult]]] = OrderedDict()

    def put(self, segments: dict[str, SegmentResult]) -> str:
        session_id = uuid.uuid4().hex
        with self._lock:
            self._sessions[session_id] = (time.monotonic(), segments)
            self._sessions.move_to_end(session_id)
            while len(self._sessions) > self.capacity:
                self._sessions.popitem(last=False)
        return session_id

    def get(self, session_id: str) -> Optional[dict[str, SegmentResult]]:
        with self._lock:
            entry = self._sessions.get(session_id)
            if entry is None:
                return None
            created, segments = entry
            if time.monotonic() - created > self.ttl:
                del self._sessions[session_id]
                return None
            self._sessions.move_to_end(session_id)
            return segments


def _links_json(links) -> list[list[int]]:
    return sorted([i, j] for i, j in links.links)


def create_app(config: Optional[ServiceConfig] = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="markmt", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    policy = config.policy or ExtractionPolicy(abbreviations=default_abbreviations())
    tasks = evalharness.load_tasks(config.tasks_path) if config.tasks_path else []
    key = evalharness.load_key(config.key_path) if config.key_path else {}
    tasks_by_annotator: dict[str, list] = {}
    for task in tasks:
        tasks_by_annotator.setdefault(task.annotator_id, []).append(task)
    tasks_by_id = {t.task_id: t for t in tasks}
    store = ScoreStore(config.scores_path)
    sessions = SessionStore()
    app.state.score_store = store

    def error(status: int, message: str, **extra):
        return JSONResponse({"error": message, **extra}, status_code=status)

    @app.post("/api/v1/translate")
    async def translate(request: Request):
        raw = await request.body()
        if len(raw) > config.max_request_bytes:
            return error(413, "request too large")
        try:
            body = json.loads(raw)
        except ValueError:
            return error(400, "malformed JSON body")
        fmt = body.get("format")
        content = body.get("content")
        if fmt not in ("html", "xml", "text") or not isinstance(content, str):
            return error(400, "format must be html|xml|text and content a string")
        src = body.get("source_lang", "cs")
        tgt = body.get("target_lang", "uk")
        domain = body.get("domain", "")
        glossary = None
        if body.get("glossary"):
            glossary = config.glossaries.get(domain) or config.glossaries.get("")
        try:
            result = translate_document(
                content, fmt, config.backend, src, tgt,
                policy=policy, lexicon=config.lexicon,
                glossary=glossary, domain=domain,
            )
        except MalformedMarkup as exc:
            return error(400, exc.message, line=exc.line, column=exc.column)
        except DecodeError as exc:
            return error(400, str(exc))
        except UnsupportedPair as exc:
            return error(422, str(exc))
        except (BackendUnavailable, ProtocolError, AuthError) as exc:
            return error(502, str(exc))
        payload = {
            "content": result.content,
            "segments": [
                {
                    "segment_id": s.segment_id,
                    "source_text": s.source_text,
                    "target_text": s.target_text,
                    "alignment": _links_json(s.links),
                    "warnings": [
                        {"segment_id": s.segment_id, "marker_id": w.marker_id, "kind": w.kind}
                        for w in s.warnings
                    ],
                }
                for s in result.segments
            ],
            "term_findings": [
                {
                    "segment_id": f.segment_id,
                    "source_term": f.source_term,
                    "expected_target": f.expected_target,
                    "status": f.status,
                    "found_text": f.found_text,
                }
                for f in result.term_findings
            ],
        }
        if body.get("keep_session"):
            payload["session"] = sessions.put({s.segment_id: s for s in result.segments})
        return JSONResponse(payload)

    @app.get("/api/v1/tooltip")
    def tooltip(session: str, segment: str, token: int):
        seg_map = sessions.get(session)
        if seg_map is None:
            return error(404, "unknown or expired session")
        seg = seg_map.get(segment)
        if seg is None:
            return error(404, "unknown segment")
        if token < 0 or token >= len(seg.source_tokens):
            return error(400, "token index out of range")
        translations = [
            seg.target_tokens[j].text
            for j in sorted(j for i, j in seg.links.links if i == token)
            if j < len(seg.target_tokens)
        ]
        return {"source_token": seg.source_tokens[token].text, "translations": translations}

    @app.get("/api/v1/annotation/next")
    def annotation_next(annotator: str):
        batch = tasks_by_annotator.get(annotator)
        if batch is None:
            return error(404, f"unknown annotator {annotator!r}")
        done = 0
        pending = None
        for task in batch:
            labels = {label for label, _ in task.candidates}
            if labels <= store.scored_labels(task.task_id, annotator):
                done += 1
            elif pending is None:
                pending = task
        if pending is None:
            return Response(status_code=204)
        payload = pending.to_json()
        payload["progress"] = {"done": done, "total": len(batch)}
        return JSONResponse(payload)

    @app.post("/api/v1/annotation/score")
    async def annotation_score(request: Request):
        try:
            body = json.loads(await request.body())
        except ValueError:
            return error(400, "malformed JSON body")
        task = tasks_by_id.get(body.get("task_id"))
        if task is None:
            return error(404, "unknown task")
        annotator = body.get("annotator_id")
        if annotator not in tasks_by_annotator:
            return error(404, "unknown annotator")
        label = body.get("blind_label")
        if label not in {l for l, _ in task.candidates}:
            return error(404, "unknown blind label for task")
        raw_score = body.get("score")
        if not isinstance(raw_score, int) or isinstance(raw_score, bool) or not 0 <= raw_score <= 10:
            return error(400, "score must be an integer in [0, 10]")
        score = HumanScore(
            task_id=task.task_id,
            blind_label=label,
            score=raw_score,
            annotator_id=annotator,
            timestamp=body.get("timestamp", ""),
        )
        store.submit(score)
        return {"status": "ok"}

    @app.get("/api/v1/annotation/summary")
    def annotation_summary():
        if not key:
            return error(404, "no key file configured")
        scores = store.all_scores()
        summaries, annotator_means = evalharness.aggregate_annotations(scores, key)
        return {
            "systems": {
                sysid: {
                    "mean": s.mean,
                    "sd": s.sd,
                    "n": s.n,
                    "rendered": s.render(),
                }
                for sysid, s in summaries.items()
            },
            "per_annotator": annotator_means,
            "total_scores": len(scores),
        }

    @app.get("/health")
    def health():
        status = "ok"
        probe = getattr(config.backend, "health_check", None)
        if probe is not None and not probe():
            status = "degraded"
        return {"status": status, "backend": config.backend.backend_id}

    return app


def run_server(config: ServiceConfig, host: str = "127.0.0.1", port: int = 8000) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host=host, port=port, log_level="warning")
