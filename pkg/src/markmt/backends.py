"""Translation backends and terminology checking.

Backends implement `translate_batch(request) -> TranslationResult`.  The
identity and dictionary backends are deterministic and offline (used in
tests and round-trip checks); the remote backend speaks the v1 JSON wire
protocol with chunking, retry with exponential backoff, and a cap on
in-flight requests.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Protocol, Sequence

import requests

from .aligner import NULL_INDEX, AlignmentLinks
from .segmenter import Segment, tokenize


class UnsupportedPair(ValueError):
    pass


class BackendUnavailable(RuntimeError):
    def __init__(self, message: str, retryable: bool = True):
        super().__init__(message)
        self.retryable = retryable


class Timeout(BackendUnavailable):
    def __init__(self, message: str):
        super().__init__(message, retryable=True)


class AuthError(RuntimeError):
    pass


class ProtocolError(RuntimeError):
    pass


@dataclass(frozen=True)
class TranslationRequest:
    segments: tuple[str, ...]
    source_lang: str
    target_lang: str
    want_alignment: bool = False

    def __post_init__(self):
        if not self.segments:
            raise ValueError("segment list must be nonempty")
        if self.source_lang == self.target_lang:
            raise ValueError("source and target language must differ")


@dataclass(frozen=True)
class TranslationResult:
    translations: tuple[str, ...]
    alignments: Optional[tuple[Optional[AlignmentLinks], ...]]
    backend_id: str
    latency_ms: int = 0


class Backend(Protocol):
    backend_id: str

    def translate_batch(self, request: TranslationRequest) -> TranslationResult: ...


def _diagonal_alignment(n: int) -> AlignmentLinks:
    return AlignmentLinks(frozenset((i, i) for i in range(n)))


class IdentityBackend:
    """Copies input to output; diagonal token alignment."""

    backend_id = "identity"

    def translate_batch(self, request: TranslationRequest) -> TranslationResult:
        alignments = None
        if request.want_alignment:
            alignments = tuple(
                _diagonal_alignment(len(tokenize(s))) for s in request.segments
            )
        return TranslationResult(
            translations=request.segments,
            alignments=alignments,
            backend_id=self.backend_id,
        )


class DictionaryBackend:
    """Word-for-word lookup; OOV words are copied verbatim with a NULL link."""

    backend_id = "dictionary"

    def __init__(self, mapping: dict[str, str], source_lang: str = "cs", target_lang: str = "uk"):
        self.mapping = {k.casefold(): v for k, v in mapping.items()}
        self.pair = (source_lang, target_lang)

    @classmethod
    def from_tsv(cls, path: str | Path, **kwargs) -> "DictionaryBackend":
        mapping = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            src, _, tgt = line.partition("\t")
            mapping[src] = tgt
        return cls(mapping, **kwargs)

    def translate_batch(self, request: TranslationRequest) -> TranslationResult:
        if (request.source_lang, request.target_lang) != self.pair:
            raise UnsupportedPair(
                f"{request.source_lang}->{request.target_lang} not supported"
            )
        translations = []
        alignments = []
        for text in request.segments:
            tokens = tokenize(text)
            out_words = []
            links = set()
            for j, tok in enumerate(tokens):
                hit = self.mapping.get(tok.text.casefold())
                if hit is None:
                    out_words.append(tok.text)
                    links.add((NULL_INDEX, j))
                else:
                    out_words.append(hit)
                    links.add((j, j))
            translations.append(" ".join(out_words))
            alignments.append(AlignmentLinks(frozenset(links)))
        return TranslationResult(
            translations=tuple(translations),
            alignments=tuple(alignments) if request.want_alignment else None,
            backend_id=self.backend_id,
        )


@dataclass
class RemoteConfig:
    endpoint_url: str
    api_key_env_name: str = "MARKMT_API_KEY"
    timeout_ms: int = 10_000
    max_retries: int = 3
    backoff_base_ms: int = 250
    max_batch_chars: int = 8_000
    max_in_flight: int = 4


class RemoteBackend:
    """Client for the v1 JSON wire protocol.

    POST {endpoint} with {"src_lang", "tgt_lang", "segments", "want_alignment"}
    and an Authorization bearer header; response carries "translations" and
    optional "alignments" as [[i, j], ...] per segment.
    """

    backend_id = "remote"

    def __init__(self, config: RemoteConfig):
        self.config = config
        self._slots = threading.Semaphore(config.max_in_flight)

    def _chunk(self, segments: Sequence[str]) -> list[list[str]]:
        chunks: list[list[str]] = [[]]
        size = 0
        for seg in segments:
            if chunks[-1] and size + len(seg) > self.config.max_batch_chars:
                chunks.append([])
                size = 0
            chunks[-1].append(seg)
            size += len(seg)
        return chunks

    def _call_once(self, body: dict) -> dict:
        headers = {}
        key = os.environ.get(self.config.api_key_env_name)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        try:
            resp = requests.post(
                self.config.endpoint_url,
                json=body,
                headers=headers,
                timeout=self.config.timeout_ms / 1000.0,
            )
        except requests.Timeout as exc:
            raise Timeout(str(exc)) from exc
        except requests.ConnectionError as exc:
            raise BackendUnavailable(str(exc), retryable=True) from exc
        if resp.status_code in (401, 403):
            raise AuthError(f"HTTP {resp.status_code}")
        if resp.status_code in (429, 500, 502, 503, 504):
            raise BackendUnavailable(f"HTTP {resp.status_code}", retryable=True)
        if resp.status_code != 200:
            raise ProtocolError(f"unexpected HTTP {resp.status_code}")
        try:
            return resp.json()
        except ValueError as exc:
            raise ProtocolError(f"malformed JSON response: {exc}") from exc

    def _call_with_retries(self, body: dict) -> dict:
        attempt = 0
        while True:
            try:
                with self._slots:
                    return self._call_once(body)
            except BackendUnavailable as exc:
                if not exc.retryable or attempt >= self.config.max_retries:
                    raise
                time.sleep(self.config.backoff_base_ms / 1000.0 * (2**attempt))
                attempt += 1

    def health_check(self) -> bool:
        try:
            requests.get(self.config.endpoint_url, timeout=2)
            return True
        except requests.RequestException:
            return False

    def translate_batch(self, request: TranslationRequest) -> TranslationResult:
        start = time.monotonic()
        translations: list[str] = []
        alignments: list[Optional[AlignmentLinks]] = []
        for chunk in self._chunk(request.segments):
            body = {
                "src_lang": request.source_lang,
                "tgt_lang": request.target_lang,
                "segments": chunk,
                "want_alignment": request.want_alignment,
            }
            payload = self._call_with_retries(body)
            got = payload.get("translations")
            if not isinstance(got, list) or len(got) != len(chunk):
                raise ProtocolError("translations missing or wrong length")
            translations.extend(got)
            raw_aligns = payload.get("alignments")
            if request.want_alignment and isinstance(raw_aligns, list):
                for raw in raw_aligns:
                    alignments.append(
                        AlignmentLinks(frozenset((int(i), int(j)) for i, j in raw))
                    )
            else:
                alignments.extend([None] * len(chunk))
        latency = int((time.monotonic() - start) * 1000)
        return TranslationResult(
            translations=tuple(translations),
            alignments=tuple(alignments) if request.want_alignment else None,
            backend_id=self.backend_id,
            latency_ms=latency,
        )


# ---------------------------------------------------------------------------
# terminology / glossary checking

LEMMA_PREFIX_LEN = 5


@dataclass(frozen=True)
class GlossaryEntry:
    source_term: str
    target_term: str
    domain: str = ""
    match: str = "exact"  # exact | lemma_prefix


@dataclass(frozen=True)
class Glossary:
    entries: tuple[GlossaryEntry, ...]

    def __post_init__(self):
        keys = [(e.source_term.casefold(), e.domain) for e in self.entries]
        if len(keys) != len(set(keys)):
            raise ValueError("duplicate (source_term, domain) in glossary")

    @classmethod
    def from_tsv(cls, path: str | Path) -> "Glossary":
        entries = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) < 2:
                raise ValueError(f"bad glossary line: {line!r}")
            src, tgt = parts[0], parts[1]
            domain = parts[2] if len(parts) > 2 else ""
            match = parts[3] if len(parts) > 3 else "exact"
            entries.append(GlossaryEntry(src, tgt, domain, match))
        return cls(tuple(entries))

    def for_domain(self, domain: str) -> list[GlossaryEntry]:
        return [e for e in self.entries if e.domain in ("", domain)]


@dataclass(frozen=True)
class TermFinding:
    segment_id: str
    source_term: str
    expected_target: str
    status: str  # ok | missing | mismatched
    found_text: Optional[str] = None


def _occurs(needle: str, haystack: str, mode: str) -> bool:
    needle = needle.casefold()
    hay = haystack.casefold()
    if mode == "exact":
        return needle in hay
    prefix = needle[:LEMMA_PREFIX_LEN]
    return any(w.startswith(prefix) for w in hay.split())


def check_terminology(
    src_segment: Segment,
    hypothesis: str,
    glossary: Glossary,
    domain: str = "",
    known_wrong: Optional[dict[str, Sequence[str]]] = None,
) -> list[TermFinding]:
    """Check glossary terms occurring in the source against a hypothesis.

    Longest source terms are matched first; `known_wrong` maps source terms
    to target variants that should be flagged as mismatched when present.
    """
    findings: list[TermFinding] = []
    entries = sorted(
        glossary.for_domain(domain), key=lambda e: -len(e.source_term)
    )
    known_wrong = known_wrong or {}
    for entry in entries:
        if not _occurs(entry.source_term, src_segment.text, entry.match):
            continue
        wrong_hit = next(
            (
                v
                for v in known_wrong.get(entry.source_term, ())
                if _occurs(v, hypothesis, entry.match)
            ),
            None,
        )
        if wrong_hit is not None:
            status, found = "mismatched", wrong_hit
        elif _occurs(entry.target_term, hypothesis, entry.match):
            status, found = "ok", entry.target_term
        else:
            status, found = "missing", None
        findings.append(
            TermFinding(
                segment_id=src_segment.segment_id,
                source_term=entry.source_term,
                expected_target=entry.target_term,
                status=status,
                found_text=found,
            )
        )
    return findings
