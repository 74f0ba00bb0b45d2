"""End-to-end document translation: parse -> extract -> translate ->
align -> project -> reinsert."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import aligner as aligner_mod
from .aligner import NULL_INDEX, AlignmentLinks, LexiconTable, viterbi_align
from .backends import Backend, Glossary, TermFinding, TranslationRequest, check_terminology
from .docmodel import MarkupDocument, parse_document, serialize_document
from .segmenter import ExtractionPolicy, Segment, Token, extract_segments, reinsert_segments, split_sentences, tokenize
from .tagproject import ProjectionWarning, TranslatedSegment, project_spans


@dataclass
class SegmentResult:
    segment_id: str
    source_text: str
    target_text: str
    source_tokens: tuple[Token, ...]
    target_tokens: tuple[Token, ...]
    links: AlignmentLinks
    warnings: tuple[ProjectionWarning, ...]


@dataclass
class DocumentTranslation:
    content: str
    segments: list[SegmentResult]
    term_findings: list[TermFinding]


def _null_links(n_tgt: int) -> AlignmentLinks:
    return AlignmentLinks(frozenset((NULL_INDEX, j) for j in range(n_tgt)))


def translate_segments(
    segments: Sequence[Segment],
    backend: Backend,
    source_lang: str,
    target_lang: str,
    lexicon: Optional[LexiconTable] = None,
) -> list[tuple[TranslatedSegment, SegmentResult]]:
    """Translate extracted segments and project their inline spans."""
    if not segments:
        return []
    request = TranslationRequest(
        segments=tuple(s.text for s in segments),
        source_lang=source_lang,
        target_lang=target_lang,
        want_alignment=True,
    )
    result = backend.translate_batch(request)
    out = []
    for k, seg in enumerate(segments):
        tgt_text = result.translations[k]
        tgt_tokens = tuple(tokenize(tgt_text))
        links = result.alignments[k] if result.alignments else None
        if links is None:
            if lexicon is not None:
                links = viterbi_align(
                    [t.text for t in seg.tokens], [t.text for t in tgt_tokens], lexicon
                )
            else:
                links = _null_links(len(tgt_tokens))
        spans, warnings = project_spans(seg, tgt_tokens, links)
        translated = TranslatedSegment(
            segment_id=seg.segment_id,
            text=tgt_text,
            tokens=tgt_tokens,
            spans=tuple(spans),
            links=links,
            warnings=tuple(warnings),
        )
        out.append(
            (
                translated,
                SegmentResult(
                    segment_id=seg.segment_id,
                    source_text=seg.text,
                    target_text=tgt_text,
                    source_tokens=seg.tokens,
                    target_tokens=tgt_tokens,
                    links=links,
                    warnings=tuple(warnings),
                ),
            )
        )
    return out


def translate_document(
    content: bytes | str,
    format: str,
    backend: Backend,
    source_lang: str,
    target_lang: str,
    policy: Optional[ExtractionPolicy] = None,
    lexicon: Optional[LexiconTable] = None,
    glossary: Optional[Glossary] = None,
    domain: str = "",
) -> DocumentTranslation:
    """Translate a whole html/xml/text document, preserving markup."""
    policy = policy or ExtractionPolicy()
    if isinstance(content, str):
        content = content.encode("utf-8")
    if format == "text":
        return _translate_plain_text(
            content.decode("utf-8"), backend, source_lang, target_lang,
            policy, lexicon, glossary, domain,
        )
    doc = parse_document(content, format)
    segments = extract_segments(doc, policy)
    pairs = translate_segments(segments, backend, source_lang, target_lang, lexicon)
    translated = [t for t, _ in pairs]
    results = [r for _, r in pairs]
    new_doc = reinsert_segments(doc, translated, policy)
    findings: list[TermFinding] = []
    if glossary is not None:
        for seg, res in zip(segments, results):
            findings.extend(
                check_terminology(seg, res.target_text, glossary, domain)
            )
    return DocumentTranslation(
        content=serialize_document(new_doc).decode("utf-8"),
        segments=results,
        term_findings=findings,
    )


def _translate_plain_text(
    text: str,
    backend: Backend,
    source_lang: str,
    target_lang: str,
    policy: ExtractionPolicy,
    lexicon: Optional[LexiconTable],
    glossary: Optional[Glossary],
    domain: str,
) -> DocumentTranslation:
    from .segmenter import Segment, SegmentLocation

    ranges = split_sentences(text, policy.abbreviations)
    segments = [
        Segment(
            segment_id=f"text:s{k}",
            text=text[a:b],
            tokens=tuple(tokenize(text[a:b])),
            spans=(),
            location=SegmentLocation((), None, 0),
            sentence_index=k,
        )
        for k, (a, b) in enumerate(ranges)
    ]
    pairs = translate_segments(segments, backend, source_lang, target_lang, lexicon)
    results = [r for _, r in pairs]
    out = []
    pos = 0
    for (a, b), res in zip(ranges, results):
        out.append(text[pos:a])
        out.append(res.target_text)
        pos = b
    out.append(text[pos:])
    findings: list[TermFinding] = []
    if glossary is not None:
        for seg, res in zip(segments, results):
            findings.extend(check_terminology(seg, res.target_text, glossary, domain))
    return DocumentTranslation("".join(out), results, findings)
