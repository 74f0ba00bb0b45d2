"""Segment extraction: documents -> translatable plain-text sentences.

A *flow* is a maximal run of text and inline elements under one block-level
parent.  Flows are sentence-split; each sentence becomes a Segment whose
inline formatting is recorded as token-range InlineSpans.  Reinsertion walks
the original document again, so whitespace gaps between sentences survive an
identity translation.

Known limitation: an inline element spanning several sentences is clipped to
one span per sentence, so on reinsertion the tag is re-opened per sentence.
Exercise fixtures keep inline markup within a sentence.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .docmodel import (
    Comment,
    Element,
    MarkupDocument,
    MarkupNode,
    NodePath,
    ProcessingInstruction,
    Text,
    canonicalize,
)

DEFAULT_INLINE_TAGS = frozenset({"b", "i", "u", "em", "strong", "sub", "sup", "span"})
DEFAULT_SKIP_TAGS = frozenset({"script", "style"})
DEFAULT_TRANSLATABLE_ATTRIBUTES = frozenset({"alt", "title"})

SENTENCE_TERMINALS = ".!?…"


class NestingUnsupported(ValueError):
    pass


class LocationStale(KeyError):
    pass


class SpanConflict(ValueError):
    pass


@dataclass(frozen=True)
class Token:
    text: str
    char_start: int
    char_end: int


@dataclass(frozen=True)
class InlineSpan:
    marker_id: str
    tag_snapshot: Element  # name + attributes, no children
    token_start: int
    token_end: int  # half-open; start == end marks an empty element

    @property
    def token_range(self) -> tuple[int, int]:
        return (self.token_start, self.token_end)


@dataclass(frozen=True)
class SegmentLocation:
    path: NodePath  # block parent (or attribute-bearing element)
    attribute: Optional[str] = None
    flow_index: int = 0


@dataclass(frozen=True)
class Segment:
    segment_id: str
    text: str
    tokens: tuple[Token, ...]
    spans: tuple[InlineSpan, ...]
    location: SegmentLocation
    sentence_index: int


@dataclass(frozen=True)
class ExerciseMeta:
    type_label: str = ""
    subject: str = ""
    has_images_only: bool = False
    is_crossword: bool = False
    is_grammar_drill: bool = False


@dataclass(frozen=True)
class ExerciseClass:
    translatable: bool
    reason: Optional[str] = None  # image_based|syllable_based|crossword|grammar_practice|other


@dataclass(frozen=True)
class ExtractionPolicy:
    inline_tags: frozenset[str] = DEFAULT_INLINE_TAGS
    skip_tags: frozenset[str] = DEFAULT_SKIP_TAGS
    translatable_attributes: frozenset[str] = DEFAULT_TRANSLATABLE_ATTRIBUTES
    abbreviations: frozenset[str] = frozenset()

    @classmethod
    def from_config(cls, path: str | Path) -> "ExtractionPolicy":
        """Read a key-value config file (key = v1, v2, ...)."""
        values: dict[str, str] = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            values[key.strip()] = val.strip()

        def tagset(key: str, default: frozenset[str]) -> frozenset[str]:
            if key not in values:
                return default
            return frozenset(t.strip() for t in values[key].replace(",", " ").split() if t.strip())

        abbrevs: frozenset[str] = frozenset()
        if "abbreviations_path" in values:
            abbrevs = load_abbreviations(Path(path).parent / values["abbreviations_path"])
        return cls(
            inline_tags=tagset("inline_tags", DEFAULT_INLINE_TAGS),
            skip_tags=tagset("skip_tags", DEFAULT_SKIP_TAGS),
            translatable_attributes=tagset(
                "translatable_attributes", DEFAULT_TRANSLATABLE_ATTRIBUTES
            ),
            abbreviations=abbrevs,
        )


def load_abbreviations(path: str | Path) -> frozenset[str]:
    out = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.add(line.casefold())
    return frozenset(out)


def default_abbreviations() -> frozenset[str]:
    """Czech abbreviation list shipped with the package."""
    return load_abbreviations(Path(__file__).parent / "data" / "czech_abbreviations.txt")


# ---------------------------------------------------------------------------
# tokenization and sentence splitting


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[Token]:
    """Whitespace tokenization; leading/trailing punctuation split off."""
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        # peel leading punctuation
        start, end = i, j
        while start < end and _is_punct(text[start]):
            tokens.append(Token(text[start], start, start + 1))
            start += 1
        # find trailing punctuation run
        tail = end
        while tail > start and _is_punct(text[tail - 1]):
            tail -= 1
        if start < tail:
            tokens.append(Token(text[start:tail], start, tail))
        for k in range(tail, end):
            tokens.append(Token(text[k], k, k + 1))
        i = j
    return tokens


def split_sentences(
    text: str, abbreviations: Iterable[str] = ()
) -> list[tuple[int, int]]:
    """Character ranges of sentences; whitespace between ranges is gap text.

    A boundary follows `.`, `!`, `?` or `…` when whitespace and an
    uppercase letter or digit come next, unless the word ending in `.` is
    a known abbreviation.
    """
    abbrevs = {a.casefold() for a in abbreviations}
    n = len(text)
    start = 0
    while start < n and text[start].isspace():
        start += 1
    if start == n:
        return []
    ranges: list[tuple[int, int]] = []
    i = start
    while i < n:
        ch = text[i]
        if ch in SENTENCE_TERMINALS:
            j = i + 1
            while j < n and text[j].isspace():
                j += 1
            follows = j > i + 1 and j < n and (text[j].isupper() or text[j].isdigit())
            suppressed = False
            if ch == "." and follows:
                w = i
                while w > start and not text[w - 1].isspace():
                    w -= 1
                if text[w : i + 1].casefold() in abbrevs:
                    suppressed = True
            if follows and not suppressed:
                ranges.append((start, i + 1))
                start = j
                i = j
                continue
        i += 1
    end = n
    while end > start and text[end - 1].isspace():
        end -= 1
    if end > start:
        ranges.append((start, end))
    return ranges


# ---------------------------------------------------------------------------
# exercise classification


def classify_exercise(meta: ExerciseMeta) -> ExerciseClass:
    """Deterministic include/exclude decision for a whole exercise."""
    label = meta.type_label.casefold()
    if meta.is_crossword or "crossword" in label:
        return ExerciseClass(False, "crossword")
    if meta.has_images_only or "image" in label:
        return ExerciseClass(False, "image_based")
    if "syllable" in label:
        return ExerciseClass(False, "syllable_based")
    if meta.is_grammar_drill or "grammar" in label:
        return ExerciseClass(False, "grammar_practice")
    return ExerciseClass(True)


# ---------------------------------------------------------------------------
# extraction internals


@dataclass(frozen=True)
class _FlowSpan:
    # char-offset form of an inline span, before token conversion
    char_start: int
    char_end: int
    snapshot: Element
    seq: int  # document order; parents precede children


@dataclass
class _FlowRecord:
    parent_path: NodePath
    child_range: tuple[int, int]  # indices into parent.children
    flow_index: int
    text: str
    spans: list[_FlowSpan]
    sentence_ranges: list[tuple[int, int]]


@dataclass
class _AttrRecord:
    path: NodePath
    attribute: str
    text: str
    sentence_ranges: list[tuple[int, int]]


def _is_inline(node: MarkupNode, policy: ExtractionPolicy) -> bool:
    return isinstance(node, Element) and node.name in policy.inline_tags


def _collect_flow(
    node: Element, policy: ExtractionPolicy, buf: list[str], spans: list[_FlowSpan], pos: list[int]
) -> None:
    start = pos[0]
    seq = len(spans)
    spans.append(_FlowSpan(start, start, Element(node.name, node.attributes), seq))
    idx = len(spans) - 1
    for child in node.children:
        if isinstance(child, Text):
            buf.append(child.content)
            pos[0] += len(child.content)
        elif _is_inline(child, policy):
            _collect_flow(child, policy, buf, spans, pos)
        elif isinstance(child, Element):
            raise NestingUnsupported(
                f"block element <{child.name}> inside inline <{node.name}>"
            )
        # comments/PIs inside inline elements are dropped from the flow text
    spans[idx] = replace(spans[idx], char_end=pos[0])


def _walk(
    elem: Element,
    path: NodePath,
    policy: ExtractionPolicy,
    flows: list[_FlowRecord],
    attrs: list[_AttrRecord],
) -> None:
    for name in policy.translatable_attributes:
        value = elem.get_attribute(name)
        if value is not None and value.strip():
            attrs.append(
                _AttrRecord(path, name, value, split_sentences(value, policy.abbreviations))
            )
    children = elem.children
    i = 0
    flow_index = 0
    while i < len(children):
        child = children[i]
        if isinstance(child, Text) or _is_inline(child, policy):
            j = i
            buf: list[str] = []
            spans: list[_FlowSpan] = []
            pos = [0]
            while j < len(children) and (
                isinstance(children[j], Text) or _is_inline(children[j], policy)
            ):
                c = children[j]
                if isinstance(c, Text):
                    buf.append(c.content)
                    pos[0] += len(c.content)
                else:
                    _collect_flow(c, policy, buf, spans, pos)
                j += 1
            text = "".join(buf)
            if text.strip():
                flows.append(
                    _FlowRecord(
                        parent_path=path,
                        child_range=(i, j),
                        flow_index=flow_index,
                        text=text,
                        spans=spans,
                        sentence_ranges=split_sentences(text, policy.abbreviations),
                    )
                )
                flow_index += 1
            i = j
        elif isinstance(child, Element):
            if child.name not in policy.skip_tags:
                _walk(child, path + (i,), policy, flows, attrs)
            i += 1
        else:
            i += 1


def _path_id(path: NodePath) -> str:
    return "n" + ".".join(str(i) for i in path) if path else "n"


def _char_to_token_range(
    tokens: Sequence[Token], cs: int, ce: int
) -> tuple[int, int]:
    if cs == ce:
        # zero-width: position after all tokens ending at or before cs
        k = sum(1 for t in tokens if t.char_end <= cs)
        return (k, k)
    ts = next((k for k, t in enumerate(tokens) if t.char_end > cs), len(tokens))
    te = ts
    for k, t in enumerate(tokens):
        if t.char_start < ce:
            te = k + 1
    return (ts, max(te, ts))


def _sentence_segments(
    text: str,
    spans: Sequence[_FlowSpan],
    sentence_ranges: Sequence[tuple[int, int]],
    location: SegmentLocation,
    id_prefix: str,
) -> list[Segment]:
    segments = []
    for s_idx, (a, b) in enumerate(sentence_ranges):
        sent_text = text[a:b]
        tokens = tuple(tokenize(sent_text))
        sent_spans: list[InlineSpan] = []
        marker = 0
        for fs in sorted(spans, key=lambda s: (s.char_start, -s.char_end, s.seq)):
            if fs.char_start < fs.char_end:
                cs, ce = max(fs.char_start, a), min(fs.char_end, b)
                if cs >= ce:
                    continue  # no overlap with this sentence
            else:
                if not a <= fs.char_start <= b:
                    continue
                cs = ce = fs.char_start
            ts, te = _char_to_token_range(tokens, cs - a, ce - a)
            sent_spans.append(InlineSpan(f"m{marker}", fs.snapshot, ts, te))
            marker += 1
        segments.append(
            Segment(
                segment_id=f"{id_prefix}:s{s_idx}",
                text=sent_text,
                tokens=tokens,
                spans=tuple(sent_spans),
                location=location,
                sentence_index=s_idx,
            )
        )
    return segments


def _extract_records(
    doc: MarkupDocument, policy: ExtractionPolicy
) -> tuple[list[_FlowRecord], list[_AttrRecord]]:
    flows: list[_FlowRecord] = []
    attrs: list[_AttrRecord] = []
    _walk(doc.root, (), policy, flows, attrs)
    return flows, attrs


def extract_segments(
    doc: MarkupDocument, policy: ExtractionPolicy | None = None
) -> list[Segment]:
    """All translatable sentence segments of a canonical document."""
    policy = policy or ExtractionPolicy()
    flows, attrs = _extract_records(doc, policy)
    segments: list[Segment] = []
    for flow in flows:
        segments.extend(
            _sentence_segments(
                flow.text,
                flow.spans,
                flow.sentence_ranges,
                SegmentLocation(flow.parent_path, None, flow.flow_index),
                f"{_path_id(flow.parent_path)}:f{flow.flow_index}",
            )
        )
    for rec in attrs:
        segments.extend(
            _sentence_segments(
                rec.text,
                [],
                rec.sentence_ranges,
                SegmentLocation(rec.path, rec.attribute, 0),
                f"{_path_id(rec.path)}:@{rec.attribute}",
            )
        )
    return segments


# ---------------------------------------------------------------------------
# reinsertion


def _span_char_bounds(spans, tokens, text_len):
    """Map token ranges back to character insert positions."""
    bounds = []
    for sp in spans:
        if sp.token_start == sp.token_end:
            if sp.token_start < len(tokens):
                cs = ce = tokens[sp.token_start].char_start
            else:
                cs = ce = text_len
        else:
            cs = tokens[sp.token_start].char_start
            ce = tokens[sp.token_end - 1].char_end
        bounds.append((cs, ce, sp))
    return bounds


def _check_nesting(bounds) -> None:
    for i in range(len(bounds)):
        for j in range(i + 1, len(bounds)):
            a0, a1, _ = bounds[i]
            b0, b1, _ = bounds[j]
            if a0 < b0 < a1 < b1 or b0 < a0 < b1 < a1:
                raise SpanConflict(f"spans ({a0},{a1}) and ({b0},{b1}) partially overlap")


def _render_sentence(text: str, tokens, spans) -> list[MarkupNode]:
    """Rebuild nested inline elements around a translated sentence."""
    bounds = _span_char_bounds(spans, tokens, len(text))
    _check_nesting(bounds)
    order = sorted(range(len(bounds)), key=lambda k: (bounds[k][0], -bounds[k][1], k))

    def build(idx_list: list[int], lo: int, hi: int) -> list[MarkupNode]:
        nodes: list[MarkupNode] = []
        pos = lo
        k = 0
        while k < len(idx_list):
            cs, ce, sp = bounds[idx_list[k]]
            if cs > pos:
                nodes.append(Text(text[pos:cs]))
            # children: subsequent spans contained in [cs, ce)
            inner = []
            m = k + 1
            while m < len(idx_list):
                ics, ice, _ = bounds[idx_list[m]]
                # sort order guarantees equal ranges nest inside the earlier one
                if ics >= cs and ice <= ce and not (cs == ce and (ics, ice) != (cs, ce)):
                    inner.append(idx_list[m])
                    m += 1
                else:
                    break
            snap = sp.tag_snapshot
            nodes.append(
                Element(snap.name, snap.attributes, tuple(build(inner, cs, ce)))
            )
            pos = ce
            k = m
        if pos < hi:
            nodes.append(Text(text[pos:hi]))
        return nodes

    return build(order, 0, len(text))


def reinsert_segments(
    doc: MarkupDocument,
    translated: Sequence,
    policy: ExtractionPolicy | None = None,
) -> MarkupDocument:
    """Replace extracted segments with their translations.

    `translated` items need segment_id, text, tokens and spans attributes
    (TranslatedSegment satisfies this).  Unmentioned segments stay as in
    the source document.
    """
    policy = policy or ExtractionPolicy()
    flows, attrs = _extract_records(doc, policy)
    by_id = {t.segment_id: t for t in translated}
    known_ids = set()
    for flow in flows:
        for s_idx in range(len(flow.sentence_ranges)):
            known_ids.add(f"{_path_id(flow.parent_path)}:f{flow.flow_index}:s{s_idx}")
    for rec in attrs:
        for s_idx in range(len(rec.sentence_ranges)):
            known_ids.add(f"{_path_id(rec.path)}:@{rec.attribute}:s{s_idx}")
    stale = set(by_id) - known_ids
    if stale:
        raise LocationStale(f"segment ids do not resolve: {sorted(stale)}")

    # per parent path: list of (child_range, replacement nodes)
    flow_repl: dict[NodePath, list[tuple[tuple[int, int], list[MarkupNode]]]] = {}
    for flow in flows:
        prefix = f"{_path_id(flow.parent_path)}:f{flow.flow_index}"
        originals = _sentence_segments(
            flow.text,
            flow.spans,
            flow.sentence_ranges,
            SegmentLocation(flow.parent_path, None, flow.flow_index),
            prefix,
        )
        nodes: list[MarkupNode] = []
        pos = 0
        for s_idx, (a, b) in enumerate(flow.sentence_ranges):
            if a > pos:
                nodes.append(Text(flow.text[pos:a]))
            seg = by_id.get(f"{prefix}:s{s_idx}")
            if seg is None:
                seg = originals[s_idx]
            nodes.extend(_render_sentence(seg.text, seg.tokens, seg.spans))
            pos = b
        if pos < len(flow.text):
            nodes.append(Text(flow.text[pos:]))
        flow_repl.setdefault(flow.parent_path, []).append((flow.child_range, nodes))

    attr_repl: dict[NodePath, dict[str, str]] = {}
    for rec in attrs:
        prefix = f"{_path_id(rec.path)}:@{rec.attribute}"
        parts: list[str] = []
        pos = 0
        changed = False
        for s_idx, (a, b) in enumerate(rec.sentence_ranges):
            parts.append(rec.text[pos:a])
            seg = by_id.get(f"{prefix}:s{s_idx}")
            if seg is not None:
                parts.append(seg.text)
                changed = True
            else:
                parts.append(rec.text[a:b])
            pos = b
        parts.append(rec.text[pos:])
        if changed:
            attr_repl.setdefault(rec.path, {})[rec.attribute] = "".join(parts)

    def rebuild(elem: Element, path: NodePath) -> Element:
        attrs_out = elem.attributes
        if path in attr_repl:
            attrs_out = tuple(
                (k, attr_repl[path].get(k, v)) for k, v in elem.attributes
            )
        replacements = sorted(flow_repl.get(path, []), key=lambda r: r[0][0])
        children: list[MarkupNode] = []
        ri = 0
        i = 0
        while i < len(elem.children):
            if ri < len(replacements) and replacements[ri][0][0] == i:
                (lo, hi), nodes = replacements[ri]
                children.extend(nodes)
                i = hi
                ri += 1
                continue
            child = elem.children[i]
            if isinstance(child, Element) and child.name not in policy.skip_tags:
                children.append(rebuild(child, path + (i,)))
            else:
                children.append(child)
            i += 1
        return Element(elem.name, attrs_out, tuple(children))

    new_doc = replace(doc, root=rebuild(doc.root, ()))
    return canonicalize(new_doc)
