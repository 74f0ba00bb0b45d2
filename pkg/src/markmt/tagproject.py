"""Project inline-formatting spans onto translations via word alignment."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .aligner import NULL_INDEX, AlignmentLinks
from .segmenter import InlineSpan, Segment, Token


class IndexOutOfBounds(IndexError):
    pass


@dataclass(frozen=True)
class ProjectionWarning:
    marker_id: str
    kind: str  # unaligned_fallback | span_fragmented | span_dropped


@dataclass(frozen=True)
class TranslatedSegment:
    segment_id: str
    text: str
    tokens: tuple[Token, ...]
    spans: tuple[InlineSpan, ...]
    links: AlignmentLinks
    warnings: tuple[ProjectionWarning, ...] = ()


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def project_spans(
    src: Segment,
    tgt_tokens: Sequence[Token],
    links: AlignmentLinks,
) -> tuple[list[InlineSpan], list[ProjectionWarning]]:
    """Map each source span to the minimal contiguous cover of its aligned
    target tokens; unaligned spans fall back to a zero-width span at the
    proportional position.  Nesting repair runs afterwards.
    """
    n_src = len(src.tokens)
    n_tgt = len(tgt_tokens)
    projected: list[InlineSpan] = []
    warnings: list[ProjectionWarning] = []
    for span in src.spans:
        indices = set(range(span.token_start, span.token_end))
        targets = sorted(j for i, j in links.links if i in indices and i != NULL_INDEX)
        if targets:
            lo, hi = targets[0], targets[-1] + 1
            if len(set(targets)) < hi - lo:
                warnings.append(ProjectionWarning(span.marker_id, "span_fragmented"))
            projected.append(replace(span, token_start=lo, token_end=hi))
        else:
            pos = 0
            if n_src > 0:
                pos = min(_round_half_up(n_tgt * span.token_start / n_src), n_tgt)
            projected.append(replace(span, token_start=pos, token_end=pos))
            warnings.append(ProjectionWarning(span.marker_id, "unaligned_fallback"))
    return repair_nesting(projected), warnings


def _partial_overlap(a: InlineSpan, b: InlineSpan) -> bool:
    return (
        a.token_start < b.token_start < a.token_end < b.token_end
        or b.token_start < a.token_start < b.token_end < a.token_end
    )


def repair_nesting(spans: Sequence[InlineSpan]) -> list[InlineSpan]:
    """Split partially overlapping spans until the set nests properly.

    Of an overlapping pair, the span covering fewer tokens is split at the
    other's boundary; ties split the one later in input order.  Fragments
    keep the original marker_id.
    """
    out = list(spans)
    changed = True
    while changed:
        changed = False
        for i in range(len(out)):
            for j in range(i + 1, len(out)):
                a, b = out[i], out[j]
                if not _partial_overlap(a, b):
                    continue
                len_a = a.token_end - a.token_start
                len_b = b.token_end - b.token_start
                victim_idx, other = (j, a) if len_b <= len_a else (i, b)
                victim = out[victim_idx]
                cut = (
                    other.token_end
                    if other.token_start <= victim.token_start
                    else other.token_start
                )
                first = replace(victim, token_end=cut)
                second = replace(victim, token_start=cut)
                out[victim_idx : victim_idx + 1] = [first, second]
                changed = True
                break
            if changed:
                break
    return out


def word_translation(
    src_index: int,
    links: AlignmentLinks,
    tgt_tokens: Sequence[Token],
    n_src: Optional[int] = None,
) -> list[str]:
    """Target token texts aligned to one source token, in target order.

    Pass n_src to bound-check against the source sentence length.
    """
    if src_index < 0 or (n_src is not None and src_index >= n_src):
        raise IndexOutOfBounds(src_index)
    return [
        tgt_tokens[j].text
        for j in sorted(j for i, j in links.links if i == src_index)
        if j < len(tgt_tokens)
    ]
