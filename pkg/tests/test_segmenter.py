import pytest
from hypothesis import given, strategies as st

from markmt.docmodel import Element, parse_document, serialize_document, canonicalize
from markmt.segmenter import (
    ExerciseMeta,
    ExtractionPolicy,
    NestingUnsupported,
    LocationStale,
    Segment,
    classify_exercise,
    extract_segments,
    reinsert_segments,
    split_sentences,
    tokenize,
)
from markmt.tagproject import TranslatedSegment
from markmt.aligner import AlignmentLinks


def identity_translation(segments):
    return [
        TranslatedSegment(
            segment_id=s.segment_id,
            text=s.text,
            tokens=s.tokens,
            spans=s.spans,
            links=AlignmentLinks(frozenset((i, i) for i in range(len(s.tokens)))),
        )
        for s in segments
    ]


# --- tokenize


def test_tokenize_empty():
    assert tokenize("") == []


def test_tokenize_czech_punctuation():
    assert [t.text for t in tokenize("Ahoj, světe!")] == ["Ahoj", ",", "světe", "!"]


def test_tokenize_offsets():
    toks = tokenize("a b")
    assert [(t.char_start, t.char_end) for t in toks] == [(0, 1), (2, 3)]


def test_tokenize_offsets_index_original():
    text = "Dobrý den, (pane)!"
    for t in tokenize(text):
        assert text[t.char_start : t.char_end] == t.text


@given(st.text(max_size=40))
def test_tokenize_tokens_ordered_nonoverlapping(text):
    toks = tokenize(text)
    for a, b in zip(toks, toks[1:]):
        assert a.char_end <= b.char_start
    for t in toks:
        assert t.char_start < t.char_end


# --- split_sentences


def test_split_two_sentences():
    assert len(split_sentences("A. B.")) == 2


def test_no_terminal_punctuation_single_range():
    text = "no terminal punctuation"
    assert split_sentences(text) == [(0, len(text))]


def test_abbreviation_suppresses_boundary():
    assert len(split_sentences("Tzv. pokus.", abbreviations={"tzv."})) == 1
    assert len(split_sentences("Tzv. Pokus.", abbreviations=set())) == 2


def test_ellipsis_and_question_boundaries():
    assert len(split_sentences("Kde? Tam! Ano… Ne.")) == 4


def test_ranges_cover_trimmed_sentences():
    text = "  One two. Three!  "
    ranges = split_sentences(text)
    assert [text[a:b] for a, b in ranges] == ["One two.", "Three!"]


# --- classify_exercise


def test_classify_crossword():
    assert classify_exercise(ExerciseMeta(type_label="crossword")) == classify_exercise(
        ExerciseMeta(is_crossword=True)
    )
    result = classify_exercise(ExerciseMeta(is_crossword=True))
    assert not result.translatable and result.reason == "crossword"


def test_classify_biology_multiple_choice_translatable():
    result = classify_exercise(ExerciseMeta(type_label="multiple_choice", subject="biology"))
    assert result.translatable and result.reason is None


def test_classify_grammar_drill():
    result = classify_exercise(ExerciseMeta(is_grammar_drill=True))
    assert result.reason == "grammar_practice"


def test_classify_image_and_syllable():
    assert classify_exercise(ExerciseMeta(has_images_only=True)).reason == "image_based"
    assert classify_exercise(ExerciseMeta(type_label="syllable_match")).reason == "syllable_based"


# --- extract_segments


def test_single_span_extraction():
    doc = parse_document(b"<p>Hi <b>there</b></p>", "xml")
    segs = extract_segments(doc)
    assert len(segs) == 1
    assert segs[0].text == "Hi there"
    assert len(segs[0].spans) == 1
    assert segs[0].spans[0].token_range == (1, 2)
    assert segs[0].spans[0].tag_snapshot.name == "b"


def test_two_sentences_two_segments():
    doc = parse_document(b"<p>One. Two.</p>", "xml")
    segs = extract_segments(doc)
    assert [s.text for s in segs] == ["One.", "Two."]
    assert [s.sentence_index for s in segs] == [0, 1]


def test_skip_tag_content_absent():
    doc = parse_document(b"<p><script>x</script>ok</p>", "xml")
    segs = extract_segments(doc)
    assert [s.text for s in segs] == ["ok"]


def test_attribute_segments():
    doc = parse_document('<p><img alt="Sopka chrlí lávu."/>Text.</p>'.encode("utf-8"), "xml")
    segs = extract_segments(doc)
    texts = {s.text for s in segs}
    assert "Sopka chrlí lávu." in texts and "Text." in texts
    attr_seg = next(s for s in segs if s.location.attribute == "alt")
    assert attr_seg.location.attribute == "alt"


def test_nesting_unsupported():
    doc = parse_document(b"<div><b><p>x</p></b></div>", "xml")
    with pytest.raises(NestingUnsupported):
        extract_segments(doc)


def test_segment_text_covers_document_text():
    doc = parse_document(
        b"<e><q>One two. Three?</q><a>Four <b>five</b>.</a></e>", "xml"
    )
    segs = extract_segments(doc)
    joined = " ".join(s.text for s in segs)
    assert joined == "One two. Three? Four five."


# --- reinsert_segments


def test_identity_round_trip(exercise_corpus):
    policy = ExtractionPolicy()
    for raw in exercise_corpus:
        doc = parse_document(raw, "xml")
        segs = extract_segments(doc, policy)
        out = reinsert_segments(doc, identity_translation(segs), policy)
        assert serialize_document(out) == serialize_document(canonicalize(doc))


def test_reinsert_moved_span():
    doc = parse_document(b"<p>Hi <b>there</b></p>", "xml")
    [seg] = extract_segments(doc)
    moved = TranslatedSegment(
        segment_id=seg.segment_id,
        text="X Y",
        tokens=tuple(tokenize("X Y")),
        spans=(seg.spans[0].__class__(seg.spans[0].marker_id, seg.spans[0].tag_snapshot, 0, 1),),
        links=AlignmentLinks(frozenset()),
    )
    out = reinsert_segments(doc, [moved])
    assert serialize_document(out) == b"<p><b>X</b> Y</p>"


def test_reinsert_empty_list_unchanged(exercise_corpus):
    doc = parse_document(exercise_corpus[0], "xml")
    out = reinsert_segments(doc, [])
    assert serialize_document(out) == serialize_document(canonicalize(doc))


def test_reinsert_stale_location():
    doc = parse_document(b"<p>Hi</p>", "xml")
    [seg] = extract_segments(doc)
    bogus = TranslatedSegment(
        segment_id="n9.9:f0:s0",
        text="x",
        tokens=tuple(tokenize("x")),
        spans=(),
        links=AlignmentLinks(frozenset()),
    )
    with pytest.raises(LocationStale):
        reinsert_segments(doc, [bogus])


def test_reinsert_translates_attribute():
    doc = parse_document('<p><img alt="Sopka."/>Text.</p>'.encode("utf-8"), "xml")
    segs = extract_segments(doc)
    attr_seg = next(s for s in segs if s.location.attribute == "alt")
    translated = TranslatedSegment(
        segment_id=attr_seg.segment_id,
        text="Vulkan.",
        tokens=tuple(tokenize("Vulkan.")),
        spans=(),
        links=AlignmentLinks(frozenset()),
    )
    out = reinsert_segments(doc, [translated])
    assert b'alt="Vulkan."' in serialize_document(out)


def test_policy_from_config(tmp_path):
    abbrev = tmp_path / "abbrev.txt"
    abbrev.write_text("tzv.\n", encoding="utf-8")
    cfg = tmp_path / "policy.cfg"
    cfg.write_text(
        "inline_tags = b, i\nskip_tags = script\n"
        "translatable_attributes = alt\nabbreviations_path = abbrev.txt\n",
        encoding="utf-8",
    )
    policy = ExtractionPolicy.from_config(cfg)
    assert policy.inline_tags == frozenset({"b", "i"})
    assert policy.skip_tags == frozenset({"script"})
    assert "tzv." in policy.abbreviations
