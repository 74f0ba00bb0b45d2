import random

import pytest

from markmt.aligner import (
    NULL,
    NULL_INDEX,
    AlignmentLinks,
    DimensionMismatch,
    EmptyCorpus,
    LexiconTable,
    ParallelCorpus,
    parse_pharaoh,
    symmetrize,
    train_model1,
    viterbi_align,
)

TOY = ParallelCorpus.from_pairs([(["a", "b"], ["x", "y"]), (["a"], ["x"])])


def row_sums(table):
    sums = {}
    for (s, _), p in table.probabilities.items():
        sums[s] = sums.get(s, 0.0) + p
    return sums


def test_toy_corpus_converges():
    table = train_model1(TOY, iterations=10)
    assert table.prob("a", "x") > 0.9
    assert table.prob("b", "y") > 0.9


def test_single_pair_one_iteration():
    table = train_model1(ParallelCorpus.from_pairs([(["a"], ["x"])]), iterations=1)
    assert table.prob("a", "x") == pytest.approx(1.0, abs=1e-5)


def test_rows_normalized():
    table = train_model1(TOY, iterations=5)
    for s, total in row_sums(table).items():
        assert total == pytest.approx(1.0, abs=1e-9)


def test_empty_corpus_rejected():
    with pytest.raises(EmptyCorpus):
        ParallelCorpus.from_pairs([])
    with pytest.raises(EmptyCorpus):
        ParallelCorpus.from_pairs([([], ["x"])])


def test_log_likelihood_monotone_on_random_corpora():
    rng = random.Random(7)
    vocab_src = [f"s{i}" for i in range(6)]
    vocab_tgt = [f"t{i}" for i in range(6)]
    for _ in range(20):
        pairs = []
        for _ in range(rng.randint(2, 8)):
            ls = rng.randint(1, 4)
            lt = rng.randint(1, 4)
            pairs.append(
                (
                    [rng.choice(vocab_src) for _ in range(ls)],
                    [rng.choice(vocab_tgt) for _ in range(lt)],
                )
            )
        table = train_model1(ParallelCorpus.from_pairs(pairs), iterations=8)
        lls = table.log_likelihoods
        assert all(b - a >= -1e-12 for a, b in zip(lls, lls[1:]))
        for total in row_sums(table).values():
            assert total == pytest.approx(1.0, abs=1e-9)


def test_training_deterministic():
    t1 = train_model1(TOY, iterations=6)
    t2 = train_model1(TOY, iterations=6)
    assert t1.probabilities == t2.probabilities


def test_case_folding():
    table = train_model1(ParallelCorpus.from_pairs([(["Pes"], ["Sobaka"])]), 3)
    assert table.prob("pes", "sobaka") > 0.4
    assert table.prob("PES", "SOBAKA") == table.prob("pes", "sobaka")


# --- viterbi


def test_viterbi_diagonal_identity():
    table = train_model1(
        ParallelCorpus.from_pairs([(["a", "b", "c"], ["a", "b", "c"])] * 3 +
                                  [(["a"], ["a"]), (["b"], ["b"]), (["c"], ["c"])]),
        iterations=10,
    )
    links = viterbi_align(["a", "b", "c"], ["a", "b", "c"], table)
    assert links.links == frozenset({(0, 0), (1, 1), (2, 2)})


def test_viterbi_from_trained_toy_table():
    table = train_model1(TOY, iterations=10)
    links = viterbi_align(["a", "b"], ["x", "y"], table)
    assert links.links == frozenset({(0, 0), (1, 1)})


def test_viterbi_unseen_word_links_to_null():
    table = train_model1(TOY, iterations=3)
    links = viterbi_align(["a"], ["zzz"], table)
    assert links.links == frozenset({(NULL_INDEX, 0)})


def test_viterbi_output_valid():
    table = train_model1(TOY, iterations=3)
    links = viterbi_align(["a", "b"], ["x", "x", "y"], table)
    links.validate_unique()
    assert {j for _, j in links.links} == {0, 1, 2}


# --- symmetrize


def test_symmetrize_identity():
    fwd = AlignmentLinks(frozenset({(0, 0), (1, 1)}))
    rev = AlignmentLinks(frozenset({(0, 0), (1, 1)}))  # swapped order, symmetric here
    assert symmetrize(fwd, rev, "intersection").links == fwd.links


def test_symmetrize_disjoint_intersection_empty():
    fwd = AlignmentLinks(frozenset({(0, 1)}))
    rev = AlignmentLinks(frozenset({(0, 1)}))  # swapped: (1, 0) as fwd-order
    assert symmetrize(fwd, rev, "intersection").links == frozenset()


def test_symmetrize_example():
    fwd = AlignmentLinks(frozenset({(0, 0), (1, 1)}))
    rev = AlignmentLinks(frozenset({(0, 0)}))
    assert symmetrize(fwd, rev, "intersection").links == frozenset({(0, 0)})
    assert symmetrize(fwd, rev, "union").links == frozenset({(0, 0), (1, 1)})


# --- serialization


def test_lexicon_tsv_round_trip(tmp_path):
    table = train_model1(TOY, iterations=5)
    path = tmp_path / "lexicon.tsv"
    table.save_tsv(path)
    loaded = LexiconTable.load_tsv(path)
    for key, p in table.probabilities.items():
        assert loaded.probabilities[key] == pytest.approx(p, rel=1e-8)
    # sorted by src, then descending probability
    lines = path.read_text().splitlines()
    cols = [line.split("\t") for line in lines]
    assert cols == sorted(cols, key=lambda c: (c[0], -float(c[2]), c[1]))


def test_pharaoh_format():
    links = AlignmentLinks(frozenset({(1, 0), (0, 1), (NULL_INDEX, 2)}))
    assert links.to_pharaoh() == "0-1 1-0"
    assert parse_pharaoh("0-1 1-0").links == frozenset({(0, 1), (1, 0)})
