"""IBM Model 1 lexicon training (EM) and Viterbi word alignment.

Training is deterministic: uniform initialization over co-occurring
vocabulary, NULL prepended to every source sentence, case-folded tokens.
A probability floor keeps unseen pairs from scoring exactly zero.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

NULL = "<NULL>"
NULL_INDEX = -1


class EmptyCorpus(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ParallelCorpus:
    pairs: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Sequence[str], Sequence[str]]]) -> "ParallelCorpus":
        cleaned = []
        for src, tgt in pairs:
            if not src or not tgt:
                raise EmptyCorpus("sentence pair with an empty side")
            cleaned.append((tuple(src), tuple(tgt)))
        if not cleaned:
            raise EmptyCorpus("no sentence pairs")
        return cls(tuple(cleaned))

    @classmethod
    def from_tsv(cls, path: str | Path) -> "ParallelCorpus":
        pairs = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            src, _, tgt = line.partition("\t")
            pairs.append((src.split(), tgt.split()))
        return cls.from_pairs(pairs)


@dataclass(frozen=True)
class AlignmentLinks:
    """Set of (src index, tgt index) links; src index -1 is NULL."""

    links: frozenset[tuple[int, int]]

    def validate_unique(self) -> None:
        """Check that every target index carries at most one link."""
        tgt_seen = [j for _, j in self.links]
        if len(tgt_seen) != len(set(tgt_seen)):
            raise ValueError("a target index appears more than once")

    def tgt_to_src(self) -> dict[int, int]:
        return {j: i for i, j in self.links}

    def to_pharaoh(self) -> str:
        real = sorted((i, j) for i, j in self.links if i != NULL_INDEX)
        return " ".join(f"{i}-{j}" for i, j in real)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "AlignmentLinks":
        return cls(frozenset(pairs))


@dataclass
class LexiconTable:
    """t(tgt | src) probabilities; rows (fixed src) sum to 1."""

    probabilities: dict[tuple[str, str], float]
    floor: float = 1e-6
    log_likelihoods: list[float] = field(default_factory=list)

    def __post_init__(self):
        self._tgt_vocab = {t for _, t in self.probabilities}

    def prob(self, src: str, tgt: str) -> float:
        src = src.casefold() if src != NULL else src
        tgt = tgt.casefold()
        return max(self.probabilities.get((src, tgt), 0.0), self.floor)

    def known_target(self, tgt: str) -> bool:
        return tgt.casefold() in self._tgt_vocab

    def save_tsv(self, path: str | Path) -> None:
        rows = sorted(
            self.probabilities.items(), key=lambda kv: (kv[0][0], -kv[1], kv[0][1])
        )
        with open(path, "w", encoding="utf-8") as fh:
            for (src, tgt), p in rows:
                fh.write(f"{src}\t{tgt}\t{p:.10g}\n")

    @classmethod
    def load_tsv(cls, path: str | Path, floor: float = 1e-6) -> "LexiconTable":
        probs: dict[tuple[str, str], float] = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            src, tgt, p = line.split("\t")
            probs[(src, tgt)] = float(p)
        return cls(probs, floor=floor)


def _fold(tokens: Sequence[str]) -> list[str]:
    return [t.casefold() for t in tokens]


def train_model1(
    corpus: ParallelCorpus, iterations: int = 10, smoothing: float = 1e-6
) -> LexiconTable:
    """EM training of the lexical translation table.

    Corpus log-likelihood (recorded per iteration in the returned table)
    is non-decreasing.  Rows are renormalized after flooring so they sum
    to exactly 1.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if not corpus.pairs:
        raise EmptyCorpus("no sentence pairs")

    pairs = [
        ([NULL] + _fold(src), _fold(tgt)) for src, tgt in corpus.pairs
    ]
    # uniform init over co-occurring vocabulary
    cooc: dict[str, set[str]] = defaultdict(set)
    for src, tgt in pairs:
        for s in src:
            cooc[s].update(tgt)
    t: dict[tuple[str, str], float] = {}
    for s, tgts in cooc.items():
        p0 = 1.0 / len(tgts)
        for w in tgts:
            t[(s, w)] = p0

    log_likelihoods: list[float] = []
    for _ in range(iterations):
        counts: dict[tuple[str, str], float] = defaultdict(float)
        totals: dict[str, float] = defaultdict(float)
        ll = 0.0
        for src, tgt in pairs:
            for w in tgt:
                denom = sum(t[(s, w)] for s in src)
                ll += math.log(denom) - math.log(len(src))
                for s in src:
                    c = t[(s, w)] / denom
                    counts[(s, w)] += c
                    totals[s] += c
        log_likelihoods.append(ll)
        t = {}
        for s, tgts in cooc.items():
            total = totals[s]
            floored = {w: max(counts[(s, w)] / total, smoothing) for w in tgts}
            z = sum(floored.values())
            for w, p in floored.items():
                t[(s, w)] = p / z

    return LexiconTable(t, floor=smoothing, log_likelihoods=log_likelihoods)


def viterbi_align(
    src: Sequence[str], tgt: Sequence[str], lexicon: LexiconTable
) -> AlignmentLinks:
    """Each target token links to the best source position (or NULL).

    Ties go to the smallest source index; NULL only wins strictly.
    Target words absent from the lexicon link to NULL.
    """
    if not tgt:
        raise ValueError("empty target sentence")
    links = []
    for j, w in enumerate(tgt):
        if not lexicon.known_target(w):
            links.append((NULL_INDEX, j))
            continue
        best_i, best_p = NULL_INDEX, lexicon.prob(NULL, w)
        for i, s in enumerate(src):
            p = lexicon.prob(s, w)
            if p > best_p or (p == best_p and best_i == NULL_INDEX):
                best_i, best_p = i, p
        links.append((best_i, j))
    return AlignmentLinks(frozenset(links))


def symmetrize(
    forward: AlignmentLinks, reverse: AlignmentLinks, method: str = "intersection"
) -> AlignmentLinks:
    """Combine src->tgt and tgt->src alignments of one sentence pair.

    `reverse` carries links in swapped (tgt, src) index order.  NULL links
    never survive symmetrization.
    """
    fwd = {(i, j) for i, j in forward.links if i != NULL_INDEX}
    rev = {(i, j) for j, i in reverse.links if j != NULL_INDEX}
    if method == "intersection":
        kept = fwd & rev
    elif method == "union":
        kept = fwd | rev
    else:
        raise ValueError(f"unknown method: {method!r}")
    return AlignmentLinks(frozenset(kept))


def parse_pharaoh(line: str) -> AlignmentLinks:
    pairs = []
    for part in line.split():
        i, _, j = part.partition("-")
        pairs.append((int(i), int(j)))
    return AlignmentLinks(frozenset(pairs))
