"""chrF metric, bootstrap confidence intervals and score summaries."""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

MAX_ORDER = 6
BETA = 2.0


class EmptyInput(ValueError):
    pass


class TooFewSamples(ValueError):
    pass


@dataclass(frozen=True)
class ChrFParams:
    max_order: int = MAX_ORDER
    beta: float = BETA
    include_whitespace: bool = False


@dataclass(frozen=True)
class NGramStats:
    order: int
    hyp_count: int
    ref_count: int
    overlap: int


@dataclass(frozen=True)
class ChrFReport:
    score: float  # 0..100
    chrP: float
    chrR: float
    per_order: tuple[NGramStats, ...]
    params: ChrFParams = ChrFParams()

    def to_json(self) -> dict:
        return {
            "score": self.score,
            "chrP": self.chrP,
            "chrR": self.chrR,
            "per_order": [
                {
                    "order": s.order,
                    "hyp_count": s.hyp_count,
                    "ref_count": s.ref_count,
                    "overlap": s.overlap,
                }
                for s in self.per_order
            ],
            "params": {
                "max_order": self.params.max_order,
                "beta": self.params.beta,
                "include_whitespace": self.params.include_whitespace,
            },
        }


@dataclass(frozen=True)
class ScoreSummary:
    mean: float
    sd: float
    ci_low: float
    ci_high: float
    n: int
    method: str  # bootstrap | moments

    def render(self) -> str:
        if self.method == "moments":
            return f"{self.mean:.2f} ± {self.sd:.2f}"
        half = (self.ci_high - self.ci_low) / 2.0
        return f"{self.mean:.1f} ± {half:.1f}"


def _chars(text: str, params: ChrFParams) -> str:
    if params.include_whitespace:
        return text
    return "".join(ch for ch in text if not ch.isspace())


def _ngram_counts(chars: str, order: int) -> Counter:
    return Counter(chars[i : i + order] for i in range(len(chars) - order + 1))


def _pair_stats(hyp: str, ref: str, params: ChrFParams) -> list[NGramStats]:
    h = _chars(hyp, params)
    r = _chars(ref, params)
    stats = []
    for order in range(1, params.max_order + 1):
        hc = _ngram_counts(h, order)
        rc = _ngram_counts(r, order)
        overlap = sum(min(n, rc[g]) for g, n in hc.items())
        stats.append(
            NGramStats(order, sum(hc.values()), sum(rc.values()), overlap)
        )
    return stats


def _report_from_stats(
    stats: Sequence[NGramStats], params: ChrFParams
) -> ChrFReport:
    precisions = []
    recalls = []
    for s in stats:
        if s.hyp_count == 0 and s.ref_count == 0:
            continue  # effective-order averaging
        precisions.append(s.overlap / s.hyp_count if s.hyp_count else 0.0)
        recalls.append(s.overlap / s.ref_count if s.ref_count else 0.0)
    if not precisions:
        # both sides empty at every order: identical empty strings
        return ChrFReport(100.0, 1.0, 1.0, tuple(stats), params)
    chr_p = sum(precisions) / len(precisions)
    chr_r = sum(recalls) / len(recalls)
    beta2 = params.beta**2
    denom = beta2 * chr_p + chr_r
    score = 100.0 * (1 + beta2) * chr_p * chr_r / denom if denom > 0 else 0.0
    return ChrFReport(score, chr_p, chr_r, tuple(stats), params)


def chrf_sentence(hyp: str, ref: str, params: ChrFParams = ChrFParams()) -> ChrFReport:
    return _report_from_stats(_pair_stats(hyp, ref, params), params)


def chrf_corpus(
    pairs: Sequence[tuple[str, str]], params: ChrFParams = ChrFParams()
) -> ChrFReport:
    """Micro-averaged corpus chrF: n-gram counts summed before scoring."""
    if not pairs:
        raise EmptyInput("no sentence pairs")
    totals = [NGramStats(order, 0, 0, 0) for order in range(1, params.max_order + 1)]
    for hyp, ref in pairs:
        for k, s in enumerate(_pair_stats(hyp, ref, params)):
            t = totals[k]
            totals[k] = NGramStats(
                t.order,
                t.hyp_count + s.hyp_count,
                t.ref_count + s.ref_count,
                t.overlap + s.overlap,
            )
    return _report_from_stats(totals, params)


def bootstrap_ci(
    pairs: Sequence[tuple[str, str]],
    resamples: int = 1000,
    confidence: float = 0.95,
    seed: int = 1,
    params: ChrFParams = ChrFParams(),
) -> ScoreSummary:
    """Percentile bootstrap CI of the corpus chrF score.

    Deterministic for a fixed seed; the reported mean is the full-corpus
    point estimate, not the resample mean.
    """
    if len(pairs) < 2:
        raise TooFewSamples("need at least 2 pairs")
    point = chrf_corpus(pairs, params).score
    # per-pair stats computed once; resampling just re-sums counts
    pair_stats = [_pair_stats(h, r, params) for h, r in pairs]
    rng = random.Random(seed)
    n = len(pairs)
    scores = []
    for _ in range(resamples):
        totals = [[0, 0, 0] for _ in range(params.max_order)]
        for idx in (rng.randrange(n) for _ in range(n)):
            for k, s in enumerate(pair_stats[idx]):
                totals[k][0] += s.hyp_count
                totals[k][1] += s.ref_count
                totals[k][2] += s.overlap
        stats = [
            NGramStats(k + 1, hc, rc, ov) for k, (hc, rc, ov) in enumerate(totals)
        ]
        scores.append(_report_from_stats(stats, params).score)
    scores.sort()
    alpha = (1.0 - confidence) / 2.0

    def percentile(q: float) -> float:
        # linear interpolation between closest ranks
        pos = q * (len(scores) - 1)
        lo = int(pos)
        hi = min(lo + 1, len(scores) - 1)
        frac = pos - lo
        return scores[lo] * (1 - frac) + scores[hi] * frac

    sd = _sample_sd(scores)
    # keep the point estimate inside the interval even on skewed tiny corpora
    ci_low = min(percentile(alpha), point)
    ci_high = max(percentile(1.0 - alpha), point)
    return ScoreSummary(
        mean=point, sd=sd, ci_low=ci_low, ci_high=ci_high, n=len(pairs), method="bootstrap"
    )


def _sample_sd(values: Sequence[float]) -> float:
    if len(values) < 2:
        return 0.0
    mean = sum(values) / len(values)
    return (sum((v - mean) ** 2 for v in values) / (len(values) - 1)) ** 0.5


def summarize_scores(values: Sequence[float]) -> ScoreSummary:
    """Mean and sample standard deviation (n-1), rendered "M.MM ± S.SS"."""
    if not values:
        raise EmptyInput("no values")
    mean = sum(values) / len(values)
    sd = _sample_sd(values)
    return ScoreSummary(
        mean=mean, sd=sd, ci_low=mean - sd, ci_high=mean + sd, n=len(values), method="moments"
    )
