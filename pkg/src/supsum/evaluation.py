"""Summary scoring: n-gram recall, bootstrap intervals, paired signed-rank test."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import stats


class DegenerateReferenceError(ValueError):
    """A reference summary is too short to yield a single n-gram."""


class TooFewPairsError(ValueError):
    """Not enough informative pairs for the signed-rank normal approximation."""


@dataclass(frozen=True)
class RougeScore:
    n: int
    recall: float
    match_count: int
    total_count: int


@dataclass(frozen=True)
class EvalReport:
    per_doc: Mapping[str, float]
    mean: float
    ci_low: float
    ci_high: float
    level: float
    resamples: int

    def to_json_dict(self) -> dict:
        return {
            "per_doc": dict(sorted(self.per_doc.items())),
            "mean": self.mean,
            "ci": [self.ci_low, self.ci_high],
            "level": self.level,
            "resamples": self.resamples,
        }


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(
    candidate_tokens: Sequence[str], references: Sequence[Sequence[str]], n: int = 1
) -> RougeScore:
    """N-gram recall of a candidate against one or more references.

    Matches are clipped per n-gram and per reference, then pooled over all
    references; the denominator is the total reference n-gram count.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not references:
        raise ValueError("at least one reference is required")
    candidate = _ngrams(candidate_tokens, n)
    match_count = 0
    total_count = 0
    for reference_tokens in references:
        reference = _ngrams(reference_tokens, n)
        if not reference:
            raise DegenerateReferenceError(f"reference has fewer than {n} tokens")
        total_count += sum(reference.values())
        match_count += sum(min(count, candidate[gram]) for gram, count in reference.items())
    return RougeScore(
        n=n,
        recall=match_count / total_count,
        match_count=match_count,
        total_count=total_count,
    )


def bootstrap_ci(
    scores: Sequence[float],
    resamples: int = 1000,
    level: float = 0.95,
    seed: int = 0,
) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean of ``scores``.

    Documents are resampled with replacement; the interval is the empirical
    ``(1 - level) / 2`` and ``(1 + level) / 2`` percentiles of the resampled
    means.  Seeded and reproducible.
    """
    if not scores:
        raise ValueError("at least one score is required")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    values = np.asarray(scores, dtype=float)
    rng = np.random.default_rng(seed)
    indices = rng.integers(0, len(values), size=(resamples, len(values)))
    means = values[indices].mean(axis=1)
    tail = (1.0 - level) / 2.0 * 100.0
    low, high = np.percentile(means, [tail, 100.0 - tail])
    return float(low), float(high)


def wilcoxon_signed_rank(
    scores_a: Sequence[float],
    scores_b: Sequence[float],
    continuity_correction: bool = True,
) -> tuple[float, float]:
    """One-sided signed-rank test of "A scores higher than B" on paired data.

    Zero differences are dropped; tied absolute differences share average
    ranks.  Returns the rank sum W of the positive differences and the
    one-sided normal-approximation p-value (0.5 continuity correction toward
    the null).  Needs at least six informative pairs.
    """
    if len(scores_a) != len(scores_b):
        raise ValueError("paired score lists must have equal length")
    differences = np.asarray(scores_a, dtype=float) - np.asarray(scores_b, dtype=float)
    differences = differences[differences != 0.0]
    m = len(differences)
    if m < 6:
        raise TooFewPairsError(f"only {m} informative pairs; need at least 6")
    ranks = stats.rankdata(np.abs(differences))
    w = float(ranks[differences > 0].sum())
    mean = m * (m + 1) / 4.0
    sd = np.sqrt(m * (m + 1) * (2 * m + 1) / 24.0)
    correction = 0.5 if continuity_correction else 0.0
    z = (w - mean - correction) / sd
    return w, float(stats.norm.sf(z))
