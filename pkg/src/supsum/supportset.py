"""Support-set construction and support-set centrality ranking.

Each passage of the input source gets a support set: the passages most
related to it, admitted by a per-passage threshold.  A passage's relevance is
the number of support sets it appears in.  With one global threshold for all
passages this degenerates to degree centrality; the value of the model is in
the per-passage threshold strategies implemented here:

* fixed or relative cardinality (take the k nearest),
* distance-progression analysis (mean, mean minus scaled deviation,
  diminishing consecutive gaps, below-average consecutive gaps),
* source-order partitioning around two drifting representative values,
* connection weights from graph-construction practice (Gaussian bump around
  the minimum distance, tanh ramp around the mean).

All strategies operate on distances; similarity metrics are converted so a
single admission convention (closer than the threshold) serves everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .vectorspace import MetricSpec, TermPassageMatrix, distance

_STRATEGY_KINDS = {
    "knn",
    "relative",
    "eps",
    "avg",
    "stddev",
    "diminishing",
    "avg-gap",
    "order-min-avg",
    "order-min-max",
    "order-first-second",
    "gaussian",
    "tanh",
}


@dataclass(frozen=True)
class ThresholdStrategy:
    """How the per-passage admission threshold is chosen.

    kind            parameters
    --------------  ------------------------------------------------------
    knn             k: member count (clamped to the candidate count)
    relative        fraction in (0, 1]: ceil(fraction * candidates), min 1
    eps             epsilon: one global distance threshold (degenerate case)
    avg             -- admit strictly below the mean distance
    stddev          alpha: admit strictly below mean - alpha * stddev
    diminishing     -- largest prefix of shrinking consecutive gaps
    avg-gap         -- largest prefix of below-average consecutive gaps
    order-min-avg   -- seeds: min distance / mean distance
    order-min-max   -- seeds: min distance / max distance
    order-first-... -- seeds: first / second candidate in source order
    gaussian        alpha > 0, delta in [0, 1): exp-bump weight above delta
    tanh            alpha > 0, delta in (0, 1): tanh-ramp weight above delta
    """

    kind: str
    k: int | None = None
    fraction: float | None = None
    alpha: float | None = None
    delta: float | None = None
    epsilon: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in _STRATEGY_KINDS:
            raise ValueError(f"unknown threshold strategy {self.kind!r}")
        if self.kind == "knn" and (self.k is None or self.k < 1):
            raise ValueError("knn needs a positive member count")
        if self.kind == "relative" and (self.fraction is None or not 0 < self.fraction <= 1):
            raise ValueError("relative fraction must lie in (0, 1]")
        if self.kind == "eps" and self.epsilon is None:
            raise ValueError("eps needs a global threshold value")
        if self.kind == "stddev" and self.alpha is None:
            raise ValueError("stddev needs an alpha")
        if self.kind in ("gaussian", "tanh"):
            if self.alpha is None or self.alpha <= 0:
                raise ValueError(f"{self.kind} needs alpha > 0")
            if self.delta is None or not 0 <= self.delta < 1:
                raise ValueError(f"{self.kind} needs delta in [0, 1)")

    @classmethod
    def parse(cls, text: str) -> "ThresholdStrategy":
        """Parse 'knn:2', 'relative:0.1', 'avg', 'stddev:1', 'gaussian:1,0.5', ..."""
        kind, sep, arg = text.partition(":")
        kind = kind.strip()
        args = [a for a in arg.split(",") if a] if sep else []
        if kind == "knn":
            return cls(kind, k=int(args[0]))
        if kind == "relative":
            return cls(kind, fraction=float(args[0]))
        if kind == "eps":
            return cls(kind, epsilon=float(args[0]))
        if kind == "stddev":
            return cls(kind, alpha=float(args[0]) if args else 1.0)
        if kind in ("gaussian", "tanh"):
            if len(args) != 2:
                raise ValueError(f"{kind} needs alpha,delta")
            return cls(kind, alpha=float(args[0]), delta=float(args[1]))
        return cls(kind)

    def __str__(self) -> str:
        parts = {
            "knn": lambda: f"knn:{self.k}",
            "relative": lambda: f"relative:{self.fraction:g}",
            "eps": lambda: f"eps:{self.epsilon:g}",
            "stddev": lambda: f"stddev:{self.alpha:g}",
            "gaussian": lambda: f"gaussian:{self.alpha:g},{self.delta:g}",
            "tanh": lambda: f"tanh:{self.alpha:g},{self.delta:g}",
        }
        return parts.get(self.kind, lambda: self.kind)()


@dataclass(frozen=True)
class SupportSet:
    """The passages supporting one input passage.

    ``owner`` is the input passage index; ``members`` hold matrix column
    indices, so in mixed-source mode they may point into background columns.
    ``epsilon`` records the realized threshold in distance units (for
    cardinality and order strategies, the largest admitted distance).
    """

    owner: int
    members: frozenset[int]
    epsilon: float


@dataclass(frozen=True)
class SupportSetCollection:
    sets: tuple[SupportSet, ...]
    metric: MetricSpec
    strategy: ThresholdStrategy
    n_background: int
    n_input: int

    @property
    def selectable(self) -> range:
        """Input passage indices eligible for the ranking."""
        return range(self.n_input)


@dataclass(frozen=True)
class Ranking:
    """Passage scores sorted by score descending, then index ascending."""

    entries: tuple[tuple[int, float], ...]
    converged: bool = True

    @classmethod
    def from_scores(cls, scores: Sequence[float], converged: bool = True) -> "Ranking":
        order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
        return cls(tuple((i, float(scores[i])) for i in order), converged=converged)

    def indices(self) -> list[int]:
        return [i for i, _ in self.entries]

    def scores_by_index(self) -> dict[int, float]:
        return {i: s for i, s in self.entries}

    def to_json_dict(self) -> list[dict]:
        return [{"index": i, "score": s} for i, s in self.entries]


def distances_from(
    matrix: TermPassageMatrix, column: int, metric: MetricSpec
) -> list[tuple[int, float]]:
    """Distances from ``column`` to every other matrix column, in column order.

    Similarity metrics are converted to distances: cosine via ``1 - sim``
    (non-negative weights keep it in [0, 1]) and the Manhattan-derived
    similarity via ``1/sim - 1``, which recovers the Manhattan distance.
    """
    own = matrix.column(column)
    others = [j for j in range(matrix.n_columns) if j != column]
    if metric.set_based:
        raise ValueError(f"{metric} is not defined on weight vectors")
    if metric.kind == "cosine":
        norms = np.linalg.norm(matrix.weights, axis=0)
        own_norm = norms[column]
        if own_norm == 0.0:
            sims = np.zeros(matrix.n_columns)
        else:
            with np.errstate(invalid="ignore"):
                sims = (matrix.weights.T @ own) / (norms * own_norm)
            sims[norms == 0.0] = 0.0
        return [(j, float(1.0 - sims[j])) for j in others]
    if metric.kind == "manhattan-sim":
        return [(j, float(np.sum(np.abs(matrix.column(j) - own)))) for j in others]
    return [(j, distance(own, matrix.column(j), metric)) for j in others]


def _nearest_with_ties(distances: Sequence[tuple[int, float]]) -> tuple[frozenset[int], float]:
    smallest = min(d for _, d in distances)
    return frozenset(j for j, d in distances if d == smallest), smallest


def _take_nearest(distances: Sequence[tuple[int, float]], count: int) -> tuple[frozenset[int], float]:
    ranked = sorted(distances, key=lambda item: (item[1], item[0]))[:count]
    return frozenset(j for j, _ in ranked), ranked[-1][1]


def threshold_stddev(sorted_distances: Sequence[float], alpha: float) -> float:
    """Mean minus ``alpha`` standard deviations, both over the distance list."""
    values = np.asarray(sorted_distances, dtype=float)
    mean = float(values.mean())
    std = float(np.sqrt(np.mean((values - mean) ** 2)))
    return mean - alpha * std


def threshold_diminishing(sorted_distances: Sequence[float]) -> float | None:
    """Last distance of the longest initial run of strictly shrinking gaps.

    Returns None when even the first two gaps fail to shrink.
    """
    d = list(sorted_distances)
    gaps = [d[i + 1] - d[i] for i in range(len(d) - 1)]
    best = 0
    for j in range(len(gaps) - 1):
        if gaps[j + 1] < gaps[j]:
            best = j + 1
        else:
            break
    if best == 0:
        return None
    return d[best + 1]


def threshold_avg_gap(sorted_distances: Sequence[float]) -> float | None:
    """Last distance of the longest initial run of below-average gaps.

    The mean gap telescopes to ``(d_last - d_first) / (gap count)``.  Returns
    None when the first gap already reaches the mean.
    """
    d = list(sorted_distances)
    mean_gap = (d[-1] - d[0]) / (len(d) - 1)
    best = 0
    for j in range(len(d) - 1):
        if d[j + 1] - d[j] < mean_gap:
            best = j + 1
        else:
            break
    if best == 0:
        return None
    return d[best]


def partition_by_order(
    distances: Sequence[tuple[int, float]], r1_init: float, r2_init: float
) -> frozenset[int]:
    """Split candidates into two drifting clusters; keep the nearest one.

    Candidates are visited in source order.  Each goes to the representative
    value it is currently closer to, which then moves halfway toward it; on a
    tie the second representative wins.  The returned subset is the one
    holding the globally nearest candidate.
    """
    if len(distances) == 1:
        return frozenset({distances[0][0]})
    r1, r2 = float(r1_init), float(r2_init)
    group1: set[int] = set()
    group2: set[int] = set()
    for j, d in distances:
        if abs(r1 - d) < abs(r2 - d):
            r1 = (r1 + d) / 2.0
            group1.add(j)
        else:
            r2 = (r2 + d) / 2.0
            group2.add(j)
    nearest_index = min(distances, key=lambda item: (item[1], item[0]))[0]
    return frozenset(group1 if nearest_index in group1 else group2)


def membership_gaussian(
    d: float, all_distances: Sequence[float], alpha: float, delta: float
) -> bool:
    """Connection weight ``exp(-(d - d_min)^2 / alpha^2)`` above ``delta``."""
    smallest = min(all_distances)
    return math.exp(-((d - smallest) ** 2) / alpha**2) > delta


def membership_tanh(d: float, all_distances: Sequence[float], alpha: float, delta: float) -> bool:
    """Connection weight ``(tanh(-alpha (d - mean)) + 1) / 2`` above ``delta``."""
    mean = sum(all_distances) / len(all_distances)
    return (math.tanh(-alpha * (d - mean)) + 1.0) / 2.0 > delta


def build_support_set(
    owner: int, distances: Sequence[tuple[int, float]], strategy: ThresholdStrategy
) -> SupportSet:
    """Admit members for one owner from its candidate distances.

    ``distances`` is (column index, distance) in column (source) order, owner
    excluded.  Cardinality strategies break boundary ties by lower index.
    Progression strategies that never see their condition trigger, or have
    fewer than three candidates, fall back to the nearest candidate plus its
    exact-distance ties.
    """
    if not distances:
        raise ValueError("a support set needs at least one candidate")
    values = [d for _, d in distances]
    kind = strategy.kind

    if kind == "knn":
        members, eps = _take_nearest(distances, min(strategy.k, len(distances)))
    elif kind == "relative":
        count = max(1, math.ceil(strategy.fraction * len(distances)))
        members, eps = _take_nearest(distances, min(count, len(distances)))
    elif kind == "eps":
        eps = float(strategy.epsilon)
        members = frozenset(j for j, d in distances if d < eps)
    elif kind == "avg":
        eps = sum(values) / len(values)
        members = frozenset(j for j, d in distances if d < eps)
    elif kind == "stddev":
        if len(values) < 2:
            members, eps = _nearest_with_ties(distances)
        else:
            eps = threshold_stddev(sorted(values), strategy.alpha)
            members = frozenset(j for j, d in distances if d < eps)
    elif kind in ("diminishing", "avg-gap"):
        pick = threshold_diminishing if kind == "diminishing" else threshold_avg_gap
        eps = pick(sorted(values)) if len(values) >= 3 else None
        if eps is None:
            members, eps = _nearest_with_ties(distances)
        else:
            members = frozenset(j for j, d in distances if d <= eps)
    elif kind in ("order-min-avg", "order-min-max", "order-first-second"):
        if len(distances) == 1:
            members = frozenset({distances[0][0]})
        else:
            if kind == "order-min-avg":
                seeds = (min(values), sum(values) / len(values))
            elif kind == "order-min-max":
                seeds = (min(values), max(values))
            else:
                seeds = (values[0], values[1])
            members = partition_by_order(distances, *seeds)
        eps = max((d for j, d in distances if j in members), default=0.0)
    elif kind == "gaussian":
        members = frozenset(
            j for j, d in distances if membership_gaussian(d, values, strategy.alpha, strategy.delta)
        )
        eps = min(values) + strategy.alpha * math.sqrt(-math.log(strategy.delta)) if strategy.delta > 0 else math.inf
    else:  # tanh
        members = frozenset(
            j for j, d in distances if membership_tanh(d, values, strategy.alpha, strategy.delta)
        )
        if strategy.delta == 0:
            eps = math.inf
        else:
            mean = sum(values) / len(values)
            eps = mean - math.atanh(2.0 * strategy.delta - 1.0) / strategy.alpha

    return SupportSet(owner=owner, members=members, epsilon=float(eps))


def build_collection(
    matrix: TermPassageMatrix, metric: MetricSpec, strategy: ThresholdStrategy
) -> SupportSetCollection:
    """One support set per input passage; candidates span every matrix column."""
    if matrix.n_columns < 2:
        raise ValueError("support sets need at least two matrix columns")
    sets = []
    for passage_index in range(matrix.n_input):
        column = matrix.input_column_index(passage_index)
        candidates = distances_from(matrix, column, metric)
        sets.append(build_support_set(passage_index, candidates, strategy))
    return SupportSetCollection(
        sets=tuple(sets),
        metric=metric,
        strategy=strategy,
        n_background=matrix.n_background,
        n_input=matrix.n_input,
    )


def centrality_ranking(collection: SupportSetCollection) -> Ranking:
    """Score each input passage by the number of support sets containing it."""
    scores = [0.0] * collection.n_input
    for support in collection.sets:
        for member in support.members:
            passage_index = member - collection.n_background
            if 0 <= passage_index < collection.n_input:
                scores[passage_index] += 1.0
    return Ranking.from_scores(scores)
