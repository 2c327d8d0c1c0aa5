"""Comparison centrality models: degree, LexRank, TextRank, influx, and the
centroid / pairwise-average / position baselines.

Graph-based models share a :class:`SimilarityGraph` whose edge weights come
from any metric: similarity metrics are used directly, distances are turned
into weights via ``1 / (1 + distance)``.  The random-walk models come in two
shapes: the LexRank recursion distributes a teleport mass ``d/N`` and walks
with ``1 - d``, while the TextRank recursion adds ``1 - d`` per node and
walks with ``d``; both are solved by power iteration.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .corpus import InputSource
from .supportset import Ranking
from .vectorspace import MetricSpec, TermPassageMatrix, set_similarity, similarity


@dataclass(frozen=True)
class PowerIterationConfig:
    damping: float = 0.15
    tolerance: float = 1e-6
    max_iterations: int = 200

    def __post_init__(self) -> None:
        if not 0 < self.damping < 1:
            raise ValueError("damping must lie in (0, 1)")
        if self.tolerance <= 0 or self.max_iterations < 1:
            raise ValueError("tolerance must be > 0 and max_iterations >= 1")


@dataclass(frozen=True)
class SimilarityGraph:
    """Weighted passage graph without self-loops.

    ``weights[s, t]`` is the weight of edge s -> t; undirected graphs are
    symmetric, backward graphs only keep edges from each passage to earlier
    ones.  A zero weight means no edge.
    """

    n: int
    weights: np.ndarray
    orientation: str = "undirected"

    def degrees(self) -> np.ndarray:
        return np.count_nonzero(self.weights, axis=1).astype(float)

    def edge_list(self) -> list[tuple[int, int, float]]:
        rows, cols = np.nonzero(self.weights)
        return [(int(s), int(t), float(self.weights[s, t])) for s, t in zip(rows, cols)]


def _pairwise_weights(matrix: TermPassageMatrix, metric: MetricSpec) -> np.ndarray:
    from .supportset import distances_from

    columns = matrix.input_weights()
    n = columns.shape[1]
    sims = np.zeros((n, n))
    if metric.polarity == "similarity":
        for i in range(n):
            for j in range(i + 1, n):
                sims[i, j] = sims[j, i] = similarity(columns[:, i], columns[:, j], metric)
        return sims
    input_matrix = TermPassageMatrix(
        terms=matrix.terms,
        weights=columns,
        doc_frequencies=matrix.doc_frequencies,
        n_background=0,
    )
    for i in range(n):
        for j, dist in distances_from(input_matrix, i, metric):
            sims[i, j] = 1.0 / (1.0 + dist)
    return sims


def _token_set_weights(token_sets: Sequence[Sequence[str]], metric: MetricSpec) -> np.ndarray:
    n = len(token_sets)
    sims = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            sims[i, j] = sims[j, i] = set_similarity(token_sets[i], token_sets[j], metric)
    return sims


def build_graph(
    source: TermPassageMatrix | Sequence[Sequence[str]],
    metric: MetricSpec,
    orientation: str = "undirected",
    threshold: float | None = None,
    binarize: bool = False,
) -> SimilarityGraph:
    """Build the passage similarity graph for one document.

    ``source`` is a term-passage matrix (vector metrics) or the per-passage
    token lists (set-overlap metrics).  Weights at or below ``threshold`` are
    dropped; with ``binarize`` the survivors become 1.  Backward orientation
    keeps only edges from each passage to its predecessors.
    """
    if orientation not in ("undirected", "backward"):
        raise ValueError(f"unknown orientation {orientation!r}")
    if metric.set_based:
        weights = _token_set_weights(source, metric)
    else:
        weights = _pairwise_weights(source, metric)
    n = weights.shape[0]
    if threshold is not None:
        weights[weights <= threshold] = 0.0
    if binarize:
        weights = (weights > 0.0).astype(float)
    if orientation == "backward":
        weights = np.tril(weights, k=-1)
    np.fill_diagonal(weights, 0.0)
    weights.setflags(write=False)
    return SimilarityGraph(n=n, weights=weights, orientation=orientation)


def degree_centrality(graph: SimilarityGraph) -> Ranking:
    """Score each passage by its vertex degree (meant for binarized graphs)."""
    return Ranking.from_scores(graph.degrees())


def _power_iteration(
    transition: np.ndarray,
    additive: np.ndarray,
    walk_weight: float,
    start: np.ndarray,
    config: PowerIterationConfig,
) -> tuple[np.ndarray, bool]:
    """Iterate ``x <- additive + walk_weight * transition @ x`` to a fixed point."""
    x = start.copy()
    for _ in range(config.max_iterations):
        new = additive + walk_weight * transition @ x
        if np.max(np.abs(new - x)) < config.tolerance:
            return new, True
        x = new
    return x, False


def _lexrank_transition(weights: np.ndarray) -> np.ndarray:
    """Column-stochastic transition: each node splits its score over neighbors."""
    outgoing = weights.sum(axis=0)
    transition = np.zeros_like(weights)
    nonzero = outgoing > 0
    transition[:, nonzero] = weights[:, nonzero] / outgoing[nonzero]
    return transition


def lexrank(graph: SimilarityGraph, config: PowerIterationConfig = PowerIterationConfig()) -> Ranking:
    """Damped random-walk centrality on a binarized undirected graph.

    Each score is ``d/N`` teleport mass plus ``1 - d`` times the share
    received from neighbors; isolated passages keep exactly ``d/N``.
    """
    if graph.orientation != "undirected":
        raise ValueError("lexrank needs an undirected graph")
    adjacency = (graph.weights > 0.0).astype(float)
    transition = _lexrank_transition(adjacency)
    n = graph.n
    additive = np.full(n, config.damping / n)
    scores, converged = _power_iteration(
        transition, additive, 1.0 - config.damping, np.full(n, 1.0 / n), config
    )
    return Ranking.from_scores(scores, converged=converged)


def continuous_lexrank(
    graph: SimilarityGraph, config: PowerIterationConfig = PowerIterationConfig()
) -> Ranking:
    """Weighted LexRank: neighbors contribute in proportion to edge weight.

    A neighbor with zero total weighted degree contributes nothing.
    """
    if graph.orientation != "undirected":
        raise ValueError("continuous lexrank needs an undirected graph")
    transition = _lexrank_transition(graph.weights)
    n = graph.n
    additive = np.full(n, config.damping / n)
    scores, converged = _power_iteration(
        transition, additive, 1.0 - config.damping, np.full(n, 1.0 / n), config
    )
    return Ranking.from_scores(scores, converged=converged)


def textrank_scores(
    graph: SimilarityGraph, config: PowerIterationConfig = PowerIterationConfig()
) -> Ranking:
    """Additive-teleport recursion on a weighted (possibly directed) graph.

    ``score(s) = (1 - d) + d * sum over incoming t of
    weight(t, s) / (total outgoing weight of t) * score(t)``; passages with no
    incoming edges settle at ``1 - d``.
    """
    outgoing_total = graph.weights.sum(axis=1)
    transition = np.zeros_like(graph.weights)
    nonzero = outgoing_total > 0
    # incoming share: transition[s, t] = w(t, s) / outdegree_weight(t)
    transition[:, nonzero] = graph.weights.T[:, nonzero] / outgoing_total[nonzero]
    n = graph.n
    additive = np.full(n, 1.0 - config.damping)
    scores, converged = _power_iteration(
        transition, additive, config.damping, np.ones(n), config
    )
    return Ranking.from_scores(scores, converged=converged)


def textrank(
    token_sets: Sequence[Sequence[str]],
    orientation: str = "backward",
    config: PowerIterationConfig = PowerIterationConfig(),
) -> Ranking:
    """TextRank over content-overlap weights on token sets."""
    graph = build_graph(token_sets, MetricSpec("content-overlap"), orientation=orientation)
    return textrank_scores(graph, config)


@dataclass(frozen=True)
class SmoothedLanguageModel:
    """Unigram model of one passage, Dirichlet-smoothed toward the collection.

    ``probability`` is strictly positive on the collection vocabulary and the
    probabilities sum to one over it.
    """

    counts: Mapping[str, int]
    length: int
    mu: float
    collection: Mapping[str, float]

    def __post_init__(self) -> None:
        if self.mu <= 0:
            raise ValueError("smoothing mass mu must be > 0")

    def probability(self, term: str) -> float:
        prior = self.collection.get(term, 0.0)
        return (self.counts.get(term, 0) + self.mu * prior) / (self.length + self.mu)


def collection_model(token_lists: Sequence[Sequence[str]]) -> dict[str, float]:
    """Maximum-likelihood term distribution pooled over all passages."""
    pooled = Counter()
    for tokens in token_lists:
        pooled.update(tokens)
    total = sum(pooled.values())
    return {term: count / total for term, count in pooled.items()}


def smooth_passage(
    tokens: Sequence[str], mu: float, collection: Mapping[str, float]
) -> SmoothedLanguageModel:
    counts = Counter(tokens)
    return SmoothedLanguageModel(counts=counts, length=len(tokens), mu=mu, collection=collection)


def generation_probability(target: SmoothedLanguageModel, source_tokens: Sequence[str]) -> float:
    """``exp(-KL(source MLE || target))`` in (0, 1], 1 exactly when KL is 0."""
    if not source_tokens:
        raise ValueError("source passage must be non-empty")
    counts = Counter(source_tokens)
    total = len(source_tokens)
    kl = 0.0
    for term, count in counts.items():
        p = count / total
        kl += p * math.log(p / target.probability(term))
    return math.exp(-kl)


def uniform_influx(
    token_lists: Sequence[Sequence[str]],
    k: int,
    mu: float = 500.0,
    weighted: bool = False,
) -> Ranking:
    """Sum of incoming generation links in a k-nearest-neighbor graph.

    Each passage links to the ``k`` passages its smoothed model generates
    best; a passage's score is the number (or, weighted, the probability sum)
    of links pointing at it.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = len(token_lists)
    collection = collection_model(token_lists)
    scores = [0.0] * n
    for origin in range(n):
        model = smooth_passage(token_lists[origin], mu, collection)
        probabilities = [
            (generation_probability(model, token_lists[dest]), dest)
            for dest in range(n)
            if dest != origin
        ]
        probabilities.sort(key=lambda item: (-item[0], item[1]))
        for probability, dest in probabilities[:k]:
            scores[dest] += probability if weighted else 1.0
    return Ranking.from_scores(scores)


def pairwise_average_centrality(matrix: TermPassageMatrix, metric: MetricSpec) -> Ranking:
    """Mean similarity of each passage to every other passage."""
    sims = _pairwise_weights(matrix, metric)
    n = sims.shape[0]
    return Ranking.from_scores(sims.sum(axis=1) / n)


def centroid_centrality(matrix: TermPassageMatrix, metric: MetricSpec) -> Ranking:
    """Similarity of each passage to the coordinate-wise mean passage."""
    columns = matrix.input_weights()
    centroid = columns.mean(axis=1)
    n = columns.shape[1]
    if metric.polarity == "similarity":
        if metric.set_based:
            raise ValueError(f"{metric} is not defined on weight vectors")
        scores = [similarity(columns[:, j], centroid, metric) for j in range(n)]
    else:
        from .vectorspace import distance

        scores = [1.0 / (1.0 + distance(columns[:, j], centroid, metric)) for j in range(n)]
    return Ranking.from_scores(scores)


def position_baseline(source: InputSource | int) -> Ranking:
    """Source order as relevance: the i-th passage scores N - i."""
    n = source if isinstance(source, int) else len(source.passages)
    return Ranking.from_scores([float(n - i) for i in range(n)])
