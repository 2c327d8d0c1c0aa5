"""Term-passage matrix construction and geometric relatedness metrics.

Passages are represented as columns of a term-by-passage weight matrix under
either normalized term frequency or binary weighting, optionally scaled by
idf.  Relatedness between columns is measured with the Minkowski family
(including the rootless fractional variant that stays a metric for exponents
below 1), Chebyshev, cosine, or a Manhattan-derived similarity; passages seen
as token sets support content-overlap and Jaccard similarity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .corpus import InputSource


class DimensionMismatchError(ValueError):
    """Operands do not live in the same vector space."""


class EmptyPassageError(ValueError):
    """Set-overlap metrics need non-empty token sets."""


_DISTANCE_KINDS = {
    "minkowski",
    "fractional",
    "raw-minkowski-fractional",
    "manhattan",
    "euclidean",
    "chebyshev",
    "dimension-minkowski",
}
_SIMILARITY_KINDS = {"cosine", "manhattan-sim", "content-overlap", "jaccard"}
_SET_KINDS = {"content-overlap", "jaccard"}
_ALIASES = {"cosine-sim": "cosine", "knn-cosine": "cosine"}


@dataclass(frozen=True)
class MetricSpec:
    """A named relatedness metric, with the exponent where one applies.

    ``minkowski`` uses the rooted form ``(sum |x_i - y_i|^p)^(1/p)`` for any
    order p > 0.  ``fractional`` is the rootless sum ``sum |x_i - y_i|^p``
    with p in (0,1), which preserves the triangle inequality;
    ``raw-minkowski-fractional`` is the rooted form at the same orders, which
    does not.  ``dimension-minkowski`` sets the order to the space dimension.
    """

    kind: str
    order: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", _ALIASES.get(self.kind, self.kind))
        if self.kind not in _DISTANCE_KINDS | _SIMILARITY_KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.kind == "minkowski":
            if self.order is None or self.order <= 0:
                raise ValueError("minkowski order must be > 0")
        elif self.kind in ("fractional", "raw-minkowski-fractional"):
            if self.order is None or not 0 < self.order < 1:
                raise ValueError(f"{self.kind} order must lie in (0, 1)")
        elif self.order is not None:
            raise ValueError(f"metric {self.kind!r} takes no order")

    @property
    def polarity(self) -> str:
        return "distance" if self.kind in _DISTANCE_KINDS else "similarity"

    @property
    def set_based(self) -> bool:
        return self.kind in _SET_KINDS

    @classmethod
    def parse(cls, text: str) -> "MetricSpec":
        """Parse 'manhattan', 'minkowski:1.3', 'fractional:0.5', ..."""
        kind, sep, arg = text.partition(":")
        return cls(kind.strip(), float(arg) if sep else None)

    def __str__(self) -> str:
        return self.kind if self.order is None else f"{self.kind}:{self.order:g}"


@dataclass(frozen=True)
class WeightingScheme:
    """Column weighting: 'tf' (frequency normalized per column) or 'binary',
    optionally multiplied by idf = ln(#columns / document frequency)."""

    base: str = "tf"
    idf: bool = False

    def __post_init__(self) -> None:
        if self.base not in ("tf", "binary"):
            raise ValueError(f"unknown weighting base {self.base!r}")

    def __str__(self) -> str:
        return self.base + ("+idf" if self.idf else "")


@dataclass(frozen=True)
class TermPassageMatrix:
    """Term-by-passage weight matrix.

    Columns are ordered background passages first, then the passages of the
    input source, so mixed-source pools keep the additional material to the
    left.  ``weights`` has shape (terms, columns).
    """

    terms: tuple[str, ...]
    weights: np.ndarray
    doc_frequencies: np.ndarray
    n_background: int = 0

    @property
    def n_columns(self) -> int:
        return self.weights.shape[1]

    @property
    def n_input(self) -> int:
        return self.n_columns - self.n_background

    def column(self, j: int) -> np.ndarray:
        return self.weights[:, j]

    def input_column_index(self, passage_index: int) -> int:
        return self.n_background + passage_index

    def input_weights(self) -> np.ndarray:
        return self.weights[:, self.n_background:]

    def to_json_dict(self) -> dict:
        return {
            "terms": list(self.terms),
            "columns": [self.weights[:, j].tolist() for j in range(self.n_columns)],
            "doc_frequencies": self.doc_frequencies.tolist(),
            "n_background": self.n_background,
        }


def build_matrix(
    source: InputSource,
    scheme: WeightingScheme = WeightingScheme(),
    background: Sequence[InputSource] = (),
) -> TermPassageMatrix:
    """Build the weight matrix for ``source``, plus optional background columns.

    The vocabulary is the union of terms over all columns in first-occurrence
    order.  With idf on, every weight is multiplied by
    ``ln(n_columns / doc_frequency)`` where the document frequency counts the
    matrix columns containing the term.
    """
    token_columns: list[tuple[str, ...]] = []
    for extra in background:
        token_columns.extend(p.tokens for p in extra.passages)
    n_background = len(token_columns)
    token_columns.extend(p.tokens for p in source.passages)

    index: dict[str, int] = {}
    for tokens in token_columns:
        for term in tokens:
            if term not in index:
                index[term] = len(index)

    counts = np.zeros((len(index), len(token_columns)))
    for j, tokens in enumerate(token_columns):
        for term in tokens:
            counts[index[term], j] += 1.0

    doc_frequencies = np.count_nonzero(counts, axis=1).astype(float)
    if scheme.base == "binary":
        weights = (counts > 0).astype(float)
    else:
        totals = counts.sum(axis=0)
        totals[totals == 0] = 1.0
        weights = counts / totals
    if scheme.idf:
        weights = weights * np.log(len(token_columns) / doc_frequencies)[:, None]

    weights.setflags(write=False)
    doc_frequencies.setflags(write=False)
    return TermPassageMatrix(
        terms=tuple(index),
        weights=weights,
        doc_frequencies=doc_frequencies,
        n_background=n_background,
    )


def _check_dims(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 1:
        raise DimensionMismatchError(f"incompatible vector shapes {x.shape} and {y.shape}")
    return x, y


def minkowski_distance(x: np.ndarray, y: np.ndarray, order: float) -> float:
    """Rooted Minkowski distance ``(sum |x_i - y_i|^p)^(1/p)``, p > 0.

    Factoring out the largest coordinate difference keeps large orders away
    from overflow/underflow, so the Chebyshev limit is approachable.
    """
    x, y = _check_dims(x, y)
    if order <= 0:
        raise ValueError("minkowski order must be > 0")
    diff = np.abs(x - y)
    top = diff.max()
    if top == 0.0:
        return 0.0
    return float(top * np.sum((diff / top) ** order) ** (1.0 / order))


def fractional_distance(x: np.ndarray, y: np.ndarray, order: float) -> float:
    """Rootless fractional dissimilarity ``sum |x_i - y_i|^p``, 0 < p < 1."""
    x, y = _check_dims(x, y)
    if not 0 < order < 1:
        raise ValueError("fractional order must lie in (0, 1)")
    return float(np.sum(np.abs(x - y) ** order))


def manhattan_distance(x: np.ndarray, y: np.ndarray) -> float:
    x, y = _check_dims(x, y)
    return float(np.sum(np.abs(x - y)))


def euclidean_distance(x: np.ndarray, y: np.ndarray) -> float:
    x, y = _check_dims(x, y)
    return float(np.sqrt(np.sum((x - y) ** 2)))


def chebyshev_distance(x: np.ndarray, y: np.ndarray) -> float:
    x, y = _check_dims(x, y)
    return float(np.max(np.abs(x - y)))


def cosine_similarity(x: np.ndarray, y: np.ndarray) -> float:
    """Cosine of the angle between ``x`` and ``y``; 0 if either is zero."""
    x, y = _check_dims(x, y)
    nx = np.linalg.norm(x)
    ny = np.linalg.norm(y)
    if nx == 0.0 or ny == 0.0:
        return 0.0
    return float(np.dot(x, y) / (nx * ny))


def manhattan_similarity(x: np.ndarray, y: np.ndarray) -> float:
    """``1 / (1 + manhattan_distance)``, in (0, 1]."""
    return 1.0 / (1.0 + manhattan_distance(x, y))


def distance(x: np.ndarray, y: np.ndarray, spec: MetricSpec) -> float:
    """Dispatch a distance-polarity metric on a pair of weight vectors."""
    if spec.polarity != "distance":
        raise ValueError(f"{spec} is not a distance metric")
    if spec.kind == "manhattan":
        return manhattan_distance(x, y)
    if spec.kind == "euclidean":
        return euclidean_distance(x, y)
    if spec.kind == "chebyshev":
        return chebyshev_distance(x, y)
    if spec.kind == "fractional":
        return fractional_distance(x, y, spec.order)
    if spec.kind == "dimension-minkowski":
        x_arr = np.asarray(x, dtype=float)
        return minkowski_distance(x, y, float(x_arr.size))
    # minkowski and raw-minkowski-fractional are both the rooted form
    return minkowski_distance(x, y, spec.order)


def similarity(x: np.ndarray, y: np.ndarray, spec: MetricSpec) -> float:
    """Dispatch a similarity-polarity metric on a pair of weight vectors."""
    if spec.polarity != "similarity":
        raise ValueError(f"{spec} is not a similarity metric")
    if spec.set_based:
        raise ValueError(f"{spec} operates on token sets, not weight vectors")
    if spec.kind == "cosine":
        return cosine_similarity(x, y)
    return manhattan_similarity(x, y)


def content_overlap(p_tokens: Iterable[str], q_tokens: Iterable[str]) -> float:
    """Shared-term count over the sum of log set sizes.

    When both passages are single-term sets the log denominator vanishes, so
    the Jaccard coefficient is used instead.
    """
    p = set(p_tokens)
    q = set(q_tokens)
    if not p or not q:
        raise EmptyPassageError("content overlap needs non-empty token sets")
    denominator = math.log(len(p)) + math.log(len(q))
    if denominator == 0.0:
        return jaccard(p, q)
    return len(p & q) / denominator


def jaccard(p_tokens: Iterable[str], q_tokens: Iterable[str]) -> float:
    p = set(p_tokens)
    q = set(q_tokens)
    if not p or not q:
        raise EmptyPassageError("jaccard needs non-empty token sets")
    return len(p & q) / len(p | q)


def set_similarity(p_tokens: Iterable[str], q_tokens: Iterable[str], spec: MetricSpec) -> float:
    if spec.kind == "content-overlap":
        return content_overlap(p_tokens, q_tokens)
    if spec.kind == "jaccard":
        return jaccard(p_tokens, q_tokens)
    raise ValueError(f"{spec} is not a set-overlap metric")
