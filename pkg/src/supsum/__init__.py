"""Extractive summarization by support-set centrality.

The pipeline: segment a document into passages (:mod:`supsum.corpus`), embed
them as columns of a term-passage matrix (:mod:`supsum.vectorspace`), build a
support set of closest passages for each one and rank passages by how many
support sets they land in (:mod:`supsum.supportset`), then cut an extract to
a size budget (:mod:`supsum.summarize`).  Graph-based baselines live in
:mod:`supsum.graphrank` and ROUGE-based scoring in :mod:`supsum.evaluation`;
:mod:`supsum.cli` drives everything from the command line.
"""

from .corpus import Corpus, CorpusLayout, InputSource, Passage, ReferenceSummary, load_corpus, segment, tokenize
from .evaluation import EvalReport, RougeScore, bootstrap_ci, rouge_n, wilcoxon_signed_rank
from .summarize import SizeBudget, Summary, compose
from .supportset import (
    Ranking,
    SupportSet,
    SupportSetCollection,
    ThresholdStrategy,
    build_collection,
    centrality_ranking,
)
from .vectorspace import MetricSpec, TermPassageMatrix, WeightingScheme, build_matrix

__version__ = "0.1.0"

__all__ = [
    "Corpus",
    "CorpusLayout",
    "EvalReport",
    "InputSource",
    "MetricSpec",
    "Passage",
    "Ranking",
    "ReferenceSummary",
    "RougeScore",
    "SizeBudget",
    "Summary",
    "SupportSet",
    "SupportSetCollection",
    "TermPassageMatrix",
    "ThresholdStrategy",
    "WeightingScheme",
    "bootstrap_ci",
    "build_collection",
    "build_matrix",
    "centrality_ranking",
    "compose",
    "load_corpus",
    "rouge_n",
    "segment",
    "tokenize",
    "wilcoxon_signed_rank",
]
