"""Document ingestion: segmentation, tokenization, corpus loading.

Every downstream model consumes the :class:`InputSource` produced here: an
ordered list of passages (sentences or sentence-like units), each carrying its
normalized tokens.  Normalization is deliberately minimal -- lowercasing and
punctuation removal, no stemming, no stopword removal.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Mapping


class EmptySourceError(ValueError):
    """No passage survived segmentation."""


class MissingReferenceError(ValueError):
    """A document has no reference summary but one is required."""


@dataclass(frozen=True)
class Passage:
    """One extraction unit: a sentence or sentence-like unit.

    ``index`` is the zero-based position in source order; ``tokens`` are the
    normalized terms (never empty strings; a single-token passage is legal).
    """

    index: int
    raw_text: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class InputSource:
    """An ordered, segmented document."""

    doc_id: str
    passages: tuple[Passage, ...]

    def __post_init__(self) -> None:
        if not self.passages:
            raise EmptySourceError(f"document {self.doc_id!r} has no passages")
        for pos, passage in enumerate(self.passages):
            if passage.index != pos:
                raise ValueError("passage indices must be 0..N-1 in order")

    @property
    def total_words(self) -> int:
        return sum(len(p.tokens) for p in self.passages)

    def token_lists(self) -> list[tuple[str, ...]]:
        return [p.tokens for p in self.passages]


@dataclass(frozen=True)
class ReferenceSummary:
    """A model summary to score against; ``kind`` is 'abstract' or 'extract'."""

    doc_id: str
    text: str
    tokens: tuple[str, ...]
    kind: str = "abstract"

    def __post_init__(self) -> None:
        if not self.tokens:
            raise ValueError(f"reference for {self.doc_id!r} has no tokens")


@dataclass(frozen=True)
class Corpus:
    """Documents, their reference summaries, and optional background sources.

    ``background`` maps a document id to the additional sources pooled with it
    in mixed-source mode.
    """

    documents: tuple[InputSource, ...]
    references: Mapping[str, tuple[ReferenceSummary, ...]] = field(default_factory=dict)
    background: Mapping[str, tuple[InputSource, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        ids = {d.doc_id for d in self.documents}
        for doc_id in self.references:
            if doc_id not in ids:
                raise ValueError(f"reference for unknown document {doc_id!r}")


@lru_cache(maxsize=4096)
def _is_punctuation(char: str) -> bool:
    return unicodedata.category(char).startswith("P")


def tokenize(text: str, *, lowercase: bool = True, strip_punctuation: bool = True) -> list[str]:
    """Normalize ``text`` into a token list.

    Lowercases, strips Unicode punctuation characters, splits on whitespace
    and drops empty tokens.  Idempotent on its own (re-joined) output.
    """
    if lowercase:
        text = text.lower()
    if strip_punctuation:
        text = "".join(c for c in text if not _is_punctuation(c))
    return text.split()


def segment(
    text: str,
    boundary_markers: str = "\n",
    doc_id: str = "doc",
    *,
    lowercase: bool = True,
    strip_punctuation: bool = True,
) -> InputSource:
    """Split ``text`` into passages at any of ``boundary_markers``.

    Spans that tokenize to nothing are dropped and the survivors re-indexed,
    keeping indices contiguous.  Raises :class:`EmptySourceError` when no
    passage survives.
    """
    if not boundary_markers:
        spans = [text]
    else:
        spans = re.split("[%s]" % re.escape(boundary_markers), text)
    passages = []
    for span in spans:
        tokens = tokenize(span, lowercase=lowercase, strip_punctuation=strip_punctuation)
        if not tokens:
            continue
        passages.append(Passage(index=len(passages), raw_text=span.strip(), tokens=tuple(tokens)))
    if not passages:
        raise EmptySourceError(f"document {doc_id!r} segments to no passages")
    return InputSource(doc_id=doc_id, passages=tuple(passages))


@dataclass(frozen=True)
class CorpusLayout:
    """How a corpus tree is organized and segmented.

    The canonical tree is ``<root>/docs/<id>.txt`` with references at
    ``<root>/refs/<id>.<k>.txt`` and optional background documents at
    ``<root>/background/<id>.<k>.txt``.  Documents are one passage per line
    unless ``boundary_markers`` says otherwise.
    """

    docs_dir: str = "docs"
    refs_dir: str = "refs"
    background_dir: str = "background"
    boundary_markers: str = "\n"
    require_references: bool = False
    reference_kind: str = "abstract"


def _companion_files(directory: Path, doc_id: str) -> list[Path]:
    if not directory.is_dir():
        return []
    found = [p for p in directory.glob(f"{doc_id}.*.txt") if p.is_file()]
    plain = directory / f"{doc_id}.txt"
    if plain.is_file():
        found.append(plain)
    return sorted(found)


def load_corpus(root: str | Path, layout: CorpusLayout = CorpusLayout()) -> Corpus:
    """Load a corpus tree into memory, ordered lexicographically by doc id."""
    root = Path(root)
    docs_dir = root / layout.docs_dir
    if not docs_dir.is_dir():
        raise FileNotFoundError(f"no document directory at {docs_dir}")

    documents = []
    references: dict[str, tuple[ReferenceSummary, ...]] = {}
    background: dict[str, tuple[InputSource, ...]] = {}
    for doc_path in sorted(docs_dir.glob("*.txt")):
        doc_id = doc_path.stem
        text = doc_path.read_text(encoding="utf-8")
        documents.append(segment(text, layout.boundary_markers, doc_id=doc_id))

        refs = []
        for ref_path in _companion_files(root / layout.refs_dir, doc_id):
            ref_text = ref_path.read_text(encoding="utf-8")
            refs.append(
                ReferenceSummary(
                    doc_id=doc_id,
                    text=ref_text,
                    tokens=tuple(tokenize(ref_text)),
                    kind=layout.reference_kind,
                )
            )
        if refs:
            references[doc_id] = tuple(refs)
        elif layout.require_references:
            raise MissingReferenceError(f"no reference summary for document {doc_id!r}")

        extras = []
        for k, bg_path in enumerate(_companion_files(root / layout.background_dir, doc_id)):
            bg_text = bg_path.read_text(encoding="utf-8")
            extras.append(segment(bg_text, layout.boundary_markers, doc_id=f"{doc_id}::bg{k}"))
        if extras:
            background[doc_id] = tuple(extras)

    return Corpus(documents=tuple(documents), references=references, background=background)
