"""Turn a passage ranking plus a size budget into an extract."""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import InputSource
from .supportset import Ranking


@dataclass(frozen=True)
class SizeBudget:
    """Summary size: 'words' or 'sentences' with a limit, or a compression
    'rate' in (0, 1) applied to the source's total word count."""

    kind: str
    limit: float

    def __post_init__(self) -> None:
        if self.kind not in ("words", "sentences", "rate"):
            raise ValueError(f"unknown budget kind {self.kind!r}")
        if self.kind == "rate":
            if not 0 < self.limit < 1:
                raise ValueError("compression rate must lie in (0, 1)")
        elif self.limit < 1:
            raise ValueError("budget limit must be positive")

    @classmethod
    def parse(cls, text: str) -> "SizeBudget":
        kind, sep, arg = text.partition(":")
        if not sep:
            raise ValueError(f"budget {text!r} needs a value, e.g. 'sentences:2'")
        kind = kind.strip()
        return cls(kind, float(arg) if kind == "rate" else int(arg))

    def __str__(self) -> str:
        return f"{self.kind}:{self.limit:g}"


@dataclass(frozen=True)
class Summary:
    doc_id: str
    selected: tuple[int, ...]
    text: str
    word_count: int

    def to_json_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "indices": list(self.selected),
            "text": self.text,
            "word_count": self.word_count,
        }


def compose(ranking: Ranking, source: InputSource, budget: SizeBudget) -> Summary:
    """Select the top-ranked passages within ``budget``, emitted in source order.

    Under word and rate budgets a passage is added while the running word
    total is still below the limit, so the passage that crosses the limit is
    included and selection stops.  Under a sentence budget exactly
    ``min(limit, N)`` passages are taken.
    """
    passages = source.passages
    selected: list[int] = []
    if budget.kind == "sentences":
        take = min(int(budget.limit), len(passages))
        selected = [index for index, _ in ranking.entries[:take]]
    else:
        limit = budget.limit if budget.kind == "words" else budget.limit * source.total_words
        total = 0
        for index, _ in ranking.entries:
            if total >= limit:
                break
            selected.append(index)
            total += len(passages[index].tokens)
    selected.sort()
    text = "\n".join(passages[i].raw_text for i in selected)
    word_count = sum(len(passages[i].tokens) for i in selected)
    return Summary(doc_id=source.doc_id, selected=tuple(selected), text=text, word_count=word_count)
