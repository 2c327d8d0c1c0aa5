import pytest

from supsum.corpus import segment
from supsum.summarize import SizeBudget, compose
from supsum.supportset import Ranking


def _source(*texts):
    return segment("\n".join(texts), "\n", doc_id="d")


def _ranking(order):
    n = len(order)
    return Ranking(tuple((idx, float(n - pos)) for pos, idx in enumerate(order)))


def test_sentence_budget_reorders_to_source_order():
    source = _source("zero a", "one b", "two c")
    summary = compose(_ranking([2, 0, 1]), source, SizeBudget("sentences", 2))
    assert summary.selected == (0, 2)
    assert summary.text == "zero a\ntwo c"


def test_word_budget_includes_crossing_passage():
    source = _source("a b c d e", "f g h i j", "k l m n o")
    summary = compose(_ranking([0, 1, 2]), source, SizeBudget("words", 8))
    # 5 words < 8, take next; 10 >= 8, stop
    assert summary.selected == (0, 1)
    assert summary.word_count == 10


def test_budget_larger_than_document_takes_everything():
    source = _source("a b", "c", "d e f")
    summary = compose(_ranking([1, 2, 0]), source, SizeBudget("words", 500))
    assert summary.selected == (0, 1, 2)


def test_sentence_budget_clamped_to_document():
    source = _source("a", "b")
    summary = compose(_ranking([1, 0]), source, SizeBudget("sentences", 9))
    assert summary.selected == (0, 1)


def test_rate_budget_uses_total_words():
    source = _source("a b c d", "e f g h", "i j k l")  # 12 words
    summary = compose(_ranking([2, 1, 0]), source, SizeBudget("rate", 0.25))
    # limit 3 words: first passage crosses it, selection stops
    assert summary.selected == (2,)


def test_selected_always_ascending():
    source = _source("a", "b", "c", "d")
    summary = compose(_ranking([3, 1, 2, 0]), source, SizeBudget("sentences", 3))
    assert list(summary.selected) == sorted(summary.selected)


def test_deterministic():
    source = _source("a b", "c d", "e f")
    first = compose(_ranking([1, 0, 2]), source, SizeBudget("words", 3))
    second = compose(_ranking([1, 0, 2]), source, SizeBudget("words", 3))
    assert first == second


def test_budget_validation():
    with pytest.raises(ValueError):
        SizeBudget("rate", 1.5)
    with pytest.raises(ValueError):
        SizeBudget("words", 0)
    with pytest.raises(ValueError):
        SizeBudget("pages", 2)
    with pytest.raises(ValueError):
        SizeBudget.parse("sentences")


def test_budget_parse():
    assert SizeBudget.parse("sentences:2") == SizeBudget("sentences", 2)
    assert SizeBudget.parse("rate:0.25") == SizeBudget("rate", 0.25)
    assert str(SizeBudget.parse("words:100")) == "words:100"
