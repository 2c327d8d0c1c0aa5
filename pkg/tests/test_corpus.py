import pytest
from hypothesis import given
from hypothesis import strategies as st

from supsum.corpus import (
    CorpusLayout,
    EmptySourceError,
    MissingReferenceError,
    load_corpus,
    segment,
    tokenize,
)


def test_tokenize_strips_punctuation_and_lowercases():
    assert tokenize("The cat, sat!") == ["the", "cat", "sat"]


def test_tokenize_empty_input():
    assert tokenize("") == []


def test_tokenize_case_folding_preserves_duplicates():
    assert tokenize("a a A.") == ["a", "a", "a"]


def test_tokenize_unicode_punctuation():
    assert tokenize("«Olá», disse — ninguém?") == ["olá", "disse", "ninguém"]


@given(st.lists(st.text(alphabet="abcxyz", min_size=1), min_size=0, max_size=20))
def test_tokenize_idempotent_on_own_output(words):
    tokens = tokenize(" ".join(words))
    assert tokenize(" ".join(tokens)) == tokens


def test_segment_splits_on_markers():
    source = segment("A b. C d.", ".")
    assert len(source.passages) == 2
    assert [p.index for p in source.passages] == [0, 1]
    assert source.passages[0].tokens == ("a", "b")


def test_segment_no_surviving_passage():
    with pytest.raises(EmptySourceError):
        segment("...", ".")


def test_segment_line_mode():
    source = segment("one\n\ntwo two\nthree\n", "\n")
    assert len(source.passages) == 3
    assert source.total_words == 4


def test_segment_drops_empty_spans_and_reindexes():
    source = segment("a. . b. c.", ".")
    assert [p.tokens for p in source.passages] == [("a",), ("b",), ("c",)]
    assert [p.index for p in source.passages] == [0, 1, 2]


@given(
    st.lists(
        st.lists(st.text(alphabet="abcde", min_size=1, max_size=4), min_size=1, max_size=5),
        min_size=1,
        max_size=6,
    )
)
def test_segment_concatenation_matches_whole_text_tokens(passage_words):
    text = ". ".join(" ".join(words) for words in passage_words)
    source = segment(text, ".")
    flattened = [t for p in source.passages for t in p.tokens]
    assert flattened == tokenize(text)


def _write_corpus(root, docs, refs=None, background=None):
    (root / "docs").mkdir(parents=True)
    for doc_id, text in docs.items():
        (root / "docs" / f"{doc_id}.txt").write_text(text, encoding="utf-8")
    for mapping, directory in ((refs, "refs"), (background, "background")):
        if mapping:
            (root / directory).mkdir()
            for name, text in mapping.items():
                (root / directory / name).write_text(text, encoding="utf-8")


def test_load_corpus_with_reference(tmp_path):
    _write_corpus(tmp_path, {"d1": "a b\nc d\n"}, {"d1.0.txt": "a b"})
    corpus = load_corpus(tmp_path)
    assert [d.doc_id for d in corpus.documents] == ["d1"]
    assert corpus.references["d1"][0].tokens == ("a", "b")


def test_load_corpus_summarize_only_allows_missing_reference(tmp_path):
    _write_corpus(tmp_path, {"d1": "a b\n"})
    corpus = load_corpus(tmp_path)
    assert corpus.references == {}


def test_load_corpus_eval_mode_requires_reference(tmp_path):
    _write_corpus(tmp_path, {"d1": "a b\n"})
    with pytest.raises(MissingReferenceError):
        load_corpus(tmp_path, CorpusLayout(require_references=True))


def test_load_corpus_is_deterministic(tmp_path):
    docs = {"b": "x y\n", "a": "z\n", "c": "w v\nu\n"}
    _write_corpus(tmp_path, docs, {"a.0.txt": "z", "b.0.txt": "x", "c.0.txt": "w"})
    first = load_corpus(tmp_path)
    second = load_corpus(tmp_path)
    assert first == second
    assert [d.doc_id for d in first.documents] == ["a", "b", "c"]


def test_load_corpus_background(tmp_path):
    _write_corpus(
        tmp_path,
        {"d1": "a b\n"},
        {"d1.0.txt": "a"},
        {"d1.0.txt": "extra words\n", "d1.1.txt": "more\n"},
    )
    corpus = load_corpus(tmp_path)
    assert len(corpus.background["d1"]) == 2
    assert corpus.background["d1"][0].passages[0].tokens == ("extra", "words")


def test_missing_root_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        load_corpus(tmp_path / "nope")
