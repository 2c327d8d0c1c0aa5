import json

import pytest

from supsum.cli import main
from supsum.evaluation import wilcoxon_signed_rank

DOC_A = "red green blue\nred green cyan\nred green blue\nyellow pink black\n"
DOC_B = "one two three\none two four\nfive six seven\nfive six eight\n"


def _write_corpus(root, docs, refs=None, background=None):
    (root / "docs").mkdir(parents=True)
    for doc_id, text in docs.items():
        (root / "docs" / f"{doc_id}.txt").write_text(text, encoding="utf-8")
    for mapping, directory in ((refs, "refs"), (background, "background")):
        if mapping:
            (root / directory).mkdir()
            for name, text in mapping.items():
                (root / directory / name).write_text(text, encoding="utf-8")


class TestSummarize:
    def test_pipeline_smoke(self, tmp_path):
        doc = tmp_path / "doc.txt"
        doc.write_text(DOC_A, encoding="utf-8")
        out = tmp_path / "out"
        code = main(
            [
                "summarize",
                "--model", "support-sets",
                "--metric", "manhattan",
                "--strategy", "knn:2",
                "--budget", "sentences:2",
                "--output-dir", str(out),
                str(doc),
            ]
        )
        assert code == 0
        lines = (out / "doc.sum.txt").read_text(encoding="utf-8").strip().split("\n")
        assert len(lines) == 2
        sidecar = json.loads((out / "doc.sum.json").read_text(encoding="utf-8"))
        assert sidecar["doc_id"] == "doc"
        assert len(sidecar["indices"]) == 2

    def test_unknown_metric_exits_2(self, tmp_path, capsys):
        doc = tmp_path / "doc.txt"
        doc.write_text(DOC_A, encoding="utf-8")
        code = main(["summarize", "--metric", "flub", str(doc)])
        assert code == 2
        assert "usage" in capsys.readouterr().err

    def test_mixed_source_without_background_exits_2(self, tmp_path):
        doc = tmp_path / "doc.txt"
        doc.write_text(DOC_A, encoding="utf-8")
        code = main(["summarize", "--mixed-source", str(doc)])
        assert code == 2

    def test_mixed_source_with_background(self, tmp_path):
        doc = tmp_path / "doc.txt"
        doc.write_text(DOC_A, encoding="utf-8")
        bg = tmp_path / "bg"
        bg.mkdir()
        (bg / "doc.0.txt").write_text("red green blue\nred green blue\n", encoding="utf-8")
        out = tmp_path / "out"
        code = main(
            [
                "summarize",
                "--mixed-source",
                "--background-dir", str(bg),
                "--budget", "sentences:1",
                "--output-dir", str(out),
                str(doc),
            ]
        )
        assert code == 0
        assert (out / "doc.sum.txt").exists()

    def test_missing_input_exits_3(self, tmp_path):
        code = main(["summarize", str(tmp_path / "nope.txt")])
        assert code == 3


class TestRank:
    def test_json_payload(self, tmp_path, capsys):
        doc = tmp_path / "doc.txt"
        doc.write_text(DOC_A, encoding="utf-8")
        code = main(["rank", "--model", "position", str(doc)])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["model"] == "position"
        assert [e["index"] for e in payload["entries"]] == [0, 1, 2, 3]

    def test_dump_matrix_and_graph(self, tmp_path):
        doc = tmp_path / "doc.txt"
        doc.write_text(DOC_A, encoding="utf-8")
        matrix_file = tmp_path / "matrix.json"
        graph_file = tmp_path / "graph.json"
        code = main(
            [
                "rank",
                "--model", "degree",
                "--output", str(tmp_path / "ranking.json"),
                "--dump-matrix", str(matrix_file),
                "--dump-graph", str(graph_file),
                str(doc),
            ]
        )
        assert code == 0
        matrix = json.loads(matrix_file.read_text(encoding="utf-8"))
        assert set(matrix) == {"terms", "columns", "doc_frequencies", "n_background"}
        graph = json.loads(graph_file.read_text(encoding="utf-8"))
        assert graph["n"] == 4
        for _, _, weight in graph["edges"]:
            assert weight == 1.0

    def test_strategy_echoed(self, tmp_path, capsys):
        doc = tmp_path / "doc.txt"
        doc.write_text(DOC_A, encoding="utf-8")
        main(["rank", "--strategy", "knn:2", str(doc)])
        payload = json.loads(capsys.readouterr().out)
        assert payload["strategy"] == "knn:2"
        assert payload["metric"] == "manhattan"


class TestEvaluate:
    def test_perfect_summaries_score_one(self, tmp_path, capsys):
        root = tmp_path / "corpus"
        _write_corpus(
            root,
            {"a": DOC_A, "b": DOC_B},
            {"a.0.txt": DOC_A, "b.0.txt": DOC_B},
        )
        out = tmp_path / "eval"
        code = main(
            [
                "evaluate",
                "--model", "position",
                "--budget", "sentences:99",
                "--seed", "7",
                "--output-dir", str(out),
                str(root),
            ]
        )
        assert code == 0
        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        assert report["mean"] == 1.0
        assert report["ci"] == [1.0, 1.0]
        assert set(report["per_doc"]) == {"a", "b"}
        row = (out / "report.tsv").read_text(encoding="utf-8")
        assert "1.0000\t1.0000\t1.0000" in row

    def test_fixed_seed_reruns_byte_identical(self, tmp_path):
        root = tmp_path / "corpus"
        _write_corpus(
            root,
            {"a": DOC_A, "b": DOC_B},
            {"a.0.txt": "red green blue", "b.0.txt": "five six seven"},
        )
        outputs = []
        for name in ("run1", "run2"):
            out = tmp_path / name
            code = main(
                [
                    "evaluate",
                    "--strategy", "knn:2",
                    "--budget", "sentences:2",
                    "--seed", "123",
                    "--output-dir", str(out),
                    str(root),
                ]
            )
            assert code == 0
            outputs.append((out / "report.json").read_bytes())
        assert outputs[0] == outputs[1]

    def test_missing_reference_exits_3(self, tmp_path, capsys):
        root = tmp_path / "corpus"
        _write_corpus(root, {"a": DOC_A})
        code = main(["evaluate", str(root)])
        assert code == 3
        assert "reference" in capsys.readouterr().err

    def test_ref_words_budget(self, tmp_path):
        root = tmp_path / "corpus"
        _write_corpus(root, {"a": DOC_A}, {"a.0.txt": "red green blue\nred green cyan\n"})
        out = tmp_path / "eval"
        code = main(
            ["evaluate", "--budget", "ref-words", "--output-dir", str(out), str(root)]
        )
        assert code == 0
        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        assert report["config"]["budget"] == "ref-words"

    def test_ref_sentences_budget(self, tmp_path):
        root = tmp_path / "corpus"
        _write_corpus(root, {"a": DOC_A}, {"a.0.txt": "red green blue. yellow pink."})
        out = tmp_path / "eval"
        code = main(
            ["evaluate", "--model", "position", "--budget", "ref-sentences",
             "--output-dir", str(out), str(root)]
        )
        assert code == 0
        # the reference has two sentences, so position keeps the first two lines
        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        assert report["per_doc"]["a"] == pytest.approx(3.0 / 5.0)

    def test_split_segments_running_text(self, tmp_path):
        root = tmp_path / "corpus"
        _write_corpus(
            root,
            {"a": "red green blue. red green cyan! yellow pink black?"},
            {"a.0.txt": "red green blue"},
        )
        out = tmp_path / "eval"
        code = main(
            ["evaluate", "--model", "position", "--split", ".!?", "--budget",
             "sentences:1", "--output-dir", str(out), str(root)]
        )
        assert code == 0
        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        assert report["per_doc"]["a"] == 1.0


class TestCompare:
    def test_emits_statistic_consistent_with_eval_module(self, tmp_path, capsys):
        root = tmp_path / "corpus"
        docs = {}
        refs = {}
        for i in range(7):
            doc_id = f"d{i}"
            docs[doc_id] = (
                f"junk{i} filler{i} noise{i}\n"
                f"alpha{i} beta{i} gamma{i}\n"
                f"alpha{i} beta{i} gamma{i}\n"
                f"alpha{i} beta{i} delta{i}\n"
            )
            refs[f"{doc_id}.0.txt"] = f"alpha{i} beta{i} gamma{i}"
        _write_corpus(root, docs, refs)

        cfg_a = tmp_path / "a.toml"
        cfg_a.write_text('model = "support-sets"\nstrategy = "knn:1"\n', encoding="utf-8")
        cfg_b = tmp_path / "b.toml"
        cfg_b.write_text('model = "position"\n', encoding="utf-8")
        code = main(
            [
                "compare",
                "--config-a", str(cfg_a),
                "--config-b", str(cfg_b),
                "--budget", "sentences:1",
                "--seed", "5",
                str(root),
            ]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        doc_ids = sorted(payload["a"]["per_doc"])
        scores_a = [payload["a"]["per_doc"][d] for d in doc_ids]
        scores_b = [payload["b"]["per_doc"][d] for d in doc_ids]
        expected_w, expected_p = wilcoxon_signed_rank(scores_a, scores_b)
        assert payload["wilcoxon"]["w"] == expected_w
        assert payload["wilcoxon"]["p_one_sided"] == pytest.approx(expected_p)
        assert payload["a"]["mean"] > payload["b"]["mean"]

    def test_identical_configs_report_too_few_pairs(self, tmp_path, capsys):
        root = tmp_path / "corpus"
        _write_corpus(root, {"a": DOC_A}, {"a.0.txt": "red green blue"})
        cfg = tmp_path / "same.toml"
        cfg.write_text('model = "position"\n', encoding="utf-8")
        code = main(
            [
                "compare",
                "--config-a", str(cfg),
                "--config-b", str(cfg),
                "--budget", "sentences:1",
                str(root),
            ]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert "error" in payload["wilcoxon"]


class TestSweep:
    def test_grid_rows(self, tmp_path, capsys):
        root = tmp_path / "corpus"
        _write_corpus(
            root,
            {"a": DOC_A, "b": DOC_B},
            {"a.0.txt": "red green blue", "b.0.txt": "five six seven"},
        )
        grid = tmp_path / "grid.toml"
        grid.write_text(
            "[grid]\n"
            'metric = ["manhattan", "cosine"]\n'
            'strategy = ["knn:1", "knn:2"]\n'
            "[defaults]\n"
            'budget = "sentences:2"\n'
            "seed = 11\n",
            encoding="utf-8",
        )
        code = main(["sweep", "--grid", str(grid), str(root)])
        assert code == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0] == "system\tmean\tci_low\tci_high"
        assert len(lines) == 5
        means = [float(line.split("\t")[1]) for line in lines[1:]]
        assert means == sorted(means, reverse=True)

    def test_empty_grid(self, tmp_path, capsys):
        root = tmp_path / "corpus"
        _write_corpus(root, {"a": DOC_A}, {"a.0.txt": "red green blue"})
        grid = tmp_path / "grid.toml"
        grid.write_text("[grid]\n", encoding="utf-8")
        code = main(["sweep", "--grid", str(grid), str(root)])
        assert code == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines == ["system\tmean\tci_low\tci_high"]

    def test_degenerate_epsilon_matches_degree_rows(self, tmp_path, capsys):
        # all passages have three distinct tokens, so binary cosine
        # similarities are 0, 1/3, 2/3 or 1 and the 0.5 cut is unambiguous
        root = tmp_path / "corpus"
        _write_corpus(
            root,
            {"a": DOC_A, "b": DOC_B},
            {"a.0.txt": "red green blue", "b.0.txt": "five six seven"},
        )
        grid = tmp_path / "grid.toml"
        grid.write_text(
            "[grid]\n"
            'model = ["support-sets", "degree"]\n'
            "[defaults]\n"
            'metric = "cosine"\n'
            'weighting = "binary"\n'
            'strategy = "eps:0.5"\n'
            "graph_threshold = 0.5\n"
            'budget = "sentences:2"\n'
            "seed = 3\n",
            encoding="utf-8",
        )
        code = main(["sweep", "--grid", str(grid), str(root)])
        assert code == 0
        lines = capsys.readouterr().out.strip().split("\n")[1:]
        assert len(lines) == 2
        numbers = {tuple(line.split("\t")[1:]) for line in lines}
        assert len(numbers) == 1  # identical mean and interval

    def test_unknown_grid_key_exits_2(self, tmp_path):
        root = tmp_path / "corpus"
        _write_corpus(root, {"a": DOC_A}, {"a.0.txt": "red green blue"})
        grid = tmp_path / "grid.toml"
        grid.write_text('[grid]\nflavour = ["sweet"]\n', encoding="utf-8")
        assert main(["sweep", "--grid", str(grid), str(root)]) == 2


class TestConfigFile:
    def test_flags_win_over_file(self, tmp_path, capsys):
        doc = tmp_path / "doc.txt"
        doc.write_text(DOC_A, encoding="utf-8")
        cfg = tmp_path / "cfg.toml"
        cfg.write_text('model = "position"\nmetric = "cosine"\n', encoding="utf-8")
        main(["rank", "--config", str(cfg), "--model", "support-sets", str(doc)])
        payload = json.loads(capsys.readouterr().out)
        assert payload["model"] == "support-sets"
        assert payload["metric"] == "cosine"

    def test_bad_strategy_in_file_exits_2(self, tmp_path):
        doc = tmp_path / "doc.txt"
        doc.write_text(DOC_A, encoding="utf-8")
        cfg = tmp_path / "cfg.toml"
        cfg.write_text('strategy = "knn"\n', encoding="utf-8")
        assert main(["rank", "--config", str(cfg), str(doc)]) == 2


@pytest.mark.parametrize(
    "model",
    [
        "support-sets",
        "degree",
        "lexrank",
        "continuous-lexrank",
        "textrank",
        "influx",
        "pairwise-avg",
        "centroid",
        "position",
    ],
)
def test_every_model_evaluates(tmp_path, model):
    root = tmp_path / "corpus"
    _write_corpus(
        root,
        {"a": DOC_A, "b": DOC_B},
        {"a.0.txt": "red green blue", "b.0.txt": "five six seven"},
    )
    out = tmp_path / "eval"
    code = main(
        [
            "evaluate",
            "--model", model,
            "--budget", "sentences:2",
            "--seed", "17",
            "--output-dir", str(out),
            str(root),
        ]
    )
    assert code == 0
    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert 0.0 <= report["mean"] <= 1.0


def test_worker_pool_is_deterministic(tmp_path):
    root = tmp_path / "corpus"
    docs = {f"d{i}": DOC_A.replace("red", f"red{i}") for i in range(6)}
    refs = {f"d{i}.0.txt": f"red{i} green blue" for i in range(6)}
    _write_corpus(root, docs, refs)
    reports = []
    for name, workers in (("serial", "1"), ("pooled", "4")):
        out = tmp_path / name
        code = main(
            [
                "evaluate",
                "--budget", "sentences:2",
                "--seed", "23",
                "--workers", workers,
                "--output-dir", str(out),
                str(root),
            ]
        )
        assert code == 0
        reports.append((out / "report.json").read_bytes())
    assert reports[0] == reports[1]


def test_single_passage_document(tmp_path, capsys):
    doc = tmp_path / "doc.txt"
    doc.write_text("only one passage here\n", encoding="utf-8")
    code = main(["rank", str(doc)])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["entries"] == [{"index": 0, "score": 1.0}]


def test_seed_env_var(tmp_path, monkeypatch):
    root = tmp_path / "corpus"
    _write_corpus(root, {"a": DOC_A}, {"a.0.txt": "red green blue"})
    monkeypatch.setenv("SUPSUM_SEED", "314")
    out = tmp_path / "eval"
    code = main(["evaluate", "--budget", "sentences:1", "--output-dir", str(out), str(root)])
    assert code == 0
    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert report["config"]["seed"] == 314
