"""Command-line front end: summarize, rank, evaluate, compare, sweep.

Configuration comes from flags plus an optional TOML config file; flags win.
Exit codes: 0 success, 2 configuration error, 3 I/O error (including missing
reference summaries in evaluation mode).
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import graphrank
from .corpus import (
    Corpus,
    CorpusLayout,
    InputSource,
    MissingReferenceError,
    ReferenceSummary,
    load_corpus,
    segment,
)
from .evaluation import EvalReport, TooFewPairsError, bootstrap_ci, rouge_n, wilcoxon_signed_rank
from .graphrank import PowerIterationConfig, build_graph
from .summarize import SizeBudget, compose
from .supportset import Ranking, ThresholdStrategy, build_collection, centrality_ranking
from .vectorspace import MetricSpec, WeightingScheme, build_matrix

MODELS = (
    "support-sets",
    "degree",
    "lexrank",
    "continuous-lexrank",
    "textrank",
    "influx",
    "pairwise-avg",
    "centroid",
    "position",
)

_DEFAULT_METRIC = {
    "support-sets": "manhattan",
    "degree": "cosine",
    "lexrank": "cosine",
    "continuous-lexrank": "cosine",
    "textrank": "content-overlap",
    "pairwise-avg": "cosine",
    "centroid": "cosine",
}

_DEFAULTS = {
    "model": "support-sets",
    "metric": None,
    "strategy": "knn:2",
    "weighting": "tf",
    "idf": False,
    "budget": None,
    "damping": 0.15,
    "graph_threshold": None,
    "orientation": "backward",
    "influx_k": None,
    "influx_mu": 500.0,
    "influx_weighted": False,
    "tolerance": 1e-6,
    "max_iterations": 200,
    "seed": None,
    "mixed_source": False,
    "split": None,
    "rouge_n": 1,
    "resamples": 1000,
    "ci_level": 0.95,
    "label": None,
    "workers": 1,
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Fully resolved run parameters for one model."""

    model: str
    metric: MetricSpec | None
    strategy: ThresholdStrategy | None
    weighting: WeightingScheme
    budget_text: str
    damping: float
    graph_threshold: float | None
    orientation: str
    influx_k: int | None
    influx_mu: float
    influx_weighted: bool
    tolerance: float
    max_iterations: int
    seed: int
    mixed_source: bool
    split: str | None

    @property
    def power_config(self) -> PowerIterationConfig:
        return PowerIterationConfig(
            damping=self.damping,
            tolerance=self.tolerance,
            max_iterations=self.max_iterations,
        )

    def label(self) -> str:
        parts = [self.model]
        if self.metric is not None:
            parts.append(str(self.metric))
        if self.model == "support-sets" and self.strategy is not None:
            parts.append(str(self.strategy))
        parts.append(str(self.weighting))
        if self.mixed_source:
            parts.append("mixed")
        return " ".join(parts)


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path, "rb") as handle:
        return tomllib.load(handle)


def _resolve(values: dict, key: str, file_values: dict):
    flag = values.get(key)
    if flag is not None:
        return flag
    if key in file_values:
        return file_values[key]
    return _DEFAULTS[key]


def resolve_config(args_dict: dict, file_values: dict | None = None) -> RunConfig:
    """Merge flag values, config-file values and defaults into a RunConfig."""
    file_values = dict(file_values or {})
    get = lambda key: _resolve(args_dict, key, file_values)

    model = get("model")
    if model not in MODELS:
        raise ConfigError(f"unknown model {model!r}")

    metric_text = get("metric")
    if metric_text is None:
        metric_text = _DEFAULT_METRIC.get(model)
    try:
        metric = MetricSpec.parse(metric_text) if metric_text is not None else None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    strategy = None
    if model == "support-sets":
        try:
            strategy = ThresholdStrategy.parse(get("strategy"))
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"bad strategy {get('strategy')!r}: {exc}") from None

    mixed_source = bool(get("mixed_source"))
    if mixed_source and model != "support-sets":
        raise ConfigError("--mixed-source applies to the support-sets model only")

    graph_threshold = get("graph_threshold")
    if graph_threshold is None and model in ("degree", "lexrank"):
        graph_threshold = 0.1

    seed = get("seed")
    if seed is None:
        seed = int(os.environ.get("SUPSUM_SEED", "42"))

    budget = get("budget")
    if budget is None:
        budget = "rate:0.3"
    _validate_budget_text(budget)

    try:
        return RunConfig(
            model=model,
            metric=metric,
            strategy=strategy,
            weighting=WeightingScheme(base=get("weighting"), idf=bool(get("idf"))),
            budget_text=budget,
            damping=float(get("damping")),
            graph_threshold=None if graph_threshold is None else float(graph_threshold),
            orientation=get("orientation"),
            influx_k=None if get("influx_k") is None else int(get("influx_k")),
            influx_mu=float(get("influx_mu")),
            influx_weighted=bool(get("influx_weighted")),
            tolerance=float(get("tolerance")),
            max_iterations=int(get("max_iterations")),
            seed=int(seed),
            mixed_source=mixed_source,
            split=get("split"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _validate_budget_text(text: str) -> None:
    if text in ("ref-words", "ref-sentences"):
        return
    try:
        SizeBudget.parse(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def resolve_budget(
    config: RunConfig, source: InputSource, references: Sequence[ReferenceSummary]
) -> SizeBudget:
    """Materialize the budget, deriving per-document limits from references
    for the 'ref-words' / 'ref-sentences' pseudo-budgets."""
    text = config.budget_text
    if text == "ref-words":
        if not references:
            raise ConfigError("budget 'ref-words' needs reference summaries")
        return SizeBudget("words", len(references[0].tokens))
    if text == "ref-sentences":
        if not references:
            raise ConfigError("budget 'ref-sentences' needs reference summaries")
        sentences = segment(references[0].text, ".!?\n", doc_id=source.doc_id)
        return SizeBudget("sentences", len(sentences.passages))
    return SizeBudget.parse(text)


def rank_source(
    config: RunConfig, source: InputSource, background: Sequence[InputSource] = ()
) -> Ranking:
    """Run the configured centrality model on one document."""
    n = len(source.passages)
    if n == 1:
        return Ranking(((0, 1.0),))
    token_lists = source.token_lists()

    if config.model == "position":
        return graphrank.position_baseline(source)
    if config.model == "influx":
        k = config.influx_k if config.influx_k is not None else max(1, math.ceil(0.1 * n))
        return graphrank.uniform_influx(
            token_lists, k=k, mu=config.influx_mu, weighted=config.influx_weighted
        )
    if config.model == "textrank" and config.metric.set_based:
        graph = build_graph(token_lists, config.metric, orientation=config.orientation)
        return graphrank.textrank_scores(graph, config.power_config)

    matrix = build_matrix(
        source, config.weighting, background=background if config.mixed_source else ()
    )
    if config.model == "support-sets":
        collection = build_collection(matrix, config.metric, config.strategy)
        return centrality_ranking(collection)
    if config.model == "pairwise-avg":
        return graphrank.pairwise_average_centrality(matrix, config.metric)
    if config.model == "centroid":
        return graphrank.centroid_centrality(matrix, config.metric)
    if config.model == "textrank":
        graph = build_graph(matrix, config.metric, orientation=config.orientation)
        return graphrank.textrank_scores(graph, config.power_config)
    if config.model == "degree":
        graph = build_graph(
            matrix, config.metric, threshold=config.graph_threshold, binarize=True
        )
        return graphrank.degree_centrality(graph)
    if config.model == "lexrank":
        graph = build_graph(
            matrix, config.metric, threshold=config.graph_threshold, binarize=True
        )
        return graphrank.lexrank(graph, config.power_config)
    # continuous-lexrank
    graph = build_graph(matrix, config.metric, threshold=config.graph_threshold)
    return graphrank.continuous_lexrank(graph, config.power_config)


def _load_input_file(path: Path, config: RunConfig) -> InputSource:
    text = path.read_text(encoding="utf-8")
    markers = config.split if config.split else "\n"
    return segment(text, markers, doc_id=path.stem)


def _load_background_dir(directory: Path, doc_id: str, config: RunConfig) -> list[InputSource]:
    markers = config.split if config.split else "\n"
    sources = []
    paths = sorted(p for p in directory.glob(f"{doc_id}.*.txt") if p.is_file())
    for k, path in enumerate(paths):
        sources.append(segment(path.read_text(encoding="utf-8"), markers, doc_id=f"{doc_id}::bg{k}"))
    return sources


def _json_dumps(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _ranking_payload(config: RunConfig, source: InputSource, ranking: Ranking) -> dict:
    return {
        "doc_id": source.doc_id,
        "model": config.model,
        "metric": None if config.metric is None else str(config.metric),
        "strategy": None if config.strategy is None else str(config.strategy),
        "weighting": str(config.weighting),
        "entries": ranking.to_json_dict(),
    }


def _score_corpus(config: RunConfig, corpus: Corpus, rouge_order: int, workers: int) -> dict[str, float]:
    """ROUGE recall per document, deterministically ordered by doc id."""
    documents = sorted(corpus.documents, key=lambda d: d.doc_id)

    def score(doc: InputSource) -> tuple[str, float]:
        references = corpus.references[doc.doc_id]
        ranking = rank_source(config, doc, corpus.background.get(doc.doc_id, ()))
        summary = compose(ranking, doc, resolve_budget(config, doc, references))
        candidate = [t for i in summary.selected for t in doc.passages[i].tokens]
        result = rouge_n(candidate, [r.tokens for r in references], rouge_order)
        return doc.doc_id, result.recall

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pairs = list(pool.map(score, documents))
    else:
        pairs = [score(doc) for doc in documents]
    return dict(sorted(pairs))


def _evaluate_config(config: RunConfig, corpus: Corpus, args) -> dict:
    per_doc = _score_corpus(config, corpus, args.rouge_n or 1, args.workers or 1)
    scores = [per_doc[doc_id] for doc_id in sorted(per_doc)]
    resamples = args.resamples if args.resamples is not None else _DEFAULTS["resamples"]
    level = args.ci_level if args.ci_level is not None else _DEFAULTS["ci_level"]
    low, high = bootstrap_ci(scores, resamples=resamples, level=level, seed=config.seed)
    report = EvalReport(
        per_doc=per_doc,
        mean=sum(scores) / len(scores),
        ci_low=low,
        ci_high=high,
        level=level,
        resamples=resamples,
    )
    return {
        "label": args.label or config.label(),
        "config": {
            "model": config.model,
            "metric": None if config.metric is None else str(config.metric),
            "strategy": None if config.strategy is None else str(config.strategy),
            "weighting": str(config.weighting),
            "budget": config.budget_text,
            "mixed_source": config.mixed_source,
            "rouge_n": args.rouge_n or 1,
            "seed": config.seed,
        },
        **report.to_json_dict(),
    }


def _tsv_row(report: dict) -> str:
    return "%s\t%.4f\t%.4f\t%.4f" % (
        report["label"],
        report["mean"],
        report["ci"][0],
        report["ci"][1],
    )


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_summarize(args) -> int:
    config = resolve_config(vars(args), _load_config_file(args.config))
    background_dir = Path(args.background_dir) if args.background_dir else None
    if config.mixed_source and background_dir is None:
        raise ConfigError("--mixed-source needs --background-dir")
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for path in [Path(p) for p in args.inputs]:
        source = _load_input_file(path, config)
        background = (
            _load_background_dir(background_dir, source.doc_id, config) if background_dir else []
        )
        ranking = rank_source(config, source, background)
        budget = resolve_budget(config, source, ())
        summary = compose(ranking, source, budget)
        (out_dir / f"{source.doc_id}.sum.txt").write_text(summary.text + "\n", encoding="utf-8")
        (out_dir / f"{source.doc_id}.sum.json").write_text(
            _json_dumps(summary.to_json_dict()), encoding="utf-8"
        )
    return 0


def _cmd_rank(args) -> int:
    config = resolve_config(vars(args), _load_config_file(args.config))
    source = _load_input_file(Path(args.input), config)
    ranking = rank_source(config, source)
    payload = _json_dumps(_ranking_payload(config, source, ranking))
    if args.output:
        Path(args.output).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)
    if args.dump_matrix:
        matrix = build_matrix(source, config.weighting)
        Path(args.dump_matrix).write_text(_json_dumps(matrix.to_json_dict()), encoding="utf-8")
    if args.dump_graph:
        if config.metric is None:
            raise ConfigError("--dump-graph needs a metric-based model")
        graph_source = source.token_lists() if config.metric.set_based else build_matrix(
            source, config.weighting
        )
        graph = build_graph(
            graph_source,
            config.metric,
            orientation="undirected" if config.model != "textrank" else config.orientation,
            threshold=config.graph_threshold,
            binarize=config.model in ("degree", "lexrank"),
        )
        Path(args.dump_graph).write_text(
            _json_dumps({"n": graph.n, "edges": graph.edge_list()}), encoding="utf-8"
        )
    return 0


def _corpus_layout(config: RunConfig, require_references: bool) -> CorpusLayout:
    markers = config.split if config.split else "\n"
    return CorpusLayout(boundary_markers=markers, require_references=require_references)


def _cmd_evaluate(args) -> int:
    config = resolve_config(vars(args), _load_config_file(args.config))
    corpus = load_corpus(args.root, _corpus_layout(config, require_references=True))
    if config.mixed_source and not corpus.background:
        raise ConfigError("--mixed-source needs background documents in the corpus")
    report = _evaluate_config(config, corpus, args)
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(_json_dumps(report), encoding="utf-8")
    (out_dir / "report.tsv").write_text(_tsv_row(report) + "\n", encoding="utf-8")
    sys.stdout.write(_tsv_row(report) + "\n")
    return 0


def _cmd_compare(args) -> int:
    config_a = resolve_config(vars(args), _load_config_file(args.config_a))
    config_b = resolve_config(vars(args), _load_config_file(args.config_b))
    layout_config = config_a
    corpus = load_corpus(args.root, _corpus_layout(layout_config, require_references=True))
    report_a = _evaluate_config(config_a, corpus, args)
    report_b = _evaluate_config(config_b, corpus, args)
    doc_ids = sorted(report_a["per_doc"])
    scores_a = [report_a["per_doc"][d] for d in doc_ids]
    scores_b = [report_b["per_doc"][d] for d in doc_ids]
    try:
        w, p = wilcoxon_signed_rank(scores_a, scores_b)
        test = {"w": w, "p_one_sided": p, "direction": "a > b"}
    except TooFewPairsError as exc:
        test = {"error": str(exc)}
    payload = _json_dumps({"a": report_a, "b": report_b, "wilcoxon": test})
    if args.output:
        Path(args.output).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)
    return 0


def _cmd_sweep(args) -> int:
    grid_file = _load_config_file(args.grid)
    grid = {k: v if isinstance(v, list) else [v] for k, v in grid_file.get("grid", {}).items()}
    base = grid_file.get("defaults", {})
    for key in list(grid) + list(base):
        if key not in _DEFAULTS:
            raise ConfigError(f"unknown grid key {key!r}")

    corpus = None
    rows = []
    keys = sorted(grid)
    for combo in itertools.product(*(grid[k] for k in keys)) if keys else []:
        file_values = dict(base)
        file_values.update(dict(zip(keys, combo)))
        config = resolve_config(vars(args), file_values)
        if corpus is None:
            corpus = load_corpus(args.root, _corpus_layout(config, require_references=True))
        report = _evaluate_config(config, corpus, args)
        label = ",".join(f"{k}={v}" for k, v in zip(keys, combo)) or report["label"]
        rows.append((label, report["mean"], report["ci"][0], report["ci"][1]))

    rows.sort(key=lambda row: (-row[1], row[0]))
    lines = ["system\tmean\tci_low\tci_high"]
    lines += ["%s\t%.4f\t%.4f\t%.4f" % row for row in rows]
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_model_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("model")
    group.add_argument("--model", choices=MODELS, default=None)
    group.add_argument("--metric", default=None, help="e.g. manhattan, cosine, minkowski:1.3, fractional:0.5")
    group.add_argument("--strategy", default=None, help="support-sets threshold, e.g. knn:2, relative:0.1, avg, stddev:1, diminishing, avg-gap, order-min-max, gaussian:1,0.5, tanh:1,0.5, eps:0.4")
    group.add_argument("--weighting", choices=("tf", "binary"), default=None)
    group.add_argument("--idf", action=argparse.BooleanOptionalAction, default=None)
    group.add_argument("--budget", default=None, help="words:N, sentences:N, rate:F, ref-words, ref-sentences")
    group.add_argument("--damping", type=float, default=None)
    group.add_argument("--graph-threshold", type=float, default=None, dest="graph_threshold")
    group.add_argument("--orientation", choices=("undirected", "backward"), default=None)
    group.add_argument("--influx-k", type=int, default=None, dest="influx_k")
    group.add_argument("--influx-mu", type=float, default=None, dest="influx_mu")
    group.add_argument("--influx-weighted", action=argparse.BooleanOptionalAction, default=None, dest="influx_weighted")
    group.add_argument("--tolerance", type=float, default=None)
    group.add_argument("--max-iterations", type=int, default=None, dest="max_iterations")
    group.add_argument("--seed", type=int, default=None, help="default from SUPSUM_SEED, else 42")
    group.add_argument("--mixed-source", action=argparse.BooleanOptionalAction, default=None, dest="mixed_source")
    group.add_argument("--split", default=None, help="sentence boundary characters; default: one passage per line")


def _add_eval_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("evaluation")
    group.add_argument("--rouge-n", type=int, default=None, dest="rouge_n")
    group.add_argument("--resamples", type=int, default=None)
    group.add_argument("--ci-level", type=float, default=None, dest="ci_level")
    group.add_argument("--label", default=None)
    group.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="supsum", description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("summarize", help="write an extract per input document")
    _add_model_options(p)
    p.add_argument("--config", default=None, help="TOML config file; flags win")
    p.add_argument("--background-dir", default=None, dest="background_dir")
    p.add_argument("--output-dir", default="summaries", dest="output_dir")
    p.add_argument("inputs", nargs="+")
    p.set_defaults(handler=_cmd_summarize)

    p = commands.add_parser("rank", help="emit the passage ranking as JSON")
    _add_model_options(p)
    p.add_argument("--config", default=None)
    p.add_argument("--output", default=None)
    p.add_argument("--dump-matrix", default=None, dest="dump_matrix")
    p.add_argument("--dump-graph", default=None, dest="dump_graph")
    p.add_argument("input")
    p.set_defaults(handler=_cmd_rank)

    p = commands.add_parser("evaluate", help="score one configuration on a corpus")
    _add_model_options(p)
    _add_eval_options(p)
    p.add_argument("--config", default=None)
    p.add_argument("--output-dir", default="eval", dest="output_dir")
    p.add_argument("root")
    p.set_defaults(handler=_cmd_evaluate)

    p = commands.add_parser("compare", help="paired signed-rank test between two configurations")
    _add_model_options(p)
    _add_eval_options(p)
    p.add_argument("--config-a", required=True, dest="config_a")
    p.add_argument("--config-b", required=True, dest="config_b")
    p.add_argument("--output", default=None)
    p.add_argument("root")
    p.set_defaults(handler=_cmd_compare)

    p = commands.add_parser("sweep", help="evaluate a parameter grid and emit a leaderboard")
    _add_model_options(p)
    _add_eval_options(p)
    p.add_argument("--grid", required=True)
    p.add_argument("--output", default=None)
    p.add_argument("root")
    p.set_defaults(handler=_cmd_sweep)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        sys.stderr.write(parser.format_usage())
        sys.stderr.write(f"supsum: error: {exc}\n")
        return 2
    except MissingReferenceError as exc:
        sys.stderr.write(f"supsum: error: {exc}\n")
        return 3
    except OSError as exc:
        sys.stderr.write(f"supsum: error: {exc}\n")
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
