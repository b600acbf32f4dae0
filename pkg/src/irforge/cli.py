"""Command-line entry point exposing the full workflow as subcommands."""

from __future__ import annotations

import argparse
import csv
import difflib
import hashlib
import json
import os
import re
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .analysis import ENGLISH_STOPWORDS, Analyzer
from .evalkit import (
    AblationSpec,
    Annotation,
    DownsampleSpec,
    apply_ablation,
    collection_summary,
    evaluate_run,
    judgment_audit,
    tau_table,
)
from .forge import (
    DocCategory,
    ForgeConfig,
    Journal,
    Qrels,
    export_trec,
    read_corpus,
    run_pipeline,
    write_corpus,
)
from .genclient import (
    API_KEY_ENV,
    HttpProvider,
    MockProvider,
    PriceTable,
    UsageLedger,
    cost_estimate,
)
from .retrieval import (
    BM25Params,
    HttpEmbedder,
    HttpReranker,
    MockEmbedder,
    MockReranker,
    VectorStore,
    bm25_search,
    build_index,
    dense_search,
    embed_corpus,
    fuse,
    load_index,
    read_run,
    rerank,
    save_index,
    write_run,
)
from .textstats import lexical_report, readability_report, structure_stats
from .topics import parse_topics

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    pass


_ALL_OPTIONS: set[str] = set()


class CliParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # noqa: A003 - argparse API
        flags = re.findall(r"--?[\w.-]+", message)
        hints = []
        for flag in flags:
            close = difflib.get_close_matches(flag, sorted(_ALL_OPTIONS), n=1)
            if close and close[0] != flag:
                hints.append(f"did you mean {close[0]}?")
        if hints:
            message = f"{message} ({' '.join(hints)})"
        raise UsageError(message)


def _register_options(parser: argparse.ArgumentParser) -> None:
    for action in parser._actions:
        _ALL_OPTIONS.update(action.option_strings)


def load_config(path: str | None) -> dict[str, str]:
    """Flat key=value config with ${VAR} environment interpolation."""
    if not path:
        return {}
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise UsageError(f"config line {lineno}: expected key = value")
        key, _, value = stripped.partition("=")
        value = value.strip()
        value = re.sub(r"\$\{(\w+)\}", lambda m: os.environ.get(m.group(1), ""), value)
        values[key.strip()] = value
    return values


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(
    command: str,
    location: Path,
    inputs: list[Path],
    outputs: list[Path],
    seed: str = "",
    config_digest: str = "",
    started_at: str = "",
) -> None:
    manifest = {
        "command": command,
        "tool_version": __version__,
        "seed": seed,
        "config_digest": config_digest,
        "input_digests": {str(p): _digest(p) for p in inputs if p.exists()},
        "output_paths": [str(p) for p in outputs],
        "started_at": started_at,
        "finished_at": datetime.now(timezone.utc).isoformat(),
    }
    if location.is_dir():
        target = location / "manifest.json"
    else:
        target = location.with_name(location.name + ".manifest.json")
    target.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _read_topics(path: str, fmt: str):
    return parse_topics(Path(path).read_text(encoding="utf-8"), fmt)


def _make_provider(args, config: dict[str, str]):
    if args.provider == "mock":
        return MockProvider(seed_salt=args.seed or config.get("seed", ""))
    base_url = config.get("provider.base_url", "")
    model = config.get("provider.model", "")
    if not base_url or not model:
        raise UsageError("http provider needs provider.base_url and provider.model in --config")
    return HttpProvider(
        base_url=base_url,
        model=model,
        api_key=config.get("provider.api_key") or os.environ.get(API_KEY_ENV),
        timeout=float(config.get("provider.timeout", "120")),
    )


def _analyzer_from_args(args) -> Analyzer:
    return Analyzer(
        lowercase=not args.no_lowercase,
        stopword_list=frozenset() if args.keep_stopwords else ENGLISH_STOPWORDS,
        stemmer="none" if args.no_stem else "porter",
    )


def _fmt(value: float) -> str:
    return f"{value:.4f}"


def _emit(lines: list[str], out: str | None) -> None:
    text = "".join(line + "\n" for line in lines)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands


def cmd_forge(args) -> int:
    started = _now()
    config = load_config(args.config)
    provider = _make_provider(args, config)
    topics = _read_topics(args.topics, args.topics_format)
    cfg = ForgeConfig(
        subtopics_requested=args.subtopics,
        docs_per_subtopic=args.docs_per_subtopic,
        variants_per_topic=args.variants,
        docs_per_variant=args.docs_per_variant,
        random_docs_total=args.random,
        document_type=args.doc_type,
        seed=args.seed,
        max_output_tokens=args.max_output_tokens,
        concurrency=args.jobs,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    journal_path = Path(args.journal) if args.journal else out_dir / "journal.jsonl"
    with Journal(journal_path) as journal:
        result = run_pipeline(topics, cfg, provider, journal)
    corpus_path = out_dir / "corpus.jsonl"
    qrels_path = out_dir / "qrels.txt"
    ledger_path = out_dir / "ledger.json"
    write_corpus(result.corpus, corpus_path)
    result.qrels.write(qrels_path)
    ledger_path.write_text(
        json.dumps(result.ledger.as_dict(), indent=2) + "\n", encoding="utf-8"
    )
    for topic_id, reason in sorted(result.failed_topics.items()):
        print(f"warning: topic {topic_id} failed: {reason}", file=sys.stderr)
    for topic_id, reason in sorted(result.skipped_tricky.items()):
        print(f"warning: topic {topic_id} has no tricky docs: {reason}", file=sys.stderr)
    print(
        f"forged {len(result.corpus)} docs, {len(result.qrels)} qrels entries "
        f"({result.ledger.total_tokens} tokens)",
        file=sys.stderr,
    )
    write_manifest(
        "forge", out_dir, [Path(args.topics)], [corpus_path, qrels_path, ledger_path],
        seed=args.seed, started_at=started,
    )
    return EXIT_OK


def cmd_export_trec(args) -> int:
    started = _now()
    corpus = read_corpus(args.corpus)
    text = export_trec(corpus)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        write_manifest("export-trec", Path(args.out), [Path(args.corpus)],
                       [Path(args.out)], started_at=started)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_index(args) -> int:
    started = _now()
    corpus = read_corpus(args.corpus)
    index = build_index(((d.doc_id, d.full_text) for d in corpus), _analyzer_from_args(args))
    save_index(index, args.out)
    print(f"indexed {index.doc_count} docs, {len(index.postings)} terms", file=sys.stderr)
    write_manifest("index", Path(args.out), [Path(args.corpus)], [Path(args.out)],
                   started_at=started)
    return EXIT_OK


def _query_text(topic, field: str) -> str:
    return topic.title if field == "title" else topic.description


def _dense_store(args, corpus) -> VectorStore:
    embedder = (
        HttpEmbedder(args.embed_endpoint)
        if args.embedder == "http"
        else MockEmbedder(dim=args.embed_dim)
    )
    store_path = Path(args.store) if args.store else None
    if store_path and store_path.exists():
        return VectorStore.load(store_path)
    if corpus is None:
        raise UsageError("--model dense/hybrid needs --corpus when the store is missing")
    store = embed_corpus(((d.doc_id, d.full_text) for d in corpus), embedder)
    if store_path:
        store.save(store_path)
    return store


def cmd_search(args) -> int:
    started = _now()
    topics = _read_topics(args.topics, args.topics_format)
    corpus = read_corpus(args.corpus) if args.corpus else None
    tag = args.tag or args.model
    params = BM25Params(k1=args.k1, b=args.b)

    index = load_index(args.index) if args.model in ("bm25", "hybrid") else None
    store = _dense_store(args, corpus) if args.model in ("dense", "hybrid") else None
    embedder = (
        HttpEmbedder(args.embed_endpoint)
        if args.embedder == "http"
        else MockEmbedder(dim=args.embed_dim)
    )

    entries = []
    for topic in topics:
        query = _query_text(topic, args.query_field)
        if args.model == "bm25":
            entries.extend(
                bm25_search(index, query, params, args.k, topic_id=topic.id, tag=tag)
            )
            continue
        query_vec = embedder.embed([query])[0]
        dense = dense_search(store, query_vec, args.k, topic_id=topic.id, tag=tag)
        if args.model == "dense":
            entries.extend(dense)
        else:
            sparse = bm25_search(index, query, params, args.k, topic_id=topic.id, tag="bm25")
            entries.extend(fuse(sparse, dense, alpha=args.alpha, k=args.k, tag=tag))
    write_run(entries, args.out)
    print(f"wrote {len(entries)} run entries to {args.out}", file=sys.stderr)
    inputs = [Path(args.index)] if index is not None else []
    if args.corpus:
        inputs.append(Path(args.corpus))
    inputs.append(Path(args.topics))
    write_manifest("search", Path(args.out), inputs, [Path(args.out)],
                   seed=str(args.embed_dim), started_at=started)
    return EXIT_OK


def cmd_rerank(args) -> int:
    started = _now()
    run = read_run(args.run)
    corpus = read_corpus(args.corpus)
    topics = _read_topics(args.topics, args.topics_format)
    scorer = HttpReranker(args.rerank_endpoint) if args.scorer == "http" else MockReranker()
    texts = {d.doc_id: d.full_text for d in corpus}
    queries = {t.id: _query_text(t, args.query_field) for t in topics}
    entries = rerank(run, texts, queries, scorer, depth=args.depth, tag=args.tag)
    write_run(entries, args.out)
    write_manifest(
        "rerank", Path(args.out),
        [Path(args.run), Path(args.corpus), Path(args.topics)], [Path(args.out)],
        started_at=started,
    )
    return EXIT_OK


def _parse_metrics(raw: str) -> tuple[list[str], list[int]]:
    metrics = [m.strip() for m in raw.split(",") if m.strip()]
    ks = []
    for metric in metrics:
        if metric.startswith("P."):
            ks.append(int(metric.split(".", 1)[1]))
        elif metric not in ("map", "rprec"):
            raise UsageError(f"unknown metric {metric!r} (use map, rprec, or P.<k>)")
    return metrics, (ks or [10, 100])


def cmd_eval(args) -> int:
    started = _now()
    metrics, ks = _parse_metrics(args.metrics)
    qrels = Qrels.read(args.qrels)
    run = read_run(args.run)
    report = evaluate_run(run, qrels, ks=ks, cutoff=args.cutoff)
    lines = []
    if args.per_topic:
        for topic_id, tm in sorted(report.per_topic.items()):
            for metric in metrics:
                lines.append(f"{topic_id}\t{metric}\t{_fmt(tm.value(metric))}")
    for metric in metrics:
        lines.append(f"{metric}\t{_fmt(report.means[metric])}")
    _emit(lines, args.out)
    for topic_id, reason in sorted(report.excluded_topics.items()):
        print(f"warning: topic {topic_id} excluded: {reason}", file=sys.stderr)
    if args.json:
        payload = {
            "run_tag": report.run_tag,
            "means": report.means,
            "per_topic": {
                t: {"p_at": m.p_at, "ap": m.ap, "rprec": m.rprec, "num_rel": m.num_rel}
                for t, m in report.per_topic.items()
            },
            "excluded_topics": report.excluded_topics,
        }
        Path(args.json).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    if args.out:
        write_manifest("eval", Path(args.out), [Path(args.qrels), Path(args.run)],
                       [Path(args.out)], started_at=started)
    return EXIT_OK


def cmd_correlate(args) -> int:
    started = _now()
    scores: dict[str, dict[str, float]] = {}
    inputs: list[Path] = []
    for spec in args.collection:
        if "=" not in spec:
            raise UsageError("--collection expects NAME=report.json[,report.json...]")
        name, _, raw_paths = spec.partition("=")
        scores[name] = {}
        for raw in raw_paths.split(","):
            path = Path(raw)
            inputs.append(path)
            payload = json.loads(path.read_text(encoding="utf-8"))
            if args.metric not in payload["means"]:
                raise UsageError(f"{path}: metric {args.metric!r} not in report")
            scores[name][payload["run_tag"]] = payload["means"][args.metric]
    table = tau_table(scores, args.metric, variant=args.variant)
    header = "collection\t" + "\t".join(table.collections)
    lines = [header]
    for a in table.collections:
        cells = [
            "-" if a == b else _fmt(table.taus[(a, b)]) for b in table.collections
        ]
        lines.append(a + "\t" + "\t".join(cells))
    lines.append(
        "Average\t" + "\t".join(_fmt(table.averages[a]) for a in table.collections)
    )
    _emit(lines, args.out)
    if args.out:
        write_manifest("correlate", Path(args.out), inputs, [Path(args.out)],
                       started_at=started)
    return EXIT_OK


def cmd_ablate(args) -> int:
    started = _now()
    corpus = read_corpus(args.corpus)
    qrels = Qrels.read(args.qrels)
    exclude = frozenset(
        DocCategory(c.strip()).value for c in args.exclude.split(",") if c.strip()
    ) if args.exclude else frozenset()
    downsample = None
    if args.downsample is not None:
        downsample = DownsampleSpec(n=args.downsample, repeats=args.repeats, seed=args.seed)
    spec = AblationSpec(
        exclude_categories=exclude, cap_relevant=args.cap_rel, downsample=downsample
    )
    results = apply_ablation(corpus, qrels, spec)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for i, (docs, sub_qrels) in enumerate(results):
        suffix = f"_{i:03d}" if len(results) > 1 else ""
        corpus_path = out_dir / f"corpus{suffix}.jsonl"
        qrels_path = out_dir / f"qrels{suffix}.txt"
        write_corpus(docs, corpus_path)
        sub_qrels.write(qrels_path)
        outputs.extend([corpus_path, qrels_path])
        print(f"ablation {i}: {len(docs)} docs, {len(sub_qrels)} qrels entries",
              file=sys.stderr)
    write_manifest("ablate", out_dir, [Path(args.corpus), Path(args.qrels)], outputs,
                   seed=str(args.seed), started_at=started)
    return EXIT_OK


def cmd_analyze(args) -> int:
    started = _now()
    corpus = read_corpus(args.corpus)
    texts = [(d.doc_id, d.full_text) for d in corpus]
    wanted = [m.strip() for m in args.metrics.split(",") if m.strip()]
    lines: list[str] = []
    payload: dict[str, dict] = {}
    for metric in wanted:
        if metric == "structure":
            report = structure_stats(text for _, text in texts)
            rows = {
                "doc_count": report.doc_count,
                "total_words": report.total_words,
                "mean_words_per_doc": report.mean_words_per_doc,
                "std_words_per_doc": report.std_words_per_doc,
                "mean_sentences_per_doc": report.mean_sentences_per_doc,
                "std_sentences_per_doc": report.std_sentences_per_doc,
                "mean_words_per_sentence": report.mean_words_per_sentence,
                "median_words_per_sentence": report.median_words_per_sentence,
                "std_words_per_sentence": report.std_words_per_sentence,
                "max_words_in_doc": report.max_words_in_doc,
                "min_words_in_doc": report.min_words_in_doc,
            }
        elif metric == "lexical":
            lex = lexical_report(texts)
            rows = {
                "mean_ttr": lex.mean_ttr,
                "mean_maas": lex.mean_maas,
                "mean_hdd": lex.mean_hdd,
                "mean_mtld": lex.mean_mtld,
                "mean_unique_words": lex.mean_unique_words,
                "mean_lemmatized_unique_words": lex.mean_lemmatized_unique_words,
                "lemma_proxy": lex.lemma_proxy,
            }
        elif metric == "readability":
            read = readability_report(texts)
            rows = {
                "mean_kincaid": read.mean_kincaid,
                "std_kincaid": read.std_kincaid,
                "mean_fre": read.mean_fre,
                "std_fre": read.std_fre,
                "mean_ari": read.mean_ari,
                "std_ari": read.std_ari,
            }
        elif metric == "collection":
            if not args.qrels:
                raise UsageError("--metrics collection needs --qrels")
            summary = collection_summary(len(corpus), Qrels.read(args.qrels))
            rows = {
                "doc_count": summary.doc_count,
                "topic_count": summary.topic_count,
                "relevant_count": summary.relevant_count,
                "relevant_ratio": summary.relevant_ratio,
                "mean_relevant_per_topic": summary.mean_relevant_per_topic,
                "std_relevant_per_topic": summary.std_relevant_per_topic,
                "max_relevant_per_topic": summary.max_relevant_per_topic,
            }
        else:
            raise UsageError(
                f"unknown metric {metric!r} (use structure, lexical, readability, collection)"
            )
        payload[metric] = rows
        for key, value in rows.items():
            if isinstance(value, float):
                lines.append(f"{metric}.{key}\t{_fmt(value)}")
            else:
                lines.append(f"{metric}.{key}\t{value}")
    _emit(lines, args.out)
    if args.json:
        Path(args.json).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    if args.out:
        write_manifest("analyze", Path(args.out), [Path(args.corpus)], [Path(args.out)],
                       started_at=started)
    return EXIT_OK


def read_annotations(path: str | Path) -> list[Annotation]:
    annotations = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() == "topic_id":
                continue
            if len(row) != 3:
                raise ValueError(f"annotation row needs 3 fields, got {row!r}")
            annotations.append(
                Annotation(topic_id=row[0].strip(), doc_id=row[1].strip(),
                           label=int(row[2]))
            )
    return annotations


def cmd_audit(args) -> int:
    started = _now()
    corpus = read_corpus(args.corpus)
    report = judgment_audit(corpus, read_annotations(args.annotations))

    def cell(value: float | None) -> str:
        return "-" if value is None else _fmt(value)

    lines = ["topic\trelevance_rate\tnonrelevance_rate"]
    for topic_id, audit in sorted(report.per_topic.items()):
        lines.append(f"{topic_id}\t{cell(audit.relevance_rate)}\t{cell(audit.nonrelevance_rate)}")
    lines.append(f"macro\t{cell(report.macro_relevance_rate)}\t{cell(report.macro_nonrelevance_rate)}")
    lines.append(f"pooled\t{cell(report.pooled_relevance_rate)}\t{cell(report.pooled_nonrelevance_rate)}")
    _emit(lines, args.out)
    if args.out:
        write_manifest("audit", Path(args.out),
                       [Path(args.corpus), Path(args.annotations)], [Path(args.out)],
                       started_at=started)
    return EXIT_OK


def cmd_cost(args) -> int:
    started = _now()
    ledger = UsageLedger.from_dict(json.loads(Path(args.ledger).read_text(encoding="utf-8")))
    prices = PriceTable(
        usd_per_million_input=args.price_in,
        usd_per_million_output=args.price_out,
        wh_per_token=args.wh_per_token,
    )
    estimate = cost_estimate(ledger, prices)
    lines = [
        f"prompt_tokens\t{ledger.total_prompt_tokens}",
        f"completion_tokens\t{ledger.total_completion_tokens}",
        f"total_tokens\t{ledger.total_tokens}",
        f"usd\t{estimate.usd:.2f}",
        f"kwh\t{estimate.kwh:.2f}",
    ]
    _emit(lines, args.out)
    if args.out:
        write_manifest("cost", Path(args.out), [Path(args.ledger)], [Path(args.out)],
                       started_at=started)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _add_topics_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--topics", required=True, help="topic file")
    p.add_argument("--topics-format", default="jsonl", choices=["jsonl", "trec-sgml"])


def build_parser() -> CliParser:
    parser = CliParser(prog="irforge", description=__doc__)
    parser.add_argument("--version", action="version", version=f"irforge {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=CliParser)

    p = sub.add_parser("forge", help="generate a synthetic collection")
    _add_topics_args(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--provider", default="mock", choices=["mock", "http"])
    p.add_argument("--config", help="flat key=value provider config")
    p.add_argument("--seed", default="", help="mock provider seed salt")
    p.add_argument("--subtopics", type=int, default=100)
    p.add_argument("--docs-per-subtopic", type=int, default=1)
    p.add_argument("--variants", type=int, default=10)
    p.add_argument("--docs-per-variant", type=int, default=5)
    p.add_argument("--random", type=int, default=0, help="random filler docs")
    p.add_argument("--doc-type", default="long text")
    p.add_argument("--max-output-tokens", type=int, default=1024)
    p.add_argument("--journal", help="journal path (default: <out-dir>/journal.jsonl)")
    p.add_argument("--jobs", type=int, default=4, help="provider concurrency")
    p.set_defaults(func=cmd_forge)

    p = sub.add_parser("export-trec", help="corpus JSONL to TREC SGML")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_trec)

    p = sub.add_parser("index", help="build an inverted index")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-stem", action="store_true")
    p.add_argument("--keep-stopwords", action="store_true")
    p.add_argument("--no-lowercase", action="store_true")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("search", help="produce a TREC run")
    _add_topics_args(p)
    p.add_argument("--model", required=True, choices=["bm25", "dense", "hybrid"])
    p.add_argument("--index", help="index file (bm25/hybrid)")
    p.add_argument("--corpus", help="corpus JSONL (dense/hybrid embedding)")
    p.add_argument("--store", help="vector store path (reused if present)")
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=1000)
    p.add_argument("--k1", type=float, default=0.9)
    p.add_argument("--b", type=float, default=0.4)
    p.add_argument("--alpha", type=float, default=0.5, help="hybrid weight on bm25")
    p.add_argument("--tag")
    p.add_argument("--embedder", default="mock", choices=["mock", "http"])
    p.add_argument("--embed-endpoint")
    p.add_argument("--embed-dim", type=int, default=16)
    p.add_argument("--query-field", default="description", choices=["description", "title"])
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("rerank", help="rescore a run with a reranker")
    p.add_argument("--run", required=True)
    p.add_argument("--corpus", required=True)
    _add_topics_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--depth", type=int, default=100)
    p.add_argument("--scorer", default="mock", choices=["mock", "http"])
    p.add_argument("--rerank-endpoint")
    p.add_argument("--tag")
    p.add_argument("--query-field", default="description", choices=["description", "title"])
    p.set_defaults(func=cmd_rerank)

    p = sub.add_parser("eval", help="score a run against qrels")
    p.add_argument("--qrels", required=True)
    p.add_argument("--run", required=True)
    p.add_argument("--metrics", default="map,rprec,P.10,P.100")
    p.add_argument("--cutoff", type=int, default=1000, help="AP evaluation depth")
    p.add_argument("--per-topic", action="store_true")
    p.add_argument("--out")
    p.add_argument("--json", help="full-precision JSON report path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("correlate", help="tau matrix across collections")
    p.add_argument("--metric", required=True)
    p.add_argument("--collection", action="append", required=True,
                   metavar="NAME=report.json,...")
    p.add_argument("--variant", default="TAU_B", choices=["TAU_A", "TAU_B"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("ablate", help="exclusion/cap/downsample variants")
    p.add_argument("--corpus", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--exclude", help="comma list of TRICKY_NONREL,RANDOM")
    p.add_argument("--cap-rel", type=int, help="max relevant docs per topic")
    p.add_argument("--downsample", type=int, help="sample size")
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("analyze", help="corpus statistics reports")
    p.add_argument("--corpus", required=True)
    p.add_argument("--metrics", default="structure,lexical,readability")
    p.add_argument("--qrels", help="needed for --metrics collection")
    p.add_argument("--out")
    p.add_argument("--json")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("audit", help="score human annotations")
    p.add_argument("--corpus", required=True)
    p.add_argument("--annotations", required=True, help="CSV topic_id,doc_id,label")
    p.add_argument("--out")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("cost", help="dollar and energy cost of a ledger")
    p.add_argument("--ledger", required=True)
    p.add_argument("--price-in", type=float, default=1.50, help="USD per million input tokens")
    p.add_argument("--price-out", type=float, default=2.00, help="USD per million output tokens")
    p.add_argument("--wh-per-token", type=float, default=0.015)
    p.add_argument("--out")
    p.set_defaults(func=cmd_cost)

    _register_options(parser)
    for action in parser._subparsers._group_actions:
        for subparser in action.choices.values():
            _register_options(subparser)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            parser.print_usage(sys.stderr)
            print("error: a subcommand is required", file=sys.stderr)
            return EXIT_USAGE
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        # argparse exits directly for --help/--version
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001 - single CLI failure boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
