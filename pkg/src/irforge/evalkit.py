"""Run evaluation: precision metrics, Kendall's tau, ablations, audits."""

from __future__ import annotations

import math
import random
import statistics
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

TAU_A = "TAU_A"
TAU_B = "TAU_B"

DEFAULT_AP_CUTOFF = 1000
DEFAULT_PRECISION_KS = (10, 100)


def metric_key(name: str, k: int | None = None) -> str:
    return f"{name}.{k}" if k is not None else name


def precision_at_k(ranked_doc_ids: Sequence[str], relevant: set[str], k: int) -> float:
    """Relevant docs among the top min(k, retrieved), divided by k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    hits = sum(1 for doc_id in ranked_doc_ids[:k] if doc_id in relevant)
    return hits / k


def average_precision(
    ranked_doc_ids: Sequence[str],
    relevant: set[str],
    cutoff: int = DEFAULT_AP_CUTOFF,
) -> float:
    """Mean of precision-at-rank over relevant retrieved docs, divided by R."""
    r = len(relevant)
    if r == 0:
        raise ValueError("average_precision needs at least one relevant doc")
    total = 0.0
    hits = 0
    for rank, doc_id in enumerate(ranked_doc_ids[:cutoff], 1):
        if doc_id in relevant:
            hits += 1
            total += hits / rank
    return total / r


def r_precision(ranked_doc_ids: Sequence[str], relevant: set[str]) -> float:
    """Precision among the top R retrieved docs."""
    r = len(relevant)
    if r == 0:
        raise ValueError("r_precision needs at least one relevant doc")
    hits = sum(1 for doc_id in ranked_doc_ids[:r] if doc_id in relevant)
    return hits / r


@dataclass(frozen=True)
class TopicMetrics:
    p_at: dict[int, float]
    ap: float
    rprec: float
    num_rel: int

    def value(self, key: str) -> float:
        if key == "map":
            return self.ap
        if key == "rprec":
            return self.rprec
        if key.startswith("P."):
            return self.p_at[int(key.split(".", 1)[1])]
        raise KeyError(key)


@dataclass(frozen=True)
class MetricReport:
    run_tag: str
    per_topic: dict[str, TopicMetrics]
    means: dict[str, float]
    excluded_topics: dict[str, str] = field(default_factory=dict)


def evaluate_run(
    run_entries,
    qrels,
    ks: Sequence[int] = DEFAULT_PRECISION_KS,
    cutoff: int = DEFAULT_AP_CUTOFF,
) -> MetricReport:
    """Per-topic and mean P@k, AP, and R-precision for one run.

    Topics absent from the qrels or with no relevant documents are
    flagged and left out of the means, as trec_eval does.
    """
    by_topic: dict[str, list] = {}
    tag = ""
    for entry in sorted(run_entries, key=lambda e: (e.topic_id, e.rank)):
        by_topic.setdefault(entry.topic_id, []).append(entry)
        tag = tag or entry.tag

    relevant_by_topic = qrels.relevant_by_topic()
    per_topic: dict[str, TopicMetrics] = {}
    excluded: dict[str, str] = {}
    for topic_id, entries in sorted(by_topic.items()):
        if topic_id not in qrels.topics():
            excluded[topic_id] = "topic absent from qrels"
            continue
        relevant = relevant_by_topic.get(topic_id, set())
        if not relevant:
            excluded[topic_id] = "no relevant documents"
            continue
        ranked = [e.doc_id for e in entries]
        per_topic[topic_id] = TopicMetrics(
            p_at={k: precision_at_k(ranked, relevant, k) for k in ks},
            ap=average_precision(ranked, relevant, cutoff),
            rprec=r_precision(ranked, relevant),
            num_rel=len(relevant),
        )

    means: dict[str, float] = {}
    if per_topic:
        values = list(per_topic.values())
        means["map"] = statistics.fmean(m.ap for m in values)
        means["rprec"] = statistics.fmean(m.rprec for m in values)
        for k in ks:
            means[metric_key("P", k)] = statistics.fmean(m.p_at[k] for m in values)
    return MetricReport(run_tag=tag, per_topic=per_topic, means=means, excluded_topics=excluded)


@dataclass(frozen=True)
class RankCorrelation:
    tau: float
    concordant: int
    discordant: int
    ties_x: int
    ties_y: int
    variant: str


def kendall_tau(x: Sequence[float], y: Sequence[float], variant: str = TAU_B) -> RankCorrelation:
    """Kendall's tau over paired score vectors.

    tau-a divides C - D by all pairs; tau-b applies the tie correction
    and is undefined when either vector is fully tied.
    """
    if variant not in (TAU_A, TAU_B):
        raise ValueError(f"unknown tau variant: {variant!r}")
    n = len(x)
    if n != len(y) or n < 2:
        raise ValueError("kendall_tau needs two equal-length vectors of size >= 2")
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            dy = y[i] - y[j]
            if dx == 0:
                ties_x += 1
            if dy == 0:
                ties_y += 1
            if dx == 0 or dy == 0:
                continue
            if (dx > 0) == (dy > 0):
                concordant += 1
            else:
                discordant += 1
    t0 = n * (n - 1) // 2
    if variant == TAU_A:
        tau = (concordant - discordant) / t0
    else:
        denom = math.sqrt((t0 - ties_x) * (t0 - ties_y))
        if denom == 0:
            raise ValueError("degenerate ranking")
        tau = (concordant - discordant) / denom
    return RankCorrelation(
        tau=tau,
        concordant=concordant,
        discordant=discordant,
        ties_x=ties_x,
        ties_y=ties_y,
        variant=variant,
    )


@dataclass(frozen=True)
class TauTable:
    collections: list[str]
    metric: str
    taus: dict[tuple[str, str], float]
    averages: dict[str, float]

    def cell(self, a: str, b: str) -> float | None:
        return None if a == b else self.taus[(a, b)]


def tau_table(
    scores: Mapping[str, Mapping[str, float]],
    metric: str,
    variant: str = TAU_B,
) -> TauTable:
    """Pairwise tau matrix across collections scoring one shared system set.

    ``scores`` maps collection name to {system tag: metric value}.
    """
    collections = sorted(scores)
    if not collections:
        raise ValueError("no collections given")
    tags = sorted(scores[collections[0]])
    for name in collections:
        missing = set(tags) ^ set(scores[name])
        if missing:
            raise ValueError(
                f"collection {name!r} system tags differ: {sorted(missing)}"
            )
    vectors = {name: [scores[name][t] for t in tags] for name in collections}
    taus: dict[tuple[str, str], float] = {}
    for i, a in enumerate(collections):
        for b in collections[i + 1:]:
            tau = kendall_tau(vectors[a], vectors[b], variant).tau
            taus[(a, b)] = tau
            taus[(b, a)] = tau
    averages = {
        a: statistics.fmean(taus[(a, b)] for b in collections if b != a)
        for a in collections
    } if len(collections) > 1 else {collections[0]: float("nan")}
    return TauTable(collections=collections, metric=metric, taus=taus, averages=averages)


@dataclass(frozen=True)
class DownsampleSpec:
    n: int
    repeats: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 0 or self.repeats < 1:
            raise ValueError("downsample needs n >= 0 and repeats >= 1")


@dataclass(frozen=True)
class AblationSpec:
    exclude_categories: frozenset[str] = frozenset()
    cap_relevant: int | None = None
    downsample: DownsampleSpec | None = None

    def __post_init__(self) -> None:
        if self.cap_relevant is not None and self.cap_relevant < 1:
            raise ValueError("cap_relevant must be positive")


def apply_ablation(corpus, qrels, spec: AblationSpec) -> list:
    """Category exclusion, relevant-doc capping, and corpus downsampling.

    Returns one (corpus, qrels) pair per downsample repeat; a single pair
    when no downsampling is requested. Exclusions run first, then the
    cap, then sampling, and qrels rows always follow the surviving docs.
    """
    from .forge import DocCategory, Qrels  # local import to avoid a cycle

    docs = list(corpus)
    if spec.exclude_categories:
        excluded = {DocCategory(c) for c in spec.exclude_categories}
        docs = [d for d in docs if d.category not in excluded]

    if spec.cap_relevant is not None:
        keep: set[str] = set()
        per_topic: dict[str, int] = {}
        relevant_categories = (DocCategory.INIT_RELEVANT, DocCategory.SUBTOPIC_RELEVANT)
        for doc in docs:  # corpus order is generation order
            if doc.category in relevant_categories:
                count = per_topic.get(doc.topic_id, 0)
                if count < spec.cap_relevant:
                    per_topic[doc.topic_id] = count + 1
                    keep.add(doc.doc_id)
            else:
                keep.add(doc.doc_id)
        docs = [d for d in docs if d.doc_id in keep]

    def restrict(surviving) -> Qrels:
        ids = {d.doc_id for d in surviving}
        return Qrels([e for e in qrels.entries if e.doc_id in ids])

    if spec.downsample is None:
        return [(docs, restrict(docs))]

    if spec.downsample.n > len(docs):
        raise ValueError(
            f"cannot sample {spec.downsample.n} docs from a corpus of {len(docs)}"
        )
    results = []
    ordered_ids = sorted(d.doc_id for d in docs)
    for repeat in range(spec.downsample.repeats):
        rng = random.Random(spec.downsample.seed + repeat)
        chosen = set(rng.sample(ordered_ids, spec.downsample.n))
        sample = [d for d in docs if d.doc_id in chosen]
        results.append((sample, restrict(sample)))
    return results


class AuditError(ValueError):
    pass


@dataclass(frozen=True)
class Annotation:
    topic_id: str
    doc_id: str
    label: int

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise AuditError(f"label must be 0 or 1, got {self.label}")


@dataclass(frozen=True)
class TopicAudit:
    relevance_rate: float | None
    nonrelevance_rate: float | None
    relevant_correct: int
    relevant_total: int
    tricky_correct: int
    tricky_total: int


@dataclass(frozen=True)
class AuditReport:
    """Human-check accuracy of the construction-time judgments.

    Macro rates average per-topic rates; pooled rates divide summed
    correct counts by summed totals (the convention behind the headline
    accuracy figures this mirrors).
    """

    per_topic: dict[str, TopicAudit]
    macro_relevance_rate: float | None
    macro_nonrelevance_rate: float | None
    pooled_relevance_rate: float | None
    pooled_nonrelevance_rate: float | None


def judgment_audit(corpus, annotations: Iterable[Annotation]) -> AuditReport:
    """Score human labels against the generated categories, per topic."""
    from .forge import DocCategory

    docs = {d.doc_id: d for d in corpus}
    stats: dict[str, dict[str, int]] = {}
    for ann in annotations:
        doc = docs.get(ann.doc_id)
        if doc is None:
            raise AuditError(f"annotation references unknown doc {ann.doc_id!r}")
        bucket = stats.setdefault(
            ann.topic_id,
            {"rel_correct": 0, "rel_total": 0, "tnr_correct": 0, "tnr_total": 0},
        )
        if doc.category in (DocCategory.INIT_RELEVANT, DocCategory.SUBTOPIC_RELEVANT):
            bucket["rel_total"] += 1
            bucket["rel_correct"] += ann.label
        elif doc.category is DocCategory.TRICKY_NONREL:
            bucket["tnr_total"] += 1
            bucket["tnr_correct"] += 1 - ann.label

    per_topic: dict[str, TopicAudit] = {}
    for topic_id, b in sorted(stats.items()):
        per_topic[topic_id] = TopicAudit(
            relevance_rate=b["rel_correct"] / b["rel_total"] if b["rel_total"] else None,
            nonrelevance_rate=b["tnr_correct"] / b["tnr_total"] if b["tnr_total"] else None,
            relevant_correct=b["rel_correct"],
            relevant_total=b["rel_total"],
            tricky_correct=b["tnr_correct"],
            tricky_total=b["tnr_total"],
        )

    rel_rates = [t.relevance_rate for t in per_topic.values() if t.relevance_rate is not None]
    tnr_rates = [t.nonrelevance_rate for t in per_topic.values() if t.nonrelevance_rate is not None]
    rel_total = sum(t.relevant_total for t in per_topic.values())
    tnr_total = sum(t.tricky_total for t in per_topic.values())
    return AuditReport(
        per_topic=per_topic,
        macro_relevance_rate=statistics.fmean(rel_rates) if rel_rates else None,
        macro_nonrelevance_rate=statistics.fmean(tnr_rates) if tnr_rates else None,
        pooled_relevance_rate=(
            sum(t.relevant_correct for t in per_topic.values()) / rel_total
            if rel_total else None
        ),
        pooled_nonrelevance_rate=(
            sum(t.tricky_correct for t in per_topic.values()) / tnr_total
            if tnr_total else None
        ),
    )


@dataclass(frozen=True)
class CollectionSummary:
    doc_count: int
    topic_count: int
    relevant_count: int
    relevant_ratio: float
    mean_relevant_per_topic: float
    std_relevant_per_topic: float
    max_relevant_per_topic: int


def collection_summary(doc_count: int, qrels) -> CollectionSummary:
    """Table-style collection arithmetic from a qrels set and a doc count."""
    if doc_count <= 0:
        raise ValueError("doc_count must be positive")
    relevant = qrels.relevant_by_topic()
    counts = [len(v) for v in relevant.values() if v]
    if not counts:
        raise ValueError("qrels contain no relevant documents")
    unique_relevant = len({d for docs in relevant.values() for d in docs})
    return CollectionSummary(
        doc_count=doc_count,
        topic_count=len(counts),
        relevant_count=sum(counts),
        relevant_ratio=unique_relevant / doc_count,
        mean_relevant_per_topic=statistics.fmean(counts),
        std_relevant_per_topic=statistics.pstdev(counts),
        max_relevant_per_topic=max(counts),
    )
