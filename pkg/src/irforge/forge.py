"""Collection forging: orchestrates generation, qrels assembly, and export.

Every completed unit of work (one provider call's worth) is journaled
with its payload and token usage, so an interrupted run resumes without
regenerating anything and the assembled outputs are byte-identical to an
uninterrupted run.
"""

from __future__ import annotations

import json
import re
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .genclient import (
    GenRequest,
    ListParseError,
    PromptKind,
    UsageLedger,
    generate,
    parse_numbered_list,
    render_prompt,
)
from .topics import MaskedTopic, MaskError, Topic, mask_description

# timestamp used instead of wall-clock time when the provider is
# deterministic, so forged corpora are reproducible byte for byte
EPOCH_TIMESTAMP = "1970-01-01T00:00:00+00:00"


class ForgeError(RuntimeError):
    pass


class JournalError(ValueError):
    pass


class DocCategory(str, Enum):
    INIT_RELEVANT = "INIT_RELEVANT"
    SUBTOPIC_RELEVANT = "SUBTOPIC_RELEVANT"
    TRICKY_NONREL = "TRICKY_NONREL"
    RANDOM = "RANDOM"

    @property
    def code(self) -> str:
        return {"INIT_RELEVANT": "I", "SUBTOPIC_RELEVANT": "S",
                "TRICKY_NONREL": "T", "RANDOM": "R"}[self.value]


RELEVANT_CATEGORIES = (DocCategory.INIT_RELEVANT, DocCategory.SUBTOPIC_RELEVANT)


@dataclass(frozen=True)
class Provenance:
    model_id: str
    prompt_tokens: int
    completion_tokens: int
    prompt_kind: str
    created_at: str
    usage_estimated: bool = False


@dataclass(frozen=True)
class GeneratedDoc:
    doc_id: str
    category: DocCategory
    body: str
    provenance: Provenance
    topic_id: str | None = None
    subtopic: str | None = None
    variant_text: str | None = None
    title: str | None = None

    def __post_init__(self) -> None:
        if not self.body:
            raise ValueError(f"{self.doc_id}: body must be non-empty")
        if (self.category is DocCategory.RANDOM) != (self.topic_id is None):
            raise ValueError(f"{self.doc_id}: topic_id must be absent iff category is RANDOM")
        if self.category is DocCategory.TRICKY_NONREL and self.variant_text is None:
            raise ValueError(f"{self.doc_id}: tricky docs need variant_text")
        if self.category is DocCategory.SUBTOPIC_RELEVANT and self.subtopic is None:
            raise ValueError(f"{self.doc_id}: subtopic docs need subtopic")

    @property
    def full_text(self) -> str:
        return f"{self.title}\n\n{self.body}" if self.title else self.body

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "category": self.category.value,
            "topic_id": self.topic_id,
            "subtopic": self.subtopic,
            "variant_text": self.variant_text,
            "title": self.title,
            "body": self.body,
            "provenance": {
                "model_id": self.provenance.model_id,
                "prompt_tokens": self.provenance.prompt_tokens,
                "completion_tokens": self.provenance.completion_tokens,
                "prompt_kind": self.provenance.prompt_kind,
                "created_at": self.provenance.created_at,
                "usage_estimated": self.provenance.usage_estimated,
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratedDoc":
        prov = data["provenance"]
        return cls(
            doc_id=data["doc_id"],
            category=DocCategory(data["category"]),
            topic_id=data.get("topic_id"),
            subtopic=data.get("subtopic"),
            variant_text=data.get("variant_text"),
            title=data.get("title"),
            body=data["body"],
            provenance=Provenance(
                model_id=prov["model_id"],
                prompt_tokens=prov["prompt_tokens"],
                completion_tokens=prov["completion_tokens"],
                prompt_kind=prov["prompt_kind"],
                created_at=prov["created_at"],
                usage_estimated=prov.get("usage_estimated", False),
            ),
        )


@dataclass(frozen=True)
class ForgeConfig:
    subtopics_requested: int = 100
    docs_per_subtopic: int = 1
    variants_per_topic: int = 10
    docs_per_variant: int = 5
    random_docs_total: int = 0
    document_type: str = "long text"
    seed: str = ""
    max_output_tokens: int = 1024
    temperature: float = 1.0
    concurrency: int = 4
    mask_terms: int = 1

    def __post_init__(self) -> None:
        counts = (
            self.subtopics_requested, self.docs_per_subtopic,
            self.variants_per_topic, self.docs_per_variant,
            self.random_docs_total,
        )
        if min(counts) < 0:
            raise ValueError("all forge counts must be >= 0")
        if self.concurrency < 1 or self.mask_terms < 1:
            raise ValueError("concurrency and mask_terms must be >= 1")


@dataclass(frozen=True)
class QrelsEntry:
    topic_id: str
    doc_id: str
    relevance: int
    iteration: str = "0"

    def __post_init__(self) -> None:
        if self.relevance not in (0, 1):
            raise ValueError("relevance must be 0 or 1")


class Qrels:
    """Binary judgments; at most one entry per (topic, doc) pair."""

    def __init__(self, entries: Iterable[QrelsEntry]) -> None:
        self.entries = list(entries)
        seen: set[tuple[str, str]] = set()
        for e in self.entries:
            key = (e.topic_id, e.doc_id)
            if key in seen:
                raise ValueError(f"duplicate qrels entry for {key}")
            seen.add(key)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Qrels):
            return NotImplemented
        return self.entries == other.entries

    def __len__(self) -> int:
        return len(self.entries)

    def topics(self) -> set[str]:
        return {e.topic_id for e in self.entries}

    def relevant_by_topic(self) -> dict[str, set[str]]:
        out: dict[str, set[str]] = {}
        for e in self.entries:
            out.setdefault(e.topic_id, set())
            if e.relevance == 1:
                out[e.topic_id].add(e.doc_id)
        return out

    def format(self) -> str:
        return "".join(
            f"{e.topic_id} {e.iteration} {e.doc_id} {e.relevance}\n" for e in self.entries
        )

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.format(), encoding="utf-8")

    @classmethod
    def read(cls, path: str | Path) -> "Qrels":
        entries = []
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ValueError(f"qrels line {lineno}: expected 4 columns, got {len(parts)}")
            topic_id, iteration, doc_id, rel = parts
            entries.append(
                QrelsEntry(topic_id=topic_id, iteration=iteration, doc_id=doc_id,
                           relevance=int(rel))
            )
        return cls(entries)


def assemble_qrels(corpus: Sequence[GeneratedDoc]) -> Qrels:
    """Judgments by construction: positive for a doc's own topic, explicit
    zero for tricky docs, nothing for random docs."""
    seen: set[str] = set()
    entries: list[QrelsEntry] = []
    for doc in corpus:
        if doc.doc_id in seen:
            raise ValueError(f"duplicate doc_id {doc.doc_id!r} in corpus")
        seen.add(doc.doc_id)
        if doc.category in RELEVANT_CATEGORIES:
            entries.append(QrelsEntry(topic_id=doc.topic_id, doc_id=doc.doc_id, relevance=1))
        elif doc.category is DocCategory.TRICKY_NONREL:
            entries.append(QrelsEntry(topic_id=doc.topic_id, doc_id=doc.doc_id, relevance=0))
    return Qrels(entries)


class Journal:
    """Append-only log of completed pipeline units, replayable on resume."""

    def __init__(self, path: str | Path | None = None) -> None:
        self.path = Path(path) if path is not None else None
        self.records: dict[str, dict] = {}
        self._lock = threading.Lock()
        self._fh = None
        if self.path is not None and self.path.exists():
            self._load()
        if self.path is not None:
            self._fh = open(self.path, "a", encoding="utf-8")

    def _load(self) -> None:
        with open(self.path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                    unit = record["unit"]
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise JournalError(f"journal line {lineno}: {exc}") from exc
                self.records[unit] = record

    def get(self, unit: str) -> dict | None:
        with self._lock:
            return self.records.get(unit)

    def append(self, unit: str, payload: dict) -> dict:
        record = {"unit": unit, **payload}
        with self._lock:
            self.records[unit] = record
            if self._fh is not None:
                self._fh.write(json.dumps(record) + "\n")
                self._fh.flush()
        return record

    def get_or_run(self, unit: str, runner: Callable[[], dict]) -> dict:
        cached = self.get(unit)
        if cached is not None:
            return cached
        return self.append(unit, runner())

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self) -> "Journal":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def ledger_from_journal(journal: Journal) -> UsageLedger:
    """Rebuild the usage ledger from journaled units, replay-order free."""
    ledger = UsageLedger()
    for unit in sorted(journal.records):
        usage = journal.records[unit].get("usage")
        if usage:
            ledger.add(usage["category"], usage["prompt_tokens"], usage["completion_tokens"])
    return ledger


def _split_title(text: str) -> tuple[str | None, str]:
    lines = text.strip().splitlines()
    if lines and lines[0].startswith("Title:"):
        title = lines[0][len("Title:"):].strip()
        body = "\n".join(lines[1:]).strip()
        if title and body:
            return title, body
    return None, text.strip()


class _Forger:
    """Shared machinery for the per-category forge operations."""

    def __init__(self, cfg: ForgeConfig, provider, journal: Journal) -> None:
        self.cfg = cfg
        self.provider = provider
        self.journal = journal

    def _created_at(self) -> str:
        if getattr(self.provider, "deterministic", False):
            return EPOCH_TIMESTAMP
        return datetime.now(timezone.utc).isoformat()

    def _call(self, unit: str, prompt: str, kind: PromptKind, category: str) -> dict:
        def runner() -> dict:
            response = generate(
                self.provider,
                GenRequest(
                    prompt=prompt,
                    max_output_tokens=self.cfg.max_output_tokens,
                    temperature=self.cfg.temperature,
                ),
            )
            return {
                "text": response.text,
                "usage": {
                    "category": category,
                    "prompt_tokens": response.prompt_tokens,
                    "completion_tokens": response.completion_tokens,
                },
                "model_id": response.model_id,
                "usage_estimated": response.usage_estimated,
                "prompt_kind": kind.value,
                "created_at": self._created_at(),
            }

        return self.journal.get_or_run(unit, runner)

    def _doc_from_record(
        self,
        record: dict,
        doc_id: str,
        category: DocCategory,
        topic_id: str | None,
        subtopic: str | None = None,
        variant_text: str | None = None,
    ) -> GeneratedDoc:
        title, body = _split_title(record["text"])
        return GeneratedDoc(
            doc_id=doc_id,
            category=category,
            topic_id=topic_id,
            subtopic=subtopic,
            variant_text=variant_text,
            title=title,
            body=body,
            provenance=Provenance(
                model_id=record["model_id"],
                prompt_tokens=record["usage"]["prompt_tokens"],
                completion_tokens=record["usage"]["completion_tokens"],
                prompt_kind=record["prompt_kind"],
                created_at=record["created_at"],
                usage_estimated=record.get("usage_estimated", False),
            ),
        )

    def _list_items(self, unit: str, prompt: str, kind: PromptKind,
                    category: str, expected: int) -> list[str]:
        record = self._call(unit, prompt, kind, category)
        parsed = parse_numbered_list(record["text"], expected)
        return parsed.items[:expected]

    def subtopics_prompt(self, description: str, count: int) -> str:
        question = render_prompt(PromptKind.SUBTOPICS, {"count": str(count)})
        return f"{description} {question}"


def forge_topic(topic: Topic, cfg: ForgeConfig, provider,
                journal: Journal | None = None) -> list[GeneratedDoc]:
    """All relevant documents for one topic: one seed doc, then one per
    generated subtopic."""
    forger = _Forger(cfg, provider, journal or Journal())
    return _forge_relevant(forger, topic.id, topic.description)


def _forge_relevant(forger: _Forger, topic_id: str, description: str) -> list[GeneratedDoc]:
    cfg = forger.cfg
    docs: list[GeneratedDoc] = []
    init_prompt = render_prompt(
        PromptKind.INIT,
        {"description": description, "document_type": cfg.document_type},
    )
    record = forger._call(f"{topic_id}|INIT|1", init_prompt, PromptKind.INIT, "init_doc")
    docs.append(
        forger._doc_from_record(record, f"G-{topic_id}-I-1", DocCategory.INIT_RELEVANT, topic_id)
    )
    if cfg.subtopics_requested == 0 or cfg.docs_per_subtopic == 0:
        return docs
    subtopics = forger._list_items(
        f"{topic_id}|SUBTOPICS|1",
        forger.subtopics_prompt(description, cfg.subtopics_requested),
        PromptKind.SUBTOPICS,
        "subtopics",
        cfg.subtopics_requested,
    )
    ordinal = 0
    for subtopic in subtopics:
        for _ in range(cfg.docs_per_subtopic):
            ordinal += 1
            prompt = render_prompt(
                PromptKind.DOC_FROM_SUBTOPIC,
                {"subtopic": subtopic, "description": description},
            )
            record = forger._call(
                f"{topic_id}|SDOC|{ordinal}", prompt, PromptKind.DOC_FROM_SUBTOPIC, "subtopic_doc"
            )
            docs.append(
                forger._doc_from_record(
                    record,
                    f"G-{topic_id}-S-{ordinal}",
                    DocCategory.SUBTOPIC_RELEVANT,
                    topic_id,
                    subtopic=subtopic,
                )
            )
    return docs


def forge_tricky(topic: Topic, masked: MaskedTopic, cfg: ForgeConfig, provider,
                 journal: Journal | None = None) -> list[GeneratedDoc]:
    """Tricky non-relevant documents from mask-filled topic variants.

    Each variant is treated like a topic description of its own: a seed
    document plus subtopic documents, capped at docs_per_variant.
    """
    if masked.source_topic_id != topic.id:
        raise ValueError("masked topic does not belong to this topic")
    forger = _Forger(cfg, provider, journal or Journal())
    cfg = forger.cfg
    if cfg.variants_per_topic == 0 or cfg.docs_per_variant == 0:
        return []
    altered_prompt = render_prompt(
        PromptKind.ALTERED_TOPICS,
        {
            "count": str(cfg.variants_per_topic),
            "masked": masked.masked_text,
            "example": topic.description,
        },
    )
    variants = forger._list_items(
        f"{topic.id}|ALTERED|1", altered_prompt, PromptKind.ALTERED_TOPICS,
        "altered_topics", cfg.variants_per_topic,
    )
    docs: list[GeneratedDoc] = []
    ordinal = 0
    for v_index, variant in enumerate(variants, 1):
        init_prompt = render_prompt(
            PromptKind.INIT,
            {"description": variant, "document_type": cfg.document_type},
        )
        record = forger._call(
            f"{topic.id}|TINIT|{v_index}", init_prompt, PromptKind.INIT, "tricky_doc"
        )
        ordinal += 1
        docs.append(
            forger._doc_from_record(
                record, f"G-{topic.id}-T-{ordinal}", DocCategory.TRICKY_NONREL,
                topic.id, variant_text=variant,
            )
        )
        remaining = cfg.docs_per_variant - 1
        if remaining <= 0:
            continue
        subtopics = forger._list_items(
            f"{topic.id}|TSUB|{v_index}",
            forger.subtopics_prompt(variant, remaining),
            PromptKind.SUBTOPICS,
            "tricky_subtopics",
            remaining,
        )
        for subtopic in subtopics:
            ordinal += 1
            prompt = render_prompt(
                PromptKind.DOC_FROM_SUBTOPIC,
                {"subtopic": subtopic, "description": variant},
            )
            record = forger._call(
                f"{topic.id}|TDOC|{ordinal}", prompt, PromptKind.DOC_FROM_SUBTOPIC, "tricky_doc"
            )
            docs.append(
                forger._doc_from_record(
                    record, f"G-{topic.id}-T-{ordinal}", DocCategory.TRICKY_NONREL,
                    topic.id, subtopic=subtopic, variant_text=variant,
                )
            )
    return docs


def forge_random(count: int, cfg: ForgeConfig, provider,
                 journal: Journal | None = None) -> list[GeneratedDoc]:
    """Documents on no particular topic; non-relevant everywhere."""
    forger = _Forger(cfg, provider, journal or Journal())
    base_prompt = render_prompt(PromptKind.RANDOM_DOC, {"document_type": cfg.document_type})
    docs: list[GeneratedDoc] = []
    for ordinal in range(1, count + 1):
        prompt = base_prompt
        if getattr(provider, "deterministic", False):
            # identical prompts would collapse to identical mock outputs
            prompt = f"{base_prompt} ({ordinal})"
        record = forger._call(f"R|RDOC|{ordinal}", prompt, PromptKind.RANDOM_DOC, "random_doc")
        docs.append(
            forger._doc_from_record(record, f"G-R-R-{ordinal}", DocCategory.RANDOM, None)
        )
    return docs


@dataclass
class ForgeResult:
    corpus: list[GeneratedDoc]
    qrels: Qrels
    ledger: UsageLedger
    failed_topics: dict[str, str] = field(default_factory=dict)
    skipped_tricky: dict[str, str] = field(default_factory=dict)


def run_pipeline(
    topics: Sequence[Topic],
    cfg: ForgeConfig,
    provider,
    journal: Journal | None = None,
) -> ForgeResult:
    """Forge the whole collection: relevant and tricky docs per topic,
    then random filler docs, with topic-level parallelism."""
    journal = journal or Journal()
    lock = threading.Lock()
    results: dict[str, tuple[list[GeneratedDoc], list[GeneratedDoc]]] = {}
    failed: dict[str, str] = {}
    skipped_tricky: dict[str, str] = {}

    def work(topic: Topic) -> None:
        failure = journal.get(f"{topic.id}|FAILED|1")
        if failure is not None:
            with lock:
                failed[topic.id] = failure.get("reason", "failed")
            return
        try:
            relevant = forge_topic(topic, cfg, provider, journal)
            tricky: list[GeneratedDoc] = []
            try:
                masked = mask_description(topic)
                tricky = forge_tricky(topic, masked, cfg, provider, journal)
            except MaskError as exc:
                journal.append(f"{topic.id}|TNRSKIP|1", {"reason": str(exc)})
                with lock:
                    skipped_tricky[topic.id] = str(exc)
            with lock:
                results[topic.id] = (relevant, tricky)
        except (ListParseError, ValueError) as exc:
            journal.append(f"{topic.id}|FAILED|1", {"reason": str(exc)})
            with lock:
                failed[topic.id] = str(exc)

    with ThreadPoolExecutor(max_workers=cfg.concurrency) as pool:
        list(pool.map(work, topics))

    for unit, record in journal.records.items():
        if unit.endswith("|TNRSKIP|1"):
            skipped_tricky.setdefault(unit.split("|", 1)[0], record.get("reason", ""))

    corpus: list[GeneratedDoc] = []
    for topic in topics:
        if topic.id in results:
            relevant, tricky = results[topic.id]
            corpus.extend(relevant)
            corpus.extend(tricky)
    corpus.extend(forge_random(cfg.random_docs_total, cfg, provider, journal))

    return ForgeResult(
        corpus=corpus,
        qrels=assemble_qrels(corpus),
        ledger=ledger_from_journal(journal),
        failed_topics=failed,
        skipped_tricky=skipped_tricky,
    )


def write_corpus(corpus: Sequence[GeneratedDoc], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in corpus:
            fh.write(json.dumps(doc.to_dict()) + "\n")


def read_corpus(path: str | Path) -> list[GeneratedDoc]:
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                docs.append(GeneratedDoc.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValueError(f"corpus line {lineno}: {exc}") from exc
    return docs


@dataclass(frozen=True)
class TrecDoc:
    doc_id: str
    body: str
    title: str | None = None

    @property
    def full_text(self) -> str:
        return f"{self.title}\n\n{self.body}" if self.title else self.body


def export_trec(corpus: Sequence[GeneratedDoc | TrecDoc]) -> str:
    """Classic <DOC>/<DOCNO>/<TEXT> blocks for interop with TREC tooling."""
    blocks = []
    for doc in corpus:
        text = f"{doc.title}\n\n{doc.body}" if doc.title else doc.body
        blocks.append(f"<DOC>\n<DOCNO>{doc.doc_id}</DOCNO>\n<TEXT>{text}</TEXT>\n</DOC>")
    return "\n".join(blocks) + ("\n" if blocks else "")


_DOC_RE = re.compile(r"<DOC>(.*?)</DOC>", re.DOTALL)
_DOCNO_RE = re.compile(r"<DOCNO>(.*?)</DOCNO>", re.DOTALL)
_TEXT_RE = re.compile(r"<TEXT>(.*?)</TEXT>", re.DOTALL)


def parse_trec_docs(text: str) -> list[TrecDoc]:
    """Read <DOC> blocks back; a single first line before a blank line is
    taken as the title."""
    docs = []
    for block in _DOC_RE.finditer(text):
        docno = _DOCNO_RE.search(block.group(1))
        body_m = _TEXT_RE.search(block.group(1))
        if docno is None or body_m is None:
            raise ValueError("malformed TREC doc block: missing DOCNO or TEXT")
        raw = body_m.group(1)
        title: str | None = None
        body = raw
        if "\n\n" in raw:
            head, rest = raw.split("\n\n", 1)
            if head and "\n" not in head:
                title, body = head, rest
        docs.append(TrecDoc(doc_id=docno.group(1).strip(), title=title, body=body))
    return docs
