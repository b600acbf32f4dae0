"""Reference retrieval stack: inverted index, BM25, dense scoring, fusion.

Everything is deterministic, including ties, which always break by
ascending doc_id so identical inputs give byte-identical run files.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import requests

from .analysis import ENGLISH_STOPWORDS, Analyzer

VECTOR_STORE_MAGIC = b"VEC1"


class RunFormatError(ValueError):
    """A run file violated the TREC six-column contract."""


@dataclass(frozen=True)
class BM25Params:
    # Lucene-style defaults, matching common IR toolkit behavior
    k1: float = 0.9
    b: float = 0.4

    def __post_init__(self) -> None:
        if self.k1 < 0:
            raise ValueError("k1 must be >= 0")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError("b must lie in [0, 1]")


@dataclass(frozen=True)
class RunEntry:
    topic_id: str
    doc_id: str
    rank: int
    score: float
    tag: str


@dataclass
class Index:
    """Immutable inverted index; doc ordinals follow sorted doc_id order."""

    doc_ids: list[str]
    postings: dict[str, list[tuple[int, int]]]
    doc_lengths: list[int]
    analyzer: Analyzer

    @property
    def doc_count(self) -> int:
        return len(self.doc_ids)

    @property
    def avgdl(self) -> float:
        return sum(self.doc_lengths) / len(self.doc_lengths)

    def document_frequency(self, term: str) -> int:
        return len(self.postings.get(term, ()))


def build_index(docs: Iterable[tuple[str, str]], analyzer: Analyzer | None = None) -> Index:
    """Index (doc_id, text) pairs; input order never affects the result."""
    analyzer = analyzer or Analyzer()
    pairs = list(docs)
    by_id = dict(pairs)
    if not by_id:
        raise ValueError("empty corpus")
    if len(by_id) != len(pairs):
        raise ValueError("duplicate doc_id in corpus")
    doc_ids = sorted(by_id)
    postings: dict[str, list[tuple[int, int]]] = {}
    doc_lengths: list[int] = []
    for ordinal, doc_id in enumerate(doc_ids):
        terms = analyzer.analyze(by_id[doc_id])
        doc_lengths.append(len(terms))
        counts: dict[str, int] = {}
        for term in terms:
            counts[term] = counts.get(term, 0) + 1
        for term in counts:
            postings.setdefault(term, []).append((ordinal, counts[term]))
    return Index(doc_ids=doc_ids, postings=postings, doc_lengths=doc_lengths, analyzer=analyzer)


def save_index(index: Index, path: str | Path) -> None:
    """Persist an index as deterministic JSON."""
    payload = {
        "analyzer": {
            "lowercase": index.analyzer.lowercase,
            "stopwords": "english" if index.analyzer.stopword_list else "none",
            "stemmer": index.analyzer.stemmer,
        },
        "doc_ids": index.doc_ids,
        "doc_lengths": index.doc_lengths,
        "postings": {term: plist for term, plist in sorted(index.postings.items())},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, separators=(",", ":"))


def load_index(path: str | Path) -> Index:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    cfg = payload["analyzer"]
    analyzer = Analyzer(
        lowercase=cfg["lowercase"],
        stopword_list=ENGLISH_STOPWORDS if cfg["stopwords"] == "english" else frozenset(),
        stemmer=cfg["stemmer"],
    )
    return Index(
        doc_ids=payload["doc_ids"],
        postings={t: [tuple(p) for p in plist] for t, plist in payload["postings"].items()},
        doc_lengths=payload["doc_lengths"],
        analyzer=analyzer,
    )


def _top_k(scores: dict[str, float], k: int) -> list[tuple[str, float]]:
    return sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))[:k]


def _to_entries(scored: list[tuple[str, float]], topic_id: str, tag: str) -> list[RunEntry]:
    return [
        RunEntry(topic_id=topic_id, doc_id=doc_id, rank=rank, score=score, tag=tag)
        for rank, (doc_id, score) in enumerate(scored, 1)
    ]


def bm25_search(
    index: Index,
    query: str,
    params: BM25Params | None = None,
    k: int = 1000,
    *,
    topic_id: str = "0",
    tag: str = "bm25",
) -> list[RunEntry]:
    """Top-k BM25 scoring with the non-negative ln(1 + ...) IDF."""
    params = params or BM25Params()
    if index.doc_count == 0:
        raise ValueError("empty index")
    n = index.doc_count
    avgdl = index.avgdl
    scores: dict[int, float] = {}
    for term in sorted(set(index.analyzer.analyze(query))):
        plist = index.postings.get(term)
        if not plist:
            continue
        df = len(plist)
        idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
        for ordinal, tf in plist:
            norm = params.k1 * (1.0 - params.b + params.b * index.doc_lengths[ordinal] / avgdl)
            scores[ordinal] = scores.get(ordinal, 0.0) + idf * tf * (params.k1 + 1.0) / (tf + norm)
    by_doc = {index.doc_ids[o]: s for o, s in scores.items() if s > 0.0}
    return _to_entries(_top_k(by_doc, k), topic_id, tag)


class VectorStore:
    """Dense vectors for a corpus, persistable as a small binary file.

    Layout: magic "VEC1", u32 dim, u32 count (little-endian), then
    float32 row-major vectors; doc_ids live in a ``.ids`` text sidecar.
    """

    def __init__(self, doc_ids: Sequence[str], vectors: np.ndarray) -> None:
        vectors = np.asarray(vectors, dtype=np.float32)
        if vectors.ndim != 2:
            raise ValueError("vectors must be a 2D array")
        if len(doc_ids) != vectors.shape[0]:
            raise ValueError("doc_ids and vectors disagree on count")
        self.doc_ids = list(doc_ids)
        self.vectors = vectors

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __len__(self) -> int:
        return len(self.doc_ids)

    def save(self, path: str | Path) -> None:
        path = Path(path)
        with open(path, "wb") as fh:
            fh.write(VECTOR_STORE_MAGIC)
            fh.write(struct.pack("<II", self.dim, len(self.doc_ids)))
            fh.write(self.vectors.astype("<f4").tobytes(order="C"))
        with open(path.with_suffix(path.suffix + ".ids"), "w", encoding="utf-8") as fh:
            fh.writelines(doc_id + "\n" for doc_id in self.doc_ids)

    @classmethod
    def load(cls, path: str | Path) -> "VectorStore":
        path = Path(path)
        with open(path, "rb") as fh:
            magic = fh.read(4)
            if magic != VECTOR_STORE_MAGIC:
                raise ValueError(f"not a vector store: bad magic {magic!r}")
            dim, count = struct.unpack("<II", fh.read(8))
            data = fh.read(dim * count * 4)
        vectors = np.frombuffer(data, dtype="<f4").reshape(count, dim).copy()
        ids_path = path.with_suffix(path.suffix + ".ids")
        doc_ids = ids_path.read_text(encoding="utf-8").splitlines()
        if len(doc_ids) != count:
            raise ValueError("doc_id sidecar does not match vector count")
        return cls(doc_ids, vectors)


def dense_search(
    store: VectorStore,
    query_embedding: Sequence[float],
    k: int = 1000,
    *,
    topic_id: str = "0",
    tag: str = "dense",
) -> list[RunEntry]:
    """Exact inner-product scoring over every stored vector."""
    query = np.asarray(query_embedding, dtype=np.float32)
    if query.ndim != 1 or query.shape[0] != store.dim:
        raise ValueError(
            f"dimensionality mismatch: query has {query.shape[-1]}, store has {store.dim}"
        )
    scores = store.vectors @ query
    by_doc = {doc_id: float(s) for doc_id, s in zip(store.doc_ids, scores)}
    return _to_entries(_top_k(by_doc, k), topic_id, tag)


class MockEmbedder:
    """Hash-seeded unit vectors; offline stand-in for an embedding service."""

    def __init__(self, dim: int = 16) -> None:
        self.dim = dim

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        out = []
        for text in texts:
            digest = hashlib.sha256(text.encode("utf-8")).digest()
            rng = random.Random(int.from_bytes(digest[:8], "big"))
            vec = np.array([rng.gauss(0.0, 1.0) for _ in range(self.dim)], dtype=np.float32)
            norm = float(np.linalg.norm(vec))
            out.append((vec / norm if norm else vec).tolist())
        return out


class HttpEmbedder:
    """POST {"texts": [...]} -> {"vectors": [[...]]}."""

    def __init__(self, endpoint: str, timeout: float = 120.0,
                 session: requests.Session | None = None) -> None:
        self.endpoint = endpoint
        self.timeout = timeout
        self._http = session or requests.Session()

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        response = self._http.post(self.endpoint, json={"texts": list(texts)}, timeout=self.timeout)
        if response.status_code != 200:
            raise RuntimeError(f"embedding endpoint HTTP {response.status_code}: {response.text[:200]}")
        vectors = response.json()["vectors"]
        if len(vectors) != len(texts):
            raise RuntimeError("embedding endpoint returned wrong vector count")
        return vectors


def embed_corpus(docs: Iterable[tuple[str, str]], embedder, batch_size: int = 32) -> VectorStore:
    """One vector per document, in input order, batched through the client."""
    doc_ids: list[str] = []
    rows: list[list[float]] = []
    batch_ids: list[str] = []
    batch_texts: list[str] = []

    def flush() -> None:
        if batch_texts:
            rows.extend(embedder.embed(batch_texts))
            doc_ids.extend(batch_ids)
            batch_ids.clear()
            batch_texts.clear()

    for doc_id, text in docs:
        batch_ids.append(doc_id)
        batch_texts.append(text)
        if len(batch_texts) >= batch_size:
            flush()
    flush()
    dim = len(rows[0]) if rows else getattr(embedder, "dim", 0)
    vectors = np.array(rows, dtype=np.float32).reshape(len(rows), dim)
    return VectorStore(doc_ids, vectors)


def _normalize(entries: list[RunEntry]) -> dict[str, float]:
    scores = [e.score for e in entries]
    low, high = min(scores), max(scores)
    if high == low:
        return {e.doc_id: 0.5 for e in entries}
    return {e.doc_id: (e.score - low) / (high - low) for e in entries}


def fuse(
    run_a: Sequence[RunEntry],
    run_b: Sequence[RunEntry],
    alpha: float = 0.5,
    k: int = 1000,
    tag: str = "hybrid",
) -> list[RunEntry]:
    """Per-topic min-max normalization, then a convex score blend.

    A document missing from one run contributes 0 from it, and a run
    given zero weight contributes no candidates at all, so alpha of 0 or
    1 reproduces the other run exactly.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    a_topics: dict[str, list[RunEntry]] = {}
    b_topics: dict[str, list[RunEntry]] = {}
    for e in run_a:
        a_topics.setdefault(e.topic_id, []).append(e)
    for e in run_b:
        b_topics.setdefault(e.topic_id, []).append(e)
    if set(a_topics) != set(b_topics):
        raise ValueError(
            f"runs cover different topics: {sorted(set(a_topics) ^ set(b_topics))}"
        )
    fused: list[RunEntry] = []
    for topic_id in sorted(a_topics):
        norm_a = _normalize(a_topics[topic_id])
        norm_b = _normalize(b_topics[topic_id])
        candidates: set[str] = set()
        if alpha > 0.0:
            candidates |= set(norm_a)
        if alpha < 1.0:
            candidates |= set(norm_b)
        blended = {
            doc_id: alpha * norm_a.get(doc_id, 0.0) + (1.0 - alpha) * norm_b.get(doc_id, 0.0)
            for doc_id in candidates
        }
        fused.extend(_to_entries(_top_k(blended, k), topic_id, tag))
    return fused


class MockReranker:
    """Scores (query, passage) pairs with a seeded hash; fully offline."""

    def score(self, query: str, passages: Sequence[str]) -> list[float]:
        out = []
        for passage in passages:
            digest = hashlib.sha256(f"{query}\x00{passage}".encode("utf-8")).digest()
            out.append(int.from_bytes(digest[:8], "big") / 2**64)
        return out


class HttpReranker:
    """POST {"query": ..., "passages": [...]} -> {"scores": [...]}."""

    def __init__(self, endpoint: str, timeout: float = 120.0,
                 session: requests.Session | None = None) -> None:
        self.endpoint = endpoint
        self.timeout = timeout
        self._http = session or requests.Session()

    def score(self, query: str, passages: Sequence[str]) -> list[float]:
        response = self._http.post(
            self.endpoint,
            json={"query": query, "passages": list(passages)},
            timeout=self.timeout,
        )
        if response.status_code != 200:
            raise RuntimeError(f"rerank endpoint HTTP {response.status_code}: {response.text[:200]}")
        return response.json()["scores"]


def rerank(
    run: Sequence[RunEntry],
    corpus_texts: Mapping[str, str],
    queries: Mapping[str, str],
    client,
    depth: int = 100,
    tag: str | None = None,
) -> list[RunEntry]:
    """Rescore the top ``depth`` entries per topic with a scoring service.

    Entries below the cut keep their relative order and are shifted to
    scores strictly below the reranked block's minimum.
    """
    by_topic: dict[str, list[RunEntry]] = {}
    for e in sorted(run, key=lambda e: (e.topic_id, e.rank)):
        by_topic.setdefault(e.topic_id, []).append(e)
    out: list[RunEntry] = []
    for topic_id in sorted(by_topic):
        entries = by_topic[topic_id]
        head, tail = entries[:depth], entries[depth:]
        passages = [corpus_texts[e.doc_id] for e in head]
        scores = client.score(queries[topic_id], passages)
        if len(scores) != len(head):
            raise RuntimeError(
                f"rerank service returned {len(scores)} scores for {len(head)} passages"
            )
        new_tag = tag or (entries[0].tag + "+rerank")
        rescored = sorted(
            zip(head, scores), key=lambda pair: (-pair[1], pair[0].doc_id)
        )
        reranked = [
            RunEntry(topic_id=topic_id, doc_id=e.doc_id, rank=rank, score=float(s), tag=new_tag)
            for rank, (e, s) in enumerate(rescored, 1)
        ]
        floor = min((e.score for e in reranked), default=0.0)
        for offset, e in enumerate(tail, 1):
            reranked.append(
                RunEntry(
                    topic_id=topic_id,
                    doc_id=e.doc_id,
                    rank=len(head) + offset,
                    score=floor - offset,
                    tag=new_tag,
                )
            )
        out.extend(reranked)
    return out


def format_run(entries: Sequence[RunEntry]) -> str:
    return "".join(
        f"{e.topic_id} Q0 {e.doc_id} {e.rank} {e.score:.6f} {e.tag}\n" for e in entries
    )


def write_run(entries: Sequence[RunEntry], path: str | Path) -> None:
    Path(path).write_text(format_run(entries), encoding="utf-8")


def read_run(path: str | Path) -> list[RunEntry]:
    """Parse and validate a six-column TREC run file."""
    entries: list[RunEntry] = []
    expected_rank: dict[str, int] = {}
    seen: set[tuple[str, str]] = set()
    last_score: dict[str, float] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 6:
            raise RunFormatError(f"line {lineno}: expected 6 columns, got {len(parts)}")
        topic_id, _, doc_id, rank_s, score_s, tag = parts
        rank, score = int(rank_s), float(score_s)
        want = expected_rank.get(topic_id, 0) + 1
        if rank != want:
            raise RunFormatError(f"line {lineno}: rank {rank} for topic {topic_id}, expected {want}")
        if (topic_id, doc_id) in seen:
            raise RunFormatError(f"line {lineno}: duplicate ({topic_id}, {doc_id})")
        if topic_id in last_score and score > last_score[topic_id]:
            raise RunFormatError(f"line {lineno}: score increases with rank for topic {topic_id}")
        expected_rank[topic_id] = rank
        last_score[topic_id] = score
        seen.add((topic_id, doc_id))
        entries.append(RunEntry(topic_id=topic_id, doc_id=doc_id, rank=rank, score=score, tag=tag))
    return entries
