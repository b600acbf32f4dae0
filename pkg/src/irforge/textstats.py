"""Corpus analytics: structure statistics, lexical diversity, readability.

Lexical diversity follows the standard constants from the defining
literature: Maas uses log base 10, HDD draws samples of 42 tokens, MTLD
uses the 0.72 type-token threshold with forward and backward passes
averaged.
"""

from __future__ import annotations

import math
import re
import statistics
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .analysis import PorterStemmer, tokenize
from .wordlists import ABBREVIATIONS

HDD_SAMPLE_SIZE = 42
MTLD_THRESHOLD = 0.72
MTLD_MIN_TOKENS = 50

_BOUNDARY_RE = re.compile(r"[.!?]+")
_VOWEL_GROUP_RE = re.compile(r"[aeiouy]+")


def split_sentences(text: str) -> list[str]:
    """Split at ., ! or ? followed by whitespace and an uppercase/digit.

    A bundled abbreviation list ("Dr.", "U.S.", ...) suppresses splits;
    a trailing fragment without a terminator still counts as a sentence.
    """
    sentences: list[str] = []
    start = 0
    for m in _BOUNDARY_RE.finditer(text):
        end = m.end()
        if end >= len(text) or not text[end].isspace():
            continue
        j = end
        while j < len(text) and text[j].isspace():
            j += 1
        if j >= len(text):
            continue
        nxt = text[j]
        if not (nxt.isupper() or nxt.isdigit()):
            continue
        if "." in m.group():
            token = re.search(r"(\S+)$", text[:end])
            if token and token.group(1) in ABBREVIATIONS:
                continue
        sentences.append(text[start:end].strip())
        start = end
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def count_syllables(word: str) -> int:
    """Heuristic syllable count: vowel groups, silent-e aware, minimum 1.

    A terminal "e" drops one group unless the word ends in consonant+"le".
    """
    w = "".join(ch for ch in word.lower() if ch.isalpha())
    if not w:
        return 1
    groups = len(_VOWEL_GROUP_RE.findall(w))
    if w.endswith("e"):
        le_ending = len(w) >= 3 and w.endswith("le") and w[-3] not in "aeiouy"
        if not le_ending:
            groups -= 1
    return max(groups, 1)


@dataclass(frozen=True)
class StructureReport:
    doc_count: int
    total_words: int
    mean_words_per_doc: float
    std_words_per_doc: float
    mean_sentences_per_doc: float
    std_sentences_per_doc: float
    mean_words_per_sentence: float
    median_words_per_sentence: float
    std_words_per_sentence: float
    max_words_in_doc: int
    min_words_in_doc: int


def structure_stats(texts: Iterable[str]) -> StructureReport:
    """Document/sentence size statistics with population standard deviations."""
    doc_words: list[int] = []
    doc_sentences: list[int] = []
    sentence_words: list[int] = []
    for text in texts:
        doc_words.append(len(tokenize(text)))
        sentences = split_sentences(text)
        doc_sentences.append(len(sentences))
        sentence_words.extend(len(tokenize(s)) for s in sentences)
    if not doc_words:
        raise ValueError("empty corpus")
    return StructureReport(
        doc_count=len(doc_words),
        total_words=sum(doc_words),
        mean_words_per_doc=statistics.fmean(doc_words),
        std_words_per_doc=statistics.pstdev(doc_words),
        mean_sentences_per_doc=statistics.fmean(doc_sentences),
        std_sentences_per_doc=statistics.pstdev(doc_sentences),
        mean_words_per_sentence=statistics.fmean(sentence_words) if sentence_words else 0.0,
        median_words_per_sentence=statistics.median(sentence_words) if sentence_words else 0.0,
        std_words_per_sentence=statistics.pstdev(sentence_words) if sentence_words else 0.0,
        max_words_in_doc=max(doc_words),
        min_words_in_doc=min(doc_words),
    )


def ttr(tokens: Sequence[str]) -> float:
    if not tokens:
        raise ValueError("ttr needs at least one token")
    return len(set(tokens)) / len(tokens)


def maas(tokens: Sequence[str]) -> float:
    """Maas a-squared: (log N - log V) / (log N)^2, base 10."""
    n = len(tokens)
    v = len(set(tokens))
    if n == 0:
        raise ValueError("maas needs at least one token")
    if n == v:
        return 0.0
    log_n = math.log10(n)
    return (log_n - math.log10(v)) / (log_n * log_n)


def hdd(tokens: Sequence[str], sample_size: int = HDD_SAMPLE_SIZE) -> float:
    """Expected TTR of a random sample, via the hypergeometric distribution.

    For each type, the chance it appears at least once in a draw of
    ``sample_size`` tokens contributes 1/sample_size.
    """
    n = len(tokens)
    if n < sample_size:
        raise ValueError(f"hdd needs at least {sample_size} tokens, got {n}")
    total = 0.0
    denominator = math.comb(n, sample_size)
    for count in Counter(tokens).values():
        p_absent = math.comb(n - count, sample_size) / denominator if n - count >= sample_size else 0.0
        total += (1.0 - p_absent) / sample_size
    return total


def _mtld_pass(tokens: Sequence[str], threshold: float) -> float:
    factors = 0.0
    types: set[str] = set()
    length = 0
    current_ttr = 1.0
    for token in tokens:
        length += 1
        types.add(token)
        current_ttr = len(types) / length
        if current_ttr < threshold:
            factors += 1.0
            types.clear()
            length = 0
            current_ttr = 1.0
    if length > 0:
        factors += (1.0 - current_ttr) / (1.0 - threshold)
    if factors == 0.0:
        raise ValueError("text too uniform for MTLD")
    return len(tokens) / factors


def mtld(tokens: Sequence[str], threshold: float = MTLD_THRESHOLD) -> float:
    """Mean length of runs keeping TTR above the threshold, both directions."""
    if not tokens:
        raise ValueError("mtld needs at least one token")
    forward = _mtld_pass(tokens, threshold)
    backward = _mtld_pass(list(reversed(tokens)), threshold)
    return (forward + backward) / 2.0


@dataclass(frozen=True)
class LexicalDiversity:
    n: int
    v: int
    ttr: float
    maas: float
    hdd: float | None
    mtld: float | None


def lexical_diversity(tokens: Sequence[str]) -> LexicalDiversity:
    """All four diversity scores; HDD and MTLD absent for short texts."""
    if not tokens:
        raise ValueError("lexical_diversity needs at least one token")
    n = len(tokens)
    return LexicalDiversity(
        n=n,
        v=len(set(tokens)),
        ttr=ttr(tokens),
        maas=maas(tokens),
        hdd=hdd(tokens) if n >= HDD_SAMPLE_SIZE else None,
        mtld=mtld(tokens) if n >= MTLD_MIN_TOKENS else None,
    )


@dataclass(frozen=True)
class Readability:
    kincaid: float
    fre: float
    ari: float
    words: int
    sentences: int
    syllables: int
    letters: int


def readability(text: str) -> Readability:
    """Kincaid, Flesch Reading Ease, and ARI from the four raw counts."""
    words = tokenize(text)
    if not words:
        raise ValueError("empty document")
    w = len(words)
    s = max(len(split_sentences(text)), 1)
    syl = sum(count_syllables(word) for word in words)
    letters = sum(1 for ch in text if ch.isalpha())
    wps = w / s
    spw = syl / w
    lpw = letters / w
    return Readability(
        kincaid=0.39 * wps + 11.8 * spw - 15.59,
        fre=206.835 - 1.015 * wps - 84.6 * spw,
        ari=4.71 * lpw + 0.5 * wps - 21.43,
        words=w,
        sentences=s,
        syllables=syl,
        letters=letters,
    )


_STEMMER = PorterStemmer()


def _doc_tokens(text: str) -> list[str]:
    return [t.lower() for t in tokenize(text)]


@dataclass(frozen=True)
class LexicalReport:
    """Per-document diversity scores plus corpus means.

    The "lemmatized" unique counts are a stemmer proxy, flagged in
    ``lemma_proxy``.
    """

    per_doc: dict[str, LexicalDiversity]
    unique_words: dict[str, int]
    lemmatized_unique_words: dict[str, int]
    mean_ttr: float
    mean_maas: float
    mean_hdd: float | None
    mean_mtld: float | None
    mean_unique_words: float
    mean_lemmatized_unique_words: float
    skipped: dict[str, str] = field(default_factory=dict)
    lemma_proxy: str = "porter-stem"


def lexical_report(docs: Iterable[tuple[str, str]]) -> LexicalReport:
    """Diversity report over (doc_id, text) pairs."""
    per_doc: dict[str, LexicalDiversity] = {}
    unique: dict[str, int] = {}
    lemma_unique: dict[str, int] = {}
    skipped: dict[str, str] = {}
    for doc_id, text in docs:
        tokens = _doc_tokens(text)
        if not tokens:
            skipped[doc_id] = "no tokens"
            continue
        try:
            per_doc[doc_id] = lexical_diversity(tokens)
        except ValueError as exc:
            skipped[doc_id] = str(exc)
            continue
        unique[doc_id] = len(set(tokens))
        lemma_unique[doc_id] = len({_STEMMER.stem(t) for t in tokens})
    if not per_doc:
        raise ValueError("empty corpus")

    def _mean(values: list[float]) -> float | None:
        return statistics.fmean(values) if values else None

    hdds = [d.hdd for d in per_doc.values() if d.hdd is not None]
    mtlds = [d.mtld for d in per_doc.values() if d.mtld is not None]
    return LexicalReport(
        per_doc=per_doc,
        unique_words=unique,
        lemmatized_unique_words=lemma_unique,
        mean_ttr=statistics.fmean(d.ttr for d in per_doc.values()),
        mean_maas=statistics.fmean(d.maas for d in per_doc.values()),
        mean_hdd=_mean(hdds),
        mean_mtld=_mean(mtlds),
        mean_unique_words=statistics.fmean(unique.values()),
        mean_lemmatized_unique_words=statistics.fmean(lemma_unique.values()),
        skipped=skipped,
    )


@dataclass(frozen=True)
class ReadabilityReport:
    per_doc: dict[str, Readability]
    mean_kincaid: float
    mean_fre: float
    mean_ari: float
    std_kincaid: float
    std_fre: float
    std_ari: float
    skipped: dict[str, str] = field(default_factory=dict)


def readability_report(docs: Iterable[tuple[str, str]]) -> ReadabilityReport:
    """Readability report over (doc_id, text) pairs."""
    per_doc: dict[str, Readability] = {}
    skipped: dict[str, str] = {}
    for doc_id, text in docs:
        try:
            per_doc[doc_id] = readability(text)
        except ValueError as exc:
            skipped[doc_id] = str(exc)
    if not per_doc:
        raise ValueError("empty corpus")
    kincaids = [r.kincaid for r in per_doc.values()]
    fres = [r.fre for r in per_doc.values()]
    aris = [r.ari for r in per_doc.values()]
    return ReadabilityReport(
        per_doc=per_doc,
        mean_kincaid=statistics.fmean(kincaids),
        mean_fre=statistics.fmean(fres),
        mean_ari=statistics.fmean(aris),
        std_kincaid=statistics.pstdev(kincaids),
        std_fre=statistics.pstdev(fres),
        std_ari=statistics.pstdev(aris),
        skipped=skipped,
    )
