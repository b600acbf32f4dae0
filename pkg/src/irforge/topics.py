"""TREC-style search topics: parsing, serialization, and keyword masking."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .analysis import ENGLISH_STOPWORDS, token_spans
from .wordlists import KEYWORD_FREQUENCIES

FORMAT_TREC = "trec-sgml"
FORMAT_JSONL = "jsonl"

MASK_TOKEN = "[MASK]"


class TopicError(ValueError):
    """Malformed topic input."""


class MaskError(ValueError):
    """Keyword masking could not be applied."""


@dataclass(frozen=True)
class Topic:
    """One search topic; the description seeds document generation."""

    id: str
    description: str
    title: str = ""
    narrative: str | None = None

    def __post_init__(self) -> None:
        if not self.id or re.search(r"\s", self.id):
            raise TopicError(f"topic id must be a non-empty token, got {self.id!r}")
        if not self.description.strip():
            raise TopicError(f"topic {self.id}: description is empty")


@dataclass(frozen=True)
class MaskedTopic:
    """A topic description with selected keywords replaced by [MASK].

    Substituting ``masked_terms`` back in order reproduces the original
    description byte for byte.
    """

    source_topic_id: str
    masked_text: str
    masked_terms: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.masked_text.count(MASK_TOKEN) != len(self.masked_terms):
            raise MaskError("mask count does not match masked_terms")
        if not self.masked_terms:
            raise MaskError("a masked topic needs at least one masked term")

    def unmask(self) -> str:
        text = self.masked_text
        for term in self.masked_terms:
            text = text.replace(MASK_TOKEN, term, 1)
        return text


_TOP_RE = re.compile(r"<top>(.*?)(?:</top>|\Z)", re.IGNORECASE | re.DOTALL)
_TAG_RE = re.compile(r"<(num|title|desc|narr)>", re.IGNORECASE)
_LABELS = ("Number:", "Description:", "Narrative:")


def _clean_field(raw: str, strip_labels: bool = True) -> str:
    # drop an optional well-formed closing tag; historical files rarely have one
    raw = re.sub(r"</(num|title|desc|narr)>", "", raw, flags=re.IGNORECASE)
    raw = raw.strip()
    if strip_labels:
        for label in _LABELS:
            if raw.startswith(label):
                raw = raw[len(label):].strip()
                break
    return raw


def _parse_trec_block(body: str, offset: int) -> Topic:
    fields: dict[str, str] = {}
    matches = list(_TAG_RE.finditer(body))
    for i, m in enumerate(matches):
        tag = m.group(1).lower()
        end = matches[i + 1].start() if i + 1 < len(matches) else len(body)
        fields[tag] = _clean_field(body[m.end():end])
    topic_id = fields.get("num", "")
    if not topic_id:
        raise TopicError(f"topic block at byte {offset}: missing <num>")
    if "desc" not in fields or not fields["desc"]:
        raise TopicError(f"topic block at byte {offset} (id {topic_id!r}): missing <desc>")
    return Topic(
        id=topic_id,
        title=fields.get("title", ""),
        description=fields["desc"],
        narrative=fields.get("narr") or None,
    )


def parse_topics(text: str, format: str = FORMAT_TREC) -> list[Topic]:
    """Parse topics from TREC SGML (<top> blocks) or JSONL text."""
    topics: list[Topic] = []
    if format == FORMAT_TREC:
        for m in _TOP_RE.finditer(text):
            topics.append(_parse_trec_block(m.group(1), m.start()))
    elif format == FORMAT_JSONL:
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TopicError(f"line {lineno}: invalid JSON ({exc})") from exc
            if "id" not in obj or "description" not in obj:
                raise TopicError(f"line {lineno}: topic needs 'id' and 'description'")
            topics.append(
                Topic(
                    id=str(obj["id"]),
                    title=obj.get("title") or "",
                    description=obj["description"],
                    narrative=obj.get("narrative"),
                )
            )
    else:
        raise ValueError(f"unknown topic format: {format!r}")

    seen: set[str] = set()
    for topic in topics:
        if topic.id in seen:
            raise TopicError(f"duplicate topic id {topic.id!r}")
        seen.add(topic.id)
    return topics


def serialize_topics(topics: list[Topic], format: str = FORMAT_TREC) -> str:
    """Render topics so that parse_topics round-trips them."""
    if format == FORMAT_JSONL:
        lines = []
        for t in topics:
            obj: dict[str, object] = {"id": t.id, "title": t.title, "description": t.description}
            if t.narrative is not None:
                obj["narrative"] = t.narrative
            lines.append(json.dumps(obj, ensure_ascii=False))
        return "".join(line + "\n" for line in lines)
    if format == FORMAT_TREC:
        blocks = []
        for t in topics:
            parts = [f"<top>\n<num> Number: {t.id}"]
            if t.title:
                parts.append(f"<title> {t.title}")
            parts.append(f"<desc> Description:\n{t.description}")
            if t.narrative is not None:
                parts.append(f"<narr> Narrative:\n{t.narrative}")
            parts.append("</top>")
            blocks.append("\n".join(parts))
        return "\n\n".join(blocks) + ("\n" if blocks else "")
    raise ValueError(f"unknown topic format: {format!r}")


@dataclass(frozen=True)
class KeywordRule:
    """Deterministic keyword picker standing in for an NER model.

    Candidates are alphabetic non-stopword tokens. Mid-sentence
    capitalized tokens win first, then the rarest token by the bundled
    frequency table (absent means rarest), then earliest occurrence.
    """

    max_terms: int = 1
    stopwords: frozenset[str] = field(default_factory=lambda: ENGLISH_STOPWORDS)
    frequencies: dict[str, int] = field(default_factory=lambda: KEYWORD_FREQUENCIES)

    def __post_init__(self) -> None:
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


def _sentence_initial(text: str, start: int) -> bool:
    for ch in reversed(text[:start]):
        if ch.isspace() or ch in "\"'()[]":
            continue
        return ch in ".!?"
    return True


def mask_description(topic: Topic, rule: KeywordRule | None = None) -> MaskedTopic:
    """Replace the selected keywords in the description with [MASK]."""
    rule = rule or KeywordRule()
    text = topic.description
    spans = token_spans(text)
    candidates = []
    for position, (start, end, token) in enumerate(spans):
        if not token.isalpha() or token.lower() in rule.stopwords:
            continue
        mid_cap = token[0].isupper() and not _sentence_initial(text, start)
        freq = rule.frequencies.get(token.lower(), 0)
        candidates.append((0 if mid_cap else 1, freq, position, token.lower()))
    if not candidates:
        raise MaskError("unmaskable description")

    candidates.sort()
    selected: list[str] = []
    for _, _, _, lower in candidates:
        if lower not in selected:
            selected.append(lower)
        if len(selected) >= rule.max_terms:
            break

    pieces: list[str] = []
    terms: list[str] = []
    cursor = 0
    for start, end, token in spans:
        if token.lower() in selected:
            pieces.append(text[cursor:start])
            pieces.append(MASK_TOKEN)
            terms.append(token)
            cursor = end
    pieces.append(text[cursor:])
    return MaskedTopic(
        source_topic_id=topic.id,
        masked_text="".join(pieces),
        masked_terms=tuple(terms),
    )
