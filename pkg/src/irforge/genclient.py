"""Text-generation provider layer.

Holds the exact prompt templates of the generation pipeline, a
chat-completions HTTP provider with retries, a deterministic offline mock
provider, and token/cost/energy accounting.
"""

from __future__ import annotations

import hashlib
import math
import os
import random
import re
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, NamedTuple

import requests

from .analysis import tokenize
from .wordlists import MOCK_VOCABULARY

API_KEY_ENV = "GENTREC_API_KEY"
DEFAULT_CONCURRENCY = 4


class PromptError(ValueError):
    """A template placeholder was left unbound."""


class ProviderError(RuntimeError):
    """The provider returned a non-retryable failure."""


class ProviderTimeout(ProviderError):
    """The retry budget was exhausted without a successful response."""


class PromptKind(str, Enum):
    INIT = "INIT"
    SUBTOPICS = "SUBTOPICS"
    DOC_FROM_SUBTOPIC = "DOC_FROM_SUBTOPIC"
    RANDOM_DOC = "RANDOM_DOC"
    ALTERED_TOPICS = "ALTERED_TOPICS"


# Placeholder values are substituted in a single pass and never rescanned.
TEMPLATES: dict[PromptKind, str] = {
    PromptKind.INIT: "{description}. Can you write a {document_type} about that?",
    PromptKind.SUBTOPICS: (
        "Can you write {count} subtopics related to this? "
        "Please be as specific as possible."
    ),
    PromptKind.DOC_FROM_SUBTOPIC: (
        "Can you write a long text with a title about {subtopic}, "
        "within the scope of {description} ?"
    ),
    PromptKind.RANDOM_DOC: "Write me a {document_type} about any topic",
    PromptKind.ALTERED_TOPICS: (
        "Can you generate {count} variants of the next sentence "
        "by filling [MASK]: {masked}\n\nExample: {example}"
    ),
}

_PLACEHOLDER_RE = re.compile(r"\{([a-z_]+)\}")


def render_prompt(kind: PromptKind, bindings: dict[str, str]) -> str:
    """Substitute bindings into the template for ``kind``."""

    def sub(m: re.Match[str]) -> str:
        name = m.group(1)
        if name not in bindings:
            raise PromptError(f"missing binding for placeholder {name!r} in {kind.value}")
        return bindings[name]

    return _PLACEHOLDER_RE.sub(sub, TEMPLATES[kind])


SESSION_FRESH = "FRESH"


@dataclass(frozen=True)
class GenRequest:
    """A single stateless generation request; no chat history ever."""

    prompt: str
    max_output_tokens: int = 1024
    temperature: float = 1.0
    session: str = SESSION_FRESH

    def __post_init__(self) -> None:
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.session != SESSION_FRESH:
            raise ValueError("only fresh sessions are supported")


@dataclass(frozen=True)
class GenResponse:
    text: str
    prompt_tokens: int
    completion_tokens: int
    model_id: str
    usage_estimated: bool = False

    def __post_init__(self) -> None:
        if self.prompt_tokens < 0 or self.completion_tokens < 0:
            raise ValueError("token counts must be >= 0")
        if not self.text and self.completion_tokens != 0:
            raise ValueError("empty text must carry zero completion tokens")


@dataclass(frozen=True)
class PriceTable:
    usd_per_million_input: float = 1.50
    usd_per_million_output: float = 2.00
    wh_per_token: float = 0.015

    def __post_init__(self) -> None:
        if min(self.usd_per_million_input, self.usd_per_million_output, self.wh_per_token) < 0:
            raise ValueError("prices must be >= 0")


class CostEstimate(NamedTuple):
    usd: float
    kwh: float


class UsageLedger:
    """Token totals with per-category subtotals; additive and thread-safe."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self.categories: dict[str, dict[str, int]] = {}

    def add(self, category: str, prompt_tokens: int, completion_tokens: int) -> None:
        if prompt_tokens < 0 or completion_tokens < 0:
            raise ValueError("token counts must be >= 0")
        with self._lock:
            bucket = self.categories.setdefault(
                category, {"prompt_tokens": 0, "completion_tokens": 0}
            )
            bucket["prompt_tokens"] += prompt_tokens
            bucket["completion_tokens"] += completion_tokens

    def record(self, category: str, response: GenResponse) -> None:
        self.add(category, response.prompt_tokens, response.completion_tokens)

    @property
    def total_prompt_tokens(self) -> int:
        with self._lock:
            return sum(b["prompt_tokens"] for b in self.categories.values())

    @property
    def total_completion_tokens(self) -> int:
        with self._lock:
            return sum(b["completion_tokens"] for b in self.categories.values())

    @property
    def total_tokens(self) -> int:
        return self.total_prompt_tokens + self.total_completion_tokens

    def __add__(self, other: "UsageLedger") -> "UsageLedger":
        merged = UsageLedger()
        for source in (self, other):
            for category, bucket in source.categories.items():
                merged.add(category, bucket["prompt_tokens"], bucket["completion_tokens"])
        return merged

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, UsageLedger):
            return NotImplemented
        return self.categories == other.categories

    def as_dict(self) -> dict:
        return {
            "total_prompt_tokens": self.total_prompt_tokens,
            "total_completion_tokens": self.total_completion_tokens,
            "categories": {k: dict(v) for k, v in sorted(self.categories.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "UsageLedger":
        ledger = cls()
        for category, bucket in data.get("categories", {}).items():
            ledger.add(category, int(bucket["prompt_tokens"]), int(bucket["completion_tokens"]))
        for key, total in (
            ("total_prompt_tokens", ledger.total_prompt_tokens),
            ("total_completion_tokens", ledger.total_completion_tokens),
        ):
            if key in data and int(data[key]) != total:
                raise ValueError(f"ledger {key} does not match category subtotals")
        return ledger


def cost_estimate(ledger: UsageLedger, prices: PriceTable | None = None) -> CostEstimate:
    """Dollar and kWh cost of the ledger at the given prices."""
    prices = prices or PriceTable()
    prompt = ledger.total_prompt_tokens
    completion = ledger.total_completion_tokens
    usd = (
        prompt / 1e6 * prices.usd_per_million_input
        + completion / 1e6 * prices.usd_per_million_output
    )
    kwh = (prompt + completion) * prices.wh_per_token / 1000.0
    return CostEstimate(usd=usd, kwh=kwh)


class ParsedList(NamedTuple):
    items: list[str]
    shortfall: int


_ITEM_RE = re.compile(r"^\s*(?:\d+\s*[.)]\s*|\d+\s+-\s+|-\s+)(.*\S)\s*$")


class ListParseError(ValueError):
    pass


def parse_numbered_list(text: str, expected: int) -> ParsedList:
    """Extract list items written as "N.", "N)", "N -", or "- " lines.

    Returns the items in order plus the shortfall against ``expected``;
    extra items are kept. Only completely unparseable non-empty text is
    an error.
    """
    if expected <= 0:
        raise ValueError("expected must be positive")
    items = [m.group(1) for line in text.splitlines() if (m := _ITEM_RE.match(line))]
    if not items and text.strip():
        raise ListParseError("no list items found")
    return ParsedList(items=items, shortfall=max(0, expected - len(items)))


@dataclass(frozen=True)
class RetryPolicy:
    attempts: int = 5
    initial_backoff: float = 1.0
    multiplier: float = 2.0


class MockProvider:
    """Offline provider; output is a pure function of the request.

    A seeded hash of (salt, prompt, max_output_tokens) drives a word
    sampler over the bundled vocabulary. Prompts that ask for a numbered
    list get one back; document prompts get a title line and a body that
    reuses some of the prompt's own content words so lexical retrieval
    has something to find.
    """

    deterministic = True

    _SUBTOPICS_RE = re.compile(r"write (\d+) subtopics related to this")
    _VARIANTS_RE = re.compile(
        r"generate (\d+) variants of the next sentence by filling \[MASK\]: (.*?)\n\nExample:",
        re.DOTALL,
    )

    def __init__(self, seed_salt: str = "", words_per_doc: int = 120,
                 model_id: str = "mock-writer-1") -> None:
        self.seed_salt = seed_salt
        self.words_per_doc = words_per_doc
        self.model_id = model_id

    def _rng(self, request: GenRequest) -> random.Random:
        key = f"{self.seed_salt}\x00{request.prompt}\x00{request.max_output_tokens}"
        digest = hashlib.sha256(key.encode("utf-8")).digest()
        return random.Random(int.from_bytes(digest[:8], "big"))

    def _word(self, rng: random.Random, echo: list[str]) -> str:
        if echo and rng.random() < 0.35:
            return rng.choice(echo)
        return MOCK_VOCABULARY[rng.randrange(len(MOCK_VOCABULARY))]

    def _phrase(self, rng: random.Random, echo: list[str], low: int, high: int) -> str:
        words = [self._word(rng, echo) for _ in range(rng.randint(low, high))]
        return " ".join(words)

    def _body(self, rng: random.Random, echo: list[str], budget: int) -> str:
        sentences = []
        remaining = budget
        while remaining > 0:
            n = min(rng.randint(8, 14), remaining)
            words = [self._word(rng, echo) for _ in range(n)]
            sentences.append(" ".join(words).capitalize() + ".")
            remaining -= n
        return " ".join(sentences)

    def generate(self, request: GenRequest) -> GenResponse:
        rng = self._rng(request)
        prompt = request.prompt
        echo = [t.lower() for t in tokenize(prompt) if len(t) > 3]

        variants = self._VARIANTS_RE.search(prompt)
        subtopics = self._SUBTOPICS_RE.search(prompt)
        if variants:
            count = int(variants.group(1))
            masked = variants.group(2).strip()
            lines = []
            for i in range(1, count + 1):
                filled = masked
                while "[MASK]" in filled:
                    filled = filled.replace("[MASK]", self._word(rng, []), 1)
                lines.append(f"{i}) {filled}")
            text = "\n".join(lines)
        elif subtopics:
            count = int(subtopics.group(1))
            lines = [
                f"{i}. {self._phrase(rng, echo, 4, 7).capitalize()}"
                for i in range(1, count + 1)
            ]
            text = "\n".join(lines)
        else:
            titled = "with a title" in prompt or "about any topic" in prompt
            body = self._body(rng, echo, min(self.words_per_doc, request.max_output_tokens))
            if titled:
                title = self._phrase(rng, echo, 3, 6).title()
                text = f"Title: {title}\n\n{body}"
            else:
                text = body
        return GenResponse(
            text=text,
            prompt_tokens=len(tokenize(prompt)),
            completion_tokens=len(tokenize(text)),
            model_id=self.model_id,
        )


class HttpProvider:
    """Chat-completions-compatible JSON-over-HTTP provider."""

    deterministic = False

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str | None = None,
        timeout: float = 120.0,
        retry: RetryPolicy | None = None,
        sleeper: Callable[[float], None] = time.sleep,
        session: requests.Session | None = None,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.model_id = model
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self.timeout = timeout
        self.retry = retry or RetryPolicy()
        self._sleep = sleeper
        self._http = session or requests.Session()

    def _post(self, request: GenRequest) -> requests.Response:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "model": self.model_id,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        return self._http.post(
            f"{self.base_url}/chat/completions",
            json=payload,
            headers=headers,
            timeout=self.timeout,
        )

    def generate(self, request: GenRequest) -> GenResponse:
        backoff = self.retry.initial_backoff
        last_error: str = "no attempt made"
        for attempt in range(self.retry.attempts):
            if attempt:
                self._sleep(backoff)
                backoff *= self.retry.multiplier
            try:
                response = self._post(request)
            except requests.RequestException as exc:
                last_error = f"transport error: {exc}"
                continue
            if response.status_code == 429 or response.status_code >= 500:
                last_error = f"HTTP {response.status_code}"
                continue
            if response.status_code != 200:
                raise ProviderError(
                    f"HTTP {response.status_code}: {response.text[:200]}"
                )
            data = response.json()
            text = data["choices"][0]["message"]["content"]
            usage = data.get("usage") or {}
            if "prompt_tokens" in usage and "completion_tokens" in usage:
                return GenResponse(
                    text=text,
                    prompt_tokens=int(usage["prompt_tokens"]),
                    completion_tokens=int(usage["completion_tokens"]),
                    model_id=data.get("model", self.model_id),
                )
            # accounting must never silently stop; fall back to ~4 chars/token
            return GenResponse(
                text=text,
                prompt_tokens=math.ceil(len(request.prompt) / 4),
                completion_tokens=math.ceil(len(text) / 4),
                model_id=data.get("model", self.model_id),
                usage_estimated=True,
            )
        raise ProviderTimeout(
            f"retry budget exhausted after {self.retry.attempts} attempts ({last_error})"
        )


def generate(provider, request: GenRequest) -> GenResponse:
    """Issue one fresh, stateless request against any provider."""
    if not request.prompt:
        raise ValueError("prompt must be non-empty")
    return provider.generate(request)
