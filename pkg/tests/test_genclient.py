from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest
from hypothesis import given, strategies as st

from irforge.genclient import (
    CostEstimate,
    GenRequest,
    GenResponse,
    HttpProvider,
    ListParseError,
    MockProvider,
    PriceTable,
    PromptError,
    PromptKind,
    ProviderError,
    ProviderTimeout,
    RetryPolicy,
    UsageLedger,
    cost_estimate,
    generate,
    parse_numbered_list,
    render_prompt,
)


# ------------------------------------------------------------- templates

def test_init_prompt_exact():
    rendered = render_prompt(
        PromptKind.INIT, {"description": "D", "document_type": "long text"}
    )
    assert rendered == "D. Can you write a long text about that?"


def test_subtopics_prompt_exact():
    rendered = render_prompt(PromptKind.SUBTOPICS, {"count": "100"})
    assert rendered == (
        "Can you write 100 subtopics related to this? Please be as specific as possible."
    )


def test_doc_from_subtopic_prompt_exact():
    rendered = render_prompt(
        PromptKind.DOC_FROM_SUBTOPIC, {"subtopic": "S", "description": "D"}
    )
    assert rendered == "Can you write a long text with a title about S, within the scope of D ?"


def test_altered_topics_prompt_exact():
    rendered = render_prompt(
        PromptKind.ALTERED_TOPICS, {"count": "10", "masked": "M", "example": "D"}
    )
    assert rendered == (
        "Can you generate 10 variants of the next sentence by filling [MASK]: M\n\nExample: D"
    )


def test_random_doc_prompt_exact():
    rendered = render_prompt(PromptKind.RANDOM_DOC, {"document_type": "news article"})
    assert rendered == "Write me a news article about any topic"


def test_missing_binding_names_placeholder():
    with pytest.raises(PromptError, match="document_type"):
        render_prompt(PromptKind.INIT, {"description": "D"})


def test_binding_values_are_not_rescanned():
    rendered = render_prompt(
        PromptKind.INIT,
        {"description": "literal {document_type} stays", "document_type": "text"},
    )
    assert rendered.startswith("literal {document_type} stays.")


# ------------------------------------------------------------- mock provider

def test_mock_same_prompt_identical():
    provider = MockProvider(seed_salt="s1")
    request = GenRequest(prompt="Write about rivers.")
    assert provider.generate(request).text == provider.generate(request).text


def test_mock_salt_changes_output():
    request = GenRequest(prompt="Write about rivers.")
    a = MockProvider(seed_salt="s1").generate(request).text
    b = MockProvider(seed_salt="s2").generate(request).text
    assert a != b


def test_mock_max_tokens_changes_output_and_caps_length():
    short = MockProvider().generate(GenRequest(prompt="p", max_output_tokens=20))
    assert short.completion_tokens <= 20


def test_empty_prompt_rejected():
    with pytest.raises(ValueError, match="non-empty"):
        generate(MockProvider(), GenRequest(prompt=""))


def test_mock_answers_subtopic_requests_with_a_list():
    provider = MockProvider()
    text = provider.generate(
        GenRequest(prompt="D Can you write 7 subtopics related to this? Please be as specific as possible.")
    ).text
    items, shortfall = parse_numbered_list(text, 7)
    assert len(items) == 7 and shortfall == 0


def test_mock_fills_masks_in_variant_requests():
    provider = MockProvider()
    prompt = render_prompt(
        PromptKind.ALTERED_TOPICS,
        {"count": "4", "masked": "New ways of using [MASK]", "example": "New ways of using tin"},
    )
    items, _ = parse_numbered_list(provider.generate(GenRequest(prompt=prompt)).text, 4)
    assert len(items) == 4
    assert all("[MASK]" not in item for item in items)
    assert all(item.startswith("New ways of using ") for item in items)
    assert len(set(items)) == 4


def test_gen_response_invariants():
    with pytest.raises(ValueError):
        GenResponse(text="", prompt_tokens=1, completion_tokens=3, model_id="m")
    with pytest.raises(ValueError):
        GenResponse(text="x", prompt_tokens=-1, completion_tokens=0, model_id="m")


# ------------------------------------------------------------- numbered lists

def test_parse_numbered_list_paren_style():
    assert parse_numbered_list("1) foo\n2) bar", 2) == (["foo", "bar"], 0)


def test_parse_numbered_list_table_style():
    text = (
        "1. The significance of the Neolithic era in human history\n"
        "2. How scientists determine the age of ancient artifacts and fossils"
    )
    items, shortfall = parse_numbered_list(text, 2)
    assert items[0] == "The significance of the Neolithic era in human history"
    assert len(items) == 2 and shortfall == 0


def test_parse_numbered_list_shortfall():
    text = "\n".join(f"{i}. item {i}" for i in range(1, 88))
    items, shortfall = parse_numbered_list(text, 100)
    assert len(items) == 87
    assert shortfall == 13


def test_parse_numbered_list_dash_styles():
    items, _ = parse_numbered_list("- alpha\n3 - beta", 2)
    assert items == ["alpha", "beta"]


def test_parse_numbered_list_skips_prose_lines():
    text = "Sure, here you go:\n1. one\n2. two"
    assert parse_numbered_list(text, 2).items == ["one", "two"]


def test_parse_numbered_list_error_on_prose_only():
    with pytest.raises(ListParseError, match="no list items found"):
        parse_numbered_list("no lists here at all", 3)


def test_parse_numbered_list_empty_text():
    assert parse_numbered_list("", 5) == ([], 5)


# ------------------------------------------------------------- ledger and cost

def _paper_ledger() -> UsageLedger:
    ledger = UsageLedger()
    ledger.add("all", 1_924_000, 61_700_000)
    return ledger


def test_cost_paper_example():
    estimate = cost_estimate(_paper_ledger(), PriceTable(1.50, 2.00))
    assert estimate.usd == pytest.approx(126.29, abs=0.01)


def test_energy_paper_example():
    ledger = UsageLedger()
    ledger.add("all", 1_900_000, 61_700_000)  # 63.6M total
    estimate = cost_estimate(ledger, PriceTable(wh_per_token=0.015))
    assert estimate.kwh == pytest.approx(954.0, abs=0.5)


def test_cost_zero():
    assert cost_estimate(UsageLedger()) == CostEstimate(0.0, 0.0)


def test_ledger_subtotals_sum_to_totals():
    ledger = UsageLedger()
    ledger.add("a", 10, 20)
    ledger.add("b", 1, 2)
    ledger.add("a", 5, 0)
    data = ledger.as_dict()
    assert data["total_prompt_tokens"] == 16
    assert data["total_completion_tokens"] == 22
    assert sum(c["prompt_tokens"] for c in data["categories"].values()) == 16


def test_ledger_round_trip_and_validation():
    ledger = _paper_ledger()
    assert UsageLedger.from_dict(ledger.as_dict()) == ledger
    bad = ledger.as_dict()
    bad["total_prompt_tokens"] += 1
    with pytest.raises(ValueError, match="does not match"):
        UsageLedger.from_dict(bad)


@given(
    entries=st.lists(
        st.tuples(st.sampled_from("abc"), st.integers(0, 1000), st.integers(0, 1000)),
        max_size=20,
    )
)
def test_ledger_additivity_property(entries):
    whole = UsageLedger()
    left, right = UsageLedger(), UsageLedger()
    for i, (cat, p, c) in enumerate(entries):
        whole.add(cat, p, c)
        (left if i % 2 else right).add(cat, p, c)
    assert whole.total_prompt_tokens == sum(e[1] for e in entries)
    merged = left + right
    assert merged.total_prompt_tokens == whole.total_prompt_tokens
    assert merged.total_completion_tokens == whole.total_completion_tokens


@given(
    p1=st.integers(0, 10**9), c1=st.integers(0, 10**9),
    p2=st.integers(0, 10**9), c2=st.integers(0, 10**9),
)
def test_cost_linearity(p1, c1, p2, c2):
    a, b, both = UsageLedger(), UsageLedger(), UsageLedger()
    a.add("x", p1, c1)
    b.add("x", p2, c2)
    both.add("x", p1 + p2, c1 + c2)
    ca, cb, cab = cost_estimate(a), cost_estimate(b), cost_estimate(both)
    assert cab.usd == pytest.approx(ca.usd + cb.usd, rel=1e-12, abs=1e-9)
    assert cab.kwh == pytest.approx(ca.kwh + cb.kwh, rel=1e-12, abs=1e-9)


# ------------------------------------------------------------- http provider

class _Script(BaseHTTPRequestHandler):
    """Serves canned responses from server.script (list of (status, body))."""

    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        self.server.requests.append(json.loads(self.rfile.read(length)))
        status, body = self.server.script[min(len(self.server.requests) - 1,
                                              len(self.server.script) - 1)]
        payload = json.dumps(body).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture
def http_server():
    server = HTTPServer(("127.0.0.1", 0), _Script)
    server.script = []
    server.requests = []
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server
    server.shutdown()


def _ok_body(text="hello", usage=True):
    body = {"choices": [{"message": {"content": text}}], "model": "test-model"}
    if usage:
        body["usage"] = {"prompt_tokens": 7, "completion_tokens": 3}
    return body


def _provider(server, attempts=5):
    return HttpProvider(
        base_url=f"http://127.0.0.1:{server.server_port}",
        model="test-model",
        api_key="k",
        retry=RetryPolicy(attempts=attempts, initial_backoff=0.0),
        sleeper=lambda s: None,
    )


def test_http_provider_success_and_wire_format(http_server):
    http_server.script = [(200, _ok_body())]
    response = generate(_provider(http_server), GenRequest(prompt="hi", temperature=0.5))
    assert response == GenResponse("hello", 7, 3, "test-model")
    sent = http_server.requests[0]
    assert sent["messages"] == [{"role": "user", "content": "hi"}]
    assert sent["temperature"] == 0.5
    assert sent["max_tokens"] == 1024


def test_http_provider_usage_fallback_flagged(http_server):
    http_server.script = [(200, _ok_body(text="x" * 10, usage=False))]
    response = generate(_provider(http_server), GenRequest(prompt="abcdefgh"))
    assert response.usage_estimated
    assert response.prompt_tokens == 2  # ceil(8 / 4)
    assert response.completion_tokens == 3  # ceil(10 / 4)


def test_http_provider_retries_then_succeeds(http_server):
    http_server.script = [(500, {}), (429, {}), (200, _ok_body())]
    response = _provider(http_server).generate(GenRequest(prompt="hi"))
    assert response.text == "hello"
    assert len(http_server.requests) == 3


def test_http_provider_non_retryable(http_server):
    http_server.script = [(403, {"error": "forbidden"})]
    with pytest.raises(ProviderError, match="HTTP 403"):
        _provider(http_server).generate(GenRequest(prompt="hi"))
    assert len(http_server.requests) == 1


def test_http_provider_retry_budget_exhausted(http_server):
    http_server.script = [(503, {})]
    with pytest.raises(ProviderTimeout, match="retry budget exhausted"):
        _provider(http_server, attempts=3).generate(GenRequest(prompt="hi"))
    assert len(http_server.requests) == 3
