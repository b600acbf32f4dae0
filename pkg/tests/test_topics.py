from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from irforge.topics import (
    FORMAT_JSONL,
    FORMAT_TREC,
    KeywordRule,
    MaskError,
    Topic,
    TopicError,
    mask_description,
    parse_topics,
    serialize_topics,
)

SGML_EXAMPLE = (
    "<top><num> Number: 402 </num><title>behavioral genetics</title>"
    "<desc>Description: What is happening...</desc></top>"
)


def test_parse_trec_sgml_block():
    topics = parse_topics(SGML_EXAMPLE, FORMAT_TREC)
    assert topics == [
        Topic(id="402", title="behavioral genetics", description="What is happening...")
    ]
    assert topics[0].narrative is None


def test_parse_empty_stream():
    assert parse_topics("", FORMAT_TREC) == []
    assert parse_topics("", FORMAT_JSONL) == []


def test_parse_jsonl_line():
    line = '{"id":"260","description":"Evidence of the existence of human life 10,000 years ago."}'
    topics = parse_topics(line, FORMAT_JSONL)
    assert topics[0].id == "260"
    assert topics[0].description == (
        "Evidence of the existence of human life 10,000 years ago."
    )
    assert topics[0].title == ""


def test_parse_trec_multiline_and_case_insensitive_tags():
    text = """
<top>
<NUM> Number: 301
<TITLE> coffee trade
<DESC> Description:
Where is coffee grown
and traded?
<NARR> Narrative: Any doc about coffee.
</top>
"""
    (topic,) = parse_topics(text, FORMAT_TREC)
    assert topic.id == "301"
    assert topic.title == "coffee trade"
    assert topic.description == "Where is coffee grown\nand traded?"
    assert topic.narrative == "Any doc about coffee."


def test_missing_num_names_byte_offset():
    with pytest.raises(TopicError, match=r"byte 0.*missing <num>"):
        parse_topics("<top><desc>Description: something</desc></top>", FORMAT_TREC)


def test_missing_desc_names_partial_id():
    with pytest.raises(TopicError, match=r"id '402'.*missing <desc>"):
        parse_topics("<top><num> Number: 402</num></top>", FORMAT_TREC)


def test_duplicate_id_rejected():
    text = SGML_EXAMPLE + SGML_EXAMPLE
    with pytest.raises(TopicError, match="duplicate topic id"):
        parse_topics(text, FORMAT_TREC)


def test_jsonl_requires_id_and_description():
    with pytest.raises(TopicError, match="line 1"):
        parse_topics('{"id":"1"}', FORMAT_JSONL)


def test_topic_invariants():
    with pytest.raises(TopicError):
        Topic(id="4 02", description="x")
    with pytest.raises(TopicError):
        Topic(id="402", description="   ")


def test_serialize_empty_jsonl():
    assert serialize_topics([], FORMAT_JSONL) == ""


@pytest.mark.parametrize("fmt", [FORMAT_JSONL, FORMAT_TREC])
def test_round_trip_both_formats(fmt):
    topics = [
        Topic(id="402", title="behavioral genetics", description="What is happening..."),
        Topic(id="403", description="Another need.", narrative="Docs about needs."),
    ]
    assert parse_topics(serialize_topics(topics, fmt), fmt) == topics


_word = st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=1, max_size=8)


@given(
    ids=st.lists(st.integers(min_value=1, max_value=900), min_size=1, max_size=6, unique=True),
    titles=st.lists(_word, min_size=6, max_size=6),
    descs=st.lists(st.lists(_word, min_size=1, max_size=6).map(" ".join), min_size=6, max_size=6),
)
def test_round_trip_property(ids, titles, descs):
    topics = [
        Topic(id=str(i), title=titles[n], description=descs[n])
        for n, i in enumerate(ids)
    ]
    for fmt in (FORMAT_JSONL, FORMAT_TREC):
        assert parse_topics(serialize_topics(topics, fmt), fmt) == topics


def test_mask_environmental_example():
    topic = Topic(
        id="255",
        description="Countries that do not practice or ignore environmental protective measures.",
    )
    masked = mask_description(topic)
    assert masked.masked_text == (
        "Countries that do not practice or ignore [MASK] protective measures."
    )
    assert masked.masked_terms == ("environmental",)


def test_mask_steel_example():
    topic = Topic(id="413", description="New methods of producing steel")
    masked = mask_description(topic)
    assert masked.masked_text == "New methods of producing [MASK]"
    assert masked.masked_terms == ("steel",)


def test_mask_unmaskable():
    with pytest.raises(MaskError, match="unmaskable description"):
        mask_description(Topic(id="1", description="the of and"))


def test_mask_prefers_mid_sentence_capitals():
    topic = Topic(id="2", description="A report about Ruritania and its exports.")
    masked = mask_description(topic)
    assert masked.masked_terms == ("Ruritania",)


def test_mask_multiple_terms_and_repeats():
    topic = Topic(id="3", description="Steel production and steel exports.")
    masked = mask_description(topic, KeywordRule(max_terms=1))
    # both surface occurrences of the chosen keyword are masked
    assert masked.masked_terms == ("Steel", "steel")
    assert masked.masked_text == "[MASK] production and [MASK] exports."
    assert masked.unmask() == topic.description


def test_mask_is_deterministic():
    topic = Topic(id="9", description="Grain exports from the southern hemisphere.")
    assert mask_description(topic) == mask_description(topic)


@given(
    words=st.lists(_word, min_size=2, max_size=12),
    anchor=st.text(alphabet="qxz", min_size=3, max_size=7),
)
def test_mask_reconstruction_property(words, anchor):
    description = " ".join(words + [anchor + "ite"])
    masked = mask_description(Topic(id="7", description=description))
    assert masked.unmask() == description
    assert masked.masked_text.count("[MASK]") == len(masked.masked_terms)
