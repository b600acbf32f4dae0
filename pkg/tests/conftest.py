from __future__ import annotations

import pytest

from irforge.analysis import Analyzer
from irforge.forge import ForgeConfig, run_pipeline
from irforge.genclient import MockProvider
from irforge.topics import Topic


@pytest.fixture
def plain_analyzer():
    """No stopwords, no stemming: for hand-checkable index fixtures."""
    return Analyzer(lowercase=True, stopword_list=frozenset(), stemmer="none")


def make_topics(n: int = 5) -> list[Topic]:
    seeds = [
        "Evidence of the existence of human life 10,000 years ago.",
        "Countries that do not practice or ignore environmental protective measures.",
        "New methods of producing steel around the world.",
        "Incidents of attacks by wild bees on humans in recent decades.",
        "The impact of volcanic eruptions on regional agriculture and climate.",
        "Programs that teach endangered languages to younger generations.",
    ]
    return [Topic(id=str(401 + i), description=seeds[i % len(seeds)]) for i in range(n)]


@pytest.fixture(scope="session")
def desk_collection():
    """5 mock topics at acceptance-6 scale: 11 relevant + 50 tricky each."""
    cfg = ForgeConfig(
        subtopics_requested=10,
        docs_per_subtopic=1,
        variants_per_topic=10,
        docs_per_variant=5,
        random_docs_total=50,
        seed="desk",
    )
    provider = MockProvider(seed_salt=cfg.seed)
    return run_pipeline(make_topics(5), cfg, provider)
