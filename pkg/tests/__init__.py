"""
Tests for GINGER project.
"""
import dataclasses
from pathlib import Path
from typing import Any, Optional

from ginger.http_client import TransientProviderError
from ginger.llm.gateway import CompletionRequest, LLMGateway, ProviderPolicy
from ginger.llm.mock import MockProvider
from ginger.llm.prompts import TemplateId
from ginger.model import Corpus, Query, read_queries
from ginger.orchestrator import Pipeline, build_pipeline
from ginger.pipeline_configuration import PipelineConfig

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"

DATA_PATH: Path = Path("tests/data")

CORPUS: Corpus = Corpus.from_file(DATA_PATH / "corpus.jsonl")
QUERIES: list[Query] = read_queries(DATA_PATH / "queries.jsonl")
CONFIG: PipelineConfig = PipelineConfig.from_file(DATA_PATH / "config.json")

NO_WAIT: ProviderPolicy = ProviderPolicy(
    max_retries=3, backoff_base=0.0, rate_limit=1000.0
)


def create_gateway(
    provider: Any = None, policy: ProviderPolicy = NO_WAIT
) -> LLMGateway:
    """Gateway that never sleeps, with the mock provider by default."""
    return LLMGateway(
        provider or MockProvider(), policy, sleep=lambda _: None
    )


def create_pipeline(
    provider: Any = None, **overrides: Any
) -> Pipeline:
    """Pipeline over the test corpus with the test configuration."""
    config: PipelineConfig = dataclasses.replace(CONFIG, **overrides)
    return build_pipeline(config, CORPUS, provider=provider)


class FailingProvider:
    """
    Mock provider that fails permanently for one template when a bound value
    contains a marker.
    """

    def __init__(
        self,
        template_id: TemplateId,
        marker: str = "",
        latency: float = 0.0,
    ) -> None:
        self.template_id: TemplateId = template_id
        self.marker: str = marker.lower()
        self.mock: MockProvider = MockProvider(latency)

    def complete(
        self, request: CompletionRequest, system_text: str, user_text: str
    ) -> str:
        if request.template_id == self.template_id and any(
            self.marker in value.lower() for value in request.bindings.values()
        ):
            raise TransientProviderError("Service is down.")
        return self.mock.complete(request, system_text, user_text)


class ScriptedProvider:
    """Provider returning or raising prepared results in order."""

    def __init__(self, results: list[Any]) -> None:
        self.results: list[Any] = list(results)
        self.calls: int = 0

    def complete(
        self, request: CompletionRequest, system_text: str, user_text: str
    ) -> str:
        self.calls += 1
        result: Any = self.results.pop(0)
        if isinstance(result, Exception):
            raise result
        return result


class SlowTemplateProvider:
    """Mock provider with latency only for selected templates."""

    def __init__(
        self, templates: set[TemplateId], latency: float
    ) -> None:
        self.templates: set[TemplateId] = templates
        self.latency: float = latency
        self.fast: MockProvider = MockProvider()
        self.slow: MockProvider = MockProvider(latency)

    def complete(
        self, request: CompletionRequest, system_text: str, user_text: str
    ) -> str:
        provider: MockProvider = (
            self.slow if request.template_id in self.templates else self.fast
        )
        return provider.complete(request, system_text, user_text)


def get_query(query_id: str) -> Optional[Query]:
    for query in QUERIES:
        if query.id_ == query_id:
            return query
    return None
