"""Test HTTP providers with a fake service."""
from typing import Any

import numpy as np
import pytest

from ginger.http_client import (
    JSONService,
    ProviderRejected,
    TransientProviderError,
)
from ginger.llm.gateway import CompletionRequest, HTTPProvider
from ginger.llm.prompts import TemplateId
from ginger.retrieval.dense import DimensionMismatch, HTTPEmbeddingProvider

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"


class FakeService:
    """Service returning a prepared response and recording requests."""

    def __init__(self, content: dict[str, Any]) -> None:
        self.content: dict[str, Any] = content
        self.requests: list[dict[str, Any]] = []

    def post(self, structure: dict[str, Any]) -> dict[str, Any]:
        self.requests.append(structure)
        return self.content


def test_completion() -> None:
    """Test request fields and response text."""
    service: FakeService = FakeService({"text": "Paris"})
    request: CompletionRequest = CompletionRequest(
        TemplateId.INTERMEDIATE_ANSWER, {"query": "capital of France"}, 100
    )
    assert HTTPProvider(service).complete(request, "system", "user") == "Paris"
    assert service.requests == [
        {
            "system": "system",
            "user": "user",
            "max_tokens": 100,
            "temperature": 0.0,
        }
    ]


def test_completion_without_text() -> None:
    request: CompletionRequest = CompletionRequest(
        TemplateId.INTERMEDIATE_ANSWER, {"query": "q"}
    )
    with pytest.raises(ProviderRejected):
        HTTPProvider(FakeService({"error": "?"})).complete(request, "s", "u")


def test_embedding() -> None:
    provider: HTTPEmbeddingProvider = HTTPEmbeddingProvider(
        FakeService({"embedding": [1, 2, 3]}), 3
    )
    assert np.array_equal(provider.embed("text"), np.array([1.0, 2.0, 3.0]))


def test_embedding_dimension() -> None:
    provider: HTTPEmbeddingProvider = HTTPEmbeddingProvider(
        FakeService({"embedding": [1, 2]}), 3
    )
    with pytest.raises(DimensionMismatch):
        provider.embed("text")


def test_unreachable_service() -> None:
    """Test that connection failure may be retried."""
    service: JSONService = JSONService("http://127.0.0.1:9/complete")
    with pytest.raises(TransientProviderError):
        service.post({"text": "q"})
