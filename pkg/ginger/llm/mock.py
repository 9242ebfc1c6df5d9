"""Deterministic provider for offline runs and tests."""
import threading
import time
from collections import Counter

from ginger.curation.annotation import END_TAG, START_TAG
from ginger.llm.gateway import CompletionRequest
from ginger.llm.prompts import DEFAULT_REWRITE_COUNT, TemplateId
from ginger.text import (
    content_words,
    first_words,
    query_terms,
    sentence_spans,
    tokenize,
)

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"

ANSWER_WORDS: int = 3
SUMMARY_WORDS: int = 35


def mock_answer(query: str) -> str:
    """Top content words of the query."""
    return " ".join(content_words(query)[:ANSWER_WORDS])


def mock_rewrites(query: str, answer: str, count: int) -> str:
    """One `<query> <content word>` line per content word of the answer."""
    return "\n".join(
        f"{query} {word}" for word in content_words(answer)[:count]
    )


def mock_annotation(query: str, passage: str) -> str:
    """Passage with every sentence containing a query term wrapped in tags."""
    terms: set[str] = query_terms(query)
    parts: list[str] = []
    position: int = 0
    for start, end in sentence_spans(passage):
        if terms & set(tokenize(passage[start:end])):
            parts.append(passage[position:start])
            parts.append(START_TAG + passage[start:end] + END_TAG)
            position = end
    parts.append(passage[position:])
    return "".join(parts)


class MockProvider:
    """
    Pure function of the request: identical requests get identical texts.

    :param latency: seconds to sleep per call, to imitate a remote model
    """

    def __init__(self, latency: float = 0.0) -> None:
        self.latency: float = latency
        self.calls: Counter = Counter()
        self._lock: threading.Lock = threading.Lock()

    def complete(
        self, request: CompletionRequest, system_text: str, user_text: str
    ) -> str:
        with self._lock:
            self.calls[request.template_id] += 1
        if self.latency:
            time.sleep(self.latency)

        bindings: dict[str, str] = request.bindings
        template_id: TemplateId = request.template_id

        if template_id == TemplateId.INTERMEDIATE_ANSWER:
            return mock_answer(bindings["query"])
        if template_id == TemplateId.QUERY_REWRITE:
            count: int = request.rewrite_count or DEFAULT_REWRITE_COUNT
            return mock_rewrites(bindings["query"], bindings["answer"], count)
        if template_id == TemplateId.NUGGET_DETECTION:
            return mock_annotation(bindings["query"], bindings["passage"])
        if template_id == TemplateId.CLUSTER_SUMMARY:
            return first_words(bindings["information_cluster"], SUMMARY_WORDS)
        return bindings["response"]
