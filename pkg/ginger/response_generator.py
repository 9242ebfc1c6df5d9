"""
Response generation: one summary sentence per facet cluster, packing under the
word budget, and the final fluency rewrite.
"""
import logging
from dataclasses import dataclass, replace

from ginger.llm.gateway import CompletionRequest, LLMGateway
from ginger.llm.prompts import TemplateId
from ginger.model import (
    FacetCluster,
    GeneratedResponse,
    PipelineError,
    TraceEntry,
)
from ginger.text import count_words, first_words, truncate_to_sentences

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"

SUMMARY_MAX_WORDS: int = 70
SUMMARY_MAX_TOKENS: int = 128
FLUENCY_TOLERANCE: float = 1.1


@dataclass
class NoSummaries(PipelineError):
    """Nothing to assemble a response from."""


@dataclass(frozen=True)
class ClusterSummary:
    """Sentence summarizing one cluster, with its source passages."""

    cluster_id: str
    sentence: str
    source_passage_ids: tuple[str, ...]
    truncated: bool = False

    @property
    def word_count(self) -> int:
        return count_words(self.sentence)


@dataclass(frozen=True)
class DraftResponse:
    """Summaries selected for the response, in cluster rank order."""

    query_id: str
    summaries: tuple[ClusterSummary, ...]

    @property
    def total_words(self) -> int:
        return sum(summary.word_count for summary in self.summaries)

    @property
    def text(self) -> str:
        return " ".join(summary.sentence for summary in self.summaries)

    def trace(self) -> tuple[TraceEntry, ...]:
        return tuple(
            TraceEntry(x.cluster_id, x.sentence, x.source_passage_ids)
            for x in self.summaries
        )


def summarize_cluster(
    gateway: LLMGateway,
    cluster: FacetCluster,
    max_words: int = SUMMARY_MAX_WORDS,
    temperature: float = 0.0,
) -> ClusterSummary:
    """
    Summarize cluster nuggets into one sentence.

    Completions longer than `max_words` are cut at the last sentence end that
    fits, and the summary is marked as truncated.
    """
    sentence: str = " ".join(
        gateway.complete_text(
            CompletionRequest(
                TemplateId.CLUSTER_SUMMARY,
                {"information_cluster": cluster.representative_text},
                max_tokens=SUMMARY_MAX_TOKENS,
                temperature=temperature,
            )
        ).split()
    )
    sentence, truncated = truncate_to_sentences(sentence, max_words)
    if truncated:
        logging.debug(f"Summary of `{cluster.cluster_id}` truncated.")

    return ClusterSummary(
        cluster.cluster_id, sentence, tuple(cluster.passage_ids()), truncated
    )


def assemble_response(
    query_id: str, summaries: list[ClusterSummary], word_budget: int
) -> DraftResponse:
    """
    Greedily pack summaries in rank order under the word budget.

    A summary that does not fit is skipped and the next one is tried.  The first
    summary is always included, cut to the budget if it is longer.

    :param query_id: query identifier
    :param summaries: summaries ordered by cluster rank
    :param word_budget: maximum number of words
    :raises NoSummaries: if there are no summaries
    """
    if not summaries:
        raise NoSummaries(f"No summaries for query `{query_id}`.")

    first: ClusterSummary = summaries[0]
    if first.word_count > word_budget:
        first = replace(
            first,
            sentence=first_words(first.sentence, word_budget),
            truncated=True,
        )

    selected: list[ClusterSummary] = [first]
    total: int = first.word_count

    for summary in summaries[1:]:
        if total + summary.word_count <= word_budget:
            selected.append(summary)
            total += summary.word_count

    return DraftResponse(query_id, tuple(selected))


def improve_fluency(
    gateway: LLMGateway,
    query_text: str,
    draft: DraftResponse,
    word_budget: int,
    tolerance: float = FLUENCY_TOLERANCE,
    temperature: float = 0.0,
) -> GeneratedResponse:
    """
    Rephrase the draft into a fluent response.

    The draft text is kept if the provider fails or the rephrased text is longer
    than `word_budget * tolerance` words.  Citations and trace always come from
    the draft.
    """
    trace: tuple[TraceEntry, ...] = draft.trace()

    try:
        text: str = gateway.complete_text(
            CompletionRequest(
                TemplateId.FLUENCY,
                {"query": query_text, "response": draft.text},
                max_tokens=int(word_budget * tolerance * 2),
                temperature=temperature,
            )
        )
    except PipelineError as error:
        logging.warning(
            f"Fluency rewrite skipped for query `{draft.query_id}`: {error}"
        )
        return GeneratedResponse(draft.query_id, draft.text, trace, (), True)

    if count_words(text) > word_budget * tolerance:
        logging.warning(
            f"Fluency rewrite for query `{draft.query_id}` has "
            f"{count_words(text)} words, keeping the draft."
        )
        return GeneratedResponse(draft.query_id, draft.text, trace, (), True)

    return GeneratedResponse(draft.query_id, text, trace)
