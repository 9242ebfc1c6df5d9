"""
Query rewriting before first-pass retrieval.

An intermediate answer is generated for the query without any documents, then
`l` rewrites are asked for, each covering a different aspect of that answer.
The search string is

    (q + q_1') + (q + q_2') + ... + (q + q_l')

where `+` is concatenation with a single space.  The composed string is used
only for first-pass retrieval: reranking, curation, and generation get the
original query.
"""
import logging
import re
from dataclasses import dataclass, field
from typing import Optional

from ginger.llm.gateway import CompletionRequest, LLMGateway
from ginger.llm.prompts import TemplateId
from ginger.model import PipelineError, Query
from ginger.pipeline_configuration import RewriteStrategy

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"

INTERMEDIATE_ANSWER_MAX_TOKENS: int = 100
REWRITES_MAX_TOKENS: int = 256

LIST_PREFIX: re.Pattern = re.compile(r"^(?:\d+[.)]|[-*•])(?:\s+|$)")


@dataclass
class RewriteParseFailure(PipelineError):
    """Completion contains no usable rewrite."""


@dataclass(frozen=True)
class RewriteSet:
    """Intermediate answer and rewrites for one query."""

    original: Query
    intermediate_answer: str
    rewrites: tuple[str, ...]
    repaired: bool = False


@dataclass(frozen=True)
class ComposedQuery:
    """
    Search string for first-pass retrieval.

    `rewrite_set` keeps the intermediate answer and rewrites the string was
    built from, if any.
    """

    text: str
    l: int
    rewrite_set: Optional[RewriteSet] = field(default=None, compare=False)


def generate_intermediate_answer(
    gateway: LLMGateway, query: Query, temperature: float = 0.0
) -> str:
    """Short answer to the query from the model alone."""
    return gateway.complete_text(
        CompletionRequest(
            TemplateId.INTERMEDIATE_ANSWER,
            {"query": query.text},
            max_tokens=INTERMEDIATE_ANSWER_MAX_TOKENS,
            temperature=temperature,
        )
    )


def parse_rewrites(completion: str, query: Query, l: int) -> RewriteSet:
    """
    Get `l` rewrites from completion lines.

    Blank lines and list markers (`1.`, `2)`, `-`, `*`) followed by whitespace
    are removed, so `3.5 mm` stays intact.  If there are fewer usable lines than
    `l`, the list is padded with the original query and marked as repaired.

    :raises RewriteParseFailure: if there is no usable line
    """
    lines: list[str] = []
    for line in completion.splitlines():
        line = LIST_PREFIX.sub("", line.strip()).strip()
        if line:
            lines.append(line)

    if not lines:
        raise RewriteParseFailure(
            f"No rewrites for query `{query.id_}` in completion."
        )

    rewrites: list[str] = lines[:l]
    repaired: bool = len(rewrites) < l
    if repaired:
        logging.warning(
            f"Only {len(rewrites)} of {l} rewrites for query `{query.id_}`, "
            f"padding with the original query."
        )
        rewrites += [query.text] * (l - len(rewrites))

    return RewriteSet(query, "", tuple(rewrites), repaired)


def generate_rewrites(
    gateway: LLMGateway,
    query: Query,
    answer: str,
    l: int,
    temperature: float = 0.0,
) -> RewriteSet:
    """
    Ask for `l` rewrites covering different aspects of the answer.

    :param gateway: text generation gateway
    :param query: original query
    :param answer: intermediate answer
    :param l: number of rewrites, at least 1
    """
    if l < 1:
        raise ValueError(f"Number of rewrites should be positive: {l}.")

    completion: str = gateway.complete(
        CompletionRequest(
            TemplateId.QUERY_REWRITE,
            {"query": query.text, "answer": answer},
            max_tokens=REWRITES_MAX_TOKENS,
            temperature=temperature,
            rewrite_count=l,
        )
    )
    rewrite_set: RewriteSet = parse_rewrites(completion, query, l)
    return RewriteSet(
        query, answer, rewrite_set.rewrites, rewrite_set.repaired
    )


def rewrite_query(
    gateway: LLMGateway, query: Query, l: int, temperature: float = 0.0
) -> RewriteSet:
    """Intermediate answer followed by `l` rewrites."""
    answer: str = generate_intermediate_answer(gateway, query, temperature)
    return generate_rewrites(gateway, query, answer, l, temperature)


def compose_search_string(query: Query, rewrites: list[str]) -> ComposedQuery:
    """
    Join `query + rewrite` blocks with single spaces.

    Without rewrites, the search string is the query itself.
    """
    if not rewrites:
        return ComposedQuery(query.text, 0)
    return ComposedQuery(
        " ".join(f"{query.text} {rewrite}" for rewrite in rewrites),
        len(rewrites),
    )


def compose_for_strategy(
    query: Query, rewrites: list[str], strategy: RewriteStrategy
) -> ComposedQuery:
    """
    Build search string for a rewriting strategy.

    `ORIGINAL` ignores rewrites, `REWRITES_ONLY` joins rewrites without the
    original query (falling back to the query if there are none), and
    `ORIGINAL_PLUS_REWRITES` is `compose_search_string`.
    """
    if strategy == RewriteStrategy.ORIGINAL:
        return ComposedQuery(query.text, 0)
    if strategy == RewriteStrategy.REWRITES_ONLY:
        if not rewrites:
            return ComposedQuery(query.text, 0)
        return ComposedQuery(" ".join(rewrites), len(rewrites))
    return compose_search_string(query, rewrites)
