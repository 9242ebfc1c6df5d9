"""Prompt templates for every generation task of the pipeline."""
from dataclasses import dataclass
from enum import Enum
from string import Formatter
from typing import Optional

from ginger.model import PipelineError

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"

PLACEHOLDERS: set[str] = {
    "query",
    "answer",
    "passage",
    "information_cluster",
    "response",
}
DEFAULT_REWRITE_COUNT: int = 3
REWRITE_COUNT_TEXT: str = "Rewrite and return 3 query rewrites"


class TemplateId(Enum):
    """Generation task."""

    INTERMEDIATE_ANSWER = "intermediate_answer"
    QUERY_REWRITE = "query_rewrite"
    NUGGET_DETECTION = "nugget_detection"
    CLUSTER_SUMMARY = "cluster_summary"
    FLUENCY = "fluency"


@dataclass
class MissingBinding(PipelineError):
    """Template placeholder has no value."""


@dataclass
class UnknownTemplate(PipelineError):
    """No template with such identifier."""


@dataclass(frozen=True)
class PromptTemplate:
    """System text and user text pattern with `{placeholder}` fields."""

    template_id: TemplateId
    system_text: str
    user_text_pattern: str

    def __post_init__(self) -> None:
        unknown: set[str] = self.placeholders() - PLACEHOLDERS
        if unknown:
            raise ValueError(f"Unknown placeholders {sorted(unknown)}.")

    def placeholders(self) -> set[str]:
        """Names of the fields in the user text pattern."""
        return {
            name
            for _, name, _, _ in Formatter().parse(self.user_text_pattern)
            if name is not None
        }


TEMPLATES: dict[TemplateId, PromptTemplate] = {
    template.template_id: template
    for template in [
        PromptTemplate(
            TemplateId.INTERMEDIATE_ANSWER,
            "You are a knowledgeable question answering AI that can answer a "
            "wide range of queries either in question form or keywords.",
            "{query}.",
        ),
        PromptTemplate(
            TemplateId.QUERY_REWRITE,
            "You are a query rewriter that understands all necessary "
            "components of a good search query and helps users improve their "
            "queries.",
            "Rewrite and return 3 query rewrites, each of which should cover a "
            "different aspect of the answer. The query rewrites should still "
            "be relevant to the original query. Return only the queries, one "
            "in each line. Do not add context, or any other information, or "
            "text.\n\noriginal query: {query}\nanswer: {answer}",
        ),
        PromptTemplate(
            TemplateId.NUGGET_DETECTION,
            "You are given a query and a relevant passage. Your task is to "
            "pinpoint and annotate the succinct excerpts within the passage "
            "that directly respond to the query. Ensure these excerpts are "
            "brief yet complete. Once identified, copy the entire passage and "
            "encapsulate the relevant snippets using <START> and </END> tags "
            "without changing any part of the original text. This includes "
            "avoiding modifications to words, punctuation, or formatting, as "
            "well as not adding any extra characters, symbols, or spaces.",
            "Question: {query} Passage: {passage}",
        ),
        PromptTemplate(
            TemplateId.CLUSTER_SUMMARY,
            "Summarize the provided information into one sentence "
            "(approximately 35 words). Generate one-sentence long summary that "
            "is short, concise and only contains the information provided.",
            "{information_cluster}.",
        ),
        PromptTemplate(
            TemplateId.FLUENCY,
            "Rephrase the response given a query to improve its fluency. Do "
            "not change the information included in the response. Do not add "
            "information not mentioned in the original response.",
            "Question: {query} Response: {response}",
        ),
    ]
}


def get_template(template_id: TemplateId) -> PromptTemplate:
    """Find template, accepting string identifiers as well."""
    try:
        return TEMPLATES[TemplateId(template_id)]
    except (KeyError, ValueError):
        raise UnknownTemplate(f"Unknown template `{template_id}`.")


def render_prompt(
    template_id: TemplateId,
    bindings: dict[str, str],
    rewrite_count: Optional[int] = None,
) -> tuple[str, str]:
    """
    Substitute placeholders of the template.

    :param template_id: generation task
    :param bindings: placeholder values
    :param rewrite_count: number of rewrites to ask for; the rewrite template
        asks for 3 unless told otherwise
    :returns: system text and user text
    """
    template: PromptTemplate = get_template(template_id)

    for name in sorted(template.placeholders()):
        if name not in bindings:
            raise MissingBinding(name)

    user_text: str = template.user_text_pattern.format(**bindings)

    if (
        template.template_id == TemplateId.QUERY_REWRITE
        and rewrite_count is not None
        and rewrite_count != DEFAULT_REWRITE_COUNT
    ):
        user_text = user_text.replace(
            REWRITE_COUNT_TEXT,
            REWRITE_COUNT_TEXT.replace("3", str(rewrite_count)),
            1,
        )

    return template.system_text, user_text
