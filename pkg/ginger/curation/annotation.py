"""
Nugget detection by tag annotation and verification of annotated text.

The model is asked to copy the passage, wrapping relevant snippets in
`<START>` and `</END>`.  Annotation is accepted only if removing the tags gives
back the passage.  If it does not, one more comparison is made with runs of
whitespace collapsed into single spaces; nugget offsets then still point into
the original passage.
"""
import logging
import re
from dataclasses import dataclass

from ginger.llm.gateway import CompletionRequest, LLMGateway
from ginger.llm.prompts import TemplateId
from ginger.model import InformationNugget, Passage, PipelineError

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"

START_TAG: str = "<START>"
END_TAG: str = "</END>"
TAG: re.Pattern = re.compile(f"{re.escape(START_TAG)}|{re.escape(END_TAG)}")
WHITESPACE_RUN: re.Pattern = re.compile(r"\s+")
ANNOTATION_MAX_TOKENS: int = 1024


@dataclass
class AnnotationMismatch(PipelineError):
    """Annotated text without tags differs from the passage."""


@dataclass
class MalformedTags(PipelineError):
    """Tags are unpaired or nested."""


@dataclass(frozen=True)
class AnnotatedPassage:
    """Model output for a passage, kept verbatim."""

    passage_id: str
    annotated_text: str


def detect_nuggets(
    gateway: LLMGateway, query_text: str, passage: Passage
) -> AnnotatedPassage:
    """Ask the model to tag relevant snippets of the passage."""
    completion: str = gateway.complete(
        CompletionRequest(
            TemplateId.NUGGET_DETECTION,
            {"query": query_text, "passage": passage.text},
            max_tokens=ANNOTATION_MAX_TOKENS,
        )
    )
    return AnnotatedPassage(passage.id_, completion)


def strip_tags(annotated_text: str) -> tuple[str, list[tuple[int, int]]]:
    """
    Remove tags.

    :returns: text without tags and tagged spans as offsets into it
    :raises MalformedTags: if tags are nested or unpaired
    """
    parts: list[str] = []
    spans: list[tuple[int, int]] = []
    length: int = 0
    start: int = -1
    position: int = 0

    for match in TAG.finditer(annotated_text):
        parts.append(annotated_text[position : match.start()])
        length += match.start() - position
        position = match.end()

        if match.group() == START_TAG:
            if start >= 0:
                raise MalformedTags(f"Nested {START_TAG} at {match.start()}.")
            start = length
        else:
            if start < 0:
                raise MalformedTags(
                    f"{END_TAG} without {START_TAG} at {match.start()}."
                )
            spans.append((start, length))
            start = -1

    if start >= 0:
        raise MalformedTags(f"{START_TAG} without {END_TAG}.")

    parts.append(annotated_text[position:])
    return "".join(parts), spans


def collapse_whitespace(text: str) -> tuple[str, list[int], list[int]]:
    """
    Replace every whitespace run with a single space.

    :returns: collapsed text; for every position of the source text, position
        of the collapsed character it became part of; for every collapsed
        character, end offset of its source characters
    """
    collapsed: list[str] = []
    positions: list[int] = []
    ends: list[int] = []
    index: int = 0

    while index < len(text):
        match = WHITESPACE_RUN.match(text, index)
        if match:
            positions += [len(collapsed)] * (match.end() - index)
            collapsed.append(" ")
            ends.append(match.end())
            index = match.end()
        else:
            positions.append(len(collapsed))
            collapsed.append(text[index])
            ends.append(index + 1)
            index += 1

    return "".join(collapsed), positions, ends


def map_spans(
    stripped: str, original: str, spans: list[tuple[int, int]]
) -> list[tuple[int, int]]:
    """
    Map spans of `stripped` to `original`, given that both texts are equal
    after whitespace collapsing.
    """
    _, stripped_positions, _ = collapse_whitespace(stripped)
    _, original_positions, original_ends = collapse_whitespace(original)

    starts: dict[int, int] = {}
    for offset, position in enumerate(original_positions):
        starts.setdefault(position, offset)

    result: list[tuple[int, int]] = []
    for start, end in spans:
        first: int = stripped_positions[start]
        last: int = stripped_positions[end - 1]
        result.append((starts[first], original_ends[last]))
    return result


def parse_annotations(
    original_text: str, annotated: AnnotatedPassage
) -> list[InformationNugget]:
    """
    One nugget per tagged span, with offsets into the original text.

    Empty and whitespace-only spans are skipped.

    :raises MalformedTags: if tags are nested or unpaired
    :raises AnnotationMismatch: if the text without tags is not the original
        one, even after collapsing whitespace
    """
    stripped, spans = strip_tags(annotated.annotated_text)
    spans = [x for x in spans if stripped[x[0] : x[1]].strip()]

    if stripped != original_text:
        if (
            collapse_whitespace(stripped)[0]
            != collapse_whitespace(original_text)[0]
        ):
            raise AnnotationMismatch(
                f"Annotation of passage `{annotated.passage_id}` altered its "
                f"text."
            )
        logging.debug(
            f"Annotation of passage `{annotated.passage_id}` accepted after "
            f"whitespace normalization."
        )
        spans = map_spans(stripped, original_text, spans)

    return [
        InformationNugget(
            annotated.passage_id, start, end, original_text[start:end]
        )
        for start, end in spans
    ]
