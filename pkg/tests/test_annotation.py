"""Test nugget annotation parsing."""
import random

import pytest

from ginger.curation.annotation import (
    END_TAG,
    START_TAG,
    AnnotatedPassage,
    AnnotationMismatch,
    MalformedTags,
    detect_nuggets,
    parse_annotations,
)
from ginger.model import InformationNugget, Passage
from tests import create_gateway

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"

WORDS: list[str] = ["the", "hive", "nectar", "bees", "water", "cells", "wax"]


def parse(original: str, annotated: str) -> list[InformationNugget]:
    return parse_annotations(original, AnnotatedPassage("p", annotated))


def test_single_nugget() -> None:
    """Test one tagged word."""
    assert parse("a b c", "a <START>b</END> c") == [
        InformationNugget("p", 2, 3, "b")
    ]


def test_no_nuggets() -> None:
    assert parse("a b c", "a b c") == []


def test_altered_text() -> None:
    """Test that changed text is rejected."""
    with pytest.raises(AnnotationMismatch):
        parse("a b c", "a <START>B</END> c")


def test_unpaired_tag() -> None:
    with pytest.raises(MalformedTags):
        parse("a b c", "a <START>b c")
    with pytest.raises(MalformedTags):
        parse("a b c", "a b</END> c")


def test_nested_tags() -> None:
    with pytest.raises(MalformedTags):
        parse("a b c", "<START>a <START>b</END> c</END>")


def test_empty_span() -> None:
    """Test that whitespace-only spans give no nuggets."""
    assert parse("a b", "a<START> </END>b") == []


def test_whitespace_normalization() -> None:
    """Test that offsets point into the original text after collapsing."""
    nuggets: list[InformationNugget] = parse(
        "a  b\nc", "a <START>b c</END>"
    )
    assert nuggets == [InformationNugget("p", 3, 6, "b\nc")]


def test_detect_nuggets() -> None:
    """Test that mock tags the sentence with query terms."""
    passage: Passage = Passage(
        "p05", "Grass is green. Honey bees collect nectar from flowers."
    )
    annotated: AnnotatedPassage = detect_nuggets(
        create_gateway(), "how do honey bees make honey", passage
    )
    nuggets: list[InformationNugget] = parse_annotations(
        passage.text, annotated
    )
    assert [x.text for x in nuggets] == [
        "Honey bees collect nectar from flowers."
    ]


def test_detect_nothing() -> None:
    passage: Passage = Passage("p", "Grass is green.")
    annotated: AnnotatedPassage = detect_nuggets(
        create_gateway(), "honey", passage
    )
    assert annotated.annotated_text == passage.text


def test_random_annotations() -> None:
    """
    Test that every tagged span of a random annotation is recovered with
    offsets into the passage, and that changing one character of the
    annotated text outside of tags is detected.
    """
    generator: random.Random = random.Random(3)

    for _ in range(100):
        words: list[str] = generator.choices(WORDS, k=generator.randint(1, 15))
        original: str = " ".join(words)

        parts: list[str] = []
        expected: list[tuple[int, int]] = []
        position: int = 0
        index: int = 0
        while index < len(words):
            if index:
                parts.append(" ")
                position += 1
            if generator.random() < 0.3:
                length: int = generator.randint(1, len(words) - index)
                span: str = " ".join(words[index : index + length])
                parts.append(START_TAG + span + END_TAG)
                expected.append((position, position + len(span)))
                position += len(span)
                index += length
            else:
                parts.append(words[index])
                position += len(words[index])
                index += 1
        annotated: str = "".join(parts)

        nuggets: list[InformationNugget] = parse(original, annotated)
        assert [(x.start, x.end) for x in nuggets] == expected
        for nugget in nuggets:
            assert original[nugget.start : nugget.end] == nugget.text

        # Tags have no lowercase letters.
        letters: list[int] = [
            i for i, character in enumerate(annotated) if character.islower()
        ]
        if letters:
            i: int = generator.choice(letters)
            mutated: str = annotated[:i] + "#" + annotated[i + 1 :]
            with pytest.raises(AnnotationMismatch):
                parse(original, mutated)
