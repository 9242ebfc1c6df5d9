"""Text processing shared by retrieval, scoring, and generation."""
import re
from collections import Counter

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"

NON_ALPHANUMERIC: re.Pattern = re.compile(r"[^\w\s]|_")

# Sentence is a substring ending at `.`, `?`, or `!` followed by whitespace or
# the end of the text.
SENTENCE_END: re.Pattern = re.compile(r"[.?!]+(?=\s|$)")
SENTENCE: re.Pattern = re.compile(r"\S(?:.*?)(?:[.?!]+(?=\s|$)|$)", re.DOTALL)

STOP_WORDS: set[str] = {
    "a", "an", "and", "are", "as", "at", "be", "been", "by", "for", "from",
    "has", "have", "in", "is", "it", "its", "of", "on", "or", "that", "the",
    "this", "to", "was", "were", "with",
}  # fmt: skip


def tokenize(text: str) -> list[str]:
    """
    Lowercase text, replace non-alphanumeric characters with spaces, and split
    on whitespace.  No stemming.
    """
    return NON_ALPHANUMERIC.sub(" ", text.lower()).split()


def content_words(text: str) -> list[str]:
    """
    Distinct non-stop words of the text, most frequent first, ties in code point
    order.  Original case is kept.
    """
    words: list[str] = [
        word
        for word in NON_ALPHANUMERIC.sub(" ", text).split()
        if word.lower() not in STOP_WORDS
    ]
    counter: Counter = Counter(words)
    return sorted(counter, key=lambda word: (-counter[word], word))


def query_terms(text: str) -> set[str]:
    """Lowercase content tokens of a query."""
    return {token for token in tokenize(text) if token not in STOP_WORDS}


def count_words(text: str) -> int:
    """Whitespace token count."""
    return len(text.split())


def first_words(text: str, count: int) -> str:
    """First `count` whitespace tokens joined by single spaces."""
    return " ".join(text.split()[:count])


def sentence_spans(text: str) -> list[tuple[int, int]]:
    """Character spans of sentences, leading whitespace excluded."""
    return [match.span() for match in SENTENCE.finditer(text)]


def truncate_to_sentences(text: str, max_words: int) -> tuple[str, bool]:
    """
    Cut text at the last sentence boundary that keeps it within `max_words`.

    If even the first sentence is too long, cut it to `max_words` words.

    :returns: resulting text and whether it was truncated
    """
    if count_words(text) <= max_words:
        return text, False

    best: str = ""
    for match in SENTENCE_END.finditer(text):
        prefix: str = text[: match.end()].strip()
        if count_words(prefix) > max_words:
            break
        best = prefix

    if not best:
        best = first_words(text, max_words)

    return best, True
