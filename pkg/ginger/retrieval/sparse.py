"""In-memory BM25 index."""
import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from ginger.model import DuplicatePassageId, Passage, RankedList
from ginger.text import tokenize

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"

K1: float = 1.2
B: float = 0.75
SNAPSHOT_VERSION: int = 1


@dataclass
class SparseIndex:
    """
    Inverted index over tokenized passages.

    Immutable after `index_corpus`, so concurrent searches are safe.
    """

    postings: dict[str, list[tuple[str, int]]] = field(default_factory=dict)
    doc_lengths: dict[str, int] = field(default_factory=dict)
    avg_doc_length: float = 0.0
    doc_count: int = 0

    def idf(self, term: str) -> float:
        """Inverse document frequency, always positive."""
        frequency: int = len(self.postings.get(term, []))
        return math.log(
            1.0 + (self.doc_count - frequency + 0.5) / (frequency + 0.5)
        )

    def save(self, path: Path) -> None:
        """Write JSON snapshot of postings and document lengths."""
        structure: dict[str, Any] = {
            "version": SNAPSHOT_VERSION,
            "doc_lengths": self.doc_lengths,
            "postings": {
                term: [[passage_id, count] for passage_id, count in postings]
                for term, postings in self.postings.items()
            },
        }
        with path.open("w", encoding="utf-8") as output_file:
            json.dump(structure, output_file, ensure_ascii=False)
        logging.info(
            f"Index with {self.doc_count} passages and {len(self.postings)} "
            f"terms written to {path}."
        )

    @classmethod
    def load(cls, path: Path) -> "SparseIndex":
        """Read JSON snapshot written by `save`."""
        with path.open(encoding="utf-8") as input_file:
            structure: dict[str, Any] = json.load(input_file)

        if structure.get("version") != SNAPSHOT_VERSION:
            raise ValueError(f"Unsupported index snapshot version in {path}.")

        doc_lengths: dict[str, int] = {
            str(key): int(value)
            for key, value in structure["doc_lengths"].items()
        }
        postings: dict[str, list[tuple[str, int]]] = {
            term: [(str(passage_id), int(count)) for passage_id, count in x]
            for term, x in structure["postings"].items()
        }
        return cls(
            postings,
            doc_lengths,
            compute_average(doc_lengths.values()),
            len(doc_lengths),
        )


def compute_average(lengths: Iterable[int]) -> float:
    lengths = list(lengths)
    return sum(lengths) / len(lengths) if lengths else 0.0


def index_corpus(passages: Iterable[Passage]) -> SparseIndex:
    """
    Build BM25 index.

    Text is lowercased, non-alphanumeric characters are replaced with spaces,
    and the result is split on whitespace.

    :raises DuplicatePassageId: if two passages share an identifier
    """
    postings: dict[str, list[tuple[str, int]]] = {}
    doc_lengths: dict[str, int] = {}

    for passage in passages:
        if passage.id_ in doc_lengths:
            raise DuplicatePassageId(
                f"Passage with duplicate id `{passage.id_}`."
            )
        tokens: list[str] = tokenize(passage.text)
        doc_lengths[passage.id_] = len(tokens)
        for term, count in Counter(tokens).items():
            postings.setdefault(term, []).append((passage.id_, count))

    logging.info(
        f"Indexed {len(doc_lengths)} passages, {len(postings)} terms."
    )
    return SparseIndex(
        postings,
        doc_lengths,
        compute_average(doc_lengths.values()),
        len(doc_lengths),
    )


def bm25_scores(index: SparseIndex, query_text: str) -> dict[str, float]:
    """
    BM25 score of every passage containing at least one query token.

    A token repeated in the query contributes once per occurrence.
    """
    scores: dict[str, float] = {}

    for term in tokenize(query_text):
        if term not in index.postings:
            continue
        idf: float = index.idf(term)
        for passage_id, count in index.postings[term]:
            length_ratio: float = (
                index.doc_lengths[passage_id] / index.avg_doc_length
            )
            denominator: float = count + K1 * (1.0 - B + B * length_ratio)
            scores[passage_id] = (
                scores.get(passage_id, 0.0)
                + idf * count * (K1 + 1.0) / denominator
            )

    return scores


def sparse_search(
    index: SparseIndex, query_text: str, n: int, query_id: str = ""
) -> RankedList:
    """
    Top-`n` passages by BM25.

    Passages without query tokens are not returned, so the list may be shorter
    than `n` or empty.
    """
    if n < 1:
        raise ValueError(f"Search depth should be positive: {n}.")
    return RankedList.from_scores(
        query_id, bm25_scores(index, query_text), n
    )
