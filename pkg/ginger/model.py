"""Shared immutable data types: queries, passages, rankings, and nuggets."""
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable, Iterator, Optional

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"


@dataclass
class PipelineError(Exception):
    """Any expected failure of a pipeline component."""

    message: str

    def __str__(self) -> str:
        return self.message


@dataclass
class DuplicatePassageId(PipelineError):
    """Two passages of one corpus share an identifier."""


@dataclass
class DuplicateQueryId(PipelineError):
    """Two queries of one batch share an identifier."""


@dataclass
class NuggetMismatch(PipelineError):
    """Nugget text is not the passage substring it claims to be."""


@dataclass(frozen=True)
class Query:
    """User information need."""

    id_: str
    text: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError(f"Query `{self.id_}` has empty text.")

    @classmethod
    def from_structure(cls, structure: dict[str, Any]) -> "Query":
        """Parse query from JSON object with `id` and `text` fields."""
        return cls(str(structure["id"]), structure["text"])


@dataclass(frozen=True)
class Passage:
    """Corpus unit: the retrieval and grounding atom."""

    id_: str
    text: str

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError(f"Passage `{self.id_}` has empty text.")

    @classmethod
    def from_structure(cls, structure: dict[str, Any]) -> "Passage":
        """Parse passage from JSON object with `id` and `text` fields."""
        return cls(str(structure["id"]), structure["text"])


def ranking_key(entry: tuple[str, float]) -> tuple[bool, float, str]:
    """
    Canonical order: score descending, passage identifier ascending.

    NaN scores go last, ordered by identifier.
    """
    passage_id, score = entry
    if math.isnan(score):
        return True, 0.0, passage_id
    return False, -score, passage_id


@dataclass(frozen=True)
class RankedList:
    """
    Ordered `(passage id, score)` pairs for one query.

    Entries are always stored in the canonical order, whatever order they were
    given in, so construction is idempotent.
    """

    query_id: str
    entries: tuple[tuple[str, float], ...] = ()

    def __post_init__(self) -> None:
        entries: list[tuple[str, float]] = [
            (str(passage_id), float(score))
            for passage_id, score in self.entries
        ]
        identifiers: set[str] = {passage_id for passage_id, _ in entries}
        if len(identifiers) != len(entries):
            raise DuplicatePassageId(
                f"Ranking for query `{self.query_id}` contains duplicate "
                f"passages."
            )
        object.__setattr__(
            self, "entries", tuple(sorted(entries, key=ranking_key))
        )

    @classmethod
    def from_scores(
        cls,
        query_id: str,
        scores: dict[str, float],
        limit: Optional[int] = None,
    ) -> "RankedList":
        """Construct ranking from a score map, keeping `limit` best entries."""
        entries: list[tuple[str, float]] = sorted(
            scores.items(), key=ranking_key
        )
        if limit is not None:
            entries = entries[:limit]
        return cls(query_id, tuple(entries))

    def passage_ids(self) -> list[str]:
        """Passage identifiers in rank order."""
        return [passage_id for passage_id, _ in self.entries]

    def top(self, count: int) -> "RankedList":
        """First `count` entries."""
        return RankedList(self.query_id, self.entries[:count])

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class InformationNugget:
    """Verbatim span of a passage: `text == passage.text[start:end]`."""

    passage_id: str
    start: int
    end: int
    text: str

    def __post_init__(self) -> None:
        if self.start < 0 or self.end <= self.start:
            raise NuggetMismatch(
                f"Invalid nugget offsets {self.start}..{self.end} in passage "
                f"`{self.passage_id}`."
            )
        if len(self.text) != self.end - self.start:
            raise NuggetMismatch(
                f"Nugget text length does not match offsets "
                f"{self.start}..{self.end}."
            )

    @classmethod
    def from_span(
        cls, passage: Passage, start: int, end: int, text: Optional[str] = None
    ) -> "InformationNugget":
        """
        Create nugget for passage span, checking claimed text if given.

        :param passage: source passage
        :param start: first character offset (Unicode code points)
        :param end: offset after the last character
        :param text: expected nugget text
        """
        span: str = passage.text[start:end]
        if text is not None and text != span:
            raise NuggetMismatch(
                f"Nugget `{text}` is not the span {start}..{end} of passage "
                f"`{passage.id_}`."
            )
        return cls(passage.id_, start, end, span)

    def sort_key(self) -> tuple[str, int, int, str]:
        return self.passage_id, self.start, self.end, self.text


@dataclass(frozen=True)
class FacetCluster:
    """Nuggets about one query facet."""

    cluster_id: str
    nuggets: tuple[InformationNugget, ...]
    rank: Optional[int] = None

    def __post_init__(self) -> None:
        if not self.nuggets:
            raise ValueError(f"Cluster `{self.cluster_id}` is empty.")
        if self.rank is not None and self.rank < 1:
            raise ValueError(f"Cluster rank should be positive: {self.rank}.")

    @property
    def representative_text(self) -> str:
        """Member nugget texts in order, separated by single spaces."""
        return " ".join(nugget.text for nugget in self.nuggets)

    def passage_ids(self) -> list[str]:
        """Source passages of member nuggets, without duplicates."""
        return list(dict.fromkeys(nugget.passage_id for nugget in self.nuggets))

    def with_rank(self, rank: int) -> "FacetCluster":
        return replace(self, rank=rank)


@dataclass(frozen=True)
class TraceEntry:
    """Response sentence with the cluster it summarizes."""

    cluster_id: str
    sentence: str
    sources: tuple[str, ...]

    def to_structure(self) -> dict[str, Any]:
        return {
            "cluster_id": self.cluster_id,
            "sentence": self.sentence,
            "sources": list(self.sources),
        }


@dataclass(frozen=True)
class GeneratedResponse:
    """Final response with passage-level source attribution."""

    query_id: str
    text: str
    cluster_trace: tuple[TraceEntry, ...]
    citations: tuple[str, ...] = field(default=())
    fluency_skipped: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "citations",
            tuple(
                dict.fromkeys(
                    source
                    for entry in self.cluster_trace
                    for source in entry.sources
                )
            ),
        )

    def word_count(self) -> int:
        return len(self.text.split())

    def to_structure(self) -> dict[str, Any]:
        """Response JSONL record."""
        return {
            "query_id": self.query_id,
            "response": self.text,
            "citations": list(self.citations),
            "trace": [entry.to_structure() for entry in self.cluster_trace],
        }

    @classmethod
    def from_structure(cls, structure: dict[str, Any]) -> "GeneratedResponse":
        return cls(
            str(structure["query_id"]),
            structure["response"],
            tuple(
                TraceEntry(
                    entry["cluster_id"],
                    entry["sentence"],
                    tuple(entry["sources"]),
                )
                for entry in structure.get("trace", [])
            ),
        )


def read_jsonl(path: Path) -> Iterator[dict[str, Any]]:
    """Read JSON objects from a file with one object per line."""
    with path.open(encoding="utf-8") as input_file:
        for number, line in enumerate(input_file, start=1):
            if not line.strip():
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as error:
                raise ValueError(f"{path}:{number}: {error.msg}.")


class Corpus:
    """Passages by identifier, in file order."""

    def __init__(self, passages: Iterable[Passage] = ()) -> None:
        self.passages: dict[str, Passage] = {}
        for passage in passages:
            self.add_passage(passage)

    def add_passage(self, passage: Passage) -> None:
        if passage.id_ in self.passages:
            raise DuplicatePassageId(
                f"Passage with duplicate id `{passage.id_}`."
            )
        self.passages[passage.id_] = passage

    @classmethod
    def from_file(cls, path: Path) -> "Corpus":
        """Load corpus from JSONL file with `id` and `text` fields."""
        corpus: Corpus = cls(
            Passage.from_structure(x) for x in read_jsonl(path)
        )
        logging.info(f"Loaded {len(corpus)} passages from {path}.")
        return corpus

    def __getitem__(self, passage_id: str) -> Passage:
        return self.passages[passage_id]

    def __contains__(self, passage_id: str) -> bool:
        return passage_id in self.passages

    def __iter__(self) -> Iterator[Passage]:
        return iter(self.passages.values())

    def __len__(self) -> int:
        return len(self.passages)


def read_queries(path: Path) -> list[Query]:
    """Load query batch from JSONL file, checking identifier uniqueness."""
    queries: list[Query] = [Query.from_structure(x) for x in read_jsonl(path)]
    check_unique_queries(queries)
    return queries


def check_unique_queries(queries: list[Query]) -> None:
    identifiers: set[str] = set()
    for query in queries:
        if query.id_ in identifiers:
            raise DuplicateQueryId(f"Query with duplicate id `{query.id_}`.")
        identifiers.add(query.id_)
