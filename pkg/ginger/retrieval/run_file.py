"""TREC run files: `qid Q0 docid rank score tag`."""
from pathlib import Path
from typing import Iterable

from ginger.model import RankedList

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"

DEFAULT_TAG: str = "ginger"


def format_run(ranked_list: RankedList, tag: str = DEFAULT_TAG) -> list[str]:
    """One run line per entry, ranks starting at 1."""
    return [
        f"{ranked_list.query_id} Q0 {passage_id} {rank} {score:.10g} {tag}"
        for rank, (passage_id, score) in enumerate(
            ranked_list.entries, start=1
        )
    ]


def write_run(
    path: Path, ranked_lists: Iterable[RankedList], tag: str = DEFAULT_TAG
) -> None:
    with path.open("w", encoding="utf-8") as output_file:
        for ranked_list in ranked_lists:
            for line in format_run(ranked_list, tag):
                output_file.write(line + "\n")


def read_run(path: Path) -> dict[str, RankedList]:
    """
    Read rankings by query identifier.

    Entries are ordered by score as `trec_eval` does; the rank column is
    ignored.
    """
    scores: dict[str, dict[str, float]] = {}
    with path.open(encoding="utf-8") as input_file:
        for number, line in enumerate(input_file, start=1):
            if not line.strip():
                continue
            parts: list[str] = line.split()
            if len(parts) != 6:
                raise ValueError(
                    f"{path}:{number}: expected 6 columns, got {len(parts)}."
                )
            query_id, _, passage_id, _, score, _ = parts
            scores.setdefault(query_id, {})[passage_id] = float(score)

    return {
        query_id: RankedList.from_scores(query_id, passage_scores)
        for query_id, passage_scores in scores.items()
    }
