"""
Retrieval and response evaluation: Recall@k over TREC runs and strict vital
nugget recall over nugget assignments.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Optional, Protocol

from ginger.model import PipelineError, RankedList, read_jsonl

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"

RELEVANCE_THRESHOLD: int = 1


@dataclass
class NoJudgedQueries(PipelineError):
    """No query can be scored."""


@dataclass
class NoVitalNuggets(PipelineError):
    """Query has no vital gold nuggets, so strict score is undefined."""


class Qrels:
    """Graded relevance judgments: query identifier to passage grades."""

    def __init__(self) -> None:
        self.grades: dict[str, dict[str, int]] = {}

    def add(self, query_id: str, passage_id: str, grade: int) -> None:
        if grade < 0:
            raise ValueError(f"Negative grade {grade} for `{passage_id}`.")
        self.grades.setdefault(query_id, {})[passage_id] = grade

    def relevant(self, query_id: str) -> set[str]:
        """Passages with grade at least 1."""
        return {
            passage_id
            for passage_id, grade in self.grades.get(query_id, {}).items()
            if grade >= RELEVANCE_THRESHOLD
        }

    def query_ids(self) -> list[str]:
        return sorted(self.grades)

    @classmethod
    def from_file(cls, path: Path) -> "Qrels":
        """Read whitespace-separated `qid 0 docid grade` lines."""
        qrels: Qrels = cls()
        with path.open(encoding="utf-8") as input_file:
            for number, line in enumerate(input_file, start=1):
                if not line.strip():
                    continue
                parts: list[str] = line.split()
                if len(parts) != 4:
                    raise ValueError(
                        f"{path}:{number}: expected 4 columns, got "
                        f"{len(parts)}."
                    )
                qrels.add(parts[0], parts[2], int(parts[3]))
        return qrels


class Vitality(Enum):
    """Importance of a gold nugget."""

    VITAL = "vital"
    OKAY = "okay"


@dataclass(frozen=True)
class GoldNugget:
    """Reference fact a response should contain."""

    nugget_id: str
    text: str
    vitality: Vitality

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError(f"Gold nugget `{self.nugget_id}` is empty.")


def load_gold_nuggets(path: Path) -> dict[str, list[GoldNugget]]:
    """Read `{query_id, nugget_id, text, vitality}` JSONL records."""
    gold: dict[str, list[GoldNugget]] = {}
    for structure in read_jsonl(path):
        gold.setdefault(str(structure["query_id"]), []).append(
            GoldNugget(
                str(structure["nugget_id"]),
                structure["text"],
                Vitality(structure["vitality"]),
            )
        )
    return gold


@dataclass(frozen=True)
class NuggetAssignment:
    """Whether the response supports each gold nugget."""

    query_id: str
    supported: dict[str, bool] = field(hash=False)


class NuggetJudge(Protocol):
    """Decides whether a response supports a nugget."""

    def supports(self, response_text: str, nugget: GoldNugget) -> bool:
        ...


class SubstringJudge:
    """
    Supported iff the case-folded nugget text occurs in the case-folded
    response.  Paraphrases are not recognized.
    """

    def supports(self, response_text: str, nugget: GoldNugget) -> bool:
        return nugget.text.casefold() in response_text.casefold()


def recall_at_k(
    run: RankedList, qrels: Qrels, k: int
) -> Optional[float]:
    """
    Fraction of relevant passages among the first `k` of the run.

    :returns: recall, or `None` if the query has no relevant passages
    """
    if k < 1:
        raise ValueError(f"Cutoff should be positive: {k}.")
    relevant: set[str] = qrels.relevant(run.query_id)
    if not relevant:
        return None
    retrieved: set[str] = set(run.passage_ids()[:k])
    return len(relevant & retrieved) / len(relevant)


def v_strict(assignment: NuggetAssignment, gold: list[GoldNugget]) -> float:
    """
    Fraction of vital gold nuggets supported by the response; okay nuggets are
    ignored.

    :raises NoVitalNuggets: if there are no vital nuggets
    """
    missing: list[str] = [
        x.nugget_id for x in gold if x.nugget_id not in assignment.supported
    ]
    if missing:
        raise ValueError(f"Assignment does not cover nuggets {missing}.")

    vital: list[GoldNugget] = [x for x in gold if x.vitality == Vitality.VITAL]
    if not vital:
        raise NoVitalNuggets(
            f"Query `{assignment.query_id}` has no vital nuggets."
        )
    supported: int = sum(assignment.supported[x.nugget_id] for x in vital)
    return supported / len(vital)


def assign_nuggets(
    judge: NuggetJudge,
    response_text: str,
    gold: list[GoldNugget],
    query_id: str = "",
) -> NuggetAssignment:
    """Ask the judge about every gold nugget."""
    if not gold:
        raise ValueError(f"No gold nuggets for query `{query_id}`.")
    return NuggetAssignment(
        query_id,
        {x.nugget_id: bool(judge.supports(response_text, x)) for x in gold},
    )


def macro_average(scores: dict[str, float]) -> float:
    """
    Arithmetic mean of per-query scores.

    :raises NoJudgedQueries: if there are no scores
    """
    if not scores:
        raise NoJudgedQueries("No query can be scored.")
    return math.fsum(scores.values()) / len(scores)


@dataclass
class EvalReport:
    """Per-query scores, excluded queries, and the macro average."""

    metric: str
    scores: dict[str, float]
    excluded: list[str]
    macro: float

    def to_structure(self) -> dict[str, Any]:
        return {
            "metric": self.metric,
            "macro": self.macro,
            "per_query": self.scores,
            "excluded": self.excluded,
        }


def evaluate_recall(
    runs: dict[str, RankedList], qrels: Qrels, k: int
) -> EvalReport:
    """
    Recall@k for every judged query.

    A judged query missing from the runs has recall 0.  Queries without
    relevant passages are excluded.
    """
    scores: dict[str, float] = {}
    excluded: list[str] = []

    for query_id in sorted(set(qrels.query_ids()) | set(runs)):
        run: RankedList = runs.get(query_id, RankedList(query_id))
        recall: Optional[float] = recall_at_k(run, qrels, k)
        if recall is None:
            excluded.append(query_id)
        else:
            scores[query_id] = recall

    if excluded:
        logging.warning(
            f"Queries without relevant passages excluded: {excluded}."
        )
    return EvalReport(f"recall@{k}", scores, excluded, macro_average(scores))


def evaluate_nuggets(
    responses: dict[str, str],
    gold: dict[str, list[GoldNugget]],
    judge: NuggetJudge = SubstringJudge(),
) -> EvalReport:
    """
    Strict vital nugget score for every query with gold nuggets.

    A query without a response is scored against an empty response.  Queries
    without vital nuggets are excluded.
    """
    scores: dict[str, float] = {}
    excluded: list[str] = []

    for query_id in sorted(gold):
        assignment: NuggetAssignment = assign_nuggets(
            judge, responses.get(query_id, ""), gold[query_id], query_id
        )
        try:
            scores[query_id] = v_strict(assignment, gold[query_id])
        except NoVitalNuggets:
            excluded.append(query_id)

    if excluded:
        logging.warning(f"Queries without vital nuggets excluded: {excluded}.")
    return EvalReport("v_strict", scores, excluded, macro_average(scores))
