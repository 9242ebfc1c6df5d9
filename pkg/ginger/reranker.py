"""
Two-stage reranking: pointwise scoring of first-pass candidates, then pairwise
preference aggregation over the best of them.
"""
import logging
import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from ginger.model import Corpus, PipelineError, RankedList
from ginger.text import query_terms, tokenize

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"


@dataclass
class PairwiseScoringError(PipelineError):
    """Pairwise scorer failed for a candidate pair."""

    first_id: str = ""
    second_id: str = ""


class PointwiseScorer(Protocol):
    """Relevance of a passage to a query, independent of other passages."""

    def score(self, query_text: str, passage_text: str) -> float:
        ...


class PairwiseScorer(Protocol):
    """
    Probability that the first passage is more relevant than the second one.

    Implementations should return exactly 0.5 for identical passages and be
    safe to call from several threads.
    """

    def prefer(
        self, query_text: str, first_text: str, second_text: str
    ) -> float:
        ...


def overlap(query_text: str, passage_text: str) -> int:
    """Number of distinct query terms occurring in the passage."""
    return len(query_terms(query_text) & set(tokenize(passage_text)))


class LexicalOverlapScorer:
    """Pointwise scorer: query term overlap."""

    def score(self, query_text: str, passage_text: str) -> float:
        return float(overlap(query_text, passage_text))


class OverlapLogisticPairwiseScorer:
    """Pairwise scorer: logistic function of the overlap difference."""

    def __init__(self, scale: float = 1.0) -> None:
        self.scale: float = scale

    def prefer(
        self, query_text: str, first_text: str, second_text: str
    ) -> float:
        difference: int = overlap(query_text, first_text) - overlap(
            query_text, second_text
        )
        return 1.0 / (1.0 + math.exp(-self.scale * difference))


def pointwise_rerank(
    scorer: PointwiseScorer,
    query_text: str,
    candidates: RankedList,
    corpus: Corpus,
    keep: int,
) -> RankedList:
    """
    Rescore candidates independently and keep the best `keep`.

    :param scorer: pointwise relevance scorer
    :param query_text: original query, not the composed search string
    :param candidates: first-pass ranking
    :param corpus: passage texts
    :param keep: number of passages to keep; larger values keep everything
    """
    if keep < 1:
        raise ValueError(f"Number of kept passages should be positive: {keep}.")
    scores: dict[str, float] = {}
    for passage_id in candidates.passage_ids():
        score: float = float(
            scorer.score(query_text, corpus[passage_id].text)
        )
        if math.isnan(score):
            logging.warning(
                f"Pointwise score of `{passage_id}` for query "
                f"`{candidates.query_id}` is not a number, ranked last."
            )
            score = -math.inf
        scores[passage_id] = score
    return RankedList.from_scores(candidates.query_id, scores, keep)


@dataclass(frozen=True)
class PairwiseMatrix:
    """
    Preferences between candidates: `preferences[i, j]` is the probability that
    candidate `i` is more relevant than candidate `j`.
    """

    candidates: tuple[str, ...]
    preferences: np.ndarray

    def __post_init__(self) -> None:
        size: int = len(self.candidates)
        if self.preferences.shape != (size, size):
            raise ValueError(
                f"Matrix of shape {self.preferences.shape} for {size} "
                f"candidates."
            )
        if len(set(self.candidates)) != size:
            raise ValueError("Duplicate candidates in pairwise matrix.")
        if size and not np.all(np.diag(self.preferences) == 0.5):
            raise ValueError("Diagonal of pairwise matrix should be 0.5.")
        if np.any(self.preferences < 0.0) or np.any(self.preferences > 1.0):
            raise ValueError("Preferences should be in [0, 1].")


def build_pairwise_matrix(
    scorer: PairwiseScorer,
    query_text: str,
    candidates: list[tuple[str, str]],
) -> PairwiseMatrix:
    """
    Evaluate all ordered pairs of distinct candidates.

    `k` candidates take `k (k - 1)` scorer calls; the diagonal is 0.5 without a
    call.

    :param scorer: pairwise scorer
    :param query_text: original query
    :param candidates: identifier and text of every candidate
    :raises PairwiseScoringError: if the scorer fails or returns a value outside
        [0, 1]
    """
    size: int = len(candidates)
    if size < 1:
        raise ValueError("No candidates for pairwise scoring.")

    preferences: np.ndarray = np.full((size, size), 0.5)

    for i, (first_id, first_text) in enumerate(candidates):
        for j, (second_id, second_text) in enumerate(candidates):
            if i == j:
                continue
            try:
                value: float = float(
                    scorer.prefer(query_text, first_text, second_text)
                )
            except Exception as error:
                raise PairwiseScoringError(
                    f"Pairwise scorer failed for ({first_id}, {second_id}): "
                    f"{error}",
                    first_id,
                    second_id,
                ) from error
            if not 0.0 <= value <= 1.0:
                raise PairwiseScoringError(
                    f"Preference {value} for ({first_id}, {second_id}) is not "
                    f"a probability.",
                    first_id,
                    second_id,
                )
            preferences[i, j] = value

    return PairwiseMatrix(tuple(x for x, _ in candidates), preferences)


def aggregate_pairwise(
    matrix: PairwiseMatrix, query_id: str = ""
) -> RankedList:
    """
    Rank candidates by the sum of their preferences over all other candidates.

    Row sums use `math.fsum`, so the result does not depend on the order of
    candidates.
    """
    scores: dict[str, float] = {}
    for i, candidate in enumerate(matrix.candidates):
        scores[candidate] = math.fsum(
            float(matrix.preferences[i, j])
            for j in range(len(matrix.candidates))
            if j != i
        )
    return RankedList.from_scores(query_id, scores)


def pairwise_rerank(
    scorer: PairwiseScorer,
    query_text: str,
    candidates: RankedList,
    corpus: Corpus,
    k: int,
) -> RankedList:
    """Pairwise reranking of the top `k` pointwise candidates."""
    top: RankedList = candidates.top(k)
    if not len(top):
        return top
    logging.debug(
        f"Pairwise reranking of {len(top)} passages for query "
        f"`{candidates.query_id}`."
    )
    matrix: PairwiseMatrix = build_pairwise_matrix(
        scorer,
        query_text,
        [(x, corpus[x].text) for x in top.passage_ids()],
    )
    return aggregate_pairwise(matrix, candidates.query_id)
