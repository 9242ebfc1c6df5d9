"""Reciprocal rank fusion of rankings for one query."""
import math
from dataclasses import dataclass

from ginger.model import PipelineError, RankedList

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"

DEFAULT_RRF_K: float = 60.0


@dataclass
class QueryIdMismatch(PipelineError):
    """Fused rankings belong to different queries."""


@dataclass(frozen=True)
class FusionInput:
    """Rankings of one query and the fusion constant."""

    lists: tuple[RankedList, ...]
    rrf_k: float = DEFAULT_RRF_K

    def __post_init__(self) -> None:
        if not self.lists:
            raise ValueError("Nothing to fuse.")
        if self.rrf_k <= 0:
            raise ValueError(
                f"Fusion constant should be positive: {self.rrf_k}."
            )
        query_ids: set[str] = {x.query_id for x in self.lists}
        if len(query_ids) > 1:
            raise QueryIdMismatch(
                f"Cannot fuse rankings of queries {sorted(query_ids)}."
            )

    @property
    def query_id(self) -> str:
        return self.lists[0].query_id


def rrf_fuse(fusion_input: FusionInput, n: int) -> RankedList:
    """
    Score every passage by the sum of `1 / (rrf_k + rank)` over the lists
    containing it, ranks starting at 1, and keep the top `n`.

    Contributions are summed with `math.fsum`, so the score does not depend on
    the order of the lists.
    """
    contributions: dict[str, list[float]] = {}
    for ranked_list in fusion_input.lists:
        for rank, passage_id in enumerate(ranked_list.passage_ids(), start=1):
            contributions.setdefault(passage_id, []).append(
                1.0 / (fusion_input.rrf_k + rank)
            )

    return RankedList.from_scores(
        fusion_input.query_id,
        {
            passage_id: math.fsum(values)
            for passage_id, values in contributions.items()
        },
        n,
    )
