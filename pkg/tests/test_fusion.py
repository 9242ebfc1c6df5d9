"""Test reciprocal rank fusion."""
import math
import random
from fractions import Fraction

import pytest

from ginger.model import RankedList
from ginger.retrieval.fusion import (
    FusionInput,
    QueryIdMismatch,
    rrf_fuse,
)

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"


def ranking(query_id: str, passage_ids: list[str]) -> RankedList:
    """Ranking with decreasing scores in the given order."""
    return RankedList(
        query_id,
        tuple(
            (passage_id, float(len(passage_ids) - index))
            for index, passage_id in enumerate(passage_ids)
        ),
    )


def test_top_in_both() -> None:
    """Test passage ranked first in two lists."""
    fused: RankedList = rrf_fuse(
        FusionInput((ranking("q", ["d", "e"]), ranking("q", ["d", "f"]))), 10
    )
    assert fused.entries[0] == ("d", pytest.approx(2 / 61))
    assert 2 / 61 == pytest.approx(0.032787, abs=1e-6)


def test_single_list() -> None:
    """Test passage present in one list only."""
    fused: RankedList = rrf_fuse(
        FusionInput(
            (ranking("q", ["a", "b", "d"]), ranking("q", ["a", "b"]))
        ),
        10,
    )
    assert dict(fused.entries)["d"] == pytest.approx(1 / 63)


def test_self_fusion() -> None:
    """Test that fusing a list with itself keeps its order."""
    ranked_list: RankedList = ranking("q", ["c", "a", "e", "b"])
    fused: RankedList = rrf_fuse(FusionInput((ranked_list, ranked_list)), 10)
    assert fused.passage_ids() == ranked_list.passage_ids()


def test_query_mismatch() -> None:
    with pytest.raises(QueryIdMismatch):
        FusionInput((ranking("q1", ["a"]), ranking("q2", ["a"])))


def test_invalid_input() -> None:
    with pytest.raises(ValueError):
        FusionInput(())
    with pytest.raises(ValueError):
        FusionInput((ranking("q", ["a"]),), 0.0)


def fuse_by_formula(
    lists: list[list[str]], rrf_k: int
) -> dict[str, float]:
    """Score of every passage: `1 / (rrf_k + rank)` summed over lists."""
    passages: set[str] = {x for passage_ids in lists for x in passage_ids}
    return {
        passage_id: math.fsum(
            1.0 / (rrf_k + passage_ids.index(passage_id) + 1)
            for passage_ids in lists
            if passage_id in passage_ids
        )
        for passage_id in passages
    }


def test_randomized_oracle() -> None:
    """
    Test fusion against direct evaluation of the formula, and that permuting
    input lists does not change the result.
    """
    generator: random.Random = random.Random(17)
    passages: list[str] = [f"p{x:03}" for x in range(100)]

    for _ in range(200):
        lists: list[list[str]] = [
            generator.sample(passages, generator.randint(1, 100))
            for _ in range(generator.randint(2, 4))
        ]
        rrf_k: int = 60
        n: int = generator.randint(1, 100)

        scores: dict[str, float] = fuse_by_formula(lists, rrf_k)
        expected: list[tuple[str, float]] = sorted(
            scores.items(), key=lambda x: (-x[1], x[0])
        )[:n]

        rankings: list[RankedList] = [ranking("q", x) for x in lists]
        fused: RankedList = rrf_fuse(FusionInput(tuple(rankings), rrf_k), n)
        assert list(fused.entries) == expected

        generator.shuffle(rankings)
        assert rrf_fuse(FusionInput(tuple(rankings), rrf_k), n) == fused


def test_exact_sums() -> None:
    """Test that fused scores are the rational sums rounded once."""
    generator: random.Random = random.Random(5)
    passages: list[str] = [f"p{x}" for x in range(12)]

    for _ in range(100):
        lists: list[list[str]] = [
            generator.sample(passages, generator.randint(1, 8))
            for _ in range(generator.randint(2, 4))
        ]
        exact: dict[str, Fraction] = {}
        for passage_ids in lists:
            for rank, passage_id in enumerate(passage_ids, 1):
                exact[passage_id] = exact.get(passage_id, Fraction(0)) + (
                    Fraction(1, 60 + rank)
                )
        fused: RankedList = rrf_fuse(
            FusionInput(tuple(ranking("q", x) for x in lists)), 12
        )
        for passage_id, score in fused.entries:
            assert score == pytest.approx(float(exact[passage_id]), abs=1e-15)


def test_rank_monotonicity() -> None:
    """Test that moving a passage up in one list never lowers its score."""
    generator: random.Random = random.Random(23)
    passages: list[str] = [f"p{x}" for x in range(30)]

    for _ in range(200):
        lists: list[list[str]] = [
            generator.sample(passages, generator.randint(2, 30))
            for _ in range(generator.randint(2, 4))
        ]
        index: int = generator.randrange(len(lists))
        position: int = generator.randint(1, len(lists[index]) - 1)
        passage_id: str = lists[index][position]

        improved: list[list[str]] = [list(x) for x in lists]
        del improved[index][position]
        improved[index].insert(generator.randint(0, position - 1), passage_id)

        def score(input_lists: list[list[str]]) -> float:
            fused: RankedList = rrf_fuse(
                FusionInput(tuple(ranking("q", x) for x in input_lists)), 100
            )
            return dict(fused.entries)[passage_id]

        assert score(improved) >= score(lists)
