"""Test retrieval and response metrics."""
import random

import pytest

from ginger.evaluation import (
    EvalReport,
    GoldNugget,
    NoJudgedQueries,
    NoVitalNuggets,
    NuggetAssignment,
    Qrels,
    SubstringJudge,
    Vitality,
    assign_nuggets,
    evaluate_nuggets,
    evaluate_recall,
    load_gold_nuggets,
    macro_average,
    recall_at_k,
    v_strict,
)
from ginger.model import GeneratedResponse, RankedList, read_jsonl
from ginger.retrieval.run_file import read_run
from tests import DATA_PATH

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"


def ranking(passage_ids: list[str], query_id: str = "q") -> RankedList:
    return RankedList(
        query_id,
        tuple(
            (x, float(len(passage_ids) - i)) for i, x in enumerate(passage_ids)
        ),
    )


def create_qrels(grades: dict[str, int], query_id: str = "q") -> Qrels:
    qrels: Qrels = Qrels()
    for passage_id, grade in grades.items():
        qrels.add(query_id, passage_id, grade)
    return qrels


def create_gold(vital: int, okay: int) -> list[GoldNugget]:
    return [
        GoldNugget(f"v{x}", f"vital {x}", Vitality.VITAL) for x in range(vital)
    ] + [GoldNugget(f"o{x}", f"okay {x}", Vitality.OKAY) for x in range(okay)]


def test_partial_recall() -> None:
    """Test two of three relevant passages in the top."""
    qrels: Qrels = create_qrels({"a": 1, "b": 2, "c": 1, "d": 0})
    recall = recall_at_k(ranking(["a", "d", "b", "e", "c"]), qrels, 3)
    assert recall == pytest.approx(0.6667, abs=1e-4)


def test_full_recall() -> None:
    qrels: Qrels = create_qrels({"a": 1, "b": 1})
    assert recall_at_k(ranking(["b", "a"]), qrels, 500) == 1.0


def test_no_relevant() -> None:
    """Test that query without relevant passages has no recall."""
    qrels: Qrels = create_qrels({"a": 0})
    assert recall_at_k(ranking(["a"]), qrels, 10) is None


def test_recall_oracle() -> None:
    """Test recall against set intersection on random instances."""
    generator: random.Random = random.Random(11)
    passages: list[str] = [f"d{x}" for x in range(10)]
    for _ in range(500):
        grades: dict[str, int] = {
            x: generator.randint(0, 2)
            for x in generator.sample(passages, generator.randint(1, 10))
        }
        run: list[str] = generator.sample(passages, generator.randint(0, 10))
        k: int = generator.randint(1, 10)

        relevant: set[str] = {x for x, grade in grades.items() if grade >= 1}
        expected = (
            len(relevant & set(run[:k])) / len(relevant) if relevant else None
        )
        assert recall_at_k(ranking(run), create_qrels(grades), k) == expected


def test_recall_monotone_in_cutoff() -> None:
    """Test that recall never decreases when the cutoff grows."""
    generator: random.Random = random.Random(13)
    passages: list[str] = [f"d{x}" for x in range(20)]
    for _ in range(200):
        qrels: Qrels = create_qrels(
            {x: 1 for x in generator.sample(passages, generator.randint(1, 8))}
        )
        run: RankedList = ranking(
            generator.sample(passages, generator.randint(0, 20))
        )
        values: list[float] = [
            recall_at_k(run, qrels, k) for k in range(1, 25)
        ]
        assert values == sorted(values)


def test_strict_score() -> None:
    """Test two of three vital nuggets supported."""
    gold: list[GoldNugget] = create_gold(3, 0)
    assignment: NuggetAssignment = NuggetAssignment(
        "q", {"v0": True, "v1": False, "v2": True}
    )
    assert v_strict(assignment, gold) == pytest.approx(0.6667, abs=1e-4)


def test_okay_ignored() -> None:
    gold: list[GoldNugget] = create_gold(2, 5)
    supported: dict[str, bool] = {x.nugget_id: False for x in gold}
    supported.update({"v0": True, "v1": True})
    assert v_strict(NuggetAssignment("q", supported), gold) == 1.0


def test_no_vital() -> None:
    gold: list[GoldNugget] = create_gold(0, 4)
    with pytest.raises(NoVitalNuggets):
        v_strict(
            NuggetAssignment("q", {x.nugget_id: True for x in gold}), gold
        )


def test_strict_oracle() -> None:
    """
    Test strict score against direct counting on random instances, and that
    supporting one more vital nugget never decreases it.
    """
    generator: random.Random = random.Random(13)
    for _ in range(500):
        gold: list[GoldNugget] = create_gold(
            generator.randint(1, 6), generator.randint(0, 4)
        )
        supported: dict[str, bool] = {
            x.nugget_id: generator.random() < 0.5 for x in gold
        }
        vital: list[str] = [
            x.nugget_id for x in gold if x.vitality == Vitality.VITAL
        ]
        expected: float = sum(supported[x] for x in vital) / len(vital)
        score: float = v_strict(NuggetAssignment("q", supported), gold)
        assert score == expected
        assert 0.0 <= score <= 1.0

        flipped: str = generator.choice(vital)
        supported[flipped] = True
        assert v_strict(NuggetAssignment("q", supported), gold) >= score


def test_substring_judge() -> None:
    """Test verbatim, empty, and paraphrased responses."""
    judge: SubstringJudge = SubstringJudge()
    nugget: GoldNugget = GoldNugget("n", "built in 1889", Vitality.VITAL)
    assert judge.supports("The tower was Built in 1889.", nugget)
    assert not judge.supports("", nugget)
    assert not judge.supports("It was constructed in 1889.", nugget)


def test_assign_empty_response() -> None:
    assignment: NuggetAssignment = assign_nuggets(
        SubstringJudge(), "", create_gold(2, 1), "q"
    )
    assert not any(assignment.supported.values())


def test_macro_average() -> None:
    assert macro_average({"a": 0.5, "b": 1.0}) == 0.75
    with pytest.raises(NoJudgedQueries):
        macro_average({})


def test_fixture_recall() -> None:
    """Test recall over the fixture run."""
    runs: dict[str, RankedList] = read_run(DATA_PATH / "run.txt")
    qrels: Qrels = Qrels.from_file(DATA_PATH / "qrels.txt")

    report: EvalReport = evaluate_recall(runs, qrels, 5)
    assert report.scores == pytest.approx({"q1": 1.0, "q2": 1 / 3, "q3": 0.0})
    assert report.excluded == ["q4"]
    assert f"{report.macro:.4f}" == "0.4444"

    assert f"{evaluate_recall(runs, qrels, 500).macro:.4f}" == "0.8889"


def test_missing_run() -> None:
    """Test that judged query without a run has zero recall."""
    report: EvalReport = evaluate_recall(
        {}, create_qrels({"a": 1}, "q1"), 10
    )
    assert report.scores == {"q1": 0.0}


def test_fixture_nuggets() -> None:
    """Test strict score of the fixture responses."""
    responses: dict[str, str] = {}
    for structure in read_jsonl(DATA_PATH / "responses.jsonl"):
        response: GeneratedResponse = GeneratedResponse.from_structure(
            structure
        )
        responses[response.query_id] = response.text

    report: EvalReport = evaluate_nuggets(
        responses, load_gold_nuggets(DATA_PATH / "gold_nuggets.jsonl")
    )
    assert report.scores == pytest.approx({"q1": 0.5, "q2": 2 / 3})
    assert report.excluded == ["q3"]
    assert f"{report.macro:.4f}" == "0.5833"
