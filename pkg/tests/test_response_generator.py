"""Test cluster summaries, response assembly, and fluency rewrite."""
from ginger.http_client import TransientProviderError
from ginger.model import FacetCluster, GeneratedResponse, InformationNugget
from ginger.response_generator import (
    ClusterSummary,
    DraftResponse,
    assemble_response,
    improve_fluency,
    summarize_cluster,
)
from tests import ScriptedProvider, create_gateway

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"


def words(count: int, prefix: str = "w") -> str:
    return " ".join(f"{prefix}{x}" for x in range(count))


def create_summary(
    cluster_id: str, count: int, sources: tuple[str, ...] = ("p1",)
) -> ClusterSummary:
    return ClusterSummary(cluster_id, words(count, cluster_id), sources)


def test_mock_summary() -> None:
    """Test that mock summary is the first 35 words of the cluster."""
    text: str = words(50)
    cluster: FacetCluster = FacetCluster(
        "cluster-001", (InformationNugget("p1", 0, len(text), text),)
    )
    summary: ClusterSummary = summarize_cluster(create_gateway(), cluster)
    assert summary.sentence == words(35)
    assert not summary.truncated


def test_long_summary() -> None:
    """Test that 120-word completion is cut at a sentence end."""
    completion: str = " ".join(words(9) + " end." for _ in range(12))
    cluster: FacetCluster = FacetCluster(
        "cluster-001", (InformationNugget("p1", 0, 1, "a"),)
    )
    summary: ClusterSummary = summarize_cluster(
        create_gateway(ScriptedProvider([completion])), cluster
    )
    assert summary.truncated
    assert summary.word_count == 70
    assert summary.sentence.endswith("end.")


def test_provenance() -> None:
    """Test that summary sources are the passages of the cluster nuggets."""
    cluster: FacetCluster = FacetCluster(
        "cluster-001",
        (
            InformationNugget("p1", 0, 5, "Honey"),
            InformationNugget("p2", 0, 4, "Bees"),
        ),
    )
    summary: ClusterSummary = summarize_cluster(create_gateway(), cluster)
    assert summary.source_passage_ids == ("p1", "p2")


def test_all_fit() -> None:
    draft: DraftResponse = assemble_response(
        "q",
        [create_summary(x, 35) for x in ["a", "b", "c"]],
        300,
    )
    assert len(draft.summaries) == 3
    assert draft.total_words == 105


def test_skip_and_continue() -> None:
    """Test that summary over the budget is skipped, not the rest."""
    draft: DraftResponse = assemble_response(
        "q",
        [
            create_summary("a", 35),
            create_summary("b", 35),
            create_summary("c", 4),
        ],
        40,
    )
    assert [x.cluster_id for x in draft.summaries] == ["a", "c"]
    assert draft.total_words == 39


def test_first_summary_cut() -> None:
    """Test that the first summary is always included."""
    draft: DraftResponse = assemble_response("q", [create_summary("a", 35)], 10)
    assert draft.total_words == 10
    assert draft.summaries[0].truncated
    assert draft.text == words(10, "a")


def test_fluency_identity() -> None:
    """Test that mock fluency rewrite keeps the text."""
    draft: DraftResponse = DraftResponse(
        "q", (create_summary("a", 5, ("p1", "p2")), create_summary("b", 5))
    )
    response: GeneratedResponse = improve_fluency(
        create_gateway(), "query", draft, 300
    )
    assert response.text == draft.text
    assert response.citations == ("p1", "p2")
    assert not response.fluency_skipped


def test_fluency_too_long() -> None:
    """Test that too long rewrite is replaced with the draft."""
    draft: DraftResponse = DraftResponse("q", (create_summary("a", 20),))
    response: GeneratedResponse = improve_fluency(
        create_gateway(ScriptedProvider([words(400)])), "query", draft, 300
    )
    assert response.text == draft.text
    assert response.fluency_skipped


def test_fluency_outage() -> None:
    """Test that provider outage keeps the draft."""
    draft: DraftResponse = DraftResponse("q", (create_summary("a", 20),))
    provider: ScriptedProvider = ScriptedProvider(
        [TransientProviderError("down")] * 4
    )
    response: GeneratedResponse = improve_fluency(
        create_gateway(provider), "query", draft, 300
    )
    assert response.text == draft.text
    assert response.fluency_skipped
    assert response.cluster_trace == draft.trace()
