"""Test context curation."""
import json
from pathlib import Path

import pytest

from ginger.curation.clustering import ClusteringParams
from ginger.curation.curator import (
    NoNuggets,
    collect_nuggets,
    curate,
    write_nugget_dump,
)
from ginger.model import FacetCluster, InformationNugget, Passage
from ginger.reranker import OverlapLogisticPairwiseScorer
from ginger.retrieval.dense import HashingEmbedder
from tests import CORPUS, ScriptedProvider, create_gateway

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"

QUERY: str = "how do honey bees make honey"
PASSAGES: list[Passage] = [CORPUS[x] for x in ["p05", "p06", "p07"]]


def test_curate() -> None:
    """Test that clusters cover verified nuggets and are ranked."""
    clusters: list[FacetCluster] = curate(
        create_gateway(),
        HashingEmbedder(),
        OverlapLogisticPairwiseScorer(),
        QUERY,
        PASSAGES,
        ClusteringParams(0.6),
    )
    assert [x.rank for x in clusters] == list(range(1, len(clusters) + 1))
    for cluster in clusters:
        for nugget in cluster.nuggets:
            passage: Passage = CORPUS[nugget.passage_id]
            assert passage.text[nugget.start : nugget.end] == nugget.text


def test_no_nuggets() -> None:
    """Test passages without query terms."""
    with pytest.raises(NoNuggets):
        curate(
            create_gateway(),
            HashingEmbedder(),
            OverlapLogisticPairwiseScorer(),
            QUERY,
            [CORPUS["p04"]],
        )


def test_rejected_annotation() -> None:
    """Test that passage with altered annotation is skipped."""
    passages: list[Passage] = [Passage("a", "x y"), Passage("b", "x z")]
    provider: ScriptedProvider = ScriptedProvider(
        ["<START>x Y</END>", "<START>x</END> z"]
    )
    nuggets: list[InformationNugget] = collect_nuggets(
        create_gateway(provider), "x", passages
    )
    assert nuggets == [InformationNugget("b", 0, 1, "x")]


def test_nugget_dump(tmp_path: Path) -> None:
    """Test dump records."""
    cluster: FacetCluster = FacetCluster(
        "cluster-001", (InformationNugget("p05", 0, 5, "Honey"),), 1
    )
    path: Path = tmp_path / "q2.json"
    write_nugget_dump(path, [cluster])
    with path.open(encoding="utf-8") as input_file:
        assert json.load(input_file) == [
            {
                "passage_id": "p05",
                "start": 0,
                "end": 5,
                "text": "Honey",
                "cluster_id": "cluster-001",
                "cluster_rank": 1,
            }
        ]
