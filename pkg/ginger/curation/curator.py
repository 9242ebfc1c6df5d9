"""Context curation for one query: nuggets, facet clusters, cluster ranks."""
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from ginger.curation.annotation import (
    AnnotatedPassage,
    detect_nuggets,
    parse_annotations,
)
from ginger.curation.clustering import (
    ClusteringParams,
    cluster_nuggets,
    rank_clusters,
)
from ginger.llm.gateway import LLMGateway
from ginger.model import FacetCluster, InformationNugget, Passage, PipelineError
from ginger.reranker import PairwiseScorer
from ginger.retrieval.dense import EmbeddingProvider

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"


@dataclass
class NoNuggets(PipelineError):
    """No passage gave a usable nugget."""


def collect_nuggets(
    gateway: LLMGateway, query_text: str, passages: list[Passage]
) -> list[InformationNugget]:
    """
    Detect and verify nuggets in every passage.

    A passage whose annotation fails or is rejected contributes nothing.
    """
    nuggets: list[InformationNugget] = []
    for passage in passages:
        try:
            annotated: AnnotatedPassage = detect_nuggets(
                gateway, query_text, passage
            )
            nuggets += parse_annotations(passage.text, annotated)
        except PipelineError as error:
            logging.warning(f"Passage `{passage.id_}` skipped: {error}")
    return nuggets


def curate(
    gateway: LLMGateway,
    embedder: EmbeddingProvider,
    scorer: PairwiseScorer,
    query_text: str,
    passages: list[Passage],
    params: ClusteringParams = ClusteringParams(),
) -> list[FacetCluster]:
    """
    Turn the top passages into ranked facet clusters.

    :param gateway: text generation for nugget annotation
    :param embedder: nugget embeddings for clustering
    :param scorer: pairwise scorer for cluster ranking
    :param query_text: original query
    :param passages: top passages after pairwise reranking
    :param params: clustering parameters
    :returns: clusters in rank order
    :raises NoNuggets: if no passage gave a nugget
    """
    nuggets: list[InformationNugget] = collect_nuggets(
        gateway, query_text, passages
    )
    if not nuggets:
        raise NoNuggets(f"No nuggets in {len(passages)} passages.")

    clusters: list[FacetCluster] = cluster_nuggets(nuggets, embedder, params)
    return rank_clusters(scorer, query_text, clusters)


def nuggets_to_structure(clusters: list[FacetCluster]) -> list[dict[str, Any]]:
    """Nugget dump records, clusters in the given order."""
    return [
        {
            "passage_id": nugget.passage_id,
            "start": nugget.start,
            "end": nugget.end,
            "text": nugget.text,
            "cluster_id": cluster.cluster_id,
            "cluster_rank": cluster.rank,
        }
        for cluster in clusters
        for nugget in cluster.nuggets
    ]


def write_nugget_dump(path: Path, clusters: list[FacetCluster]) -> None:
    with path.open("w", encoding="utf-8") as output_file:
        json.dump(
            nuggets_to_structure(clusters),
            output_file,
            ensure_ascii=False,
            indent=4,
        )
