"""
Grouping nuggets into query facets and ranking the groups.

Nuggets are clustered agglomeratively over cosine similarity of their
embeddings with average linkage: the two most similar clusters are merged
while their similarity is at least the threshold.  Equal similarities are
resolved in favor of the pair with the lowest indices, and nuggets are put in
canonical order first, so the partition does not depend on input order.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from ginger.model import FacetCluster, InformationNugget, RankedList
from ginger.reranker import (
    PairwiseMatrix,
    PairwiseScorer,
    aggregate_pairwise,
    build_pairwise_matrix,
)
from ginger.retrieval.dense import EmbeddingProvider, cosine_similarity_matrix

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"

AVERAGE_LINKAGE: str = "average"


@dataclass(frozen=True)
class ClusteringParams:
    """Agglomerative clustering parameters."""

    similarity_threshold: float = 0.6
    min_cluster_size: int = 1
    linkage: str = AVERAGE_LINKAGE

    def __post_init__(self) -> None:
        if not 0.0 < self.similarity_threshold < 1.0:
            raise ValueError(
                f"Similarity threshold {self.similarity_threshold} is not in "
                f"(0, 1)."
            )
        if self.min_cluster_size < 1:
            raise ValueError(
                f"Minimal cluster size should be positive: "
                f"{self.min_cluster_size}."
            )
        if self.linkage != AVERAGE_LINKAGE:
            raise ValueError(f"Unsupported linkage `{self.linkage}`.")


def average_linkage(
    similarity: np.ndarray, first: list[int], second: list[int]
) -> float:
    """Mean similarity over all cross-cluster pairs."""
    return math.fsum(
        float(similarity[i, j]) for i in first for j in second
    ) / (len(first) * len(second))


def find_closest(
    similarity: np.ndarray, clusters: list[list[int]]
) -> tuple[float, int, int]:
    """Most similar pair of clusters, lowest indices first on equality."""
    best: tuple[float, int, int] = (-math.inf, -1, -1)
    for a in range(len(clusters)):
        for b in range(a + 1, len(clusters)):
            value: float = average_linkage(similarity, clusters[a], clusters[b])
            if value > best[0]:
                best = (value, a, b)
    return best


def merge(clusters: list[list[int]], target: int, source: int) -> None:
    """Move members of `source` into `target`, keeping members sorted."""
    clusters[target] = sorted(clusters[target] + clusters[source])
    del clusters[source]


def agglomerate(
    similarity: np.ndarray, params: ClusteringParams
) -> list[list[int]]:
    """
    Partition indices of the similarity matrix into clusters.

    :param similarity: symmetric matrix of item similarities
    :param params: threshold and minimal cluster size
    :returns: clusters as sorted index lists, ordered by their first member
    """
    clusters: list[list[int]] = [[i] for i in range(similarity.shape[0])]

    while len(clusters) > 1:
        value, a, b = find_closest(similarity, clusters)
        if value < params.similarity_threshold:
            break
        merge(clusters, a, b)

    # Too small clusters join their nearest neighbor.
    while len(clusters) > 1:
        small: list[int] = [
            index
            for index, cluster in enumerate(clusters)
            if len(cluster) < params.min_cluster_size
        ]
        if not small:
            break
        source: int = small[0]
        target: int = -1
        best: float = -math.inf
        for index, cluster in enumerate(clusters):
            if index == source:
                continue
            value = average_linkage(similarity, clusters[source], cluster)
            if value > best:
                best, target = value, index
        merge(clusters, min(source, target), max(source, target))

    return sorted(clusters, key=lambda cluster: cluster[0])


def cluster_nuggets(
    nuggets: list[InformationNugget],
    embedder: EmbeddingProvider,
    params: ClusteringParams = ClusteringParams(),
) -> list[FacetCluster]:
    """
    Group nuggets by facet.

    Every nugget ends up in exactly one cluster.  Cluster identifiers are
    `cluster-001`, `cluster-002`, and so on, in order of the first member.
    """
    if not nuggets:
        raise ValueError("No nuggets to cluster.")

    ordered: list[InformationNugget] = sorted(
        nuggets, key=InformationNugget.sort_key
    )
    vectors: np.ndarray = np.array(
        [embedder.embed(nugget.text) for nugget in ordered], dtype=float
    )
    partition: list[list[int]] = agglomerate(
        cosine_similarity_matrix(vectors), params
    )
    logging.debug(
        f"{len(ordered)} nuggets grouped into {len(partition)} clusters."
    )
    return [
        FacetCluster(
            f"cluster-{number:03}", tuple(ordered[i] for i in members)
        )
        for number, members in enumerate(partition, start=1)
    ]


def rank_clusters(
    scorer: PairwiseScorer, query_text: str, clusters: list[FacetCluster]
) -> list[FacetCluster]:
    """
    Rank clusters by pairwise preference of their representative texts.

    :returns: clusters ordered by rank, rank 1 being the most relevant
    """
    if not clusters:
        raise ValueError("No clusters to rank.")

    matrix: PairwiseMatrix = build_pairwise_matrix(
        scorer,
        query_text,
        [(x.cluster_id, x.representative_text) for x in clusters],
    )
    ranking: RankedList = aggregate_pairwise(matrix)
    by_id: dict[str, FacetCluster] = {x.cluster_id: x for x in clusters}

    return [
        by_id[cluster_id].with_rank(rank)
        for rank, cluster_id in enumerate(ranking.passage_ids(), start=1)
    ]
