"""Test dense retrieval."""
import numpy as np
import pytest

from ginger.model import Corpus, Passage, RankedList
from ginger.retrieval.dense import (
    CorpusVectors,
    DimensionMismatch,
    HashingEmbedder,
    cosine_similarity_matrix,
    dense_search,
    embed_corpus,
)

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"

VECTORS: dict[str, list[float]] = {
    "a": [1.0, 0.0, 0.0],
    "b": [1.0, 1.0, 0.0],
    "c": [0.0, 2.0, 1.0],
    "d": [3.0, 1.0, 2.0],
}


class TableEmbedder:
    """Embeddings from a fixed table, texts are table keys."""

    def __init__(self, table: dict[str, list[float]]) -> None:
        self.table: dict[str, list[float]] = table
        self.dimension: int = len(next(iter(table.values())))

    def embed(self, text: str) -> np.ndarray:
        return np.array(self.table[text], dtype=float)


def create_vectors(embedder: TableEmbedder) -> CorpusVectors:
    return embed_corpus(
        embedder, Corpus(Passage(x, x) for x in embedder.table)
    )


def test_identity() -> None:
    """Test that query equal to a passage vector finds it with score 1."""
    embedder: TableEmbedder = TableEmbedder(VECTORS)
    result: RankedList = dense_search(
        embedder, create_vectors(embedder), "c", 4
    )
    assert result.passage_ids()[0] == "c"
    assert result.entries[0][1] == pytest.approx(1.0)


def test_orthogonal() -> None:
    """Test that zero scores are ordered by identifier."""
    embedder: TableEmbedder = TableEmbedder(
        {"y": [0.0, 1.0], "x": [0.0, 2.0], "query": [1.0, 0.0]}
    )
    vectors: CorpusVectors = embed_corpus(
        embedder, Corpus([Passage("y", "y"), Passage("x", "x")])
    )
    result: RankedList = dense_search(embedder, vectors, "query", 10)
    assert result.entries == (("x", 0.0), ("y", 0.0))


def test_oracle() -> None:
    """Test scores against explicit dot products of unit vectors."""
    embedder: TableEmbedder = TableEmbedder(VECTORS)
    vectors: CorpusVectors = create_vectors(embedder)
    for query in VECTORS:
        query_vector: np.ndarray = np.array(VECTORS[query])
        expected: dict[str, float] = {}
        for passage_id, vector in VECTORS.items():
            passage_vector: np.ndarray = np.array(vector)
            expected[passage_id] = float(
                sum(query_vector * passage_vector)
                / np.sqrt(sum(query_vector**2))
                / np.sqrt(sum(passage_vector**2))
            )
        result: RankedList = dense_search(embedder, vectors, query, 4)
        for passage_id, score in result.entries:
            assert score == pytest.approx(expected[passage_id], abs=1e-9)
        assert [x for x, _ in result.entries] == sorted(
            expected, key=lambda x: (-round(expected[x], 9), x)
        )


def test_dimension_mismatch() -> None:
    embedder: TableEmbedder = TableEmbedder(VECTORS)
    vectors: CorpusVectors = create_vectors(embedder)
    with pytest.raises(DimensionMismatch):
        dense_search(HashingEmbedder(8), vectors, "query", 4)


def test_hashing_embedder() -> None:
    """Test that texts with the same tokens get the same vector."""
    embedder: HashingEmbedder = HashingEmbedder(64)
    assert np.array_equal(
        embedder.embed("Honey bees"), embedder.embed("bees, honey!")
    )
    assert embedder.embed("honey").sum() == 1.0


def test_cosine_matrix() -> None:
    """Test that zero vectors are similar to nothing."""
    similarity: np.ndarray = cosine_similarity_matrix(
        np.array([[1.0, 0.0], [2.0, 0.0], [0.0, 0.0]])
    )
    assert similarity[0, 1] == pytest.approx(1.0)
    assert similarity[2, 2] == 0.0
