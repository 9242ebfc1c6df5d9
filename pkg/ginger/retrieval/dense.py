"""Dense retrieval behind the embedding provider contract."""
import hashlib
import logging
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from ginger.http_client import JSONService, ProviderRejected
from ginger.model import Corpus, PipelineError, RankedList
from ginger.text import tokenize

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"


@dataclass
class DimensionMismatch(PipelineError):
    """Vectors of different dimensions are compared."""


class EmbeddingProvider(Protocol):
    """Deterministic text embedding of a fixed dimension."""

    dimension: int

    def embed(self, text: str) -> np.ndarray:
        """Vector of shape `(dimension,)`."""


class HashingEmbedder:
    """
    Bag of words hashed into a fixed number of buckets.

    Texts with the same tokens get the same vector, so the cosine similarity of
    identical texts is 1.
    """

    def __init__(self, dimension: int = 256) -> None:
        if dimension < 1:
            raise ValueError(f"Dimension should be positive: {dimension}.")
        self.dimension: int = dimension

    def bucket(self, token: str) -> int:
        digest: bytes = hashlib.md5(token.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "little") % self.dimension

    def embed(self, text: str) -> np.ndarray:
        vector: np.ndarray = np.zeros(self.dimension)
        for token in tokenize(text):
            vector[self.bucket(token)] += 1.0
        return vector


class HTTPEmbeddingProvider:
    """Embedding service: `{"text": ...}` to `{"embedding": [...]}`."""

    def __init__(self, service: JSONService, dimension: int) -> None:
        self.service: JSONService = service
        self.dimension: int = dimension

    def embed(self, text: str) -> np.ndarray:
        content = self.service.post({"text": text})
        embedding = content.get("embedding")
        if not isinstance(embedding, list):
            raise ProviderRejected("Response has no `embedding` field.")
        vector: np.ndarray = np.array(embedding, dtype=float)
        if vector.shape != (self.dimension,):
            raise DimensionMismatch(
                f"Expected embedding of dimension {self.dimension}, got "
                f"{vector.shape}."
            )
        return vector


@dataclass(frozen=True)
class CorpusVectors:
    """Passage embeddings, one row per passage."""

    passage_ids: tuple[str, ...]
    matrix: np.ndarray

    @property
    def dimension(self) -> int:
        return self.matrix.shape[1]


def embed_corpus(provider: EmbeddingProvider, corpus: Corpus) -> CorpusVectors:
    """Compute embeddings of every corpus passage."""
    passage_ids: list[str] = [passage.id_ for passage in corpus]
    matrix: np.ndarray = np.zeros((len(passage_ids), provider.dimension))
    for index, passage in enumerate(corpus):
        matrix[index] = provider.embed(passage.text)
    logging.info(f"Embedded {len(passage_ids)} passages.")
    return CorpusVectors(tuple(passage_ids), matrix)


def normalize_rows(matrix: np.ndarray) -> np.ndarray:
    """Scale rows to unit length, zero rows stay zero."""
    norms: np.ndarray = np.linalg.norm(matrix, axis=1, keepdims=True)
    return np.divide(
        matrix, norms, out=np.zeros_like(matrix, dtype=float), where=norms > 0
    )


def cosine_similarity_matrix(vectors: np.ndarray) -> np.ndarray:
    """Pairwise cosine similarities; zero vectors are similar to nothing."""
    normalized: np.ndarray = normalize_rows(np.asarray(vectors, dtype=float))
    return np.clip(normalized @ normalized.T, -1.0, 1.0)


def dense_search(
    provider: EmbeddingProvider,
    corpus_vectors: CorpusVectors,
    query_text: str,
    n: int,
    query_id: str = "",
) -> RankedList:
    """
    Top-`n` passages by cosine similarity to the query embedding.

    :raises DimensionMismatch: if corpus vectors were computed by a provider of
        another dimension
    """
    if n < 1:
        raise ValueError(f"Search depth should be positive: {n}.")

    query_vector: np.ndarray = np.asarray(
        provider.embed(query_text), dtype=float
    )
    if query_vector.shape != (corpus_vectors.dimension,):
        raise DimensionMismatch(
            f"Query vector shape {query_vector.shape} does not match corpus "
            f"dimension {corpus_vectors.dimension}."
        )
    if not corpus_vectors.passage_ids:
        return RankedList(query_id)

    norm: float = float(np.linalg.norm(query_vector))
    if norm > 0:
        query_vector = query_vector / norm
    similarities: np.ndarray = np.clip(
        normalize_rows(corpus_vectors.matrix) @ query_vector, -1.0, 1.0
    )
    return RankedList.from_scores(
        query_id,
        {
            passage_id: float(similarity)
            for passage_id, similarity in zip(
                corpus_vectors.passage_ids, similarities
            )
        },
        n,
    )
