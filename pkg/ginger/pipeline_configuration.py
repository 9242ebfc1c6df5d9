"""Pipeline configuration: retrieval depths, budgets, workers, providers."""
import argparse
import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Optional, Union, get_args, get_origin, get_type_hints

import yaml

from ginger.model import PipelineError

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"


class StageName(Enum):
    """Pipeline stages in their fixed order."""

    REWRITE = "rewrite"
    RETRIEVE = "retrieve"
    RERANK_POINT = "rerank_point"
    RERANK_PAIR = "rerank_pair"
    CURATE = "curate"
    GENERATE = "generate"


STAGE_ORDER: list[StageName] = list(StageName)


class RewriteStrategy(Enum):
    """How the first-pass search string is built from query and rewrites."""

    ORIGINAL = "original"
    REWRITES_ONLY = "rewrites_only"
    ORIGINAL_PLUS_REWRITES = "original_plus_rewrites"


class ProviderKind(Enum):
    """Text generation or embedding backend."""

    MOCK = "mock"
    HTTP = "http"


class EmbedderKind(Enum):
    """Embedding backend."""

    HASHING = "hashing"
    HTTP = "http"


# Pointwise reranking and response generation share a quarter of accelerator
# resources, pairwise reranking gets the rest.
DEFAULT_WORKER_SHARES: dict[str, float] = {
    StageName.RERANK_POINT.value: 0.125,
    StageName.RERANK_PAIR.value: 0.75,
    StageName.GENERATE.value: 0.125,
}


@dataclass
class ConfigInvalid(PipelineError):
    """Configuration violates a constraint."""


@dataclass
class PipelineConfig:
    """
    Pipeline tunables.

    `l` is the number of query rewrites, `n` the first-pass depth and the number
    of pointwise-reranked candidates, `k` the number of pairwise-reranked
    candidates, and `m` the number of passages used for generation.
    """

    l: int = 3
    n: int = 500
    k: int = 40
    m: int = 10
    rrf_k: float = 60.0
    # Response length limit in words.
    word_budget: int = 300
    top_clusters: Optional[int] = None
    worker_shares: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_WORKER_SHARES)
    )

    rewrite_strategy: RewriteStrategy = RewriteStrategy.ORIGINAL_PLUS_REWRITES
    similarity_threshold: float = 0.6
    min_cluster_size: int = 1
    summary_max_words: int = 70
    fluency_tolerance: float = 1.1

    total_workers: int = 12
    queue_capacity: int = 4

    provider: ProviderKind = ProviderKind.MOCK
    provider_url: Optional[str] = None
    embedder: EmbedderKind = EmbedderKind.HASHING
    embedder_url: Optional[str] = None
    embedding_dimension: int = 256
    api_key_variable: str = "GINGER_API_KEY"
    max_retries: int = 3
    backoff_base: float = 0.5
    rate_limit: float = 5.0
    temperature: float = 0.0
    mock_latency: float = 0.0

    corpus_path: Optional[str] = None

    def get_top_clusters(self) -> int:
        """Maximum number of clusters to summarize, `m` by default."""
        return self.m if self.top_clusters is None else self.top_clusters

    @classmethod
    def from_structure(cls, structure: dict[str, Any]) -> "PipelineConfig":
        """
        Construct configuration from flat key/value structure.

        :param structure: keys are field names; enumeration values are given by
            their string values
        """
        names: set[str] = {x.name for x in dataclasses.fields(cls)}
        unknown: list[str] = sorted(set(structure) - names)
        if unknown:
            raise ConfigInvalid(f"Unknown configuration keys: {unknown}.")

        values: dict[str, Any] = {}
        for key, value in structure.items():
            values[key] = parse_value(key, value)
        return cls(**values)

    @classmethod
    def from_file(cls, path: Path) -> "PipelineConfig":
        """Load configuration from JSON or YAML file."""
        try:
            with path.open(encoding="utf-8") as input_file:
                content: Any = yaml.load(
                    input_file.read(), Loader=yaml.FullLoader
                )
        except yaml.YAMLError as error:
            raise ConfigInvalid(f"Cannot parse configuration {path}: {error}.")
        if not content:
            return cls()
        if not isinstance(content, dict):
            raise ConfigInvalid(f"Configuration {path} is not a key/value map.")
        return cls.from_structure(content)

    def with_overrides(self, arguments: argparse.Namespace) -> "PipelineConfig":
        """Replace values with command-line options that are set."""
        overrides: dict[str, Any] = {}
        for field_ in dataclasses.fields(self):
            value: Any = getattr(arguments, field_.name, None)
            if value is not None:
                overrides[field_.name] = parse_value(field_.name, value)
        return dataclasses.replace(self, **overrides)


ENUMERATIONS: dict[str, type] = {
    "rewrite_strategy": RewriteStrategy,
    "provider": ProviderKind,
    "embedder": EmbedderKind,
}


def get_scalar_type(annotation: Any) -> Optional[tuple[type, bool]]:
    """
    Scalar type of a field annotation and whether `None` is allowed.

    Returns `None` for non-scalar annotations.
    """
    optional: bool = False
    if get_origin(annotation) is Union:
        arguments: tuple = tuple(
            x for x in get_args(annotation) if x is not type(None)
        )
        if len(arguments) != 1:
            return None
        annotation, optional = arguments[0], True
    if annotation in (int, float, str):
        return annotation, optional
    return None


SCALAR_TYPES: dict[str, tuple[type, bool]] = {
    key: scalar_type
    for key, annotation in get_type_hints(PipelineConfig).items()
    if (scalar_type := get_scalar_type(annotation)) is not None
}


def check_scalar(key: str, value: Any) -> Any:
    """
    Check a scalar value against its field type.

    Integers are accepted for float fields.

    :raises ConfigInvalid: naming the field and the expected type
    """
    expected, optional = SCALAR_TYPES[key]
    if value is None and optional:
        return value
    if expected is float and isinstance(value, (int, float)):
        if not isinstance(value, bool):
            return float(value)
    elif isinstance(value, expected) and not isinstance(value, bool):
        return value
    raise ConfigInvalid(
        f"`{key}` should be {expected.__name__}, not `{value!r}`."
    )


def parse_value(key: str, value: Any) -> Any:
    """Convert raw configuration value to field type."""
    if key in ENUMERATIONS and not isinstance(value, Enum):
        try:
            return ENUMERATIONS[key](value)
        except ValueError:
            raise ConfigInvalid(f"Invalid value `{value}` for `{key}`.")
    if key == "worker_shares":
        if not isinstance(value, dict):
            raise ConfigInvalid("Worker shares should be a map.")
        stages: set[str] = {x.value for x in StageName}
        for stage in value:
            if stage not in stages:
                raise ConfigInvalid(
                    f"Unknown stage `{stage}` in worker shares."
                )
            share: Any = value[stage]
            if isinstance(share, bool) or not isinstance(share, (int, float)):
                raise ConfigInvalid(
                    f"Share of `{stage}` should be a number, not `{share!r}`."
                )
        return {stage: float(share) for stage, share in value.items()}
    if key in SCALAR_TYPES:
        return check_scalar(key, value)
    return value


def validate_config(config: PipelineConfig) -> PipelineConfig:
    """
    Check configuration constraints.

    :returns: the same configuration if all constraints hold
    :raises ConfigInvalid: with the violated constraint as the message
    """
    constraints: list[tuple[bool, str]] = [
        (config.l >= 0, "l ≥ 0"),
        (config.m >= 1, "1 ≤ m"),
        (config.m <= config.k, "m ≤ k"),
        (config.k <= config.n, "k ≤ n"),
        (config.rrf_k > 0, "rrf_k > 0"),
        (config.word_budget > 0, "word_budget > 0"),
        (config.get_top_clusters() >= 1, "top_clusters ≥ 1"),
        (
            all(share > 0 for share in config.worker_shares.values()),
            "worker shares > 0",
        ),
        (
            0.0 < config.similarity_threshold < 1.0,
            "0 < similarity_threshold < 1",
        ),
        (config.min_cluster_size >= 1, "min_cluster_size ≥ 1"),
        (config.summary_max_words >= 1, "summary_max_words ≥ 1"),
        (config.total_workers >= 1, "total_workers ≥ 1"),
        (config.queue_capacity >= 1, "queue_capacity ≥ 1"),
        (config.max_retries >= 0, "max_retries ≥ 0"),
        (config.rate_limit > 0, "rate_limit > 0"),
        (config.temperature >= 0, "temperature ≥ 0"),
        (config.embedding_dimension >= 1, "embedding_dimension ≥ 1"),
    ]
    for holds, constraint in constraints:
        if not holds:
            raise ConfigInvalid(constraint)

    if config.provider == ProviderKind.HTTP and not config.provider_url:
        raise ConfigInvalid("provider_url is required for HTTP provider")
    if config.embedder == EmbedderKind.HTTP and not config.embedder_url:
        raise ConfigInvalid("embedder_url is required for HTTP embedder")

    return config
