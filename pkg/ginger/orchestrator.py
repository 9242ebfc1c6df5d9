"""
Concurrent batch pipeline.

Every stage is a pool of worker threads reading query states from a bounded
input queue and writing them to the input queue of the next stage, so a full
downstream queue blocks upstream workers.  Failed queries leave the line at
once.  After the last query, the feeder puts one stop marker per worker of the
first stage; the last worker of a stage to stop puts one marker per worker of
the next stage.
"""
import logging
import math
import queue
import threading
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Iterable, Optional

from ginger.curation.clustering import ClusteringParams
from ginger.curation.curator import curate, write_nugget_dump
from ginger.http_client import JSONService
from ginger.llm.gateway import (
    CompletionProvider,
    HTTPProvider,
    LLMGateway,
    ProviderPolicy,
)
from ginger.llm.mock import MockProvider
from ginger.model import (
    Corpus,
    FacetCluster,
    GeneratedResponse,
    PipelineError,
    Query,
    RankedList,
    check_unique_queries,
)
from ginger.pipeline_configuration import (
    STAGE_ORDER,
    EmbedderKind,
    PipelineConfig,
    ProviderKind,
    RewriteStrategy,
    StageName,
)
from ginger.query_rewriter import (
    ComposedQuery,
    RewriteSet,
    compose_for_strategy,
    rewrite_query,
)
from ginger.reranker import (
    LexicalOverlapScorer,
    OverlapLogisticPairwiseScorer,
    PairwiseScorer,
    PointwiseScorer,
    pairwise_rerank,
    pointwise_rerank,
)
from ginger.response_generator import (
    ClusterSummary,
    DraftResponse,
    assemble_response,
    improve_fluency,
    summarize_cluster,
)
from ginger.retrieval.dense import (
    CorpusVectors,
    EmbeddingProvider,
    HashingEmbedder,
    HTTPEmbeddingProvider,
    dense_search,
    embed_corpus,
)
from ginger.retrieval.fusion import FusionInput, rrf_fuse
from ginger.retrieval.sparse import SparseIndex, index_corpus, sparse_search

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"

DONE: str = "done"
FAILED: str = "failed"


@dataclass
class InsufficientWorkers(PipelineError):
    """Fewer workers than stages that need one."""


@dataclass(frozen=True)
class StageDescriptor:
    """Stage with its worker pool size and input queue capacity."""

    name: StageName
    workers: int
    queue_capacity: int

    def __post_init__(self) -> None:
        if self.workers < 1 or self.queue_capacity < 1:
            raise ValueError(f"Invalid stage descriptor {self}.")


@dataclass(frozen=True)
class QueryState:
    """
    Progress of one query: the last completed stage, or `done`, or `failed`.

    `artifacts` maps stage names to stage results.  States are never changed,
    every stage creates a new one.
    """

    query: Query
    stage: str = ""
    artifacts: dict[str, Any] = field(default_factory=dict, hash=False)
    error: Optional[tuple[str, str]] = None
    degraded: tuple[str, ...] = ()

    def advance(self, stage: StageName, artifact: Any) -> "QueryState":
        return replace(
            self,
            stage=stage.value,
            artifacts={**self.artifacts, stage.value: artifact},
        )

    def fail(self, stage: StageName, message: str) -> "QueryState":
        return replace(self, stage=FAILED, error=(stage.value, message))

    def finish(self) -> "QueryState":
        return replace(self, stage=DONE)

    @property
    def response(self) -> Optional[GeneratedResponse]:
        return self.artifacts.get(StageName.GENERATE.value)


def plan_workers(
    total_workers: int, worker_shares: dict[str, float]
) -> dict[str, int]:
    """
    Split workers between stages proportionally to their shares.

    Counts are rounded with the largest remainder method (equal remainders go to
    the earlier stage), every stage gets at least one worker, and the counts sum
    to `total_workers`.

    :raises InsufficientWorkers: if there are fewer workers than stages
    """
    stages: list[str] = [
        x.value for x in STAGE_ORDER if x.value in worker_shares
    ]
    if total_workers < len(stages):
        raise InsufficientWorkers(
            f"{total_workers} workers for {len(stages)} stages."
        )
    if not stages:
        return {}

    share_sum: float = math.fsum(worker_shares[x] for x in stages)
    quotas: dict[str, float] = {
        x: total_workers * worker_shares[x] / share_sum for x in stages
    }
    counts: dict[str, int] = {x: math.floor(quotas[x]) for x in stages}

    remaining: int = total_workers - sum(counts.values())
    by_remainder: list[str] = sorted(
        stages, key=lambda x: (-(quotas[x] - counts[x]), stages.index(x))
    )
    for stage in by_remainder[:remaining]:
        counts[stage] += 1

    for stage in stages:
        while counts[stage] < 1:
            donor: str = max(
                stages, key=lambda x: (counts[x], -stages.index(x))
            )
            counts[donor] -= 1
            counts[stage] += 1

    return counts


def describe_stages(config: PipelineConfig) -> list[StageDescriptor]:
    """
    Stage descriptors for the configuration.

    Stages without a worker share get one worker outside `total_workers`.
    """
    counts: dict[str, int] = plan_workers(
        config.total_workers, config.worker_shares
    )
    return [
        StageDescriptor(
            stage, counts.get(stage.value, 1), config.queue_capacity
        )
        for stage in STAGE_ORDER
    ]


class Pipeline:
    """Providers, indices, and the stage functions over query states."""

    def __init__(
        self,
        config: PipelineConfig,
        corpus: Corpus,
        gateway: LLMGateway,
        embedder: EmbeddingProvider,
        pointwise_scorer: PointwiseScorer,
        pairwise_scorer: PairwiseScorer,
        index: Optional[SparseIndex] = None,
        vectors: Optional[CorpusVectors] = None,
        nugget_directory: Optional[Path] = None,
    ) -> None:
        self.config: PipelineConfig = config
        self.corpus: Corpus = corpus
        self.gateway: LLMGateway = gateway
        self.embedder: EmbeddingProvider = embedder
        self.pointwise_scorer: PointwiseScorer = pointwise_scorer
        self.pairwise_scorer: PairwiseScorer = pairwise_scorer
        self.index: SparseIndex = (
            index_corpus(corpus) if index is None else index
        )
        self.vectors: CorpusVectors = (
            embed_corpus(embedder, corpus) if vectors is None else vectors
        )
        self.nugget_directory: Optional[Path] = nugget_directory
        self.clustering_params: ClusteringParams = ClusteringParams(
            config.similarity_threshold, config.min_cluster_size
        )

        self.functions: dict[StageName, Callable[[QueryState], Any]] = {
            StageName.REWRITE: self.rewrite,
            StageName.RETRIEVE: self.retrieve,
            StageName.RERANK_POINT: self.rerank_point,
            StageName.RERANK_PAIR: self.rerank_pair,
            StageName.CURATE: self.curate,
            StageName.GENERATE: self.generate,
        }

    def rewrite(self, state: QueryState) -> ComposedQuery:
        """Composed search string; the original query if rewriting fails."""
        query: Query = state.query
        if (
            self.config.rewrite_strategy == RewriteStrategy.ORIGINAL
            or self.config.l == 0
        ):
            return ComposedQuery(query.text, 0)

        rewrite_set: RewriteSet = rewrite_query(
            self.gateway, query, self.config.l, self.config.temperature
        )
        composed: ComposedQuery = compose_for_strategy(
            query, list(rewrite_set.rewrites), self.config.rewrite_strategy
        )
        return replace(composed, rewrite_set=rewrite_set)

    def retrieve(self, state: QueryState) -> RankedList:
        """Sparse and dense rankings for the composed query, fused."""
        text: str = state.artifacts[StageName.REWRITE.value].text
        query_id: str = state.query.id_
        sparse: RankedList = sparse_search(
            self.index, text, self.config.n, query_id
        )
        dense: RankedList = dense_search(
            self.embedder, self.vectors, text, self.config.n, query_id
        )
        return rrf_fuse(
            FusionInput((sparse, dense), self.config.rrf_k), self.config.n
        )

    def rerank_point(self, state: QueryState) -> RankedList:
        return pointwise_rerank(
            self.pointwise_scorer,
            state.query.text,
            state.artifacts[StageName.RETRIEVE.value],
            self.corpus,
            self.config.k,
        )

    def rerank_pair(self, state: QueryState) -> RankedList:
        """Pairwise reranking of the top `k`, cut to `m` passages."""
        return pairwise_rerank(
            self.pairwise_scorer,
            state.query.text,
            state.artifacts[StageName.RERANK_POINT.value],
            self.corpus,
            self.config.k,
        ).top(self.config.m)

    def curate(self, state: QueryState) -> list[FacetCluster]:
        ranking: RankedList = state.artifacts[StageName.RERANK_PAIR.value]
        clusters: list[FacetCluster] = curate(
            self.gateway,
            self.embedder,
            self.pairwise_scorer,
            state.query.text,
            [self.corpus[x] for x in ranking.passage_ids()],
            self.clustering_params,
        )
        if self.nugget_directory:
            write_nugget_dump(
                self.nugget_directory / f"{state.query.id_}.json", clusters
            )
        return clusters

    def generate(self, state: QueryState) -> GeneratedResponse:
        clusters: list[FacetCluster] = state.artifacts[StageName.CURATE.value]
        summaries: list[ClusterSummary] = [
            summarize_cluster(
                self.gateway,
                cluster,
                self.config.summary_max_words,
                self.config.temperature,
            )
            for cluster in clusters[: self.config.get_top_clusters()]
        ]
        draft: DraftResponse = assemble_response(
            state.query.id_, summaries, self.config.word_budget
        )
        return improve_fluency(
            self.gateway,
            state.query.text,
            draft,
            self.config.word_budget,
            self.config.fluency_tolerance,
            self.config.temperature,
        )

    def process(self, stage: StageName, state: QueryState) -> QueryState:
        """
        Run one stage for a query.

        Errors never leave this method: rewriting falls back to the original
        query, any other stage marks the query as failed.
        """
        try:
            return state.advance(stage, self.functions[stage](state))
        except Exception as error:
            if not isinstance(error, PipelineError):
                logging.exception(
                    f"Unexpected error in {stage.value} for query "
                    f"`{state.query.id_}`."
                )
            message: str = str(error) or type(error).__name__
            if stage == StageName.REWRITE:
                logging.warning(
                    f"Rewriting failed for query `{state.query.id_}`, using "
                    f"the original query: {message}"
                )
                return replace(
                    state.advance(stage, ComposedQuery(state.query.text, 0)),
                    degraded=state.degraded + (stage.value,),
                )
            logging.error(
                f"Query `{state.query.id_}` failed at {stage.value}: {message}"
            )
            return state.fail(stage, message)


def run_query(pipeline: Pipeline, query: Query) -> QueryState:
    """Run all stages for one query in the calling thread."""
    state: QueryState = QueryState(query)
    for stage in STAGE_ORDER:
        state = pipeline.process(stage, state)
        if state.stage == FAILED:
            return state
    return state.finish()


class StageStatistics:
    """Counters of one stage, updated by its workers."""

    def __init__(self, descriptor: StageDescriptor) -> None:
        self.descriptor: StageDescriptor = descriptor
        self.processed: int = 0
        self.busy_time: float = 0.0
        self.blocked_time: float = 0.0
        self.occupancy_sum: int = 0
        self.occupancy_samples: int = 0
        self.peak_occupancy: int = 0
        self._lock: threading.Lock = threading.Lock()

    def sample_occupancy(self, size: int) -> None:
        with self._lock:
            self.occupancy_sum += size
            self.occupancy_samples += 1
            self.peak_occupancy = max(self.peak_occupancy, size)

    def add_work(self, busy_time: float) -> None:
        with self._lock:
            self.processed += 1
            self.busy_time += busy_time

    def add_blocked(self, blocked_time: float) -> None:
        with self._lock:
            self.blocked_time += blocked_time

    @property
    def mean_occupancy(self) -> float:
        if not self.occupancy_samples:
            return 0.0
        return self.occupancy_sum / self.occupancy_samples

    def to_structure(self, wall_time: float) -> dict[str, Any]:
        return {
            "workers": self.descriptor.workers,
            "queue_capacity": self.descriptor.queue_capacity,
            "processed": self.processed,
            "throughput": self.processed / wall_time if wall_time else 0.0,
            "busy_time": self.busy_time,
            "mean_occupancy": self.mean_occupancy,
            "peak_occupancy": self.peak_occupancy,
            "blocked_time": self.blocked_time,
        }


@dataclass
class BatchReport:
    """Outcome of a batch run."""

    processed: int = 0
    failed: int = 0
    skipped: int = 0
    wall_time: float = 0.0
    stages: dict[str, StageStatistics] = field(default_factory=dict)
    errors: dict[str, tuple[str, str]] = field(default_factory=dict)
    degraded: dict[str, list[str]] = field(default_factory=dict)

    @property
    def done(self) -> int:
        return self.processed - self.failed

    def to_structure(self) -> dict[str, Any]:
        return {
            "processed": self.processed,
            "done": self.done,
            "failed": self.failed,
            "skipped": self.skipped,
            "wall_time": self.wall_time,
            "stages": {
                name: statistics.to_structure(self.wall_time)
                for name, statistics in self.stages.items()
            },
            "errors": {
                query_id: {"stage": stage, "message": message}
                for query_id, (stage, message) in self.errors.items()
            },
            "degraded": self.degraded,
        }


@dataclass
class BatchResult:
    """Responses in completion order and the report."""

    responses: list[GeneratedResponse]
    report: BatchReport


class StopMarker:
    """End of input for one worker."""


STOP: StopMarker = StopMarker()


class StageWorkers:
    """Worker threads of one stage."""

    def __init__(
        self,
        pipeline: Pipeline,
        descriptor: StageDescriptor,
        input_queue: queue.Queue,
        output_queue: queue.Queue,
        results: queue.Queue,
        next_workers: int,
        is_last: bool,
    ) -> None:
        self.pipeline: Pipeline = pipeline
        self.descriptor: StageDescriptor = descriptor
        self.input_queue: queue.Queue = input_queue
        self.output_queue: queue.Queue = output_queue
        self.results: queue.Queue = results
        self.next_workers: int = next_workers
        self.is_last: bool = is_last
        self.statistics: StageStatistics = StageStatistics(descriptor)

        self._running: int = descriptor.workers
        self._lock: threading.Lock = threading.Lock()
        self.threads: list[threading.Thread] = [
            threading.Thread(
                target=self.work,
                name=f"{descriptor.name.value}-{index}",
                daemon=True,
            )
            for index in range(descriptor.workers)
        ]

    def start(self) -> None:
        for thread in self.threads:
            thread.start()

    def join(self) -> None:
        for thread in self.threads:
            thread.join()

    def work(self) -> None:
        while True:
            self.statistics.sample_occupancy(self.input_queue.qsize())
            item = self.input_queue.get()
            if item is STOP:
                self.stop()
                return

            start: float = time.monotonic()
            state: QueryState = self.pipeline.process(
                self.descriptor.name, item
            )
            self.statistics.add_work(time.monotonic() - start)

            if state.stage == FAILED:
                self.results.put(state)
            elif self.is_last:
                self.results.put(state.finish())
            else:
                start = time.monotonic()
                self.output_queue.put(state)
                self.statistics.add_blocked(time.monotonic() - start)

    def stop(self) -> None:
        """Pass stop markers downstream when the last worker stops."""
        with self._lock:
            self._running -= 1
            last: bool = self._running == 0
        if not last:
            return
        if self.is_last:
            self.results.put(STOP)
        else:
            for _ in range(self.next_workers):
                self.output_queue.put(STOP)


def run_batch(
    pipeline: Pipeline,
    queries: list[Query],
    sink: Optional[Callable[[QueryState], None]] = None,
    completed: Iterable[str] = (),
) -> BatchResult:
    """
    Process queries through the concurrent stage line.

    :param pipeline: stage functions and their resources
    :param queries: batch with unique query identifiers
    :param sink: called in the calling thread for every finished or failed
        query, as soon as it leaves the line
    :param completed: identifiers of queries to skip
    """
    check_unique_queries(queries)
    skip: set[str] = set(completed)
    pending: list[Query] = [x for x in queries if x.id_ not in skip]

    descriptors: list[StageDescriptor] = describe_stages(pipeline.config)
    queues: list[queue.Queue] = [
        queue.Queue(maxsize=x.queue_capacity) for x in descriptors
    ]
    results: queue.Queue = queue.Queue()

    stages: list[StageWorkers] = []
    for index, descriptor in enumerate(descriptors):
        is_last: bool = index == len(descriptors) - 1
        stages.append(
            StageWorkers(
                pipeline,
                descriptor,
                queues[index],
                results if is_last else queues[index + 1],
                results,
                0 if is_last else descriptors[index + 1].workers,
                is_last,
            )
        )

    logging.info(
        f"Processing {len(pending)} queries ({len(queries) - len(pending)} "
        f"skipped) with workers "
        + ", ".join(f"{x.name.value}: {x.workers}" for x in descriptors)
        + "."
    )

    def feed() -> None:
        for query in pending:
            queues[0].put(QueryState(query))
        for _ in range(descriptors[0].workers):
            queues[0].put(STOP)

    report: BatchReport = BatchReport(skipped=len(queries) - len(pending))
    responses: list[GeneratedResponse] = []
    start: float = time.monotonic()

    for stage in stages:
        stage.start()
    feeder: threading.Thread = threading.Thread(target=feed, daemon=True)
    feeder.start()

    while True:
        item = results.get()
        if item is STOP:
            break
        state: QueryState = item
        report.processed += 1
        if state.degraded:
            report.degraded[state.query.id_] = list(state.degraded)
        if state.stage == FAILED:
            report.failed += 1
            report.errors[state.query.id_] = state.error
        else:
            responses.append(state.response)
        if sink:
            sink(state)

    feeder.join()
    for stage in stages:
        stage.join()

    report.wall_time = time.monotonic() - start
    report.stages = {x.descriptor.name.value: x.statistics for x in stages}
    logging.info(
        f"Batch finished in {report.wall_time:.2f} s: {report.done} done, "
        f"{report.failed} failed, {report.skipped} skipped."
    )
    return BatchResult(responses, report)


def create_provider(config: PipelineConfig) -> CompletionProvider:
    if config.provider == ProviderKind.HTTP:
        return HTTPProvider(
            JSONService(config.provider_url, config.api_key_variable)
        )
    return MockProvider(config.mock_latency)


def create_embedder(config: PipelineConfig) -> EmbeddingProvider:
    if config.embedder == EmbedderKind.HTTP:
        return HTTPEmbeddingProvider(
            JSONService(config.embedder_url, config.api_key_variable),
            config.embedding_dimension,
        )
    return HashingEmbedder(config.embedding_dimension)


def build_pipeline(
    config: PipelineConfig,
    corpus: Corpus,
    index: Optional[SparseIndex] = None,
    nugget_directory: Optional[Path] = None,
    provider: Optional[CompletionProvider] = None,
) -> Pipeline:
    """
    Construct pipeline with providers named in the configuration.

    :param config: validated configuration
    :param corpus: passages
    :param index: prebuilt sparse index, built from the corpus if not given
    :param nugget_directory: directory for per-query nugget dumps
    :param provider: completion provider replacing the configured one
    """
    gateway: LLMGateway = LLMGateway(
        provider or create_provider(config),
        ProviderPolicy(
            config.max_retries, config.backoff_base, config.rate_limit
        ),
    )
    return Pipeline(
        config,
        corpus,
        gateway,
        create_embedder(config),
        LexicalOverlapScorer(),
        OverlapLogisticPairwiseScorer(),
        index=index,
        nugget_directory=nugget_directory,
    )
