"""Command-line commands over files: indexing, retrieval, generation, scores."""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional

from ginger.evaluation import (
    EvalReport,
    Qrels,
    evaluate_nuggets,
    evaluate_recall,
    load_gold_nuggets,
)
from ginger.model import (
    Corpus,
    GeneratedResponse,
    Query,
    RankedList,
    read_jsonl,
    read_queries,
)
from ginger.orchestrator import (
    FAILED,
    BatchResult,
    Pipeline,
    QueryState,
    build_pipeline,
    run_batch,
)
from ginger.pipeline_configuration import (
    ConfigInvalid,
    PipelineConfig,
    StageName,
    validate_config,
)
from ginger.query_rewriter import ComposedQuery, RewriteSet
from ginger.retrieval.run_file import read_run, write_run
from ginger.retrieval.sparse import SparseIndex, index_corpus
from ginger.workspace import Workspace

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"

SUCCESS: int = 0
QUERY_FAILURE: int = 1
INPUT_ERROR: int = 2


def load_config(arguments: argparse.Namespace) -> PipelineConfig:
    """Configuration file, if any, with command-line overrides."""
    config_path: Optional[str] = getattr(arguments, "config", None)
    config: PipelineConfig = (
        PipelineConfig.from_file(Path(config_path))
        if config_path
        else PipelineConfig()
    )
    return validate_config(config.with_overrides(arguments))


def load_corpus(config: PipelineConfig) -> Corpus:
    if not config.corpus_path:
        raise ConfigInvalid("corpus_path is not set")
    return Corpus.from_file(Path(config.corpus_path))


def load_index(
    arguments: argparse.Namespace, corpus: Corpus
) -> Optional[SparseIndex]:
    """
    Index snapshot given on the command line, if any.

    :raises ConfigInvalid: if the snapshot has passages missing from the corpus
    """
    if not getattr(arguments, "index", None):
        return None
    index: SparseIndex = SparseIndex.load(Path(arguments.index))
    missing: list[str] = sorted(
        x for x in index.doc_lengths if x not in corpus
    )
    if missing:
        raise ConfigInvalid(
            f"Index {arguments.index} does not match the corpus: passage "
            f"`{missing[0]}` is not in the corpus ({len(missing)} missing)."
        )
    logging.info(f"Loaded index with {index.doc_count} passages.")
    return index


def build_index(arguments: argparse.Namespace) -> int:
    """Index corpus and write snapshot."""
    corpus: Corpus = Corpus.from_file(Path(arguments.corpus))
    output_path: Path = (
        Path(arguments.output)
        if arguments.output
        else Workspace(Path("out")).get_index_path()
    )
    output_path.parent.mkdir(parents=True, exist_ok=True)
    index_corpus(corpus).save(output_path)
    return SUCCESS


def rewrite_queries(arguments: argparse.Namespace) -> int:
    """Print rewrites and composed search strings."""
    config: PipelineConfig = load_config(arguments)
    pipeline: Pipeline = build_pipeline(config, Corpus())

    for query in read_queries(Path(arguments.queries)):
        state: QueryState = pipeline.process(
            StageName.REWRITE, QueryState(query)
        )
        composed: ComposedQuery = state.artifacts[StageName.REWRITE.value]
        rewrite_set: Optional[RewriteSet] = composed.rewrite_set
        structure: dict[str, Any] = {
            "query_id": query.id_,
            "query": query.text,
            "intermediate": (
                rewrite_set.intermediate_answer if rewrite_set else ""
            ),
            "rewrites": list(rewrite_set.rewrites) if rewrite_set else [],
            "composed": composed.text,
            "degraded": bool(state.degraded),
        }
        sys.stdout.write(json.dumps(structure, ensure_ascii=False) + "\n")
    return SUCCESS


def retrieve_queries(arguments: argparse.Namespace) -> int:
    """
    Write first-pass retrieval run.

    :returns: 1 if retrieval failed for some queries, their rankings are left
        out of the run; 0 otherwise
    """
    config: PipelineConfig = load_config(arguments)
    corpus: Corpus = load_corpus(config)
    pipeline: Pipeline = build_pipeline(
        config, corpus, load_index(arguments, corpus)
    )
    rankings: list[RankedList] = []
    failed: list[str] = []
    for query in read_queries(Path(arguments.queries)):
        state: QueryState = QueryState(query)
        for stage in StageName.REWRITE, StageName.RETRIEVE:
            state = pipeline.process(stage, state)
        if state.stage == FAILED:
            failed.append(query.id_)
        else:
            rankings.append(state.artifacts[StageName.RETRIEVE.value])

    write_run(Path(arguments.output), rankings)
    logging.info(
        f"Run for {len(rankings)} queries written to {arguments.output}."
    )
    if failed:
        logging.error(f"Retrieval failed for queries {failed}.")
        return QUERY_FAILURE
    return SUCCESS


def read_completed(path: Path) -> set[str]:
    """
    Identifiers of queries already present in a response file.

    An incomplete last line left by an interrupted run is cut off, so that new
    responses start on a line of their own.

    :raises ValueError: if any other line is not a response
    """
    if not path.is_file():
        return set()

    content: bytes = path.read_bytes()
    lines: list[bytes] = content.split(b"\n")
    completed: set[str] = set()

    for number, line in enumerate(lines[:-1], start=1):
        if not line.strip():
            continue
        try:
            completed.add(str(json.loads(line)["query_id"]))
        except (ValueError, KeyError, TypeError) as error:
            raise ValueError(f"{path}:{number}: not a response: {error}.")

    # Part after the last newline: empty unless the last write was cut.
    tail: bytes = lines[-1]
    if not tail.strip():
        return completed
    try:
        completed.add(str(json.loads(tail)["query_id"]))
        with path.open("ab") as output_file:
            output_file.write(b"\n")
    except (ValueError, KeyError, TypeError):
        logging.warning(
            f"Incomplete last line {len(lines)} of {path} is removed."
        )
        with path.open("r+b") as output_file:
            output_file.truncate(len(content) - len(tail))
    return completed


def run_pipeline(arguments: argparse.Namespace) -> int:
    """
    Generate responses for a query batch.

    :returns: 1 if any query failed, 0 otherwise
    """
    config: PipelineConfig = load_config(arguments)
    corpus: Corpus = load_corpus(config)
    queries: list[Query] = read_queries(Path(arguments.queries))

    workspace: Workspace = Workspace(Path(arguments.workspace))
    nugget_directory: Optional[Path] = (
        workspace.get_nuggets_path() if arguments.dump_nuggets else None
    )
    pipeline: Pipeline = build_pipeline(
        config, corpus, load_index(arguments, corpus), nugget_directory
    )

    output_path: Path = Path(arguments.output)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    completed: set[str] = read_completed(output_path)

    with output_path.open("a", encoding="utf-8") as output_file:

        def write_response(state: QueryState) -> None:
            if state.stage == FAILED:
                return
            output_file.write(
                json.dumps(state.response.to_structure(), ensure_ascii=False)
                + "\n"
            )
            output_file.flush()

        result: BatchResult = run_batch(
            pipeline, queries, write_response, completed
        )

    logging.info(f"Responses written to {output_path}.")

    if arguments.report:
        with Path(arguments.report).open("w", encoding="utf-8") as report_file:
            json.dump(result.report.to_structure(), report_file, indent=4)
        logging.info(f"Report written to {arguments.report}.")

    return QUERY_FAILURE if result.report.failed else SUCCESS


def write_report(report: EvalReport, output: Optional[str]) -> None:
    sys.stdout.write(f"{report.metric} {report.macro:.4f}\n")
    if output:
        with Path(output).open("w", encoding="utf-8") as output_file:
            json.dump(report.to_structure(), output_file, indent=4)


def evaluate(arguments: argparse.Namespace) -> int:
    """Print macro score of a run or of responses."""
    if arguments.metric == "recall":
        report: EvalReport = evaluate_recall(
            read_run(Path(arguments.run)),
            Qrels.from_file(Path(arguments.qrels)),
            arguments.k,
        )
    elif arguments.metric == "nuggets":
        responses: dict[str, str] = {}
        for structure in read_jsonl(Path(arguments.responses)):
            response: GeneratedResponse = GeneratedResponse.from_structure(
                structure
            )
            responses[response.query_id] = response.text
        report = evaluate_nuggets(
            responses, load_gold_nuggets(Path(arguments.gold))
        )
    else:
        raise ValueError("Specify metric: recall or nuggets.")

    write_report(report, arguments.output)
    return SUCCESS
