"""Command-line user interface."""
import argparse
from typing import Optional

from ginger import __version__
from ginger.pipeline_configuration import (
    EmbedderKind,
    ProviderKind,
    RewriteStrategy,
)

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"

COMMAND_LINES: dict[str, list[str]] = {
    "index": ["index", "tests/data/corpus.jsonl", "out/index.json"],
    "run": [
        "run",
        "tests/data/config.json",
        "tests/data/queries.jsonl",
        "out/responses.jsonl",
    ],
    "rewrite": ["rewrite", "tests/data/queries.jsonl"],
    "retrieve": [
        "retrieve",
        "tests/data/queries.jsonl",
        "out/run.txt",
        "--corpus",
        "tests/data/corpus.jsonl",
    ],
    "eval_recall": [
        "eval",
        "recall",
        "tests/data/run.txt",
        "tests/data/qrels.txt",
        "--k",
        "5",
    ],
    "eval_nuggets": [
        "eval",
        "nuggets",
        "tests/data/responses.jsonl",
        "tests/data/gold_nuggets.jsonl",
    ],
}
COMMANDS: list[str] = ["index", "run", "rewrite", "retrieve", "eval"]


def parse_arguments(args: Optional[list[str]] = None) -> argparse.Namespace:
    """
    Parse GINGER command-line arguments.

    :param args: arguments without the program name, `sys.argv[1:]` if not
        specified
    """
    parser: argparse.ArgumentParser = argparse.ArgumentParser(
        prog="ginger",
        description="GINGER. Nugget-based retrieval-augmented response "
        "generation",
    )
    parser.add_argument(
        "-v",
        "--version",
        action="version",
        version="GINGER " + __version__,
    )
    subparser = parser.add_subparsers(dest="command")

    add_index_arguments(
        subparser.add_parser(
            "index",
            description="Build BM25 index for a JSONL corpus and write its "
            "JSON snapshot.",
            help="index corpus",
        )
    )
    run_parser = subparser.add_parser(
        "run",
        description="Generate responses for a batch of queries.  Responses "
        "are appended to the output file as soon as they are ready; queries "
        "already present in the file are skipped.",
        help="run the full pipeline",
    )
    add_run_arguments(run_parser)
    add_pipeline_arguments(run_parser)

    rewrite_parser = subparser.add_parser(
        "rewrite",
        description="Print intermediate answers, rewrites, and composed "
        "search strings as JSON lines.",
        help="show query rewrites",
    )
    rewrite_parser.add_argument("queries", metavar="<queries.jsonl>")
    add_config_argument(rewrite_parser)
    add_pipeline_arguments(rewrite_parser)

    retrieve_parser = subparser.add_parser(
        "retrieve",
        description="Write first-pass hybrid retrieval results as a TREC run.",
        help="run first-pass retrieval",
    )
    retrieve_parser.add_argument("queries", metavar="<queries.jsonl>")
    retrieve_parser.add_argument("output", metavar="<run>")
    add_config_argument(retrieve_parser)
    add_index_option(retrieve_parser)
    add_pipeline_arguments(retrieve_parser)

    add_eval_arguments(
        subparser.add_parser(
            "eval",
            description="Evaluate retrieval runs or generated responses.",
            help="evaluate",
        )
    )

    return parser.parse_args(args)


def add_index_arguments(parser: argparse.ArgumentParser) -> None:
    """Add arguments for index command."""
    parser.add_argument("corpus", metavar="<corpus.jsonl>")
    parser.add_argument(
        "output",
        metavar="<index>",
        nargs="?",
        help="output snapshot path, `out/index.json` by default",
    )


def add_config_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        metavar="<path>",
        help="JSON or YAML configuration file",
    )


def add_index_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--index",
        metavar="<path>",
        help="index snapshot written by the `index` command",
    )


def add_run_arguments(parser: argparse.ArgumentParser) -> None:
    """Add arguments for run command."""
    parser.add_argument("config", metavar="<config>")
    parser.add_argument("queries", metavar="<queries.jsonl>")
    parser.add_argument("output", metavar="<responses.jsonl>")
    add_index_option(parser)
    parser.add_argument(
        "--report",
        metavar="<path>",
        help="write batch report as JSON",
    )
    parser.add_argument(
        "--dump-nuggets",
        action=argparse.BooleanOptionalAction,
        default=False,
        help="write nuggets of every query to the workspace",
    )
    parser.add_argument(
        "--workspace",
        metavar="<path>",
        default="out",
        help="directory for generated files",
    )


def add_pipeline_arguments(parser: argparse.ArgumentParser) -> None:
    """Add options overriding configuration values."""
    parser.add_argument(
        "--corpus",
        dest="corpus_path",
        metavar="<path>",
        help="JSONL corpus with `id` and `text` fields",
    )
    parser.add_argument(
        "--rewrites",
        dest="l",
        type=int,
        metavar="<integer>",
        help="number of query rewrites",
    )
    parser.add_argument(
        "--first-pass-depth",
        dest="n",
        type=int,
        metavar="<integer>",
        help="number of passages retrieved and scored pointwise",
    )
    parser.add_argument(
        "--pairwise-depth",
        dest="k",
        type=int,
        metavar="<integer>",
        help="number of passages reranked pairwise",
    )
    parser.add_argument(
        "--passages",
        dest="m",
        type=int,
        metavar="<integer>",
        help="number of passages used for generation",
    )
    parser.add_argument(
        "--rrf-k",
        dest="rrf_k",
        type=float,
        metavar="<float>",
        help="reciprocal rank fusion constant",
    )
    parser.add_argument(
        "--word-budget",
        dest="word_budget",
        type=int,
        metavar="<integer>",
        help="maximum number of words in a response",
    )
    parser.add_argument(
        "--top-clusters",
        dest="top_clusters",
        type=int,
        metavar="<integer>",
        help="maximum number of summarized clusters",
    )
    parser.add_argument(
        "--rewrite-strategy",
        dest="rewrite_strategy",
        metavar="<strategy>",
        choices=[x.value for x in RewriteStrategy],
        help="search string construction: "
        + ", ".join(x.value for x in RewriteStrategy),
    )
    parser.add_argument(
        "--similarity-threshold",
        dest="similarity_threshold",
        type=float,
        metavar="<float>",
        help="minimal similarity of merged nugget clusters",
    )
    parser.add_argument(
        "--total-workers",
        dest="total_workers",
        type=int,
        metavar="<integer>",
        help="number of workers split by worker shares",
    )
    parser.add_argument(
        "--queue-capacity",
        dest="queue_capacity",
        type=int,
        metavar="<integer>",
        help="capacity of every stage input queue",
    )
    parser.add_argument(
        "--provider",
        dest="provider",
        metavar="<kind>",
        choices=[x.value for x in ProviderKind],
        help="text generation provider: "
        + ", ".join(x.value for x in ProviderKind),
    )
    parser.add_argument(
        "--provider-url",
        dest="provider_url",
        metavar="<url>",
        help="text generation service address",
    )
    parser.add_argument(
        "--embedder",
        dest="embedder",
        metavar="<kind>",
        choices=[x.value for x in EmbedderKind],
        help="embedding provider: " + ", ".join(x.value for x in EmbedderKind),
    )
    parser.add_argument(
        "--embedder-url",
        dest="embedder_url",
        metavar="<url>",
        help="embedding service address",
    )
    parser.add_argument(
        "--rate-limit",
        dest="rate_limit",
        type=float,
        metavar="<float>",
        help="maximum number of provider requests per second",
    )
    parser.add_argument(
        "--mock-latency",
        dest="mock_latency",
        type=float,
        metavar="<float>",
        help="seconds of delay per mock provider call",
    )


def add_eval_arguments(parser: argparse.ArgumentParser) -> None:
    """Add arguments for eval command."""
    subparser = parser.add_subparsers(dest="metric")

    recall_parser = subparser.add_parser(
        "recall",
        description="Compute macro Recall@k of a TREC run.",
        help="retrieval recall",
    )
    recall_parser.add_argument("run", metavar="<run>")
    recall_parser.add_argument("qrels", metavar="<qrels>")
    recall_parser.add_argument(
        "--k",
        type=int,
        default=500,
        metavar="<integer>",
        help="cutoff rank",
    )
    recall_parser.add_argument(
        "--output", metavar="<path>", help="write report as JSON"
    )

    nuggets_parser = subparser.add_parser(
        "nuggets",
        description="Compute macro strict vital nugget score of responses.",
        help="response nugget score",
    )
    nuggets_parser.add_argument("responses", metavar="<responses.jsonl>")
    nuggets_parser.add_argument("gold", metavar="<gold.jsonl>")
    nuggets_parser.add_argument(
        "--output", metavar="<path>", help="write report as JSON"
    )
