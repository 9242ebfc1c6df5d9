"""GINGER entry point."""
import sys

if sys.version_info.major < 3 or sys.version_info.minor < 9:
    print(
        "FATAL Python "
        + str(sys.version_info.major)
        + "."
        + str(sys.version_info.minor)
        + " is not supported. Please, use at least Python 3.9."
    )
    sys.exit(1)

import argparse
import logging
from typing import Optional

import yaml

from ginger.model import PipelineError
from ginger.ui.cli import parse_arguments

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"

INPUT_ERROR: int = 2


def main(args: Optional[list[str]] = None) -> int:
    """
    GINGER command-line entry point.

    :param args: arguments without the program name
    :returns: 0 on success, 1 if some queries failed, 2 on configuration or
        input error
    """
    logging.basicConfig(format="%(levelname)s %(message)s", level=logging.INFO)
    arguments: argparse.Namespace = parse_arguments(args)

    try:
        if arguments.command == "index":
            from ginger import batch

            return batch.build_index(arguments)

        if arguments.command == "run":
            from ginger import batch

            return batch.run_pipeline(arguments)

        if arguments.command == "rewrite":
            from ginger import batch

            return batch.rewrite_queries(arguments)

        if arguments.command == "retrieve":
            from ginger import batch

            return batch.retrieve_queries(arguments)

        if arguments.command == "eval":
            from ginger import batch

            return batch.evaluate(arguments)

    except PipelineError as error:
        logging.fatal(error.message)
        return INPUT_ERROR
    except FileNotFoundError as error:
        logging.fatal(f"No such file: {error.filename}.")
        return INPUT_ERROR
    except (OSError, ValueError, KeyError, yaml.YAMLError) as error:
        logging.fatal(f"Cannot read input: {error}")
        return INPUT_ERROR

    logging.fatal("No command provided. See --help.")
    return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
