# Copyright 2026 The vjf Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License"). You
# may not use this file except in compliance with the License. A copy of
# the License is located at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# or in the "license" file accompanying this file. This file is
# distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF
# ANY KIND, either express or implied. See the License for the specific
# language governing permissions and limitations under the License.

from __future__ import annotations

import argparse
import logging
import os
from pathlib import Path
from typing import List, Optional

from vjf.cli.commands import EXIT_CONFIGURATION, run, write_error
from vjf.cli.config import (
    DEFAULT_OUTPUT_DIR,
    OUTPUT_DIR_VARIABLE,
    PRESETS,
    Command,
    parse_config,
    read_config_document,
)
from vjf.errors import ConfigurationError

logger = logging.getLogger("vjf")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vjf",
        description="Online variational joint filtering: simulate, learn, predict and analyze "
        "latent dynamics from streaming observations.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("command", choices=[command.value for command in Command])
    parser.add_argument("--config", help="JSON configuration document")
    parser.add_argument("--preset", choices=sorted(PRESETS), help="preset scale")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a dotted configuration key; the value is parsed as JSON if possible",
    )
    parser.add_argument("--seed", type=int, help="root seed of every random stream")
    parser.add_argument(
        "--output-dir", help=f"artifact directory, default ${OUTPUT_DIR_VARIABLE} or "
        f"{DEFAULT_OUTPUT_DIR}"
    )
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="logging threshold",
    )
    return parser


def _fallback_output_dir(args: argparse.Namespace) -> Path:
    return Path(args.output_dir or os.environ.get(OUTPUT_DIR_VARIABLE, DEFAULT_OUTPUT_DIR))


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entry point of the `vjf` command.

    Args:
        argv (List[str], optional): Arguments without the program name. Default is
            `sys.argv[1:]`.

    Returns:
        int: Exit status, 0 on success, 2 for configuration errors, 3 for numerical
        failures and 1 for any other failure.
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=args.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )
    try:
        document = read_config_document(args.config) if args.config else {}
        config = parse_config(
            document,
            args.overrides,
            command=args.command,
            seed=args.seed,
            preset=args.preset,
            output_dir=args.output_dir,
        )
    except ConfigurationError as error:
        logger.error(f"Configuration error: {error}")
        write_error(_fallback_output_dir(args), error)
        return EXIT_CONFIGURATION
    return run(config, logger)
