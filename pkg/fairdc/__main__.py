# fairdc - Deep fair discriminative clustering with exact fair assignments.
# Copyright (C) 2026 fairdc authors
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU Affero General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU Affero General Public License for more details.
#
# You should have received a copy of the GNU Affero General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.
from __future__ import annotations

from typing import Sequence
import argparse
import asyncio
import copy
import logging
import logging.config
import sys

from .commands import (
    CommandEvent,
    add_common_flags,
    add_training_flags,
    command_handlers,
    config_overrides,
)
from .config import LOG_LEVEL_ENV, OUTPUT_ENV, load_config
from .errors import FairDCError
from .version import version

EPILOG = f"""\
environment:
  {OUTPUT_ENV}    overrides output.directory
  {LOG_LEVEL_ENV}     overrides the log level of the fairdc loggers (e.g. DEBUG, TRACE)

exit codes:
  0 success, 2 invalid input or config, 3 infeasible fairness constraints,
  4 numeric failure during training
"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m fairdc",
        description="Deep fair discriminative clustering.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"fairdc {version}")
    subparsers = parser.add_subparsers(dest="command", metavar="<command>")
    for name, handler in command_handlers.items():
        sub = subparsers.add_parser(
            name,
            help=handler.help_text,
            description=handler.help_text,
            epilog=EPILOG,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        add_common_flags(sub)
        if handler.add_arguments:
            handler.add_arguments(sub)
        if handler.uses_training_flags:
            add_training_flags(sub)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help(sys.stderr)
        return 2
    try:
        config = load_config(args.config, config_overrides(args))
    except FairDCError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    logging.config.dictConfig(copy.deepcopy(config["logging"]))
    log = logging.getLogger("fairdc.cli")
    evt = CommandEvent(command=args.command, args=args, config=config, log=log)
    try:
        return asyncio.run(command_handlers[args.command](evt))
    except FairDCError as e:
        log.debug("%s failed", args.command, exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
