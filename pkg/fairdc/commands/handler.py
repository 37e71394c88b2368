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

from argparse import ArgumentParser, Namespace
from pathlib import Path
from typing import Any, Awaitable, Callable

from attr import dataclass

from mautrix.util.logging import TraceLogger

from ..config import Config


@dataclass
class CommandEvent:
    """What a command handler gets: parsed arguments, the loaded config and a logger."""

    command: str
    args: Namespace
    config: Config
    log: TraceLogger

    @property
    def output_dir(self) -> Path:
        path = self.config.output_dir
        path.mkdir(parents=True, exist_ok=True)
        return path

    def print(self, message: str) -> None:
        print(message, flush=True)


CommandFunc = Callable[[CommandEvent], Awaitable[int]]
ArgumentsFunc = Callable[[ArgumentParser], None]


@dataclass
class CommandHandler:
    name: str
    func: CommandFunc
    help_text: str
    add_arguments: ArgumentsFunc | None = None
    uses_training_flags: bool = False

    async def __call__(self, evt: CommandEvent) -> int:
        return await self.func(evt)


command_handlers: dict[str, CommandHandler] = {}


def command_handler(
    name: str | None = None,
    help_text: str = "",
    arguments: ArgumentsFunc | None = None,
    training_flags: bool = False,
) -> Callable[[CommandFunc], CommandHandler]:
    def decorator(func: CommandFunc) -> CommandHandler:
        handler = CommandHandler(
            name=name or func.__name__.replace("_", "-"),
            func=func,
            help_text=help_text,
            add_arguments=arguments,
            uses_training_flags=training_flags,
        )
        command_handlers[handler.name] = handler
        return handler

    return decorator


# Flag name, dotted config key and type of every training override.
TRAINING_FLAGS: list[tuple[str, str, type]] = [
    ("--seed", "training.seed", int),
    ("--k", "training.k", int),
    ("--batch-size", "training.batch_size", int),
    ("--pretrain-epochs", "training.pretrain_epochs", int),
    ("--max-refine-epochs", "training.max_refine_epochs", int),
    ("--alpha", "loss.alpha", float),
    ("--beta", "loss.beta", float),
    ("--gamma", "loss.gamma", float),
    ("--vat-epsilon", "loss.vat_epsilon", float),
    ("--epsilon-relax", "fairness.relax", float),
    ("--threads", "sweep.threads", int),
]


def add_common_flags(parser: ArgumentParser) -> None:
    parser.add_argument(
        "-c", "--config", type=str, default=None, metavar="<path>", help="the config file to load"
    )
    parser.add_argument(
        "--out", type=str, default=None, metavar="<dir>", help="directory for reports and labels"
    )


def add_training_flags(parser: ArgumentParser) -> None:
    group = parser.add_argument_group("config overrides")
    for flag, key, kind in TRAINING_FLAGS:
        group.add_argument(flag, type=kind, default=None, metavar=kind.__name__.upper(), help=key)


def config_overrides(args: Namespace) -> dict[str, Any]:
    overrides: dict[str, Any] = {}
    if getattr(args, "out", None):
        overrides["output.directory"] = args.out
    for flag, key, _ in TRAINING_FLAGS:
        value = getattr(args, flag[2:].replace("-", "_"), None)
        if value is not None:
            overrides[key] = value
    return overrides
