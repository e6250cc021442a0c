"""Helpers shared by the command modules."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import click

from utils.detection import Query
from utils.pipeline import PipelineConfig, PipelineResources


@dataclass
class CommandContext:
    """What the group callback hands to every command."""
    config: PipelineConfig
    resources: PipelineResources

    @property
    def output_dir(self) -> str:
        path = self.config.paths.output_dir
        os.makedirs(path, exist_ok=True)
        return path

    def output_path(self, name: str) -> str:
        return os.path.join(self.output_dir, name)


pass_command_context = click.make_pass_decorator(CommandContext)


def resolve_queries(ctx: CommandContext, raw_queries: Sequence[str]) -> List[Tuple[str, Query]]:
    """Ad-hoc --query values numbered q1, q2, ... or else the configured topics."""
    if raw_queries:
        return [(f"q{i}", Query.from_text(raw)) for i, raw in enumerate(raw_queries, start=1)]
    return list(ctx.resources.topics)


def emit_records(records: Iterable[Dict[str, Any]], path: str) -> int:
    """Write JSON lines to ``path`` and echo them to stdout."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            line = json.dumps(record, sort_keys=True)
            handle.write(line + "\n")
            click.echo(line)
            count += 1
    return count
