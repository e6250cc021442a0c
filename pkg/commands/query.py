"""classify, detect, expand and search: per-query commands."""
import json
from typing import Any, Callable, Dict, Iterator, List, Tuple

import click

from commands.common import CommandContext, emit_records, pass_command_context, resolve_queries
from utils.detection import Query, ScorerType, classify_event_related, detect_for_query
from utils.errors import ToolkitError, handle_errors, success_payload
from utils.logger import get_logger
from utils.pipeline import expand_query, run_topics
from utils.trec import write_run

logger = get_logger()

query_option = click.option(
    "--query", "queries", multiple=True,
    help="Query text (repeatable). Without it the configured topics are used.",
)


def _per_query(topics: List[Tuple[str, Query]],
               handler: Callable[[str, Query], List[Dict[str, Any]]]) -> Iterator[Dict[str, Any]]:
    """Run ``handler`` per query; a failing query yields an error record and the rest go on."""
    for qid, query in topics:
        try:
            yield from handler(qid, query)
        except ToolkitError as exc:
            logger.error(f"Query {qid} failed: {exc.message}", extra={'qid': qid, 'error_code': exc.code})
            yield {"qid": qid, "query": query.raw, "error": {"code": exc.code, "message": exc.message}}


@click.command("classify")
@query_option
@pass_command_context
@handle_errors
def classify_command(ctx: CommandContext, queries):
    """Flag each query as event-related or not."""
    resources = ctx.resources
    topics = resolve_queries(ctx, queries)

    def handler(qid: str, query: Query):
        related = classify_event_related(query, resources.events, resources.tfidf)
        return [{"qid": qid, "query": query.raw, "event_related": related}]

    count = emit_records(_per_query(topics, handler), ctx.output_path("classify.jsonl"))
    logger.info(f"Classified {count} queries")


@click.command("detect")
@query_option
@pass_command_context
@handle_errors
def detect_command(ctx: CommandContext, queries):
    """List the events detected for each query."""
    resources = ctx.resources
    config = ctx.config.detection
    topics = resolve_queries(ctx, queries)
    models = resources.models if config.scorer == ScorerType.SIMILARITY else None

    def handler(qid: str, query: Query):
        detected = detect_for_query(query, resources.events, config, models, resources.tfidf)
        return [
            {"qid": qid, "query": query.raw, "event": d.event.name, "event_id": d.event.id,
             "year": d.year, "score": d.score, "scorer": d.scorer.value}
            for d in detected
        ]

    count = emit_records(_per_query(topics, handler), ctx.output_path("detect.jsonl"))
    logger.info(f"Emitted {count} detection records")


@click.command("expand")
@query_option
@click.option("--explain", is_flag=True, help="Include every candidate with its feature values.")
@pass_command_context
@handle_errors
def expand_command(ctx: CommandContext, queries, explain):
    """Print the expanded query of each query."""
    resources = ctx.resources
    topics = resolve_queries(ctx, queries)

    def handler(qid: str, query: Query):
        expanded = expand_query(resources, query)
        return [{"qid": qid, **expanded.to_dict(explain=explain)}]

    count = emit_records(_per_query(topics, handler), ctx.output_path("expand.jsonl"))
    logger.info(f"Expanded {count} queries")


@click.command("search")
@query_option
@click.option("--baseline", is_flag=True, help="Rank with the unexpanded query model.")
@click.option("--tag", default=None, help="Run tag written in the last column.")
@pass_command_context
@handle_errors
def search_command(ctx: CommandContext, queries, baseline, tag):
    """Rank the corpus for every query and write OUT/run.txt."""
    topics = resolve_queries(ctx, queries)
    run = run_topics(ctx.resources, topics, baseline=baseline)
    tag = tag or ("baseline" if baseline else ctx.config.expansion.variant.value)
    path = ctx.output_path("run.txt")
    write_run(run, path, tag)
    click.echo(json.dumps(success_payload({"run": path, "queries": len(run), "tag": tag}), sort_keys=True))
