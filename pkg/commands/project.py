import json

import click

from commands.common import CommandContext, pass_command_context
from utils.errors import handle_errors, success_payload
from utils.logger import get_logger
from utils.projection import project_all
from utils.vecspace import load_model, load_temporal_models, save_temporal_models

logger = get_logger()


@click.command("project")
@click.option("--enriched-dir", type=click.Path(file_okay=False), default=None,
              help="Where enriched year models are written (default: paths.enriched_dir or OUT/enriched).")
@pass_command_context
@handle_errors
def project_command(ctx: CommandContext, enriched_dir):
    """Project every event into the model of its year and save the enriched models."""
    config = ctx.config
    config.require("static_model", "temporal_dir", "events")

    static = load_model(config.paths.static_model, label="static")
    temporal = load_temporal_models(config.paths.temporal_dir)
    report = project_all(ctx.resources.events, static, temporal, config.projection)

    target = enriched_dir or config.paths.enriched_dir or ctx.output_path("enriched")
    written = save_temporal_models(temporal, target)
    report_path = ctx.output_path("projection_report.jsonl")
    report.write_jsonl(report_path)

    summary = report.summary()
    logger.info(
        f"Wrote {len(written)} enriched models to {target}",
        extra={'report': report_path, **summary}
    )
    click.echo(json.dumps(success_payload(
        {**summary, "enriched_dir": target, "models": len(written), "report": report_path}
    ), sort_keys=True))
