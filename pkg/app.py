"""
Command-line entry point.

    python app.py --config data/benchmark/config.json eval
"""
import click

from commands import ALL_COMMANDS
from commands.common import CommandContext
from utils.errors import handle_errors
from utils.logger import setup_logging
from utils.pipeline import PipelineResources, load_pipeline_config
from utils.run_id import end_run, start_run

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="Pipeline configuration (JSON).")
@click.option("--seed", type=int, default=None, help="Override the configured seed.")
@click.option("--variant", type=click.Choice(["static", "temporal"]), default=None,
              help="Expansion variant.")
@click.option("--scorer", type=click.Choice(["similarity", "frequency"]), default=None,
              help="Event detection scorer.")
@click.option("--out", "output_dir", type=click.Path(file_okay=False), default=None,
              help="Output directory.")
@click.option("--log-level", type=click.Choice(LOG_LEVELS, case_sensitive=False), default=None,
              help="Console log level.")
@click.pass_context
@handle_errors
def cli(ctx: click.Context, config_path, seed, variant, scorer, output_dir, log_level):
    """Event-driven query expansion toolkit."""
    logger = setup_logging(log_level.upper() if log_level else None)
    run_id = start_run()
    ctx.call_on_close(end_run)

    config = load_pipeline_config(config_path).with_overrides(
        seed=seed, variant=variant, scorer=scorer, output_dir=output_dir,
    )
    logger.debug(f"[{run_id}] Running '{ctx.invoked_subcommand}'", extra={'config': config_path})
    ctx.obj = CommandContext(config=config, resources=PipelineResources(config))


# Register commands
for command in ALL_COMMANDS:
    cli.add_command(command)


if __name__ == "__main__":
    cli()
