import json

import click

from commands.common import CommandContext, pass_command_context
from utils.benchmark import generate_benchmark
from utils.config import DEFAULT_BENCHMARK_DIR
from utils.errors import handle_errors, success_payload


@click.command("make-benchmark")
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              default=DEFAULT_BENCHMARK_DIR, show_default=True,
              help="Directory the benchmark is written to.")
@click.option("--seed", type=int, default=None, help="Seed (default: the group --seed).")
@pass_command_context
@handle_errors
def make_benchmark_command(ctx: CommandContext, out_dir, seed):
    """Write the synthetic benchmark and a config.json pointing at it."""
    paths = generate_benchmark(out_dir, seed=ctx.config.seed if seed is None else seed)
    click.echo(json.dumps(success_payload(paths), sort_keys=True))
