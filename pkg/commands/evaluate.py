"""The eval command: baseline against expanded runs, plus ablations and sweeps."""
import os
from dataclasses import replace
from typing import List, Optional, Tuple

import click
import pandas as pd

from commands.common import CommandContext, pass_command_context
from utils.errors import handle_errors
from utils.evaluation import EvalReport, evaluate, summary_frame, to_frame, write_eval_tsv, write_eval_xlsx
from utils.expansion import FEATURES, ExpansionConfig
from utils.logger import get_logger
from utils.pipeline import run_topics
from utils.trec import read_run, write_run

logger = get_logger()


def parse_lambda_values(raw: Optional[str]) -> List[float]:
    """'0,0.5,1' -> [0.0, 0.5, 1.0]; every value must lie in [0, 1]."""
    if not raw:
        return []
    values = []
    for part in raw.split(","):
        part = part.strip()
        try:
            value = float(part)
        except ValueError:
            raise click.BadParameter(f"'{part}' is not a number", param_hint="--sweep-lambda")
        if not 0.0 <= value <= 1.0:
            raise click.BadParameter(f"{value} is outside [0, 1]", param_hint="--sweep-lambda")
        values.append(value)
    return values


def _expansion_runs(base: ExpansionConfig, label: str, ablate: Tuple[str, ...],
                    sweep: List[float]) -> List[Tuple[str, ExpansionConfig]]:
    runs = [(label, base)]
    for feature in ablate:
        disabled = tuple(set(base.disabled_features) | {feature})
        runs.append((f"{label}-no-{feature}", replace(base, disabled_features=disabled)))
    for value in sweep:
        runs.append((f"{label}-lambda={value:g}", replace(base, lambda_=value)))
    return runs


@click.command("eval")
@click.option("--ablate", multiple=True, type=click.Choice(FEATURES),
              help="Leave one scoring feature out (repeatable).")
@click.option("--sweep-lambda", "sweep_lambda", default=None,
              help="Comma-separated lambda values, e.g. 0,0.5,1.")
@click.option("--run", "run_paths", multiple=True, type=click.Path(dir_okay=False),
              help="Also score an existing TREC run file (repeatable).")
@click.option("--xlsx", is_flag=True, help="Also write OUT/eval.xlsx.")
@pass_command_context
@handle_errors
def eval_command(ctx: CommandContext, ablate, sweep_lambda, run_paths, xlsx):
    """Evaluate the unexpanded baseline and the configured variant against the qrels."""
    config = ctx.config
    config.require("corpus", "topics", "qrels")
    sweep = parse_lambda_values(sweep_lambda)
    resources = ctx.resources
    topics, qrels = resources.topics, resources.qrels
    cutoff_args = {"depth": config.retrieval.depth}

    baseline_run = run_topics(resources, topics, baseline=True)
    write_run(baseline_run, ctx.output_path("baseline_run.txt"), "baseline")
    baseline = evaluate(baseline_run, qrels, "baseline", **cutoff_args)
    reports: List[EvalReport] = [baseline]

    label = config.expansion.variant.value
    for run_label, expansion in _expansion_runs(config.expansion, label, ablate, sweep):
        run = run_topics(resources, topics, expansion=expansion)
        if run_label == label:
            write_run(run, ctx.output_path("run.txt"), label)
        reports.append(evaluate(run, qrels, run_label, **cutoff_args))

    for path in run_paths:
        external = read_run(path)
        reports.append(evaluate(external, qrels, os.path.basename(path), **cutoff_args))

    summary = summary_frame(reports, baseline)
    write_eval_tsv(summary, ctx.output_path("eval.tsv"))
    write_eval_tsv(pd.concat([to_frame(r) for r in reports], ignore_index=True),
                   ctx.output_path("eval_per_query.tsv"))
    if xlsx:
        write_eval_xlsx(reports, summary, ctx.output_path("eval.xlsx"))

    logger.info(f"Evaluated {len(reports)} runs on {len(topics)} topics",
                extra={'output_dir': ctx.output_dir})
    click.echo(summary.to_string(index=False, float_format=lambda v: f"{v:.4f}"))
