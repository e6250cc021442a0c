"""
Ranked-retrieval evaluation: P@10, NDCG@10 and MAP, run comparison and reports.

Provides:
- Per-query metrics against TREC qrels
- EvalReport with means over evaluated queries
- Paired t-tests between a baseline run and another run
- TSV and workbook output
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import stats

from utils.config import DEPTH, EVAL_CUTOFF
from utils.logger import get_logger
from utils.trec import Qrels, qrels_by_query

logger = get_logger()

METRICS = ("P@10", "NDCG@10", "MAP")
RunInput = Mapping[str, Sequence[Union[str, Tuple[str, float]]]]


# =============================================================================
# Metrics
# =============================================================================

def _doc_ids(ranking: Sequence[Union[str, Tuple[str, float]]]) -> List[str]:
    return [item if isinstance(item, str) else item[0] for item in ranking]


def precision_at_k(ranked: Sequence[str], judgments: Mapping[str, int], k: int = EVAL_CUTOFF) -> float:
    """Relevant documents in the top k divided by k, however many were retrieved."""
    hits = sum(1 for doc_id in ranked[:k] if judgments.get(doc_id, 0) > 0)
    return hits / k


def average_precision(ranked: Sequence[str], judgments: Mapping[str, int], depth: int = DEPTH) -> float:
    total_relevant = sum(1 for grade in judgments.values() if grade > 0)
    if total_relevant == 0:
        return 0.0
    hits = 0
    precision_sum = 0.0
    for position, doc_id in enumerate(ranked[:depth], start=1):
        if judgments.get(doc_id, 0) > 0:
            hits += 1
            precision_sum += hits / position
    return precision_sum / total_relevant


def ndcg_at_k(ranked: Sequence[str], judgments: Mapping[str, int], k: int = EVAL_CUTOFF) -> float:
    """Gain = relevance grade, discount 1/log2(rank + 1), ideal ordering from the qrels."""
    dcg = sum(
        max(judgments.get(doc_id, 0), 0) / math.log2(position + 1)
        for position, doc_id in enumerate(ranked[:k], start=1)
    )
    ideal_grades = sorted((g for g in judgments.values() if g > 0), reverse=True)[:k]
    idcg = sum(grade / math.log2(position + 1) for position, grade in enumerate(ideal_grades, start=1))
    if idcg == 0:
        return 0.0
    return dcg / idcg


@dataclass
class QueryMetrics:
    p10: float
    ndcg10: float
    ap: float

    def as_row(self) -> Dict[str, float]:
        return {"P@10": self.p10, "NDCG@10": self.ndcg10, "MAP": self.ap}


@dataclass
class EvalReport:
    label: str = "run"
    per_query: Dict[str, QueryMetrics] = field(default_factory=dict)
    means: Dict[str, float] = field(default_factory=dict)
    skipped: List[str] = field(default_factory=list)

    def metric_values(self, metric: str, qids: Optional[Sequence[str]] = None) -> List[float]:
        qids = qids if qids is not None else sorted(self.per_query)
        return [self.per_query[qid].as_row()[metric] for qid in qids]


def evaluate(run: RunInput, qrels: Qrels, label: str = "run",
             cutoff: int = EVAL_CUTOFF, depth: int = DEPTH) -> EvalReport:
    """Score every run query with at least one relevant judgment; others are skipped."""
    grouped = qrels_by_query(qrels)
    report = EvalReport(label=label)

    for qid, ranking in run.items():
        judgments = grouped.get(qid, {})
        if not any(grade > 0 for grade in judgments.values()):
            report.skipped.append(qid)
            logger.warning(f"Query {qid} has no relevant judgments; skipped", extra={'qid': qid})
            continue
        ranked = _doc_ids(ranking)
        report.per_query[qid] = QueryMetrics(
            p10=precision_at_k(ranked, judgments, cutoff),
            ndcg10=ndcg_at_k(ranked, judgments, cutoff),
            ap=average_precision(ranked, judgments, depth),
        )

    if report.per_query:
        for metric in METRICS:
            values = report.metric_values(metric)
            report.means[metric] = sum(values) / len(values)
    else:
        report.means = {metric: 0.0 for metric in METRICS}
    logger.info(
        f"Evaluated '{label}' on {len(report.per_query)} queries",
        extra={'skipped': len(report.skipped), **{k.replace('@', '_at_'): v for k, v in report.means.items()}}
    )
    return report


# =============================================================================
# Significance
# =============================================================================

@dataclass
class MetricComparison:
    metric: str
    baseline_mean: float
    other_mean: float
    t_statistic: Optional[float]
    p_value: Optional[float]
    significant: bool


def compare_reports(baseline: EvalReport, other: EvalReport,
                    significance: float = 0.05) -> Dict[str, MetricComparison]:
    """Paired t-test per metric over the queries both reports evaluated."""
    common = sorted(set(baseline.per_query) & set(other.per_query))
    comparisons: Dict[str, MetricComparison] = {}
    for metric in METRICS:
        base_values = np.array(baseline.metric_values(metric, common))
        other_values = np.array(other.metric_values(metric, common))
        t_stat: Optional[float] = None
        p_value: Optional[float] = None
        diffs = other_values - base_values
        if len(common) >= 2 and np.ptp(diffs) > 0:
            result = stats.ttest_rel(other_values, base_values)
            t_stat, p_value = float(result.statistic), float(result.pvalue)
        comparisons[metric] = MetricComparison(
            metric=metric,
            baseline_mean=float(base_values.mean()) if len(common) else 0.0,
            other_mean=float(other_values.mean()) if len(common) else 0.0,
            t_statistic=t_stat,
            p_value=p_value,
            significant=p_value is not None and p_value < significance,
        )
    return comparisons


# =============================================================================
# Tables and output
# =============================================================================

def to_frame(report: EvalReport) -> pd.DataFrame:
    """Per-query metrics plus a final 'all' row holding the means."""
    rows = [{"qid": qid, **metrics.as_row()} for qid, metrics in sorted(report.per_query.items())]
    rows.append({"qid": "all", **report.means})
    frame = pd.DataFrame(rows, columns=["qid", *METRICS])
    frame.insert(0, "run", report.label)
    return frame


def summary_frame(reports: Sequence[EvalReport],
                  baseline: Optional[EvalReport] = None) -> pd.DataFrame:
    """One row per run with mean metrics and, against ``baseline``, t-test p-values."""
    rows = []
    for report in reports:
        row: Dict[str, Any] = {"run": report.label, "queries": len(report.per_query)}
        row.update(report.means)
        if baseline is not None and report is not baseline:
            for metric, comparison in compare_reports(baseline, report).items():
                row[f"p({metric})"] = comparison.p_value
                row[f"sig({metric})"] = comparison.significant
        rows.append(row)
    return pd.DataFrame(rows)


def write_eval_tsv(frame: pd.DataFrame, path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    frame.to_csv(path, sep="\t", index=False, float_format="%.4f", lineterminator="\n")


def write_eval_xlsx(reports: Sequence[EvalReport], summary: pd.DataFrame, path: str) -> None:
    """Workbook with a summary sheet and one per-query sheet per run."""
    # Lazy load xlsxwriter - only imported when a workbook is requested
    from xlsxwriter import Workbook

    sheets: Dict[str, pd.DataFrame] = {"Summary": summary}
    for report in reports:
        sheets[report.label[:31]] = to_frame(report)

    workbook = Workbook(path, {"nan_inf_to_errors": True})
    try:
        header_format = workbook.add_format({'bold': True, 'bg_color': '#4A90E2',
                                             'font_color': '#FFFFFF', 'border': 1})
        number_format = workbook.add_format({'num_format': '0.0000', 'border': 1})
        cell_format = workbook.add_format({'border': 1})

        for sheet_name, frame in sheets.items():
            worksheet = workbook.add_worksheet(sheet_name)
            for col_idx, header in enumerate(frame.columns):
                worksheet.set_column(col_idx, col_idx, max(len(str(header)) + 2, 10))
                worksheet.write(0, col_idx, header, header_format)
            for row_idx, row in enumerate(frame.itertuples(index=False), start=1):
                for col_idx, value in enumerate(row):
                    if value is None or (isinstance(value, float) and math.isnan(value)):
                        worksheet.write_blank(row_idx, col_idx, None, cell_format)
                    elif isinstance(value, (bool, np.bool_)):
                        worksheet.write_boolean(row_idx, col_idx, bool(value), cell_format)
                    elif isinstance(value, (int, float, np.integer, np.floating)):
                        worksheet.write_number(row_idx, col_idx, float(value), number_format)
                    else:
                        worksheet.write(row_idx, col_idx, str(value), cell_format)
            logger.debug(f"Added worksheet: {sheet_name} with {len(frame)} rows")
    finally:
        workbook.close()
    logger.info(f"Wrote evaluation workbook with {len(sheets)} sheet(s)", extra={'path': path})
