"""Result arithmetic: per-class diagnostic metrics, prevalence, paired statistics.

Sensitivity, PPV, and F1 are percentages; prevalence is scaled per 1,000
records. Weighted macro averages weight each class by its true-class support.
Model comparisons pair per-class F1 scores (Wilcoxon signed-rank, Spearman,
Kendall tau-b) and per-record accuracy indicators (normal-approximation CI).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from .errors import (
    AllZeroSupport,
    LengthMismatch,
    NoCommonClasses,
    TooFewPairs,
    ZeroVariance,
)

WILCOXON_EXACT_MAX_N = 12


@dataclass(frozen=True)
class ClassOutcome:
    ccs: int
    tp: int
    fp: int
    fn: int

    @property
    def support(self) -> int:
        return self.tp + self.fn

    @property
    def predicted(self) -> int:
        return self.tp + self.fp


@dataclass(frozen=True)
class ClassMetricsRow:
    ccs: int
    sens: float
    ppv: float
    f1: float
    true_per1k: float
    pred_per1k: float
    abs_diff: float
    rel_diff_pct: float
    sens_defined: bool
    ppv_defined: bool
    description: str = ""


@dataclass
class EvalReport:
    rows: list[ClassMetricsRow]
    outcomes: list[ClassOutcome]
    weighted_sens: float
    weighted_ppv: float
    weighted_f1: float
    n_records: int


@dataclass
class ComparisonReport:
    n_common_classes: int
    wilcoxon_statistic: float | None
    wilcoxon_p: float | None
    wilcoxon_note: str = ""
    spearman_rho: float = 0.0
    kendall_tau: float = 0.0
    accuracy_diff_pct: float = 0.0
    accuracy_ci_low: float = 0.0
    accuracy_ci_high: float = 0.0
    common_classes: list[int] = field(default_factory=list)


def confusion_counts(preds: list[int], truth: list[int], classes: list[int]) -> list[ClassOutcome]:
    """One-vs-rest tp/fp/fn per class.

    Truth labels outside `classes` still get a row (fn-only, since the model
    never predicts them). The sum of tp over classes equals the number of
    correct predictions.
    """
    if len(preds) != len(truth):
        raise LengthMismatch(f"{len(preds)} predictions vs {len(truth)} truth labels")
    all_classes = sorted(set(classes) | set(truth))
    tp = {c: 0 for c in all_classes}
    fp = {c: 0 for c in all_classes}
    fn = {c: 0 for c in all_classes}
    for p, t in zip(preds, truth):
        if p == t:
            tp[t] += 1
        else:
            fp[p] += 1
            fn[t] += 1
    return [ClassOutcome(ccs=c, tp=tp[c], fp=fp[c], fn=fn[c]) for c in all_classes]


def f1_score(sens: float, ppv: float) -> float:
    if sens + ppv == 0.0:
        return 0.0
    return 2.0 * sens * ppv / (sens + ppv)


def class_metrics(outcome: ClassOutcome, n_records: int, description: str = "") -> ClassMetricsRow:
    """Percent sensitivity/PPV/F1 and per-1,000 prevalence for one class.

    Undefined ratios (no true cases, or no predictions) are reported as 0
    with the matching definedness flag cleared; rel_diff is 0 when the true
    prevalence is 0.
    """
    if n_records <= 0:
        raise ValueError("n_records must be positive")
    sens_defined = outcome.support > 0
    ppv_defined = outcome.predicted > 0
    sens = 100.0 * outcome.tp / outcome.support if sens_defined else 0.0
    ppv = 100.0 * outcome.tp / outcome.predicted if ppv_defined else 0.0
    f1 = f1_score(sens, ppv)
    true_per1k = 1000.0 * outcome.support / n_records
    pred_per1k = 1000.0 * outcome.predicted / n_records
    abs_diff = pred_per1k - true_per1k
    rel_diff_pct = 100.0 * abs(abs_diff) / true_per1k if true_per1k > 0 else 0.0
    return ClassMetricsRow(
        ccs=outcome.ccs,
        sens=sens,
        ppv=ppv,
        f1=f1,
        true_per1k=true_per1k,
        pred_per1k=pred_per1k,
        abs_diff=abs_diff,
        rel_diff_pct=rel_diff_pct,
        sens_defined=sens_defined,
        ppv_defined=ppv_defined,
        description=description,
    )


def weighted_macro(values: list[float], supports: list[int]) -> float:
    """Support-weighted average; zero-support classes are excluded."""
    if len(values) != len(supports):
        raise LengthMismatch("metric and support lists differ in length")
    total = sum(s for s in supports if s > 0)
    if total == 0:
        raise AllZeroSupport("no class has positive support")
    return sum(v * s for v, s in zip(values, supports) if s > 0) / total


def build_report(
    preds: list[int],
    truth: list[int],
    classes: list[int],
    descriptions: dict[int, str] | None = None,
) -> EvalReport:
    """Full evaluation report: per-class rows plus weighted macro summary."""
    outcomes = confusion_counts(preds, truth, classes)
    n = len(truth)
    names = descriptions or {}
    rows = [class_metrics(o, n, names.get(o.ccs, "")) for o in outcomes]
    supports = [o.support for o in outcomes]
    return EvalReport(
        rows=rows,
        outcomes=outcomes,
        weighted_sens=weighted_macro([r.sens for r in rows], supports),
        weighted_ppv=weighted_macro([r.ppv for r in rows], supports),
        weighted_f1=weighted_macro([r.f1 for r in rows], supports),
        n_records=n,
    )


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _norm_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def wilcoxon_signed_rank(a: list[float], b: list[float]) -> tuple[float, float]:
    """Two-sided Wilcoxon signed-rank test on paired scores.

    Zero differences are dropped before ranking and ties get midranks. The
    statistic is W = min(W+, W-). For n <= 12 effective pairs the p-value is
    exact over all 2^n sign assignments; beyond that a normal approximation
    with tie and continuity corrections is used.
    """
    if len(a) != len(b):
        raise LengthMismatch("paired score lists differ in length")
    diffs = np.array([x - y for x, y in zip(a, b)], dtype=np.float64)
    diffs = diffs[diffs != 0.0]
    n = len(diffs)
    if n == 0:
        raise TooFewPairs("all paired differences are zero")
    ranks = _midranks(np.abs(diffs))
    w_plus = float(ranks[diffs > 0].sum())
    w_minus = float(ranks[diffs < 0].sum())
    w = min(w_plus, w_minus)
    total = float(ranks.sum())

    if n <= WILCOXON_EXACT_MAX_N:
        # Distribution of W+ over all sign assignments; ranks stay fixed.
        count = 0
        for bits in range(1 << n):
            s = 0.0
            for i in range(n):
                if bits & (1 << i):
                    s += ranks[i]
            if s <= w or s >= total - w:
                count += 1
        p = count / float(1 << n)
    else:
        mean = total / 2.0
        _, tie_counts = np.unique(ranks, return_counts=True)
        tie_term = float(np.sum(tie_counts**3 - tie_counts)) / 48.0
        var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term
        sd = math.sqrt(var)
        z = (w - mean + 0.5) / sd
        p = 2.0 * _norm_cdf(z)
    return w, min(p, 1.0)


def spearman_rho(a: list[float], b: list[float]) -> float:
    """Pearson correlation of midrank-transformed vectors."""
    if len(a) != len(b):
        raise LengthMismatch("score lists differ in length")
    if len(a) < 2:
        raise ValueError("need at least 2 pairs")
    ra = _midranks(np.asarray(a, dtype=np.float64))
    rb = _midranks(np.asarray(b, dtype=np.float64))
    da = ra - ra.mean()
    db = rb - rb.mean()
    denom = math.sqrt(float(da @ da) * float(db @ db))
    if denom == 0.0:
        raise ZeroVariance("a rank vector is constant")
    return float(da @ db) / denom


def kendall_tau(a: list[float], b: list[float]) -> float:
    """Tau-b: pair concordance with tie corrections in both vectors."""
    if len(a) != len(b):
        raise LengthMismatch("score lists differ in length")
    n = len(a)
    if n < 2:
        raise ValueError("need at least 2 pairs")
    concordant = discordant = 0
    for i, j in combinations(range(n), 2):
        da = a[i] - a[j]
        db = b[i] - b[j]
        prod = da * db
        if prod > 0:
            concordant += 1
        elif prod < 0:
            discordant += 1
    n0 = n * (n - 1) // 2
    ties_a = _tie_pair_count(a)
    ties_b = _tie_pair_count(b)
    denom = math.sqrt((n0 - ties_a) * (n0 - ties_b))
    if denom == 0.0:
        raise ZeroVariance("a score vector is constant")
    return (concordant - discordant) / denom


def _tie_pair_count(values: list[float]) -> int:
    counts: dict[float, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    return sum(t * (t - 1) // 2 for t in counts.values())


def accuracy_diff_ci(
    preds_a: list[int],
    preds_b: list[int],
    truth: list[int],
) -> tuple[float, float, float]:
    """Paired accuracy difference (A minus B, in percent) with a 95% CI.

    d_i = 1[A correct] - 1[B correct]; the interval is the normal
    approximation point +/- 1.96 * 100 * sd(d) / sqrt(n) with sample sd.
    """
    if not (len(preds_a) == len(preds_b) == len(truth)):
        raise LengthMismatch("prediction and truth vectors differ in length")
    d = np.array(
        [(1 if pa == t else 0) - (1 if pb == t else 0) for pa, pb, t in zip(preds_a, preds_b, truth)],
        dtype=np.float64,
    )
    n = len(d)
    point = 100.0 * float(d.mean())
    sd = float(d.std(ddof=1)) if n > 1 else 0.0
    half = 1.96 * 100.0 * sd / math.sqrt(n)
    return point, point - half, point + half


def sorted_rows(report: EvalReport) -> list[ClassMetricsRow]:
    """Rows in descending F1 order; ties broken by ascending CCS code."""
    return sorted(report.rows, key=lambda r: (-r.f1, r.ccs))


REPORT_COLUMNS = (
    "ccs",
    "description",
    "true_per1k",
    "pred_per1k",
    "abs_diff",
    "rel_diff_pct",
    "sens",
    "ppv",
    "f1",
)


def write_report_csv(report: EvalReport, path: str | Path) -> None:
    """Per-class table with two-decimal percentages, sorted by descending F1."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(REPORT_COLUMNS)
        for r in sorted_rows(report):
            writer.writerow(
                [
                    r.ccs,
                    r.description,
                    f"{r.true_per1k:.2f}",
                    f"{r.pred_per1k:.2f}",
                    f"{r.abs_diff:.2f}",
                    f"{r.rel_diff_pct:.2f}",
                    f"{r.sens:.2f}",
                    f"{r.ppv:.2f}",
                    f"{r.f1:.2f}",
                ]
            )


def report_to_json_dict(report: EvalReport) -> dict:
    by_ccs = {o.ccs: o for o in report.outcomes}
    return {
        "n_records": report.n_records,
        "weighted": {
            "sens": report.weighted_sens,
            "ppv": report.weighted_ppv,
            "f1": report.weighted_f1,
        },
        "rows": [
            {
                "ccs": r.ccs,
                "description": r.description,
                "true_per1k": r.true_per1k,
                "pred_per1k": r.pred_per1k,
                "abs_diff": r.abs_diff,
                "rel_diff_pct": r.rel_diff_pct,
                "sens": r.sens,
                "ppv": r.ppv,
                "f1": r.f1,
                "sens_defined": r.sens_defined,
                "ppv_defined": r.ppv_defined,
                "support": by_ccs[r.ccs].support,
                "predicted": by_ccs[r.ccs].predicted,
            }
            for r in sorted_rows(report)
        ],
    }


def write_report_json(report: EvalReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report_to_json_dict(report), sort_keys=True), encoding="utf-8")


def compare_reports(
    f1_a: dict[int, float],
    f1_b: dict[int, float],
    preds_a: list[int],
    preds_b: list[int],
    truth: list[int],
) -> ComparisonReport:
    """Paired statistics over the classes both reports share."""
    common = sorted(set(f1_a) & set(f1_b))
    if len(common) < 2:
        raise NoCommonClasses(f"only {len(common)} classes shared between reports")
    a = [f1_a[c] for c in common]
    b = [f1_b[c] for c in common]
    try:
        w_stat, w_p = wilcoxon_signed_rank(a, b)
        note = ""
    except TooFewPairs:
        w_stat, w_p = None, None
        note = "all paired F1 differences are zero"
    point, lo, hi = accuracy_diff_ci(preds_a, preds_b, truth)
    return ComparisonReport(
        n_common_classes=len(common),
        wilcoxon_statistic=w_stat,
        wilcoxon_p=w_p,
        wilcoxon_note=note,
        spearman_rho=spearman_rho(a, b),
        kendall_tau=kendall_tau(a, b),
        accuracy_diff_pct=point,
        accuracy_ci_low=lo,
        accuracy_ci_high=hi,
        common_classes=common,
    )
