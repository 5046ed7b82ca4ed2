"""Empirical race statistics with matched parameter-free theory columns.

For each field-size bucket and each rank selector (favourite through 4th
favourite, plus the longshot = rank n per race) the report carries:

  mean_implied_odds             E[Q_(k)], sample mean with standard error
  win_frequency                 E[P_(k)], win fraction with binomial SE
  segment_mean_theory           E[z_(k)], mixture over the bucket's field sizes
  implied_odds_given_win        E[Q_(k) | rank k won], with SE
  segment_mean_given_win_theory size-biased mean under the same mixture
  winner_odds_mean              mean implied odds of the winning horse
  winner_segment_mean_theory    mixture of 2/(n+1)

Theory cells are computed solely from the bucket's own field-size
histogram; nothing is fitted.  Every cell is either populated or explicitly
marked absent with a diagnostic note.

The conditional theory column is the size-biased mean of the pooled
mixture, sum_n w_n E[z^2] / sum_n w_n E[z]: pooling races across field
sizes weights each n by how often rank k wins there, which is what the
conditioned empirical column estimates.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .orderstats import (
    FieldSizeHistogram,
    mixture,
    mixture_ccdf,
    pooled_conditional_mean_given_win,
)
from .racedata import BucketSpec, FieldSizeBucket, RankedRace
from .stats import EccdfCurve, empirical_survival

__all__ = [
    "RANK_SELECTORS",
    "Cell",
    "RankRow",
    "BucketReport",
    "AnalysisReport",
    "empirical_table",
    "conditional_table",
    "winner_odds_average",
    "eccdf_per_rank",
    "build_report",
    "report_to_csv_text",
    "report_to_json_text",
    "report_cells",
    "cells_from_json",
    "curve_to_csv_text",
]

RANK_SELECTORS: tuple = (1, 2, 3, 4, "longshot")


@dataclass(frozen=True)
class Cell:
    """One report number: value with uncertainty, or an explicit absence."""

    value: float | None
    se: float | None
    count: int
    note: str = ""

    @property
    def absent(self) -> bool:
        return self.value is None


@dataclass(frozen=True)
class RankRow:
    selector: int | str
    mean_implied_odds: Cell
    win_frequency: Cell
    segment_mean: Cell
    implied_odds_given_win: Cell
    segment_mean_given_win: Cell

    @property
    def label(self) -> str:
        return selector_label(self.selector)


@dataclass(frozen=True)
class BucketReport:
    bucket: FieldSizeBucket
    races: int
    histogram: FieldSizeHistogram
    rows: tuple[RankRow, ...]
    winner_odds: Cell
    winner_segment: Cell
    tie_count: int = 0


@dataclass(frozen=True)
class AnalysisReport:
    buckets: tuple[BucketReport, ...]
    min_field_size: int
    renormalized: bool


def selector_label(selector) -> str:
    return "longshot" if selector == "longshot" else str(int(selector))


def _mean_cell(values: Sequence[float], empty_note: str) -> Cell:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return Cell(None, None, 0, empty_note)
    se = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return Cell(float(values.mean()), se, int(values.size))


def _freq_cell(hits: int, total: int) -> Cell:
    p = hits / total
    return Cell(p, math.sqrt(p * (1.0 - p) / total), total)


def _bucket_selection(races: Sequence[RankedRace], bucket: FieldSizeBucket) -> list[RankedRace]:
    selected = [r for r in races if bucket.contains(r.field_size)]
    if not selected:
        raise ValueError(
            f"empty selection: no races in bucket {bucket.name!r} ({bucket.label()})"
        )
    return selected


def _rank_selection(races: Sequence[RankedRace], selector) -> list[RankedRace]:
    if selector == "longshot":
        return list(races)
    k = int(selector)
    return [r for r in races if r.field_size >= k]


def _rank_of(race: RankedRace, selector) -> int:
    return race.field_size if selector == "longshot" else int(selector)


def _theory_histogram(
    usable: Sequence[RankedRace], theory_field_size: int | None
) -> FieldSizeHistogram:
    # A fixed override replaces the races' own field-size mix (for
    # controlled tests against a single known n).
    if theory_field_size is not None:
        return FieldSizeHistogram({theory_field_size: 1})
    return FieldSizeHistogram.from_sizes(r.field_size for r in usable)


def empirical_table(
    races: Sequence[RankedRace],
    bucket: FieldSizeBucket,
    theory_field_size: int | None = None,
) -> list[tuple[int | str, Cell, Cell, Cell]]:
    """Rows (selector, E[Q_(k)], E[P_(k)], theory E[z_(k)]) for one bucket.

    A fixed rank k only uses races with field size >= k; if the bucket holds
    none, the row's cells are marked absent rather than zero.
    """
    selected = _bucket_selection(races, bucket)
    rows = []
    for selector in RANK_SELECTORS:
        usable = _rank_selection(selected, selector)
        if not usable:
            note = f"no races with field size >= {selector}"
            absent = Cell(None, None, 0, note)
            rows.append((selector, absent, absent, absent))
            continue
        q_values = [r.implied_odds(_rank_of(r, selector)) for r in usable]
        wins = sum(1 for r in usable if r.winner_rank == _rank_of(r, selector))
        hist = _theory_histogram(usable, theory_field_size)
        theory = Cell(mixture(hist, "mean", k=selector), None, len(usable))
        rows.append((selector, _mean_cell(q_values, ""), _freq_cell(wins, len(usable)), theory))
    return rows


def conditional_table(
    races: Sequence[RankedRace],
    bucket: FieldSizeBucket,
    theory_field_size: int | None = None,
) -> list[tuple[int | str, Cell, Cell]]:
    """Rows (selector, E[Q_(k)|win], theory size-biased mean) for one bucket."""
    selected = _bucket_selection(races, bucket)
    rows = []
    for selector in RANK_SELECTORS:
        usable = _rank_selection(selected, selector)
        if not usable:
            note = f"no races with field size >= {selector}"
            rows.append((selector, Cell(None, None, 0, note), Cell(None, None, 0, note)))
            continue
        winners = [r for r in usable if r.winner_rank == _rank_of(r, selector)]
        q_win = _mean_cell(
            [r.implied_odds(_rank_of(r, selector)) for r in winners],
            "no wins at this rank",
        )
        hist = _theory_histogram(usable, theory_field_size)
        theory = Cell(pooled_conditional_mean_given_win(hist, selector), None, len(usable))
        rows.append((selector, q_win, theory))
    return rows


def winner_odds_average(
    races: Sequence[RankedRace],
    bucket: FieldSizeBucket,
    theory_field_size: int | None = None,
) -> tuple[Cell, Cell]:
    """Mean implied odds of the winning horse vs the mixture of 2/(n+1)."""
    selected = _bucket_selection(races, bucket)
    empirical = _mean_cell([r.winner_odds for r in selected], "")
    hist = _theory_histogram(selected, theory_field_size)
    theory = Cell(mixture(hist, "winner_segment_mean"), None, len(selected))
    return empirical, theory


def eccdf_per_rank(
    races: Sequence[RankedRace],
    selector,
    grid: Sequence[float] | None = None,
    theory_field_size: int | None = None,
) -> tuple[EccdfCurve, EccdfCurve]:
    """Pooled empirical survival of Q_(k) plus the mixture theory curve.

    All field sizes are pooled; the theory curve weights each per-n survival
    by that n's share of the selected races.  The default grid is the sorted
    set of observed values.
    """
    usable = _rank_selection(races, selector)
    if not usable:
        raise ValueError(f"empty selection: no races usable for rank {selector!r}")
    values = np.array([r.implied_odds(_rank_of(r, selector)) for r in usable])
    xs = np.unique(values) if grid is None else np.sort(np.asarray(grid, dtype=float))
    empirical = EccdfCurve(xs, empirical_survival(values, xs))
    hist = _theory_histogram(usable, theory_field_size)
    theory = EccdfCurve(xs, mixture_ccdf(hist, selector, xs))
    return empirical, theory


def build_report(
    races: Sequence[RankedRace],
    spec: BucketSpec | None = None,
    min_field_size: int = 5,
    renormalized: bool = False,
    theory_field_size: int | None = None,
) -> AnalysisReport:
    """Assemble the full per-bucket report from ranked races.

    Races below ``min_field_size`` are dropped before bucketing.
    """
    if spec is None:
        spec = BucketSpec.default(min_field_size)
    kept = [r for r in races if r.field_size >= min_field_size]
    if not kept:
        raise ValueError(f"no races with field size >= {min_field_size}")

    buckets = []
    for bucket in spec.buckets:
        try:
            selected = _bucket_selection(kept, bucket)
        except ValueError:
            continue  # bucket with no races is omitted from the report
        main = empirical_table(kept, bucket, theory_field_size)
        conditional = conditional_table(kept, bucket, theory_field_size)
        rows = tuple(
            RankRow(sel, q, p, z, q_win, z_win)
            for (sel, q, p, z), (_, q_win, z_win) in zip(main, conditional)
        )
        winner_emp, winner_theory = winner_odds_average(kept, bucket, theory_field_size)
        buckets.append(
            BucketReport(
                bucket=bucket,
                races=len(selected),
                histogram=FieldSizeHistogram.from_sizes(r.field_size for r in selected),
                rows=rows,
                winner_odds=winner_emp,
                winner_segment=winner_theory,
                tie_count=sum(r.tie_count for r in selected),
            )
        )
    if not buckets:
        raise ValueError("no bucket matched any race")
    return AnalysisReport(tuple(buckets), min_field_size, renormalized)


# --- serialization ---------------------------------------------------------

_ROW_STATISTICS = (
    ("mean_implied_odds", "mean_implied_odds"),
    ("win_frequency", "win_frequency"),
    ("segment_mean", "segment_mean_theory"),
    ("implied_odds_given_win", "implied_odds_given_win"),
    ("segment_mean_given_win", "segment_mean_given_win_theory"),
)


def _rounded(value: float | None, digits: int) -> float | None:
    if value is None:
        return None
    return float(f"{value:.{digits}g}")


def report_cells(report: AnalysisReport, digits: int = 6) -> dict[tuple[str, str, str], Cell]:
    """Flatten a report into {(bucket, rank, statistic): Cell} with rounded values."""
    cells: dict[tuple[str, str, str], Cell] = {}
    for bucket_report in report.buckets:
        name = bucket_report.bucket.name
        for row in bucket_report.rows:
            for attr, statistic in _ROW_STATISTICS:
                cell: Cell = getattr(row, attr)
                cells[(name, row.label, statistic)] = Cell(
                    _rounded(cell.value, digits),
                    _rounded(cell.se, digits),
                    cell.count,
                    cell.note,
                )
        cells[(name, "winner", "winner_odds_mean")] = Cell(
            _rounded(bucket_report.winner_odds.value, digits),
            _rounded(bucket_report.winner_odds.se, digits),
            bucket_report.winner_odds.count,
            bucket_report.winner_odds.note,
        )
        cells[(name, "winner", "winner_segment_mean_theory")] = Cell(
            _rounded(bucket_report.winner_segment.value, digits),
            None,
            bucket_report.winner_segment.count,
            bucket_report.winner_segment.note,
        )
    return cells


def report_to_csv_text(report: AnalysisReport, digits: int = 6) -> str:
    """One row per bucket x rank x statistic; absent cells keep their note."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["bucket", "rank", "statistic", "value", "se", "count", "note"])
    for (bucket, rank, statistic), cell in report_cells(report, digits).items():
        writer.writerow(
            [
                bucket,
                rank,
                statistic,
                "" if cell.value is None else f"{cell.value:.{digits}g}",
                "" if cell.se is None else f"{cell.se:.{digits}g}",
                cell.count,
                cell.note,
            ]
        )
    return out.getvalue()


def report_to_json_text(report: AnalysisReport, digits: int = 6) -> str:
    """Structured JSON document carrying the same values as the CSV."""
    payload = {
        "min_field_size": report.min_field_size,
        "renormalized": report.renormalized,
        "buckets": [],
    }
    for bucket_report in report.buckets:
        bucket = bucket_report.bucket
        entry = {
            "name": bucket.name,
            "lo": bucket.lo,
            "hi": bucket.hi,
            "races": bucket_report.races,
            "tie_count": bucket_report.tie_count,
            "field_size_counts": {
                str(n): c for n, c in sorted(bucket_report.histogram.counts.items())
            },
            "ranks": [],
            "winner": {
                "winner_odds_mean": _cell_json(bucket_report.winner_odds, digits),
                "winner_segment_mean_theory": _cell_json(bucket_report.winner_segment, digits),
            },
        }
        for row in bucket_report.rows:
            entry["ranks"].append(
                {
                    "rank": row.label,
                    "statistics": {
                        statistic: _cell_json(getattr(row, attr), digits)
                        for attr, statistic in _ROW_STATISTICS
                    },
                }
            )
        payload["buckets"].append(entry)
    return json.dumps(payload, indent=2) + "\n"


def _cell_json(cell: Cell, digits: int) -> dict:
    return {
        "value": _rounded(cell.value, digits),
        "se": _rounded(cell.se, digits),
        "count": cell.count,
        "note": cell.note,
    }


def cells_from_json(payload: dict) -> dict[tuple[str, str, str], Cell]:
    """Rebuild the {(bucket, rank, statistic): Cell} map from a JSON report."""
    cells: dict[tuple[str, str, str], Cell] = {}
    for bucket in payload["buckets"]:
        name = bucket["name"]
        for row in bucket["ranks"]:
            for statistic, raw in row["statistics"].items():
                cells[(name, row["rank"], statistic)] = Cell(
                    raw["value"], raw["se"], raw["count"], raw.get("note", "")
                )
        for statistic, raw in bucket["winner"].items():
            cells[(name, "winner", statistic)] = Cell(
                raw["value"], raw["se"], raw["count"], raw.get("note", "")
            )
    return cells


def curve_to_csv_text(curve: EccdfCurve, digits: int = 10) -> str:
    """Two-column CSV (x, survival) ready for external plotting."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["x", "survival"])
    for x, s in zip(curve.x, curve.survival):
        writer.writerow([f"{x:.{digits}g}", f"{s:.{digits}g}"])
    return out.getvalue()
