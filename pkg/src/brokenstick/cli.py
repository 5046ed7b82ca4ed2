"""Command-line front end.

Subcommands:
  theory    closed-form segment statistics for one field size or a histogram
  simulate  Monte Carlo estimates beside closed forms, gaps in SE units
  synth     generate a synthetic race CSV with known ground truth
  analyze   full report (tables, winner average, survival curves) from a CSV
  compare   cell-by-cell diff of two report JSON files in SE units

Exit codes: 0 success, 1 validation or usage error, 2 tolerance breach in
``simulate``/``compare``.  ``--seed`` and ``--samples`` fall back to the
BROKENSTICK_SEED and BROKENSTICK_SAMPLES environment variables.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis, montecarlo, orderstats, racedata, synth

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_TOLERANCE = 2

ENV_SEED = "BROKENSTICK_SEED"
ENV_SAMPLES = "BROKENSTICK_SAMPLES"

DEFAULT_SAMPLES = 100_000

_STAT_CHOICES = ("mean", "second-moment", "cond-mean", "winner-mean", "ccdf")

_CLOSED_FORMS = {
    "mean": orderstats.mean_kth_largest,
    "second-moment": orderstats.second_moment_kth_largest,
    "cond-mean": orderstats.conditional_mean_given_win,
}
_MIXTURE_KEYS = {
    "mean": "mean",
    "second-moment": "second_moment",
    "cond-mean": "conditional_mean_given_win",
    "winner-mean": "winner_segment_mean",
}


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _env_int(name: str, fallback: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    try:
        return int(raw)
    except ValueError as exc:
        raise ValueError(f"environment variable {name}={raw!r} is not an integer") from exc


def _parse_selector(text: str):
    if text == "longshot":
        return "longshot"
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"rank must be an integer or 'longshot', got {text!r}")
    if k < 1:
        raise argparse.ArgumentTypeError("rank must be >= 1")
    return k


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated floats, got {text!r}")


def _load_histogram(path) -> orderstats.FieldSizeHistogram:
    counts: dict[int, int] = {}
    with open(path, "r", encoding="utf-8-sig", newline="") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            if row[0].strip().lower() == "n":
                continue  # header
            if len(row) < 2:
                raise ValueError(f"histogram rows need 'n,count', got {row!r}")
            n = int(row[0])
            counts[n] = counts.get(n, 0) + int(row[1])
    if not counts:
        raise ValueError(f"histogram file {path} holds no counts")
    return orderstats.FieldSizeHistogram(counts)


def _fmt(value, digits: int) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    return str(value)


def _emit_rows(rows: list[dict], columns: list[str], args) -> None:
    digits = args.digits
    if args.format == "json":
        rounded = [
            {c: (float(_fmt(r.get(c), digits)) if isinstance(r.get(c), float) else r.get(c)) for c in columns}
            for r in rows
        ]
        text = json.dumps(rounded, indent=2) + "\n"
    elif args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for r in rows:
            writer.writerow([_fmt(r.get(c), digits) for c in columns])
        text = buf.getvalue()
    else:
        rendered = [[_fmt(r.get(c), digits) for c in columns] for r in rows]
        widths = [max(len(col), *(len(row[i]) for row in rendered)) for i, col in enumerate(columns)]
        lines = ["  ".join(col.ljust(widths[i]) for i, col in enumerate(columns))]
        for row in rendered:
            lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
        text = "\n".join(lines) + "\n"
    _write_output(text, args.output)


def _write_output(text: str, output) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# --- theory ----------------------------------------------------------------


def cmd_theory(args) -> int:
    hist = _load_histogram(args.hist) if args.hist else None
    rows: list[dict] = []

    if args.stat == "winner-mean":
        if hist is not None:
            value = orderstats.mixture(hist, "winner_segment_mean")
            rows.append({"n": "mixture", "k": "", "statistic": args.stat, "value": value})
        else:
            rows.append(
                {"n": args.n, "k": "", "statistic": args.stat,
                 "value": orderstats.winner_segment_mean(args.n)}
            )
    elif args.stat == "ccdf":
        if hist is not None:
            if not args.x:
                raise ValueError("ccdf over a histogram needs explicit --x points")
            if args.k is None:
                raise ValueError("ccdf needs a rank: pass --k")
            for x in args.x:
                rows.append(
                    {"n": "mixture", "k": args.k, "statistic": "ccdf", "x": x,
                     "value": orderstats.mixture(hist, "ccdf", k=args.k, x=x)}
                )
        else:
            if args.k is None or args.k == "longshot":
                raise ValueError("ccdf for a single field size needs an integer --k")
            xs = args.x or [
                orderstats.ccdf_inverse(args.n, args.k, (i + 0.5) / args.grid)
                for i in range(args.grid)
            ]
            for x in sorted(xs):
                rows.append(
                    {"n": args.n, "k": args.k, "statistic": "ccdf", "x": x,
                     "value": orderstats.ccdf_kth_largest(args.n, args.k, x)}
                )
    else:
        if hist is not None:
            if args.k is None:
                raise ValueError(f"statistic {args.stat!r} over a histogram needs --k")
            value = orderstats.mixture(hist, _MIXTURE_KEYS[args.stat], k=args.k)
            rows.append({"n": "mixture", "k": args.k, "statistic": args.stat, "value": value})
        else:
            fn = _CLOSED_FORMS[args.stat]
            ks = [args.k] if args.k is not None else list(range(1, args.n + 1))
            for k in ks:
                rank = args.n if k == "longshot" else k
                rows.append(
                    {"n": args.n, "k": k, "statistic": args.stat, "value": fn(args.n, rank)}
                )

    columns = ["n", "k", "statistic", "x", "value"] if args.stat == "ccdf" else ["n", "k", "statistic", "value"]
    if len(rows) == 1 and args.format == "text" and not args.output:
        sys.stdout.write(_fmt(rows[0]["value"], args.digits) + "\n")
    else:
        _emit_rows(rows, columns, args)
    return EXIT_OK


# --- simulate ----------------------------------------------------------------


def cmd_simulate(args) -> int:
    samples = args.samples if args.samples is not None else _env_int(ENV_SAMPLES, DEFAULT_SAMPLES)
    seed = args.seed if args.seed is not None else _env_int(ENV_SEED, 0)
    config = montecarlo.SimConfig(
        samples=samples, seed=seed, construction=args.construction, chunk_size=args.chunk_size
    )
    n = args.n
    if args.k == "longshot":
        args.k = n
    rows: list[dict] = []

    def add(statistic, k, x, estimate, se, exact):
        gap = abs(estimate - exact)
        gap_se = 0.0 if gap == 0.0 else (gap / se if se > 0 else float("inf"))
        rows.append(
            {"statistic": statistic, "n": n, "k": k, "x": x, "estimate": estimate,
             "se": se, "exact": exact, "gap_se": gap_se}
        )

    if args.stat in ("mean", "second-moment"):
        if args.k is None or args.k == "longshot":
            raise ValueError(f"statistic {args.stat!r} needs an integer --k")
        est = (
            montecarlo.estimate_mean(n, args.k, config, args.workers)
            if args.stat == "mean"
            else montecarlo.estimate_second_moment(n, args.k, config, args.workers)
        )
        add(args.stat, args.k, None, est.value, est.se, _CLOSED_FORMS[args.stat](n, args.k))
    elif args.stat == "cond-mean":
        if args.k is None or args.k == "longshot":
            raise ValueError("statistic 'cond-mean' needs an integer --k")
        stats = montecarlo.estimate_winner_stats(n, config, args.workers)
        value = float(stats.conditional_mean[args.k - 1])
        se = float(stats.conditional_se[args.k - 1])
        if np.isnan(value):
            raise ValueError(f"rank {args.k} never won in {samples} races; raise --samples")
        add("cond-mean", args.k, None, value, se, orderstats.conditional_mean_given_win(n, args.k))
    elif args.stat == "winner-mean":
        stats = montecarlo.estimate_winner_stats(n, config, args.workers)
        add("winner-mean", None, None, stats.winner_mean.value, stats.winner_mean.se,
            orderstats.winner_segment_mean(n))
    else:  # ccdf
        if args.k is None or args.k == "longshot":
            raise ValueError("statistic 'ccdf' needs an integer --k")
        xs = args.x or [
            orderstats.ccdf_inverse(n, args.k, (i + 0.5) / args.grid) for i in range(args.grid)
        ]
        xs = sorted(xs)
        estimates, ses = montecarlo.estimate_ccdf(n, args.k, xs, config, args.workers)
        for x, est, se in zip(xs, estimates, ses):
            add("ccdf", args.k, x, float(est), float(se), orderstats.ccdf_kth_largest(n, args.k, x))

    columns = ["statistic", "n", "k", "x", "estimate", "se", "exact", "gap_se"]
    _emit_rows(rows, columns, args)
    worst = max(r["gap_se"] for r in rows)
    if worst > args.max_se:
        sys.stderr.write(f"tolerance breach: worst gap {worst:.2f} SE exceeds {args.max_se}\n")
        return EXIT_TOLERANCE
    return EXIT_OK


# --- synth -------------------------------------------------------------------


def _field_size_law(args) -> orderstats.FieldSizeHistogram:
    picked = [v for v in (args.n_fixed, args.hist, args.n_min or args.n_max) if v]
    if len(picked) != 1:
        raise ValueError("choose exactly one of --n-fixed, --n-min/--n-max, or --hist")
    if args.n_fixed:
        return orderstats.FieldSizeHistogram({args.n_fixed: 1})
    if args.hist:
        return _load_histogram(args.hist)
    if not (args.n_min and args.n_max):
        raise ValueError("--n-min and --n-max must be given together")
    if args.n_max < args.n_min:
        raise ValueError("--n-max must be >= --n-min")
    return orderstats.FieldSizeHistogram({n: 1 for n in range(args.n_min, args.n_max + 1)})


def cmd_synth(args) -> int:
    seed = args.seed if args.seed is not None else _env_int(ENV_SEED, 0)
    config = synth.SyntheticDatasetConfig(
        race_count=args.races,
        field_sizes=_field_size_law(args),
        seed=seed,
        odds_noise=args.odds_noise,
        construction=args.construction,
    )
    records = synth.generate_synthetic_dataset(config)
    racedata.write_races_csv(records, args.output)
    histogram = orderstats.FieldSizeHistogram.from_sizes(r.field_size for r in records)
    total_rows = sum(r.field_size for r in records)
    print(f"wrote {len(records)} races ({total_rows} rows) to {args.output}")
    print("field sizes: " + ", ".join(f"{n}:{c}" for n, c in sorted(histogram.counts.items())))
    return EXIT_OK


# --- analyze -----------------------------------------------------------------


def _rejections_csv(rejections) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["race_id", "reason", "line"])
    for r in rejections:
        writer.writerow([r.race_id or "", r.reason, "" if r.line is None else r.line])
    return buf.getvalue()


def cmd_analyze(args) -> int:
    records, rejections = racedata.parse_races(args.input, overround_delta=args.overround_delta)
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "rejections.csv").write_text(_rejections_csv(rejections), encoding="utf-8")
    if not records:
        sys.stderr.write(f"no valid races in {args.input} ({len(rejections)} rejected)\n")
        return EXIT_USAGE

    races = racedata.rank_races(records, renormalize=args.renormalize)
    report = analysis.build_report(
        races,
        min_field_size=args.min_field_size,
        renormalized=args.renormalize,
        theory_field_size=args.n_fixed,
    )
    (outdir / "report.csv").write_text(
        analysis.report_to_csv_text(report, args.digits), encoding="utf-8"
    )
    (outdir / "report.json").write_text(
        analysis.report_to_json_text(report, args.digits), encoding="utf-8"
    )

    kept = [r for r in races if r.field_size >= args.min_field_size]
    for selector in args.eccdf_ranks:
        label = analysis.selector_label(selector)
        empirical, theory = analysis.eccdf_per_rank(
            kept, selector, theory_field_size=args.n_fixed
        )
        (outdir / f"eccdf_rank{label}_empirical.csv").write_text(
            analysis.curve_to_csv_text(empirical), encoding="utf-8"
        )
        (outdir / f"eccdf_rank{label}_theory.csv").write_text(
            analysis.curve_to_csv_text(theory), encoding="utf-8"
        )

    accepted = len(records)
    print(f"accepted {accepted} races, rejected {len(rejections)}; reports in {outdir}")
    for bucket_report in report.buckets:
        print(f"  bucket {bucket_report.bucket.name}: {bucket_report.races} races")
    return EXIT_OK


# --- compare -----------------------------------------------------------------


def cmd_compare(args) -> int:
    cells_a = analysis.cells_from_json(json.loads(Path(args.report_a).read_text(encoding="utf-8")))
    cells_b = analysis.cells_from_json(json.loads(Path(args.report_b).read_text(encoding="utf-8")))
    missing_b = sorted(set(cells_a) - set(cells_b))
    missing_a = sorted(set(cells_b) - set(cells_a))
    if missing_a or missing_b:
        for key in missing_b:
            sys.stderr.write(f"missing in {args.report_b}: {'/'.join(key)}\n")
        for key in missing_a:
            sys.stderr.write(f"missing in {args.report_a}: {'/'.join(key)}\n")
        return EXIT_USAGE

    rows = []
    for key in cells_a:
        a, b = cells_a[key], cells_b[key]
        if a.value is None and b.value is None:
            diff, gap_se = 0.0, 0.0
        elif a.value is None or b.value is None:
            diff, gap_se = float("nan"), float("inf")
        else:
            diff = abs(a.value - b.value)
            combined = ((a.se or 0.0) ** 2 + (b.se or 0.0) ** 2) ** 0.5
            gap_se = 0.0 if diff == 0.0 else (diff / combined if combined > 0 else float("inf"))
        bucket, rank, statistic = key
        rows.append(
            {"bucket": bucket, "rank": rank, "statistic": statistic,
             "a": a.value, "b": b.value, "diff": diff, "gap_se": gap_se}
        )
    rows.sort(key=lambda r: (-r["gap_se"], r["bucket"], r["rank"], r["statistic"]))
    columns = ["bucket", "rank", "statistic", "a", "b", "diff", "gap_se"]
    _emit_rows(rows, columns, args)
    worst = max((r["gap_se"] for r in rows), default=0.0)
    if worst > args.threshold:
        sys.stderr.write(f"tolerance breach: worst gap {worst} SE exceeds {args.threshold}\n")
        return EXIT_TOLERANCE
    return EXIT_OK


# --- parser ------------------------------------------------------------------


def _add_output_flags(parser) -> None:
    parser.add_argument("--format", choices=("text", "csv", "json"), default="text")
    parser.add_argument("--digits", type=int, default=6, help="significant digits in output")
    parser.add_argument("--output", help="write to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="brokenstick", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("theory", help="closed-form segment statistics")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--n", type=int, help="field size")
    group.add_argument("--hist", help="field-size histogram CSV (n,count) for mixtures")
    p.add_argument("--k", type=_parse_selector, help="rank (1=favourite) or 'longshot'")
    p.add_argument("--stat", choices=_STAT_CHOICES, required=True)
    p.add_argument("--x", type=_parse_floats, help="comma-separated ccdf evaluation points")
    p.add_argument("--grid", type=int, default=20, help="quantile grid size for ccdf")
    _add_output_flags(p)
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("simulate", help="Monte Carlo vs closed form")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=_parse_selector)
    p.add_argument("--stat", choices=_STAT_CHOICES, required=True)
    p.add_argument("--samples", type=int, help=f"default ${ENV_SAMPLES} or {DEFAULT_SAMPLES}")
    p.add_argument("--seed", type=int, help=f"default ${ENV_SEED} or 0")
    p.add_argument("--construction", choices=montecarlo.CONSTRUCTIONS, default="uniform-cuts")
    p.add_argument("--chunk-size", type=int, default=100_000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--x", type=_parse_floats, help="ccdf evaluation points")
    p.add_argument("--grid", type=int, default=20)
    p.add_argument("--max-se", type=float, default=5.0, help="exit 2 if any gap exceeds this")
    _add_output_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("synth", help="generate a synthetic race CSV")
    p.add_argument("--races", type=int, required=True)
    p.add_argument("--n-fixed", type=int, help="every race has this field size")
    p.add_argument("--n-min", type=int, help="uniform field sizes from here")
    p.add_argument("--n-max", type=int, help="uniform field sizes up to here")
    p.add_argument("--hist", help="draw field sizes from this histogram CSV")
    p.add_argument("--seed", type=int, help=f"default ${ENV_SEED} or 0")
    p.add_argument("--odds-noise", type=float, default=0.0,
                   help="log-normal sigma blurring quoted odds (0 = efficient market)")
    p.add_argument("--construction", choices=montecarlo.CONSTRUCTIONS, default="uniform-cuts")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("analyze", help="analyze a race CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--output-dir", default=".")
    p.add_argument("--min-field-size", type=int, default=5)
    p.add_argument("--overround-delta", type=float, default=racedata.DEFAULT_OVERROUND_DELTA,
                   help="accept races with implied-odds sum within 1 +/- delta")
    p.add_argument("--renormalize", action="store_true",
                   help="divide implied odds by their sum before ranking")
    p.add_argument("--digits", type=int, default=6)
    p.add_argument("--eccdf-ranks", type=lambda t: [_parse_selector(s) for s in t.split(",")],
                   default=[1, 2, 3, 4, "longshot"])
    p.add_argument("--n-fixed", type=int,
                   help="compute theory columns for this fixed field size instead of "
                        "the input's own histogram")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("compare", help="diff two report JSON files")
    p.add_argument("report_a")
    p.add_argument("report_b")
    p.add_argument("--threshold", type=float, default=5.0, help="exit 2 above this many SE")
    _add_output_flags(p)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
