"""Order statistics of a randomly divided unit interval, with Monte Carlo
oracles and a betting-market analysis pipeline built on top of them."""

from .analysis import (
    AnalysisReport,
    BucketReport,
    Cell,
    RankRow,
    build_report,
    conditional_table,
    eccdf_per_rank,
    empirical_table,
    winner_odds_average,
)
from .montecarlo import (
    CONSTRUCTIONS,
    McEstimate,
    SimConfig,
    WinnerStats,
    estimate_ccdf,
    estimate_mean,
    estimate_second_moment,
    estimate_winner_stats,
    sample_division_exponential,
    sample_division_uniform,
    sample_race,
)
from .orderstats import (
    FieldSizeHistogram,
    SegmentLaw,
    ccdf_inverse,
    ccdf_kth_largest,
    conditional_mean_given_win,
    mean_kth_largest,
    mixture,
    mixture_ccdf,
    partial_harmonic,
    pooled_conditional_mean_given_win,
    second_moment_kth_largest,
    winner_segment_mean,
)
from .racedata import (
    BucketSpec,
    FieldSizeBucket,
    RaceEntry,
    RaceRecord,
    RankedRace,
    Rejection,
    field_size_histogram,
    parse_races,
    rank_race,
    rank_races,
    write_races_csv,
)
from .stats import EccdfCurve, eccdf, ks_critical_value, ks_statistic_two_sample
from .synth import SyntheticDatasetConfig, generate_synthetic_dataset

__version__ = "0.1.0"
