"""Benchmark figures from a published study of Betfair horse-race markets.

The study analyzed 12,736 races across the British Isles (Dec 2011 to
Dec 2012; mean field size 8.95), keeping the 11,925 races with at least
five horses.  Its raw dataset is not distributed here, so these numbers are
documentation fixtures for eyeballing report output against the published
tables, not executable oracles.  ``reference_field_size_histogram`` is a
plausible field-size distribution matching the published mean exactly; the
mixture of 2/(n+1) over it lands within a hair of the published 0.2107.

Each table maps rank selector -> column, where ``q`` is the mean implied
odds E[Q_(k)], ``p`` the observed win frequency E[P_(k)], and ``z`` the
parameter-free segment-length prediction E[z_(k)].
"""

from __future__ import annotations

from .orderstats import FieldSizeHistogram

__all__ = [
    "MEAN_FIELD_SIZE",
    "RACES_TOTAL",
    "RACES_WITH_5_PLUS",
    "TABLE_MAIN",
    "TABLE_CONDITIONAL",
    "WINNER_ODDS",
    "reference_field_size_histogram",
]

MEAN_FIELD_SIZE = 8.95
RACES_TOTAL = 12_736
RACES_WITH_5_PLUS = 11_925

TABLE_MAIN = {
    "all": {
        1: {"q": 0.3208, "p": 0.3358, "z": 0.3237},
        2: {"q": 0.2001, "p": 0.1976, "z": 0.2046},
        3: {"q": 0.1420, "p": 0.1345, "z": 0.1451},
        4: {"q": 0.1037, "p": 0.0998, "z": 0.1054},
        "longshot": {"q": 0.0210, "p": 0.0253, "z": 0.0157},
    },
    "small": {
        1: {"q": 0.3996, "p": 0.4165, "z": 0.4081},
        2: {"q": 0.2399, "p": 0.2276, "z": 0.2407},
        3: {"q": 0.1578, "p": 0.1503, "z": 0.1570},
        4: {"q": 0.1024, "p": 0.0981, "z": 0.1012},
        "longshot": {"q": 0.0336, "p": 0.0339, "z": 0.0285},
    },
    "medium": {
        1: {"q": 0.3184, "p": 0.3327, "z": 0.3166},
        2: {"q": 0.1985, "p": 0.2081, "z": 0.2041},
        3: {"q": 0.1438, "p": 0.1362, "z": 0.1478},
        4: {"q": 0.1078, "p": 0.1031, "z": 0.1103},
        "longshot": {"q": 0.0182, "p": 0.0233, "z": 0.0128},
    },
    "large": {
        1: {"q": 0.2470, "p": 0.2614, "z": 0.2500},
        2: {"q": 0.1631, "p": 0.1564, "z": 0.1703},
        3: {"q": 0.1247, "p": 0.1172, "z": 0.1305},
        4: {"q": 0.1004, "p": 0.0977, "z": 0.1039},
        "longshot": {"q": 0.0119, "p": 0.0193, "z": 0.0065},
    },
}

# Implied odds given that the horse won, all races with n >= 5.
TABLE_CONDITIONAL = {
    1: {"q_win": 0.3735, "z_win": 0.3622},
    2: {"q_win": 0.2148, "z_win": 0.2196},
    3: {"q_win": 0.1542, "z_win": 0.1549},
    4: {"q_win": 0.1139, "z_win": 0.1145},
    "longshot": {"q_win": 0.0886, "z_win": 0.0383},
}

WINNER_ODDS = {"empirical": 0.2148, "theory": 0.2107}

# Plausible field-size counts over 5..14 with mean exactly 8.95 = 17900/2000
# and variance close to what the published winner-odds figure implies.
_REFERENCE_COUNTS = {
    5: 150,
    6: 130,
    7: 250,
    8: 330,
    9: 350,
    10: 300,
    11: 210,
    12: 150,
    13: 100,
    14: 30,
}


def reference_field_size_histogram() -> FieldSizeHistogram:
    """Field-size histogram with mean field size exactly 8.95."""
    return FieldSizeHistogram(_REFERENCE_COUNTS)
